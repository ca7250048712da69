#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reynet/kernels.hpp"
#include "reynet/mlp.hpp"
#include "reynet/network.hpp"

namespace reynet {

struct CheckResult {
  std::string suite;
  std::string name;
  double gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool pass() const;
  std::size_t failures() const;
};

/// bijection, normalize, equivariance, design, orbitsum, gradcheck,
/// decomposition, powersum, count.
const std::vector<std::string>& verify_suites();

inline constexpr int kVerifyMaxN = 8;
inline constexpr int kCountMaxN = 64;

/// Runs one suite or "all". max_n must be in [2, 8] (count alone accepts up to 64).
VerifyReport run_verify(const std::string& suite, int max_n, std::uint64_t seed = 0);

void print_report(std::ostream& out, const VerifyReport& report);
/// suite,check,gap,tolerance,pass
void write_report_csv(std::ostream& out, const VerifyReport& report);

/// Largest relative error |a - f| / max(|a|, |f|, floor) between the analytic
/// gradient of loss_and_grad and central differences with step h, over every parameter.
double gradcheck_network(const Network& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, LossKind loss,
                         Exec exec, double h = 1e-5, double floor = 1e-3);

}  // namespace reynet
