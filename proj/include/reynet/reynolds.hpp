#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "reynet/dense_tensor.hpp"
#include "reynet/group.hpp"

namespace reynet {

struct TensorShape {
  int n = 1;
  int order = 0;
  int channels = 1;

  bool matches(const DenseTensor& t) const noexcept {
    return t.n() == n && t.order() == order && t.channels() == channels;
  }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

/// A deterministic map between tensor spaces on which S_n acts.
/// An output of order 0 is a plain vector (trivial action).
struct VectorFunction {
  TensorShape input;
  TensorShape output;
  std::function<DenseTensor(const DenseTensor&)> eval;

  DenseTensor operator()(const DenseTensor& x) const;
};

/// (1/|S_n|) Σ_g g^-1·f(g·x), summed in lexicographic g order. n <= 8.
DenseTensor tau_full(const VectorFunction& f, const DenseTensor& x);

/// (1/|S_n|) Σ_g f(g·x), flattened output. n <= 8.
std::vector<double> gamma_full(const VectorFunction& f, const DenseTensor& x);

/// Reductive operators: the same averages over an arbitrary subset H.
DenseTensor tau_design(const VectorFunction& f, const DenseTensor& x, std::span<const Permutation> subset);
std::vector<double> gamma_design(const VectorFunction& f, const DenseTensor& x, std::span<const Permutation> subset);

inline DenseTensor tau_design(const VectorFunction& f, const DenseTensor& x, const DesignHD& h) {
  return tau_design(f, x, h.elements);
}
inline std::vector<double> gamma_design(const VectorFunction& f, const DenseTensor& x, const DesignHD& h) {
  return gamma_design(f, x, h.elements);
}

struct DesignReport {
  double max_abs_gap = 0.0;
  bool pass = true;
  int trials = 0;
};

/// max over random inputs of ‖τ_{S_n}(f) − τ_H(f)‖∞; pass iff the gap is <= tolerance.
DesignReport verify_design(const VectorFunction& f, const DesignHD& design, int trials, std::uint64_t seed,
                           double tolerance = 1e-9);

/// Sparse polynomial: Σ coefficient · Π_k x_k^{exponents[k]}.
struct Monomial {
  double coefficient = 1.0;
  std::vector<int> exponents;
};

struct Polynomial {
  int variables = 0;
  std::vector<Monomial> terms;

  double evaluate(std::span<const double> x) const;
  static Polynomial monomial(std::vector<int> exponents, double coefficient = 1.0);
};

/// Polynomials h_1..h_s in d variables, read at coordinates j_1..j_d (1-based) of a vector in R^n.
struct GeneratorSet {
  int d = 0;
  std::vector<int> indices;
  std::vector<Polynomial> generators;

  int s() const noexcept { return static_cast<int>(generators.size()); }

  /// x ↦ h_i(x_{j_1}, ..., x_{j_d}) on R^n, as a scalar-valued function.
  VectorFunction as_function(int i, int n) const;

  /// r_i(x) = γ_H(h_i)(x).
  double invariant(int i, const DenseTensor& x, const DesignHD& design) const;
};

/// h_i = x_1^i for i = 1..n, read at j = (1); realized over H_1 = C_n.
GeneratorSet power_sum_generators(int n);

/// max |γ_{S_n}(p) − γ_{H_d}(γ_{Stab([d])}(p))| over random points in [-1, 1]^n. n <= 7.
double decomposition_gap(int n, int d, const Polynomial& p, int trials = 4, std::uint64_t seed = 0);

/// decomposition_gap <= 1e-12.
bool gamma_decompose_check(int n, int d, const Polynomial& p, int trials = 4, std::uint64_t seed = 0);

}  // namespace reynet
