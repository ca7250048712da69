#include "reynet/reynolds.hpp"

#include <cmath>
#include <string>

#include "reynet/error.hpp"
#include "reynet/rng.hpp"

namespace reynet {

DenseTensor VectorFunction::operator()(const DenseTensor& x) const {
  if (!input.matches(x)) throw ShapeError("function input has the wrong shape");
  DenseTensor y = eval(x);
  if (!output.matches(y)) throw ShapeError("function produced an output of the wrong shape");
  return y;
}

namespace {

void require_brute_force(int n) {
  if (n > kMaxBruteForceN)
    throw ComplexityError("full-group Reynolds operator refused for n = " + std::to_string(n) + " (limit " +
                          std::to_string(kMaxBruteForceN) + ")");
}

void check_action(const VectorFunction& f, const DenseTensor& x) {
  if (!f.input.matches(x)) throw ShapeError("Reynolds operator: input shape mismatch");
  if (f.output.order > 0 && f.output.n != f.input.n)
    throw ShapeError("Reynolds operator: input and output carry different n");
}

}  // namespace

DenseTensor tau_design(const VectorFunction& f, const DenseTensor& x, std::span<const Permutation> subset) {
  check_action(f, x);
  DenseTensor acc(f.output.n, f.output.order, f.output.channels);
  if (subset.empty()) return acc;
  for (const auto& g : subset) {
    const DenseTensor y = f(act_tensor(g, x));
    const DenseTensor back = f.output.order > 0 ? act_tensor(invert(g), y) : y;
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += back[k];
  }
  const double scale = 1.0 / static_cast<double>(subset.size());
  for (double& v : acc.data()) v *= scale;
  return acc;
}

std::vector<double> gamma_design(const VectorFunction& f, const DenseTensor& x, std::span<const Permutation> subset) {
  check_action(f, x);
  std::vector<double> acc(int_pow(f.output.n, f.output.order) * static_cast<std::size_t>(f.output.channels), 0.0);
  if (subset.empty()) return acc;
  for (const auto& g : subset) {
    const DenseTensor y = f(act_tensor(g, x));
    for (std::size_t k = 0; k < y.size(); ++k) acc[k] += y[k];
  }
  const double scale = 1.0 / static_cast<double>(subset.size());
  for (double& v : acc) v *= scale;
  return acc;
}

DenseTensor tau_full(const VectorFunction& f, const DenseTensor& x) {
  require_brute_force(x.n());
  return tau_design(f, x, enumerate_symmetric(x.n()));
}

std::vector<double> gamma_full(const VectorFunction& f, const DenseTensor& x) {
  require_brute_force(x.n());
  return gamma_design(f, x, enumerate_symmetric(x.n()));
}

DesignReport verify_design(const VectorFunction& f, const DesignHD& design, int trials, std::uint64_t seed,
                           double tolerance) {
  require_brute_force(design.n);
  if (f.input.n != design.n) throw ShapeError("verify_design: design and function act on different n");
  DesignReport report{0.0, true, trials};
  const auto group = enumerate_symmetric(design.n);
  CounterRng rng(seed);
  for (int t = 0; t < trials; ++t) {
    DenseTensor x(f.input.n, f.input.order, f.input.channels);
    for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
    const DenseTensor full = tau_design(f, x, group);
    const DenseTensor reduced = tau_design(f, x, design);
    report.max_abs_gap = std::max(report.max_abs_gap, max_abs_diff(full, reduced));
  }
  report.pass = report.max_abs_gap <= tolerance;
  return report;
}

double Polynomial::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != variables) throw ShapeError("polynomial evaluated at a point of the wrong dimension");
  double total = 0.0;
  for (const auto& term : terms) {
    double v = term.coefficient;
    for (std::size_t k = 0; k < term.exponents.size(); ++k)
      for (int e = 0; e < term.exponents[k]; ++e) v *= x[k];
    total += v;
  }
  return total;
}

Polynomial Polynomial::monomial(std::vector<int> exponents, double coefficient) {
  Polynomial p;
  p.variables = static_cast<int>(exponents.size());
  p.terms.push_back({coefficient, std::move(exponents)});
  return p;
}

VectorFunction GeneratorSet::as_function(int i, int n) const {
  if (i < 1 || i > s()) throw DomainError("generator index out of range");
  for (int j : indices)
    if (j < 1 || j > n) throw DomainError("generator reads a coordinate outside [1, n]");
  const Polynomial h = generators[static_cast<std::size_t>(i - 1)];
  const std::vector<int> idx = indices;
  return VectorFunction{{n, 1, 1}, {n, 0, 1}, [h, idx](const DenseTensor& x) {
                          std::vector<double> vars;
                          for (int j : idx) vars.push_back(x[static_cast<std::size_t>(j - 1)]);
                          return DenseTensor(x.n(), 0, 1, {h.evaluate(vars)});
                        }};
}

double GeneratorSet::invariant(int i, const DenseTensor& x, const DesignHD& design) const {
  return gamma_design(as_function(i, x.n()), x, design).front();
}

GeneratorSet power_sum_generators(int n) {
  if (n < 1) throw DomainError("power_sum_generators: n must be positive");
  GeneratorSet set{1, {1}, {}};
  for (int i = 1; i <= n; ++i) set.generators.push_back(Polynomial::monomial({i}));
  return set;
}

double decomposition_gap(int n, int d, const Polynomial& p, int trials, std::uint64_t seed) {
  if (n > 7) throw ComplexityError("decomposition check limited to n <= 7");
  if (d < 1 || d > n) throw DomainError("decomposition check needs 1 <= d <= n");
  if (p.variables != n) throw ShapeError("polynomial must be in n variables");
  const VectorFunction f{{n, 1, 1}, {n, 0, 1}, [&p](const DenseTensor& x) {
                           return DenseTensor(x.n(), 0, 1, {p.evaluate(x.data())});
                         }};
  const auto stab = enumerate_stabilizer(n, d);
  const DesignHD design = enumerate_design(n, d);
  const VectorFunction stab_avg{{n, 1, 1}, {n, 0, 1}, [&](const DenseTensor& y) {
                                  return DenseTensor(y.n(), 0, 1, gamma_design(f, y, stab));
                                }};
  CounterRng rng(seed);
  double gap = 0.0;
  for (int t = 0; t < trials; ++t) {
    DenseTensor x(n, 1, 1);
    for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
    const double lhs = gamma_full(f, x).front();
    const double rhs = gamma_design(stab_avg, x, design).front();
    gap = std::max(gap, std::abs(lhs - rhs));
  }
  return gap;
}

bool gamma_decompose_check(int n, int d, const Polynomial& p, int trials, std::uint64_t seed) {
  return decomposition_gap(n, d, p, trials, seed) <= 1e-12;
}

}  // namespace reynet
