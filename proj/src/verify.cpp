#include "reynet/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <ostream>

#include "reynet/error.hpp"
#include "reynet/group.hpp"
#include "reynet/reynolds.hpp"
#include "reynet/rng.hpp"
#include "reynet/tableau.hpp"
#include "reynet/tensor.hpp"

namespace reynet {

bool VerifyReport::pass() const { return failures() == 0; }

std::size_t VerifyReport::failures() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.pass; }));
}

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names{"bijection", "normalize",     "equivariance", "design",  "orbitsum",
                                              "gradcheck", "decomposition", "powersum",     "count"};
  return names;
}

namespace {

using Checks = std::vector<CheckResult>;

void add(Checks& out, const std::string& suite, const std::string& name, double gap, double tol) {
  out.push_back({suite, name, gap, tol, gap <= tol});
}

std::string label(const char* fmt, int a, int b = 0, int c = 0) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

DenseTensor random_tensor(CounterRng& rng, int n, int order, int channels) {
  DenseTensor t(n, order, channels);
  for (auto& v : t.storage()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// All index tuples of [n]^m, 1-based.
std::vector<std::vector<int>> all_tuples(int n, int m) {
  std::vector<std::vector<int>> out;
  const std::size_t total = int_pow(n, m);
  for (std::size_t pos = 0; pos < total; ++pos) out.push_back(unflatten(pos, n, m));
  return out;
}

VectorFunction mlp_function(int n, int in_order, int out_order, std::uint64_t seed) {
  const TensorShape in{n, in_order, 1};
  const TensorShape out{n, out_order, 1};
  auto p = init_params(seed, {static_cast<int>(int_pow(n, in_order)), 8, static_cast<int>(int_pow(n, out_order))});
  return {in, out, [p, out](const DenseTensor& x) {
            return DenseTensor(out.n, out.order, out.channels, mlp_forward(p, x.data()));
          }};
}

std::vector<Permutation> sample_group(int n, std::size_t count, CounterRng& rng) {
  if (n <= 5) return enumerate_symmetric(n);
  std::vector<Permutation> out;
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<int> img(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) img[static_cast<std::size_t>(i)] = i + 1;
    for (std::size_t i = img.size() - 1; i > 0; --i) std::swap(img[i], img[rng.below(i + 1)]);
    out.emplace_back(img);
  }
  return out;
}

void suite_bijection(Checks& out, int max_n) {
  for (int m = 1; m <= 3; ++m)
    for (int n = 1; n <= max_n; ++n) {
      double bad = 0;
      for (const auto& u : all_tuples(n, m)) {
        const auto ext = psi(u, n);
        if (!ext.valid() || phi(ext) != u || psi(phi(ext), n).labels != ext.labels) ++bad;
      }
      add(out, "bijection", label("n=%d m=%d", n, m), bad, 0.0);
    }
}

void suite_normalize(Checks& out, int max_n) {
  for (int n = 1; n <= max_n; ++n)
    for (int depth = 1; depth <= std::min(3, n); ++depth) {
      const auto design = enumerate_design(n, depth);
      double bad = 0;
      for (const auto& j : all_tuples(n, depth)) {
        if (std::set<int>(j.begin(), j.end()).size() != j.size()) continue;
        std::size_t hits = 0;
        const Permutation* found = nullptr;
        for (const auto& g : design.elements) {
          bool ok = true;
          for (int d = 0; d < depth && ok; ++d) ok = g(j[static_cast<std::size_t>(d)]) == d + 1;
          if (ok) {
            ++hits;
            found = &g;
          }
        }
        if (hits != 1 || normalize(j, n) != *found) ++bad;
      }
      add(out, "normalize", label("n=%d D=%d", n, depth), bad, 0.0);
    }
}

void suite_equivariance(Checks& out, int max_n, std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split(11);
  for (int n = 2; n <= std::min(max_n, 4); ++n)
    for (int l = 1; l <= 2; ++l)
      for (int m = 1; m <= 2; ++m) {
        const auto f = mlp_function(n, l, m, rng.next_u64());
        const DenseTensor x = random_tensor(rng, n, l, 1);
        const DenseTensor fx = tau_full(f, x);
        double gap = 0;
        for (const auto& g : enumerate_symmetric(n))
          gap = std::max(gap, max_abs_diff(tau_full(f, act_tensor(g, x)), act_tensor(g, fx)));
        add(out, "equivariance", label("reynolds n=%d l=%d m=%d", n, l, m), gap, 1e-9);
      }
  for (int n = 2; n <= max_n; ++n)
    for (int m = 1; m <= 2; ++m) {
      if (n < m) continue;
      const ReyNetShape shape{n, 2, 1, m, 2};
      const auto model = EquivariantReyNet::create(shape, ReducedSpec::corner_block(2, true), {8}, rng.next_u64());
      const DenseTensor x = random_tensor(rng, n, 2, 1);
      const DenseTensor y = equiv_forward(model, x);
      double gap = 0;
      for (const auto& g : sample_group(n, 24, rng))
        gap = std::max(gap, max_abs_diff(equiv_forward(model, act_tensor(g, x)), act_tensor(g, y)));
      add(out, "equivariance", label("stab-restricted reynet n=%d m=%d", n, m), gap, 1e-9);
    }
}

// f(x) = N(x at indices inside [D]) placed at the corner φ((1..D), T): Stab([D])-equivariant.
VectorFunction stab_function(int n, int depth, const BasisTableau& t, std::uint64_t seed) {
  std::vector<std::size_t> cols;
  const auto tuples = all_tuples(n, 2);
  for (std::size_t pos = 0; pos < tuples.size(); ++pos)
    if (tuples[pos][0] <= depth && tuples[pos][1] <= depth) cols.push_back(pos);
  auto p = init_params(seed, {static_cast<int>(cols.size()), 8, 1});
  std::vector<int> corner = corner_index(t);
  const TensorShape in{n, 2, 1};
  const TensorShape out{n, static_cast<int>(corner.size()), 1};
  return {in, out, [p, cols, corner, out](const DenseTensor& x) {
            std::vector<double> v;
            for (auto c : cols) v.push_back(x[c]);
            DenseTensor y(out.n, out.order, out.channels);
            y[y.position(corner)] = mlp_forward(p, v)[0];
            return y;
          }};
}

void suite_design(Checks& out, int max_n, std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split(12);
  for (int n = 2; n <= std::min(max_n, 6); ++n)
    for (int depth = 1; depth <= std::min(2, n); ++depth)
      for (const auto& t : enum_basis_tableaux(2)) {
        if (t.depth() != depth) continue;
        const auto f = stab_function(n, depth, t, rng.next_u64());
        const auto rep = verify_design(f, enumerate_design(n, depth), 2, rng.next_u64(), 1e-12);
        add(out, "design", label("n=%d D=%d", n, depth), rep.max_abs_gap, 1e-12);
      }
}

void suite_orbitsum(Checks& out, int max_n, std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split(13);
  for (int n = 1; n <= std::min(max_n, 5); ++n)
    for (int m = 1; m <= 3; ++m) {
      const DenseTensor x = random_tensor(rng, n, m, 2);
      const auto sums = orbit_sum(x);
      const auto group = enumerate_symmetric(n);
      double gap = 0;
      for (std::size_t k = 0; k < sums.keys.size(); ++k) {
        const auto& t = sums.keys[k];
        if (t.depth() > n) continue;
        const auto u = corner_index(t);
        for (int c = 1; c <= 2; ++c) {
          double literal = 0;
          for (const auto& g : group) literal += x.at(act_index(g, u), c);
          gap = std::max(gap, std::abs(literal - sums.value(k, c)));
        }
      }
      add(out, "orbitsum", label("n=%d m=%d", n, m), gap, 1e-12);
    }
}

void suite_gradcheck(Checks& out, int max_n, std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split(14);
  const int n = std::min(max_n, 3);
  NetworkOptions opts;
  opts.hidden = {6};
  opts.body_channels = 2;
  struct Case {
    const char* name;
    ModelKind kind;
    Task task;
    LossKind loss;
    Pooling pooling;
  };
  const Case cases[] = {
      {"fnn", ModelKind::fnn, Task::symmetry, LossKind::standard_mse, Pooling::max_diag_offdiag},
      {"reynet", ModelKind::reynet, Task::symmetry, LossKind::standard_mse, Pooling::max_diag_offdiag},
      {"red-reynet", ModelKind::red_reynet, Task::symmetry, LossKind::standard_mse, Pooling::max_diag_offdiag},
      {"red-reynet m=1", ModelKind::red_reynet, Task::diagonal, LossKind::standard_mse, Pooling::max_diag_offdiag},
      {"red-reynet corner", ModelKind::red_reynet, Task::symmetry, LossKind::corner_mse, Pooling::max_diag_offdiag},
      {"inv max", ModelKind::red_reynet, Task::trace, LossKind::standard_mse, Pooling::max_diag_offdiag},
      {"inv sum", ModelKind::reynet, Task::trace, LossKind::standard_mse, Pooling::orbit_sum},
  };
  for (const auto& c : cases) {
    if (n < 2) break;
    opts.pooling = c.pooling;
    const Network net = Network::create(c.kind, c.task, n, opts, rng.next_u64());
    Eigen::MatrixXd x(n * n, 3);
    Eigen::MatrixXd y(static_cast<Eigen::Index>(int_pow(n, net.output_shape().order)), 3);
    for (auto* m : {&x, &y})
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = rng.uniform(-1.0, 1.0);
    for (Exec exec : {Exec::serial, Exec::parallel}) {
      const double err = gradcheck_network(net, x, y, c.loss, exec);
      add(out, "gradcheck", std::string(c.name) + (exec == Exec::serial ? " serial" : " parallel"), err, 1e-6);
    }
  }
}

void suite_decomposition(Checks& out, int max_n, std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split(15);
  for (int n = 2; n <= std::min(max_n, 6); ++n)
    for (int d = 1; d <= std::min(2, n); ++d) {
      double gap = 0;
      for (int k = 0; k < 10; ++k) {
        std::vector<int> exps(static_cast<std::size_t>(n));
        for (auto& e : exps) e = static_cast<int>(rng.below(4));
        gap = std::max(gap, decomposition_gap(n, d, Polynomial::monomial(exps, rng.uniform(-1, 1)), 2, rng.next_u64()));
      }
      add(out, "decomposition", label("n=%d d=%d", n, d), gap, 1e-12);
    }
}

void suite_powersum(Checks& out, int max_n, std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split(16);
  for (int n = 2; n <= std::min(max_n, 6); ++n) {
    const auto gens = power_sum_generators(n);
    const auto design = enumerate_design(n, 1);
    for (int i = 1; i <= std::min(4, gens.s()); ++i) {
      const auto f = gens.as_function(i, n);
      double gap = 0;
      for (int trial = 0; trial < 3; ++trial) {
        const DenseTensor x = random_tensor(rng, n, 1, 1);
        gap = std::max(gap, std::abs(gamma_full(f, x)[0] - gamma_design(f, x, design)[0]));
        gap = std::max(gap, std::abs(gamma_full(f, x)[0] - gens.invariant(i, x, design)));
      }
      add(out, "powersum", label("n=%d i=%d", n, i), gap, 1e-12);
    }
  }
}

void suite_count(Checks& out, int max_n, std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split(17);
  for (int n = 2; n <= max_n; ++n)
    for (int m = 1; m <= 2; ++m) {
      const auto model = EquivariantReyNet::create({n, 2, 1, m, 1}, ReducedSpec::corner_block(2), {4}, rng.next_u64());
      ForwardStats stats;
      equiv_forward(model, random_tensor(rng, n, 2, 1), &stats);
      const double expected = m == 2 ? static_cast<double>(n) * n : n;
      const bool once = std::all_of(stats.writes.begin(), stats.writes.end(), [](int w) { return w == 1; });
      add(out, "count", label("n=%d m=%d evaluations", n, m),
          std::abs(static_cast<double>(stats.mlp_evaluations) - expected), 0.0);
      add(out, "count", label("n=%d m=%d single write", n, m), once ? 0.0 : 1.0, 0.0);
    }
}

}  // namespace

VerifyReport run_verify(const std::string& suite, int max_n, std::uint64_t seed) {
  const bool all = suite == "all";
  const auto& names = verify_suites();
  if (!all && std::find(names.begin(), names.end(), suite) == names.end())
    throw DomainError("unknown verify suite '" + suite + "'");
  const int cap = suite == "count" ? kCountMaxN : kVerifyMaxN;
  if (max_n < 2 || max_n > cap)
    throw DomainError("max_n must lie in [2, " + std::to_string(cap) + "] for suite '" + suite + "'");
  const auto start = std::chrono::steady_clock::now();
  VerifyReport report;
  auto want = [&](const char* s) { return all || suite == s; };
  if (want("bijection")) suite_bijection(report.checks, max_n);
  if (want("normalize")) suite_normalize(report.checks, max_n);
  if (want("equivariance")) suite_equivariance(report.checks, max_n, seed);
  if (want("design")) suite_design(report.checks, max_n, seed);
  if (want("orbitsum")) suite_orbitsum(report.checks, max_n, seed);
  if (want("gradcheck")) suite_gradcheck(report.checks, max_n, seed);
  if (want("decomposition")) suite_decomposition(report.checks, max_n, seed);
  if (want("powersum")) suite_powersum(report.checks, max_n, seed);
  if (want("count")) suite_count(report.checks, max_n, seed);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void print_report(std::ostream& out, const VerifyReport& report) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_suite;
  for (const auto& c : report.checks) {
    auto& [total, failed] = per_suite[c.suite];
    ++total;
    if (!c.pass) {
      ++failed;
      out << "FAIL " << c.suite << ": " << c.name << " gap=" << c.gap << " tol=" << c.tolerance << '\n';
    }
  }
  for (const auto& [suite, counts] : per_suite)
    out << (counts.second == 0 ? "PASS " : "FAIL ") << suite << " (" << counts.first - counts.second << '/'
        << counts.first << " checks)\n";
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f", report.seconds);
  out << (report.pass() ? "all checks passed" : "some checks failed") << " in " << secs << " s\n";
}

void write_report_csv(std::ostream& out, const VerifyReport& report) {
  out << "suite,check,gap,tolerance,pass\n";
  for (const auto& c : report.checks) {
    char gap[40], tol[40];
    std::snprintf(gap, sizeof gap, "%.6g", c.gap);
    std::snprintf(tol, sizeof tol, "%.6g", c.tolerance);
    out << c.suite << ',' << c.name << ',' << gap << ',' << tol << ',' << (c.pass ? "true" : "false") << '\n';
  }
}

double gradcheck_network(const Network& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, LossKind loss,
                         Exec exec, double h, double floor) {
  auto grads = net.zero_grads();
  net.loss_and_grad(x, y, loss, grads, exec);
  Network probe = net;
  auto params = probe.parameters();
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto flat = params[k]->flatten();
    const auto analytic = grads[k].flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const double saved = flat[i];
      auto eval = [&](double v) {
        flat[i] = v;
        params[k]->unflatten(flat);
        auto scratch = probe.zero_grads();
        return probe.loss_and_grad(x, y, loss, scratch, exec);
      };
      const double fd = (eval(saved + h) - eval(saved - h)) / (2.0 * h);
      flat[i] = saved;
      params[k]->unflatten(flat);
      const double denom = std::max({std::abs(analytic[i]), std::abs(fd), floor});
      worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
    }
  }
  return worst;
}

}  // namespace reynet
