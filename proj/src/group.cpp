#include "reynet/group.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "reynet/error.hpp"

namespace reynet {

Permutation::Permutation(std::vector<int> images) {
  const int n = static_cast<int>(images.size());
  std::vector<char> seen(images.size(), 0);
  for (int& v : images) {
    if (v < 1 || v > n || seen[static_cast<std::size_t>(v - 1)])
      throw DomainError("not a permutation of 1.." + std::to_string(n));
    seen[static_cast<std::size_t>(v - 1)] = 1;
    --v;
  }
  map_ = std::move(images);
}

Permutation Permutation::identity(int n) {
  if (n < 1) throw DomainError("permutation size must be positive");
  std::vector<int> m(static_cast<std::size_t>(n));
  std::iota(m.begin(), m.end(), 0);
  return Permutation(Unchecked{}, std::move(m));
}

int Permutation::operator()(int i) const {
  if (i < 1 || i > n()) throw DomainError("point " + std::to_string(i) + " outside [1, n]");
  return map_[static_cast<std::size_t>(i - 1)] + 1;
}

std::vector<int> Permutation::one_line() const {
  std::vector<int> out(map_);
  for (int& v : out) ++v;
  return out;
}

bool Permutation::is_identity() const noexcept {
  for (std::size_t i = 0; i < map_.size(); ++i)
    if (map_[i] != static_cast<int>(i)) return false;
  return true;
}

Permutation compose(const Permutation& g, const Permutation& h) {
  if (g.n() != h.n()) throw ShapeError("compose: permutations act on different sets");
  std::vector<int> m(h.map_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = g.map_[static_cast<std::size_t>(h.map_[i])];
  return Permutation(Permutation::Unchecked{}, std::move(m));
}

Permutation invert(const Permutation& g) {
  std::vector<int> m(g.map_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[static_cast<std::size_t>(g.map_[i])] = static_cast<int>(i);
  return Permutation(Permutation::Unchecked{}, std::move(m));
}

std::vector<int> act_index(const Permutation& g, std::span<const int> u) {
  std::vector<int> out;
  out.reserve(u.size());
  for (int i : u) out.push_back(g(i));
  return out;
}

DenseTensor act_tensor(const Permutation& g, const DenseTensor& x) {
  if (g.n() != x.n()) throw ShapeError("act_tensor: permutation size differs from tensor extent");
  const int n = x.n();
  const int order = x.order();
  const std::size_t a = static_cast<std::size_t>(x.channels());
  const Permutation inv = invert(g);
  const auto ginv = inv.zero_based();

  DenseTensor out(n, order, x.channels());
  std::vector<int> idx(static_cast<std::size_t>(order), 0);
  const std::size_t positions = x.positions();
  for (std::size_t pos = 0; pos < positions; ++pos) {
    std::size_t src = 0;
    for (int k = 0; k < order; ++k)
      src = src * static_cast<std::size_t>(n) + static_cast<std::size_t>(ginv[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])]);
    for (std::size_t c = 0; c < a; ++c) out[pos * a + c] = x[src * a + c];
    for (int k = order - 1; k >= 0; --k) {
      if (++idx[static_cast<std::size_t>(k)] < n) break;
      idx[static_cast<std::size_t>(k)] = 0;
    }
  }
  return out;
}

Permutation cycle_power(int n, int start, int p) {
  std::vector<int> m(static_cast<std::size_t>(n));
  const int len = n - start + 1;
  for (int i = 1; i <= n; ++i)
    m[static_cast<std::size_t>(i - 1)] = i < start ? i : start + (i - start + p) % len;
  return Permutation(std::move(m));
}

std::vector<Permutation> cyclic_group(int n, int start) {
  if (n < 1 || start < 1 || start > n) throw DomainError("cyclic_group: need 1 <= start <= n");
  std::vector<Permutation> out;
  out.reserve(static_cast<std::size_t>(n - start + 1));
  for (int p = 0; p <= n - start; ++p) out.push_back(cycle_power(n, start, p));
  return out;
}

std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int k = 2; k <= n; ++k) f *= static_cast<std::uint64_t>(k);
  return f;
}

std::uint64_t design_size(int n, int depth) {
  if (depth < 1 || depth > n) throw DomainError("design depth must satisfy 1 <= D <= n");
  std::uint64_t s = 1;
  for (int k = 0; k < depth; ++k) s *= static_cast<std::uint64_t>(n - k);
  return s;
}

std::vector<int> design_exponents(int n, int depth, std::size_t index) {
  if (index >= design_size(n, depth)) throw DomainError("design index out of range");
  std::vector<int> p(static_cast<std::size_t>(depth));
  for (int d = depth; d >= 1; --d) {
    const std::size_t radix = static_cast<std::size_t>(n - d + 1);
    p[static_cast<std::size_t>(d - 1)] = static_cast<int>(index % radix);
    index /= radix;
  }
  return p;
}

std::size_t design_index(int n, int depth, std::span<const int> exponents) {
  if (static_cast<int>(exponents.size()) != depth) throw ShapeError("exponent tuple length differs from depth");
  std::size_t index = 0;
  for (int d = 1; d <= depth; ++d) {
    const int radix = n - d + 1;
    const int p = exponents[static_cast<std::size_t>(d - 1)];
    if (p < 0 || p >= radix) throw DomainError("design exponent out of range");
    index = index * static_cast<std::size_t>(radix) + static_cast<std::size_t>(p);
  }
  return index;
}

DesignHD enumerate_design(int n, int depth) {
  const std::uint64_t total = design_size(n, depth);
  DesignHD design{n, depth, {}};
  design.elements.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    const auto p = design_exponents(n, depth, k);
    Permutation g = Permutation::identity(n);
    for (int d = 1; d <= depth; ++d) g = compose(cycle_power(n, d, p[static_cast<std::size_t>(d - 1)]), g);
    design.elements.push_back(std::move(g));
  }
  return design;
}

std::vector<Permutation> enumerate_symmetric(int n) {
  if (n < 1) throw DomainError("enumerate_symmetric: n must be positive");
  if (n > kMaxBruteForceN)
    throw ComplexityError("enumerate_symmetric: n = " + std::to_string(n) + " exceeds the brute-force limit of " +
                          std::to_string(kMaxBruteForceN) + " (" + std::to_string(n) + "! permutations)");
  std::vector<int> line(static_cast<std::size_t>(n));
  std::iota(line.begin(), line.end(), 1);
  std::vector<Permutation> out;
  out.reserve(factorial(n));
  do {
    out.emplace_back(line);
  } while (std::next_permutation(line.begin(), line.end()));
  return out;
}

std::vector<Permutation> enumerate_stabilizer(int n, int d) {
  std::vector<Permutation> out;
  for (auto& g : enumerate_symmetric(n))
    if (fixes_prefix(g, d)) out.push_back(std::move(g));
  return out;
}

bool fixes_prefix(const Permutation& g, int d) {
  const auto m = g.zero_based();
  for (int i = 0; i < d && i < g.n(); ++i)
    if (m[static_cast<std::size_t>(i)] != i) return false;
  return true;
}

}  // namespace reynet
