#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "reynet/dense_tensor.hpp"

namespace reynet {

/// Bijection on [n]. The public interface is 1-based; (*this)(i) = g(i).
class Permutation {
 public:
  Permutation() = default;

  /// One-line notation, 1-based: images[i-1] = g(i). Throws DomainError unless bijective.
  explicit Permutation(std::vector<int> images);

  static Permutation identity(int n);

  int n() const noexcept { return static_cast<int>(map_.size()); }
  int operator()(int i) const;
  std::vector<int> one_line() const;

  bool is_identity() const noexcept;

  /// 0-based image array, for index arithmetic in hot loops.
  std::span<const int> zero_based() const& noexcept { return map_; }
  std::span<const int> zero_based() const&& = delete;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  struct Unchecked {};
  Permutation(Unchecked, std::vector<int> zero_based) : map_(std::move(zero_based)) {}
  friend Permutation compose(const Permutation&, const Permutation&);
  friend Permutation invert(const Permutation&);

  std::vector<int> map_;
};

/// (g∘h)(i) = g(h(i)).
Permutation compose(const Permutation& g, const Permutation& h);
Permutation invert(const Permutation& g);

/// Componentwise action g·u = (g(u_1), ..., g(u_m)).
std::vector<int> act_index(const Permutation& g, std::span<const int> u);

/// (g·X)_{i_1..i_l, α} = X_{g^-1(i_1)..g^-1(i_l), α}.
DenseTensor act_tensor(const Permutation& g, const DenseTensor& x);

/// c^p for the forward cycle c: start → start+1 → ... → n → start (fixes 1..start-1).
Permutation cycle_power(int n, int start, int p);

/// Powers c^0, c^1, ... of the forward cycle start → start+1 → ... → n → start.
std::vector<Permutation> cyclic_group(int n, int start);

/// The design set H_D = { σ_D ⋯ σ_1 : σ_d ∈ cyclic_group(n, d) }.
///
/// σ_1 ranges over the full n-cycle group and is applied first; each later
/// factor fixes 1..d-1. Element k corresponds to the exponent tuple
/// (p_1, ..., p_D) with σ_d = c_d^{p_d}, in lexicographic order (p_1 most
/// significant). For every j ∈ [n]^D with distinct entries exactly one
/// element maps j to (1, ..., D).
struct DesignHD {
  int n = 0;
  int depth = 0;
  std::vector<Permutation> elements;

  std::size_t size() const noexcept { return elements.size(); }
};

DesignHD enumerate_design(int n, int depth);

/// n!/(n-D)!, the size of H_D.
std::uint64_t design_size(int n, int depth);

/// Exponent tuple (p_1..p_D) of design element `index`.
std::vector<int> design_exponents(int n, int depth, std::size_t index);

/// Position in enumerate_design order of the element with the given exponents.
std::size_t design_index(int n, int depth, std::span<const int> exponents);

inline constexpr int kMaxBruteForceN = 8;

/// All n! permutations in lexicographic one-line order. ComplexityError for n > 8.
std::vector<Permutation> enumerate_symmetric(int n);

/// Elements of S_n fixing 1..d pointwise, lexicographic.
std::vector<Permutation> enumerate_stabilizer(int n, int d);

/// True iff g(i) = i for all i <= d.
bool fixes_prefix(const Permutation& g, int d);

std::uint64_t factorial(int n);

}  // namespace reynet
