#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "reynet/dense_tensor.hpp"
#include "reynet/tableau.hpp"

namespace reynet {

/// One value per orbit of [n]^m under S_n (per channel), keyed by the basis
/// tableau of the orbit in canonical order.
struct OrbitTensor {
  int m = 0;
  int channels = 1;
  std::vector<BasisTableau> keys;
  std::vector<double> values;  ///< keys.size() x channels, row-major

  double value(std::size_t key, int channel = 1) const {
    return values[key * static_cast<std::size_t>(channels) + static_cast<std::size_t>(channel - 1)];
  }
};

/// e_u = e_{u_1} ⊗ ... ⊗ e_{u_m}, a one-channel tensor.
DenseTensor basis_vector(std::span<const int> u, int n);

/// accumulator[u, β] += v_β.
void scatter(std::span<const double> v, std::span<const int> u, DenseTensor& accumulator);

/// For every flat position of [n]^m, the canonical index of its orbit's tableau.
std::vector<std::size_t> orbit_labels(int n, int m);

/// Σ(X)_{orbit(u), β} = Σ_{g ∈ S_n} x_{g·u, β}, computed by orbit grouping:
/// the literal group sum equals |Stab(u)| = (n - D)! times the orbit total.
OrbitTensor orbit_sum(const DenseTensor& x);

/// Zero padding of a d x a array into n^order x a: the first d row-major
/// positions carry x, the rest are zero.
DenseTensor zero_pad(std::span<const double> x, int d, int channels, int n, int order);

/// Flat positions φ((1..D), T) for T in canonical order. ShapeError if n < m.
std::vector<std::size_t> corner_positions(int n, int m);

/// Slices of y at the corner positions, |T_m| x b row-major.
std::vector<double> corner_components(const DenseTensor& y);

}  // namespace reynet
