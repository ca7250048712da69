#include "reynet/tensor.hpp"

#include <string>

#include "reynet/error.hpp"

namespace reynet {

DenseTensor basis_vector(std::span<const int> u, int n) {
  DenseTensor e(n, static_cast<int>(u.size()), 1);
  e.at(u) = 1.0;
  return e;
}

void scatter(std::span<const double> v, std::span<const int> u, DenseTensor& accumulator) {
  if (static_cast<int>(v.size()) != accumulator.channels())
    throw ShapeError("scatter: value has " + std::to_string(v.size()) + " channels, accumulator has " +
                     std::to_string(accumulator.channels()));
  const std::size_t base = accumulator.position(u) * v.size();
  for (std::size_t c = 0; c < v.size(); ++c) accumulator[base + c] += v[c];
}

std::vector<std::size_t> orbit_labels(int n, int m) {
  if (m < 1) throw ShapeError("orbit_labels: order must be positive");
  const auto tableaux = enum_basis_tableaux(m);
  const std::size_t positions = int_pow(n, m);
  std::vector<std::size_t> labels(positions);
  for (std::size_t pos = 0; pos < positions; ++pos) {
    const auto u = unflatten(pos, n, m);
    labels[pos] = tableau_index(tableaux, psi(u, n).shape);
  }
  return labels;
}

OrbitTensor orbit_sum(const DenseTensor& x) {
  const int n = x.n();
  const int m = x.order();
  const std::size_t b = static_cast<std::size_t>(x.channels());
  OrbitTensor out{m, x.channels(), enum_basis_tableaux(m), {}};
  out.values.assign(out.keys.size() * b, 0.0);
  const auto labels = orbit_labels(n, m);
  for (std::size_t pos = 0; pos < labels.size(); ++pos)
    for (std::size_t c = 0; c < b; ++c) out.values[labels[pos] * b + c] += x[pos * b + c];
  for (std::size_t k = 0; k < out.keys.size(); ++k) {
    // Orbits with more distinct labels than n are empty; their entries stay zero.
    double stab = 1.0;
    for (int i = 2; i <= n - out.keys[k].depth(); ++i) stab *= i;
    for (std::size_t c = 0; c < b; ++c) out.values[k * b + c] *= stab;
  }
  return out;
}

DenseTensor zero_pad(std::span<const double> x, int d, int channels, int n, int order) {
  if (d < 0 || channels < 1 || x.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(channels))
    throw ShapeError("zero_pad: input is not d x a");
  DenseTensor out(n, order, channels);
  if (static_cast<std::size_t>(d) > out.positions())
    throw ShapeError("zero_pad: d = " + std::to_string(d) + " exceeds n^l = " + std::to_string(out.positions()));
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k];
  return out;
}

std::vector<std::size_t> corner_positions(int n, int m) {
  if (n < m) throw ShapeError("corner positions need n >= m");
  std::vector<std::size_t> out;
  const DenseTensor probe(n, m, 1);
  for (const auto& t : enum_basis_tableaux(m)) out.push_back(probe.position(corner_index(t)));
  return out;
}

std::vector<double> corner_components(const DenseTensor& y) {
  const std::size_t b = static_cast<std::size_t>(y.channels());
  std::vector<double> out;
  for (std::size_t pos : corner_positions(y.n(), y.order()))
    for (std::size_t c = 0; c < b; ++c) out.push_back(y[pos * b + c]);
  return out;
}

}  // namespace reynet
