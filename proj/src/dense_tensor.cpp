#include "reynet/dense_tensor.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "reynet/error.hpp"

namespace reynet {

std::size_t int_pow(int n, int order) {
  if (n < 0 || order < 0) throw ShapeError("negative tensor extent");
  std::size_t out = 1;
  for (int k = 0; k < order; ++k) {
    if (n != 0 && out > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(n))
      throw ShapeError("tensor extent overflows");
    out *= static_cast<std::size_t>(n);
  }
  return out;
}

DenseTensor::DenseTensor(int n, int order, int channels)
    : n_(n), order_(order), channels_(channels) {
  if (n < 1 || order < 0 || channels < 1)
    throw ShapeError("tensor needs n >= 1, order >= 0, channels >= 1");
  data_.assign(int_pow(n, order) * static_cast<std::size_t>(channels), 0.0);
}

DenseTensor::DenseTensor(int n, int order, int channels, std::vector<double> data)
    : DenseTensor(n, order, channels) {
  if (data.size() != data_.size())
    throw ShapeError("tensor data has " + std::to_string(data.size()) + " entries, expected " +
                     std::to_string(data_.size()));
  data_ = std::move(data);
}

std::size_t DenseTensor::position(std::span<const int> index) const {
  if (static_cast<int>(index.size()) != order_) throw ShapeError("index tuple has wrong length");
  std::size_t pos = 0;
  for (int i : index) {
    if (i < 1 || i > n_) throw DomainError("index " + std::to_string(i) + " outside [1, n]");
    pos = pos * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i - 1);
  }
  return pos;
}

double& DenseTensor::at(std::span<const int> index, int channel) {
  if (channel < 1 || channel > channels_) throw DomainError("channel out of range");
  return data_[position(index) * static_cast<std::size_t>(channels_) + static_cast<std::size_t>(channel - 1)];
}

double DenseTensor::at(std::span<const int> index, int channel) const {
  if (channel < 1 || channel > channels_) throw DomainError("channel out of range");
  return data_[position(index) * static_cast<std::size_t>(channels_) + static_cast<std::size_t>(channel - 1)];
}

bool DenseTensor::all_finite() const noexcept {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::vector<int> unflatten(std::size_t position, int n, int order) {
  std::vector<int> out(static_cast<std::size_t>(order));
  for (int k = order - 1; k >= 0; --k) {
    out[static_cast<std::size_t>(k)] = static_cast<int>(position % static_cast<std::size_t>(n)) + 1;
    position /= static_cast<std::size_t>(n);
  }
  return out;
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  if (!a.same_shape(b)) throw ShapeError("max_abs_diff: shape mismatch");
  double gap = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) gap = std::max(gap, std::abs(a[k] - b[k]));
  return gap;
}

}  // namespace reynet
