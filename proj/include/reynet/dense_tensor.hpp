#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace reynet {

/// Real tensor on [n]^order x channels, row-major with the channel index last.
///
/// Order 0 is a plain vector of `channels` entries; the symmetric group acts
/// trivially on it.
class DenseTensor {
 public:
  DenseTensor() = default;
  DenseTensor(int n, int order, int channels);
  DenseTensor(int n, int order, int channels, std::vector<double> data);

  static DenseTensor zeros(int n, int order, int channels) { return {n, order, channels}; }

  int n() const noexcept { return n_; }
  int order() const noexcept { return order_; }
  int channels() const noexcept { return channels_; }

  /// n^order, the number of index tuples.
  std::size_t positions() const noexcept { return data_.size() / static_cast<std::size_t>(channels_); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  /// Flat position of a 1-based index tuple (channel excluded).
  std::size_t position(std::span<const int> index) const;

  double& at(std::span<const int> index, int channel = 1);
  double at(std::span<const int> index, int channel = 1) const;

  double& operator[](std::size_t flat) noexcept { return data_[flat]; }
  double operator[](std::size_t flat) const noexcept { return data_[flat]; }

  bool same_shape(const DenseTensor& other) const noexcept {
    return n_ == other.n_ && order_ == other.order_ && channels_ == other.channels_;
  }

  bool all_finite() const noexcept;

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  int n_ = 0;
  int order_ = 0;
  int channels_ = 1;
  std::vector<double> data_;
};

/// n^order as a size; throws ShapeError on overflow of sensible sizes.
std::size_t int_pow(int n, int order);

/// Decode a flat position into a 1-based index tuple.
std::vector<int> unflatten(std::size_t position, int n, int order);

/// Largest |a - b| over matching entries; ShapeError if shapes differ.
double max_abs_diff(const DenseTensor& a, const DenseTensor& b);

}  // namespace reynet
