#pragma once

#include <cstdint>

namespace reynet {

/// Counter-based SplitMix64 stream.
///
/// The k-th draw (k = 1, 2, ...) of a stream with key `seed` is
///
///     mix64(seed + k * 0x9E3779B97F4A7C15)        (mod 2^64)
///
/// where mix64 is the SplitMix64 finalizer
///
///     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///     z =  z ^ (z >> 31)
///
/// which is bit-identical to the sequential SplitMix64 generator seeded with
/// `seed`. Doubles in [0, 1) take the top 53 bits: (draw >> 11) * 2^-53.
/// `split(id)` derives an independent key as mix64(seed ^ mix64(id + golden)).
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Draw at an absolute position without advancing the stream.
  std::uint64_t at(std::uint64_t k) const noexcept { return mix64(seed_ + k * kGolden); }

  std::uint64_t next_u64() noexcept { return at(++counter_); }

  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, bound). Uses rejection to stay unbiased.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= limit) return r % bound;
    }
  }

  CounterRng split(std::uint64_t id) const noexcept {
    return CounterRng(mix64(seed_ ^ mix64(id + kGolden)));
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace reynet
