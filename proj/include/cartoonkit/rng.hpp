#pragma once

#include <cstdint>

namespace cartoonkit {

/// Counter-based generator: draw i of stream (seed, stream) is
/// splitmix64(key + (i + 1) * golden), with key derived from seed and stream.
/// Portable and random-access; identical sequences on every platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  static std::uint64_t mix(std::uint64_t z) noexcept;

  std::uint64_t at(std::uint64_t counter) const noexcept;
  std::uint64_t next_u64() noexcept { return at(counter_++); }

  /// Uniform in [0,1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (consumes two draws, no caching).
  double normal() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cartoonkit
