#pragma once

#include <cstdint>

#include "ccmp/gaussian.hpp"

namespace ccmp {

/// Counter-based uniform stream: the i-th draw is splitmix64 applied to
/// seed + i * golden-gamma. Stateless per draw, so trajectories are
/// reproducible bit-for-bit across platforms and independent of threading.
/// Gaussians come from the inverse-CDF transform of the uniform draw.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  /// Uniform draw in the open interval (0,1).
  double next_uniform() { return uniform_at(seed_, counter_++); }

  double next_gaussian(double mean, double variance) {
    return mean + std::sqrt(variance) * standard_normal_quantile(next_uniform());
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

  static double uniform_at(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    // 53-bit mantissa, offset by half a step to stay inside (0,1).
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace ccmp
