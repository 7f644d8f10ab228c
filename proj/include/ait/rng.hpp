#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ait {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of sub-stream `stream` under `master`. Distinct (master, stream) pairs
/// give unrelated streams; the mapping is fixed across platforms.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master ^ mix64(stream + 0x9e3779b97f4a7c15ULL));
}

/// Counter-based SplitMix64 generator: draw i is mix64(seed + (i+1) * gamma).
/// Normal variates use Box-Muller, so every value is a fixed function of the
/// seed and draw index and does not depend on the standard library's
/// distribution implementations.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on (0, 1].
  double uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform integer in [0, n), n > 0, by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r = next_u64();
    while (r >= limit) r = next_u64();
    return r % n;
  }

  /// +1 or -1 with equal probability.
  double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ait
