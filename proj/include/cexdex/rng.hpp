#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cexdex {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based splitmix64 stream: the n-th draw is mix64(seed + n * gamma),
/// so the same seed reproduces the same sequence everywhere.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  /// Independent stream derived from a parent seed and a stream id.
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t id) noexcept {
    return SplitMix64(mix64(seed ^ mix64(id + kGamma)));
  }

  std::uint64_t next() noexcept {
    state_ += kGamma;
    return mix64(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept { return next() % n; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal via Box-Muller; one draw per call, no cached pair.
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace cexdex
