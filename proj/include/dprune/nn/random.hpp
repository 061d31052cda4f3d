#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dprune {

/// SplitMix64 finaliser. Stateless, so every draw is a pure function of its
/// counter; this is what makes the streams replayable across platforms.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

/// Unbiased integer in [0, n) drawn from the counter family keyed by `key`.
/// Lemire's multiply-shift with rejection; rejected rounds advance a
/// secondary counter so the result stays a pure function of `key`.
inline std::uint64_t uniform_below(std::uint64_t key, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (std::uint64_t round = 0;; ++round) {
    const std::uint64_t x = hash_combine(key, round);
    const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

/// Sequential counter-based generator for initialisation and synthetic data.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() { return hash_combine(seed_, counter_++); }

  /// Uniform on (0, 1); never returns 0 so log() is safe.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t below(std::uint64_t n) { return uniform_below(next_u64(), n); }

  /// Box-Muller; one normal per call.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace dprune
