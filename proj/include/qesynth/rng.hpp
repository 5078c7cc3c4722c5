#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qe {

/// SplitMix64 finalizer; spreads structured seeds over the full 64-bit range.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Deterministic random stream.
///
/// std::mt19937_64 supplies the raw 64-bit output; its sequence is pinned by
/// the standard, so it is reproducible across platforms. The distribution
/// helpers are implemented here rather than with the std::*_distribution
/// adaptors, whose output is implementation-defined and would break
/// cross-platform byte identity of synthesized datasets.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  /// Uniform in [0, n); unbiased via rejection. n must be >= 1.
  std::uint64_t below(std::uint64_t n) {
    // Largest multiple of n that fits in 64 bits; draws at or above it
    // would bias the modulus and are redrawn.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Knuth's product method; adequate for the small means used here.
  std::uint64_t poisson(double mean) {
    const double floor = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= next_double();
    } while (p > floor);
    return k - 1;
  }

 private:
  std::mt19937_64 engine_;
};

/// Stream for record `index` of a run seeded with `seed`.
///
/// Streams for distinct indices are statistically independent, so per-record
/// work can be scheduled on any number of workers without changing results.
inline RandomStream substream(std::uint64_t seed, std::uint64_t index) {
  return RandomStream(mix64(seed ^ mix64(index)));
}

}  // namespace qe
