#pragma once

// Seeded random streams. Every stochastic routine in crpx takes an explicit
// Stream; there is no global generator.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <string_view>

namespace crpx {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a, used to turn stream names ("theorem1", "trajectory") into ids.
constexpr std::uint64_t name_id(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives the seed of a named sub-stream, e.g.
/// derive_seed(user_seed, {name_id("counts"), replicate, name_id("trajectory")}).
/// Distinct paths give statistically independent streams.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

/// A 64-bit Mersenne Twister stream with the handful of variates crpx needs.
/// Variates are generated by explicit formulas (not std:: distributions) so
/// sequences are identical across standard library implementations.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  double exponential() { return -std::log(uniform_pos()); }

  /// Failures before the first success in Bernoulli(p) trials.
  /// Saturates at UINT64_MAX for vanishing p.
  std::uint64_t geometric_failures(double p) {
    if (p >= 1.0) return 0;
    if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
    const double g = std::floor(std::log(uniform_pos()) / std::log1p(-p));
    if (!(g < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(g);
  }

  /// Poisson variate by sequential inversion; large means are split into
  /// independent pieces so exp(-mean) never underflows.
  std::uint64_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    std::uint64_t total = 0;
    while (mean > kPoissonPiece) {
      total += poisson_inversion(kPoissonPiece);
      mean -= kPoissonPiece;
    }
    return total + poisson_inversion(mean);
  }

 private:
  static constexpr double kPoissonPiece = 30.0;

  std::uint64_t poisson_inversion(double mean) {
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u >= cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (p == 0.0 && cdf <= u) break;  // rounding guard in the far tail
    }
    return k;
  }

  std::mt19937_64 engine_;
};

}  // namespace crpx
