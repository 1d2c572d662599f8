#pragma once

// Factorial-type products and the regularized incomplete beta function.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/beta.hpp>

namespace crpx::special {

/// Products up to this length are evaluated factor by factor; longer ones
/// go through log-gamma.
inline constexpr std::uint64_t kDirectProductLimit = 20;

/// Thread-safe log|Gamma(x)|.
inline double lgamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

/// log of x(x+1)...(x+n-1) through log-gamma; x > 0.
inline double log_rising_lgamma(double x, std::uint64_t n) {
  if (!(x > 0.0)) throw std::domain_error("log_rising: x must be positive");
  if (n == 0) return 0.0;
  return lgamma(x + static_cast<double>(n)) - lgamma(x);
}

/// log of x(x-1)...(x-n+1) through log-gamma; requires x-n+1 > 0.
inline double log_falling_lgamma(double x, std::uint64_t n) {
  if (n == 0) return 0.0;
  if (!(x - static_cast<double>(n) + 1.0 > 0.0))
    throw std::domain_error("log_falling: non-positive factor in falling factorial");
  return lgamma(x + 1.0) - lgamma(x - static_cast<double>(n) + 1.0);
}

/// log of the rising factorial x^(n) = x(x+1)...(x+n-1), x > 0.
inline double log_rising(double x, std::uint64_t n) {
  if (!(x > 0.0)) throw std::domain_error("log_rising: x must be positive");
  if (n > kDirectProductLimit) return log_rising_lgamma(x, n);
  double s = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) s += std::log(x + static_cast<double>(i));
  return s;
}

/// log of the falling factorial x_(n) = x(x-1)...(x-n+1); every factor must
/// be positive.
inline double log_falling(double x, std::uint64_t n) {
  if (n > 0 && !(x - static_cast<double>(n) + 1.0 > 0.0))
    throw std::domain_error("log_falling: non-positive factor in falling factorial");
  if (n > kDirectProductLimit) return log_falling_lgamma(x, n);
  double s = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) s += std::log(x - static_cast<double>(i));
  return s;
}

/// Rising factorial x(x+1)...(x+n-1), x > 0.
inline double rising(double x, std::uint64_t n) {
  if (!(x > 0.0)) throw std::domain_error("rising: x must be positive");
  if (n > kDirectProductLimit) return std::exp(log_rising_lgamma(x, n));
  double p = 1.0;
  for (std::uint64_t i = 0; i < n; ++i) p *= x + static_cast<double>(i);
  return p;
}

/// Falling factorial x(x-1)...(x-n+1). Any real x is accepted for short
/// products; the log-gamma route needs x-n+1 > 0.
inline double falling(double x, std::uint64_t n) {
  if (n > kDirectProductLimit) return std::exp(log_falling_lgamma(x, n));
  double p = 1.0;
  for (std::uint64_t i = 0; i < n; ++i) p *= x - static_cast<double>(i);
  return p;
}

inline double factorial(unsigned n) { return rising(1.0, n); }

/// Binomial coefficient as a double (exact below 2^53).
inline double choose(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0.0;
  if (k > n - k) k = n - k;
  double c = 1.0;
  for (std::uint64_t i = 1; i <= k; ++i)
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c < 9.0e15 ? std::round(c) : c;
}

/// Regularized incomplete beta I_x(a, b) = B_x(a, b) / B(a, b).
inline double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("reg_inc_beta: shape parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("reg_inc_beta: x must lie in [0, 1]");
  return boost::math::ibeta(a, b, x);
}

}  // namespace crpx::special
