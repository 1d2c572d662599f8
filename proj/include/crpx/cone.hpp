#pragma once

// Points, windows and point measures on the cone
// X_N = {(x_1,...,x_N,y) : 0 < x_1 <= ... <= x_N <= y}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace crpx {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Half-open interval (lo, hi]; hi may be +inf.
struct Interval {
  double lo = 0.0;
  double hi = kInf;

  bool contains(double v) const noexcept { return v > lo && v <= hi; }
  bool empty() const noexcept { return !(hi > lo); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct ConePoint {
  std::vector<double> x;
  double y = 0.0;

  std::size_t order() const noexcept { return x.size(); }
  friend bool operator==(const ConePoint&, const ConePoint&) = default;
};

inline bool in_cone(const ConePoint& p) noexcept {
  if (p.x.empty() || !(p.x.front() > 0.0)) return false;
  for (std::size_t i = 1; i < p.x.size(); ++i)
    if (p.x[i - 1] > p.x[i]) return false;
  return p.x.back() <= p.y;
}

/// A box intersected with the cone: x_i in (lo_i, hi_i], y in (lo_y, hi_y].
struct ConeWindow {
  std::vector<Interval> x;
  Interval y;

  std::size_t order() const noexcept { return x.size(); }

  void validate() const {
    if (x.empty()) throw std::invalid_argument("ConeWindow: need N >= 1");
    for (const auto& iv : x)
      if (!(iv.lo >= 0.0) || std::isnan(iv.hi))
        throw std::invalid_argument("ConeWindow: x bounds must satisfy 0 <= lo");
    if (!(y.lo > 0.0))
      throw std::domain_error("ConeWindow: y must be bounded away from zero (infinite mass)");
    if (std::isnan(y.hi)) throw std::invalid_argument("ConeWindow: bad y bound");
  }

  bool contains(const ConePoint& p) const noexcept {
    if (p.order() != order() || !in_cone(p)) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!x[i].contains(p.x[i])) return false;
    return y.contains(p.y);
  }

  /// The window c*B.
  ConeWindow scaled(double c) const {
    ConeWindow w = *this;
    for (auto& iv : w.x) {
      iv.lo *= c;
      iv.hi *= c;
    }
    w.y.lo *= c;
    w.y.hi *= c;
    return w;
  }

  /// Largest x upper bound; +inf if some x coordinate is unbounded.
  double x_ceiling() const noexcept {
    double c = 0.0;
    for (const auto& iv : x) c = std::max(c, iv.hi);
    return c;
  }
};

/// Finite multiset of atoms in X_N.
struct PointMeasure {
  std::size_t order = 1;
  std::vector<ConePoint> atoms;

  std::size_t size() const noexcept { return atoms.size(); }

  std::uint64_t count(const ConeWindow& w) const noexcept {
    return static_cast<std::uint64_t>(
        std::count_if(atoms.begin(), atoms.end(), [&](const ConePoint& p) { return w.contains(p); }));
  }
};

}  // namespace crpx
