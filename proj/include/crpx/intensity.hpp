#pragma once

// The intensity measure
//
//     d mu^(N) = theta * N! / y^(N+1) dx_1 ... dx_N dy     on X_N,
//
// its masses on cone windows, and the Poisson means lambda_{ij} of the
// two-time block-count limit.
//
// mass() is exact for every box window. For fixed y the ordered x-volume
// V(y) = vol{x_1 <= ... <= x_N <= y, x_i in I_i} is a piecewise polynomial
// in y, built by N clamped integrations; the y-integral of a polynomial
// against y^-(N+1) is elementary. mass_numeric() is the independent
// quadrature route used to cross-check it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "crpx/cone.hpp"
#include "crpx/special.hpp"

namespace crpx::intensity {

namespace detail {

using Real = long double;
using Poly = std::vector<Real>;  // power basis, coef[k] multiplies z^k

inline Real eval(const Poly& p, Real z) {
  Real acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
  return acc;
}

inline Poly antiderivative(const Poly& p) {
  Poly out(p.size() + 1, 0);
  for (std::size_t k = 0; k < p.size(); ++k) out[k + 1] = p[k] / static_cast<Real>(k + 1);
  return out;
}

inline void trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

// Piece j covers [cuts[j], cuts[j+1]); the last piece runs to +inf.
struct Piecewise {
  std::vector<Real> cuts{0};
  std::vector<Poly> pieces{Poly{1}};

  std::size_t piece_of(Real z) const {
    auto it = std::upper_bound(cuts.begin(), cuts.end(), z);
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - cuts.begin()) - 1));
  }

  Real upper(std::size_t j) const {
    return j + 1 < cuts.size() ? cuts[j + 1] : std::numeric_limits<Real>::infinity();
  }

  Piecewise refined(std::vector<Real> extra) const {
    Piecewise out;
    out.cuts = cuts;
    for (Real e : extra)
      if (std::isfinite(static_cast<double>(e)) && e > 0) out.cuts.push_back(e);
    std::sort(out.cuts.begin(), out.cuts.end());
    out.cuts.erase(std::unique(out.cuts.begin(), out.cuts.end()), out.cuts.end());
    out.pieces.clear();
    for (Real c : out.cuts) out.pieces.push_back(pieces[piece_of(c)]);
    return out;
  }

  // G(z) = integral of this function over (lo, min(hi, z)].
  Piecewise clamped_integral(Real lo, Real hi) const {
    Piecewise out = refined({lo, hi});
    if (!(hi > lo)) {
      for (auto& p : out.pieces) p.clear();
      return out;
    }
    Real running = 0;
    for (std::size_t j = 0; j < out.cuts.size(); ++j) {
      const Real a = out.cuts[j];
      const Real b = out.upper(j);
      Poly& piece = out.pieces[j];
      if (b <= lo) {
        piece.clear();
      } else if (a >= hi) {
        piece = running == 0 ? Poly{} : Poly{running};
      } else {
        Poly prim = antiderivative(piece);
        trim(prim);
        const Real at_a = eval(prim, a);
        if (prim.empty()) prim.push_back(0);
        prim[0] += running - at_a;
        trim(prim);
        piece = prim;
        if (std::isfinite(static_cast<double>(b))) running = eval(piece, b);
      }
    }
    return out;
  }
};

// integral over [a, b) of z^e dz, a > 0; b may be +inf (then e < -1 required).
inline Real power_integral(int e, Real a, Real b) {
  const bool inf = !std::isfinite(static_cast<double>(b));
  if (e == -1) return std::log(b / a);
  const Real q = static_cast<Real>(e + 1);
  if (inf) return -std::pow(a, q) / q;
  return (std::pow(b, q) - std::pow(a, q)) / q;
}

// Integral over (a, b], b possibly +inf; tol is relative.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  if (std::isfinite(b)) return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 15, tol);
  static thread_local boost::math::quadrature::exp_sinh<double> tail;
  return tail.integrate(f, a, b, tol);
}

}  // namespace detail

/// Ordered x-volume V(y) as a piecewise polynomial.
inline detail::Piecewise ordered_volume(const ConeWindow& w) {
  detail::Piecewise g;  // the constant 1
  for (const auto& iv : w.x) g = g.clamped_integral(iv.lo, iv.hi);
  return g;
}

/// mu^(N)(window), exact. Throws std::domain_error when the mass is
/// infinite.
inline double mass(const ConeWindow& w, double theta) {
  w.validate();
  if (!(theta > 0.0)) throw std::invalid_argument("mass: theta must be positive");
  const int n = static_cast<int>(w.order());
  if (w.y.empty()) return 0.0;
  for (const auto& iv : w.x)
    if (iv.empty()) return 0.0;

  const auto v = ordered_volume(w).refined({w.y.lo, w.y.hi});
  detail::Real total = 0;
  for (std::size_t j = 0; j < v.cuts.size(); ++j) {
    const detail::Real a = v.cuts[j];
    const detail::Real b = v.upper(j);
    if (b <= w.y.lo || a >= w.y.hi) continue;
    const bool unbounded = !std::isfinite(static_cast<double>(b));
    const auto& p = v.pieces[j];
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] == 0) continue;
      const int e = static_cast<int>(k) - n - 1;
      if (unbounded && e >= -1) throw std::domain_error("mass: window has infinite mass");
      total += p[k] * detail::power_integral(e, a, b);
    }
  }
  const double out = theta * special::factorial(static_cast<unsigned>(n)) * static_cast<double>(total);
  return std::max(0.0, out);
}

/// Same quantity by nested adaptive Gauss-Kronrod over x with the y-integral
/// done in closed form. Intended for N <= 4.
inline double mass_numeric(const ConeWindow& w, double theta, double tol = 1e-10) {
  w.validate();
  const std::size_t n = w.order();
  const double nfact = special::factorial(static_cast<unsigned>(n));
  const double yhi = w.y.hi;
  std::vector<double> edges{w.y.lo, w.y.hi};
  for (const auto& iv : w.x) {
    edges.push_back(iv.lo);
    edges.push_back(iv.hi);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::function<double(std::size_t, double, double)> level = [&](std::size_t i, double lower,
                                                                  double level_tol) -> double {
    if (i == n) {
      const double a = std::max(w.y.lo, lower);
      if (!(yhi > a)) return 0.0;
      const double tail = std::isfinite(yhi) ? std::pow(yhi, -static_cast<double>(n)) : 0.0;
      return theta * nfact / static_cast<double>(n) * (std::pow(a, -static_cast<double>(n)) - tail);
    }
    const double a = std::max(w.x[i].lo, lower);
    const double b = std::min(w.x[i].hi, yhi);
    if (!(b > a)) return 0.0;
    // the inner integral has kinks where its lower limit crosses a window edge
    std::vector<double> cuts{a};
    for (double e : edges)
      if (e > a && e < b) cuts.push_back(e);
    cuts.push_back(b);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      sum += detail::integrate([&](double x) { return level(i + 1, x, level_tol); }, cuts[k], cuts[k + 1], level_tol);
    return sum;
  };
  return level(0, 0.0, tol);
}

/// B_{N->M}: the window lifted to X_M by appending coordinates
/// x_{N+1} = y <= x_{N+2} <= ... <= x_{M+1}, unconstrained above.
inline ConeWindow lift(const ConeWindow& w, std::size_t m) {
  if (m < w.order()) throw std::invalid_argument("lift: target order below window order");
  if (m == w.order()) return w;
  ConeWindow out;
  out.x = w.x;
  out.x.push_back(w.y);
  while (out.x.size() < m) out.x.push_back(Interval{0.0, kInf});
  out.y = Interval{w.y.lo, kInf};
  return out;
}

struct ConsistencyResult {
  double mass_n = 0.0;
  double mass_m_lifted = 0.0;
  double diff = 0.0;
};

/// mu^(M)(B_{N->M}) against mu^(N)(B_N).
inline ConsistencyResult consistency_check(const ConeWindow& w, std::size_t m, double theta) {
  if (m > 16) throw std::invalid_argument("consistency_check: M must be <= 16");
  ConsistencyResult r;
  r.mass_n = mass(w, theta);
  r.mass_m_lifted = m == w.order() ? r.mass_n : mass(lift(w, m), theta);
  r.diff = r.mass_m_lifted - r.mass_n;
  return r;
}

// ---------------------------------------------------------------------------
// Two-time block-count constants

/// lambda_{ij} = (theta/j) C(j,i) alpha^-i (1 - 1/alpha)^(j-i), 0 <= i <= j, j >= 1.
inline double lambda_ij(double theta, double alpha, unsigned i, unsigned j) {
  if (!(alpha > 1.0)) throw std::invalid_argument("lambda_ij: alpha must exceed 1");
  if (j == 0 || i > j) throw std::invalid_argument("lambda_ij: need 0 <= i <= j, j >= 1");
  const double q = 1.0 / alpha;
  return theta / j * special::choose(j, i) * std::pow(q, i) * std::pow(1.0 - q, j - i);
}

/// lambda_{i,>N} = (theta/i) I_{1-1/alpha}(N-i+1, i).
inline double lambda_tail(double theta, double alpha, unsigned i, unsigned n) {
  if (!(alpha > 1.0)) throw std::invalid_argument("lambda_tail: alpha must exceed 1");
  if (i == 0 || i > n) throw std::invalid_argument("lambda_tail: need 1 <= i <= N");
  return theta / i * special::reg_inc_beta(1.0 - 1.0 / alpha, n - i + 1.0, static_cast<double>(i));
}

/// The same tail as theta/i minus the finite row sum.
inline double lambda_tail_by_rows(double theta, double alpha, unsigned i, unsigned n) {
  double row = 0.0;
  for (unsigned j = i; j <= n; ++j) row += lambda_ij(theta, alpha, i, j);
  return theta / i - row;
}

/// Negative binomial CDF sum_{j<=N-i} C(j+i-1, j) alpha^-i (1-1/alpha)^j
/// and its incomplete-beta form I_{1/alpha}(i, N-i+1).
struct NegBinIdentity {
  double cdf_sum = 0.0;
  double beta_form = 0.0;
  bool holds = false;
};

inline NegBinIdentity negbin_cdf_identity_check(unsigned i, double alpha, unsigned n,
                                                double tol = 1e-12) {
  if (i == 0 || n < i || !(alpha > 1.0))
    throw std::invalid_argument("negbin_cdf_identity_check: need i >= 1, N >= i, alpha > 1");
  const double q = 1.0 / alpha;
  NegBinIdentity r;
  for (unsigned j = 0; j <= n - i; ++j)
    r.cdf_sum += special::choose(j + i - 1, j) * std::pow(q, i) * std::pow(1.0 - q, j);
  r.beta_form = special::reg_inc_beta(q, i, n - i + 1.0);
  r.holds = std::fabs(r.cdf_sum - r.beta_form) <= tol;
  return r;
}

// ---------------------------------------------------------------------------
// Windows used by the verification suites

/// B_ij^(N): x_1..x_i in (0,1], x_{i+1}..x_j in (1,alpha], x_{j+1}..x_N and y
/// beyond alpha.
inline ConeWindow window_b(unsigned n, unsigned i, unsigned j, double alpha) {
  if (j == 0 || i > j || j > n) throw std::invalid_argument("window_b: need 0 <= i <= j <= N, j >= 1");
  ConeWindow w;
  for (unsigned p = 1; p <= n; ++p) {
    if (p <= i)
      w.x.push_back({0.0, 1.0});
    else if (p <= j)
      w.x.push_back({1.0, alpha});
    else
      w.x.push_back({alpha, kInf});
  }
  w.y = {alpha, kInf};
  return w;
}

/// B_{i,>N}^(N): x_1..x_i in (0,1], x_{i+1}..x_N in (1,alpha], y in (1,alpha].
inline ConeWindow window_b_tail(unsigned n, unsigned i, double alpha) {
  if (i == 0 || i > n) throw std::invalid_argument("window_b_tail: need 1 <= i <= N");
  ConeWindow w;
  for (unsigned p = 1; p <= n; ++p) w.x.push_back(p <= i ? Interval{0.0, 1.0} : Interval{1.0, alpha});
  w.y = {1.0, alpha};
  return w;
}

/// G_{k,beta}^(N): x_k <= beta < x_{k+1}, y > beta. Its atoms are the blocks
/// of size exactly k at time beta.
inline ConeWindow window_g(unsigned n, unsigned k, double beta) {
  if (k == 0 || k > n) throw std::invalid_argument("window_g: need 1 <= k <= N");
  ConeWindow w;
  for (unsigned p = 1; p <= n; ++p) w.x.push_back(p <= k ? Interval{0.0, beta} : Interval{beta, kInf});
  w.y = {beta, kInf};
  return w;
}

/// T_ij = (t_{i-1}, t_i] x (t_j, t_{j+1}] for a grid 0 = t_0 < t_1 < ... < t_r,
/// t_{r+1} = +inf; 1 <= i <= j <= r.
inline ConeWindow window_t(const std::vector<double>& grid, unsigned i, unsigned j) {
  const auto r = static_cast<unsigned>(grid.size());
  if (i == 0 || i > j || j > r) throw std::invalid_argument("window_t: need 1 <= i <= j <= r");
  const double x_lo = i == 1 ? 0.0 : grid[i - 2];
  const double y_hi = j == r ? kInf : grid[j];
  return ConeWindow{{Interval{x_lo, grid[i - 1]}}, Interval{grid[j - 1], y_hi}};
}

/// {x <= t_max, y > max(x, t_min)}: every atom that can influence X_1 or L on
/// [t_min, t_max]. Mass theta (1 + log(t_max / t_min)).
inline ConeWindow window_covering(double t_min, double t_max) {
  if (!(t_min > 0.0) || !(t_max >= t_min))
    throw std::invalid_argument("window_covering: need 0 < t_min <= t_max");
  return ConeWindow{{Interval{0.0, t_max}}, Interval{t_min, kInf}};
}

}  // namespace crpx::intensity
