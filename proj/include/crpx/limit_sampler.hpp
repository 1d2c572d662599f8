#pragma once

// Samplers for the limit objects: the Poisson random measure with intensity
// mu^(N) on a cone window, the paths X_1 and L built from its N=1 atoms, and
// the closed-form laws of (S_delta, T_delta) and of the short-lived singleton
// counting process Q.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "crpx/cone.hpp"
#include "crpx/intensity.hpp"
#include "crpx/rng.hpp"

namespace crpx::limit {

struct PoissonMeasureSample {
  ConeWindow window;
  std::vector<ConePoint> atoms;
  std::uint64_t count = 0;
};

inline constexpr double kMinAcceptance = 1e-4;

namespace detail {

using intensity::detail::Piecewise;
using intensity::detail::Real;

inline Real value_at(const Piecewise& g, Real z) { return intensity::detail::eval(g.pieces[g.piece_of(z)], z); }

// integral over (a, b] of g(s) s^-(n+1) ds, b may be +inf
inline Real weighted_integral(const Piecewise& g, int n, Real a, Real b) {
  const Piecewise v = g.refined({a, b});
  Real total = 0;
  for (std::size_t j = 0; j < v.cuts.size(); ++j) {
    const Real lo = std::max(a, v.cuts[j]);
    const Real hi = std::min(b, v.upper(j));
    if (!(hi > lo)) continue;
    const auto& p = v.pieces[j];
    for (std::size_t k = 0; k < p.size(); ++k)
      if (p[k] != 0) total += p[k] * intensity::detail::power_integral(static_cast<int>(k) - n - 1, lo, hi);
  }
  return total;
}

// Smallest z in (lo, hi] with f(z) >= target for nondecreasing f, to double
// resolution.
template <class F>
double bisect(F&& f, double lo, double hi, Real target) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (f(mid) >= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace detail

/// Draws atoms of mu^(N) restricted to a window, normalised.
///
/// Bounded y: envelope sampling. y has density prop. to 1/y on (l_y, u_y],
/// x_1 <= ... <= x_N are sorted uniforms on (0, y]; proposals outside the box
/// are rejected. Unbounded y: inversion. y is drawn from its exact marginal
/// V(y) y^-(N+1) and then x_N, ..., x_1 one at a time from their conditional
/// laws, all by bisection on the piecewise-polynomial volumes.
class WindowSampler {
 public:
  enum class Method { Envelope, Inversion };

  WindowSampler(const ConeWindow& w, double theta) : w_(w), theta_(theta) {
    mass_ = intensity::mass(w, theta);
    if (mass_ == 0.0) return;
    method_ = std::isfinite(w.y.hi) ? Method::Envelope : Method::Inversion;
    if (method_ == Method::Envelope) {
      acceptance_ = mass_ / (theta * std::log(w.y.hi / w.y.lo));
      if (acceptance_ < kMinAcceptance)
        throw std::runtime_error("sample_xi: rejection acceptance below 1e-4; split the window");
    }
    prepare_inversion();
  }

  double mass() const noexcept { return mass_; }
  double acceptance() const noexcept { return acceptance_; }
  Method method() const noexcept { return method_; }

  ConePoint draw_atom(Stream& rng) const {
    if (mass_ == 0.0) throw std::logic_error("WindowSampler: window has zero mass");
    return method_ == Method::Envelope ? draw_envelope(rng) : draw_inversion(rng);
  }

  /// The inversion route, available for every window with positive mass.
  ConePoint draw_inversion(Stream& rng) const {
    const int n = static_cast<int>(w_.order());
    const auto& g = chain_.back();
    const detail::Real target = static_cast<detail::Real>(rng.uniform_pos()) * y_total_;
    auto cdf = [&](double y) { return detail::weighted_integral(g, n, w_.y.lo, y); };
    double hi = w_.y.hi;
    if (!std::isfinite(hi)) {
      hi = 2.0 * std::max(w_.y.lo, static_cast<double>(g.cuts.back()));
      while (cdf(hi) < target) hi *= 2.0;
    }
    ConePoint p;
    p.y = detail::bisect(cdf, w_.y.lo, hi, target);
    p.x.assign(w_.order(), 0.0);
    double z = p.y;
    for (std::size_t k = w_.order(); k-- > 0;) {
      const auto& gk = chain_[k + 1];
      const double top = std::min(z, w_.x[k].hi);
      const detail::Real t = static_cast<detail::Real>(rng.uniform_pos()) * detail::value_at(gk, top);
      z = detail::bisect([&](double x) { return detail::value_at(gk, x); }, w_.x[k].lo, top, t);
      p.x[k] = z;
    }
    return p;
  }

  ConePoint draw_envelope(Stream& rng) const {
    const std::size_t n = w_.order();
    const double ratio = w_.y.hi / w_.y.lo;
    ConePoint p;
    p.x.resize(n);
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (attempt > 100'000'000ULL) throw std::runtime_error("sample_xi: rejection loop did not terminate");
      p.y = w_.y.lo * std::pow(ratio, rng.uniform_pos());
      for (auto& x : p.x) x = rng.uniform_pos() * p.y;
      std::sort(p.x.begin(), p.x.end());
      if (w_.contains(p)) return p;
    }
  }

  PoissonMeasureSample sample(Stream& rng) const {
    PoissonMeasureSample s;
    s.window = w_;
    s.count = rng.poisson(mass_);
    s.atoms.reserve(s.count);
    for (std::uint64_t i = 0; i < s.count; ++i) s.atoms.push_back(draw_atom(rng));
    return s;
  }

 private:
  void prepare_inversion() {
    chain_.clear();
    chain_.emplace_back();
    for (const auto& iv : w_.x) chain_.push_back(chain_.back().clamped_integral(iv.lo, iv.hi));
    y_total_ = detail::weighted_integral(chain_.back(), static_cast<int>(w_.order()), w_.y.lo, w_.y.hi);
  }

  ConeWindow w_;
  double theta_;
  double mass_ = 0.0;
  double acceptance_ = 1.0;
  Method method_ = Method::Envelope;
  std::vector<detail::Piecewise> chain_;
  detail::Real y_total_ = 0;
};

/// One realisation of Xi^(N) restricted to the window.
inline PoissonMeasureSample sample_xi(const ConeWindow& w, double theta, Stream& rng) {
  return WindowSampler(w, theta).sample(rng);
}

// ---------------------------------------------------------------------------
// Paths from N=1 atoms

/// X_1(t) = #{atoms : x <= t < y} at each grid point.
inline std::vector<std::uint64_t> path_X1(const std::vector<ConePoint>& atoms, const std::vector<double>& t_grid) {
  std::vector<std::uint64_t> out(t_grid.size(), 0);
  for (std::size_t g = 0; g < t_grid.size(); ++g)
    for (const auto& a : atoms)
      if (a.x.at(0) <= t_grid[g] && t_grid[g] < a.y) ++out[g];
  return out;
}

/// L(t): smallest x among atoms with x <= t < y, or t if there is none.
inline std::vector<double> path_L(const std::vector<ConePoint>& atoms, const std::vector<double>& t_grid) {
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    double best = t;
    for (const auto& a : atoms)
      if (a.x.at(0) <= t && t < a.y) best = std::min(best, a.x[0]);
    out.push_back(best);
  }
  return out;
}

/// lambda'_{ij} = theta (t_i - t_{i-1}) (1/t_j - 1/t_{j+1}), t_0 = 0,
/// t_{r+1} = inf; entry [i-1][j-1], zero below the diagonal.
inline std::vector<std::vector<double>> lambda_prime(double theta, const std::vector<double>& grid) {
  const std::size_t r = grid.size();
  std::vector<std::vector<double>> lam(r, std::vector<double>(r, 0.0));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i; j < r; ++j) {
      const double width = grid[i] - (i == 0 ? 0.0 : grid[i - 1]);
      const double tail = 1.0 / grid[j] - (j + 1 < r ? 1.0 / grid[j + 1] : 0.0);
      lam[i][j] = theta * width * tail;
    }
  return lam;
}

/// E prod z_m^{X_1(t_m)} = exp(sum_{i<=j} lambda'_{ij} (z_i ... z_j - 1)).
inline double pgf_x1(double theta, const std::vector<double>& grid, const std::vector<double>& z) {
  if (z.size() != grid.size()) throw std::invalid_argument("pgf_x1: z and grid differ in length");
  const auto lam = lambda_prime(theta, grid);
  double expo = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double prod = 1.0;
    for (std::size_t j = i; j < grid.size(); ++j) {
      prod *= z[j];
      expo += lam[i][j] * (prod - 1.0);
    }
  }
  return std::exp(expo);
}

/// P{L(t_m) > x_m for all m} = exp(-theta sum_m x*_m (1/t_m - 1/t_{m+1}))
/// with x*_m = max_{k<=m} x_k, and 0 as soon as some x_m >= t_m.
inline double survival_L(double theta, const std::vector<double>& grid, const std::vector<double>& x) {
  if (x.size() != grid.size()) throw std::invalid_argument("survival_L: x and grid differ in length");
  double expo = 0.0;
  double running = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    if (x[m] >= grid[m]) return 0.0;
    running = std::max(running, x[m]);
    const double tail = 1.0 / grid[m] - (m + 1 < grid.size() ? 1.0 / grid[m + 1] : 0.0);
    expo += running * tail;
  }
  return std::exp(-theta * expo);
}

/// Counts of atoms in the boxes T_ij = (t_{i-1}, t_i] x (t_j, t_{j+1}].
inline std::vector<std::vector<std::uint64_t>> t_box_counts(const std::vector<ConePoint>& atoms,
                                                            const std::vector<double>& grid) {
  const auto r = static_cast<unsigned>(grid.size());
  std::vector<std::vector<std::uint64_t>> out(r, std::vector<std::uint64_t>(r, 0));
  for (unsigned i = 1; i <= r; ++i)
    for (unsigned j = i; j <= r; ++j) {
      const auto w = intensity::window_t(grid, i, j);
      for (const auto& a : atoms) out[i - 1][j - 1] += w.contains(a) ? 1 : 0;
    }
  return out;
}

/// X_1(t_m) = sum over i <= m <= j of the T_ij counts.
inline std::vector<std::uint64_t> reassemble_X1(const std::vector<std::vector<std::uint64_t>>& boxes) {
  const std::size_t r = boxes.size();
  std::vector<std::uint64_t> out(r, 0);
  for (std::size_t m = 0; m < r; ++m)
    for (std::size_t i = 0; i <= m; ++i)
      for (std::size_t j = m; j < r; ++j) out[m] += boxes[i][j];
  return out;
}

// ---------------------------------------------------------------------------
// (S_delta, T_delta)

/// f(s, t) = theta/(s+t)^2 (1 + t/delta)^-theta on s >= delta, t >= 0.
inline double st_density(double s, double t, double delta, double theta) {
  if (s < delta || t < 0.0) return 0.0;
  return theta / ((s + t) * (s + t)) * std::pow(1.0 + t / delta, -theta);
}

/// P{T_delta <= t} = 1 - (1 + t/delta)^-theta.
inline double t_cdf(double t, double delta, double theta) {
  return t <= 0.0 ? 0.0 : -std::expm1(-theta * std::log1p(t / delta));
}

/// P{S_delta <= s | T_delta = t} = 1 - (delta + t)/(s + t), s >= delta.
inline double s_given_t_cdf(double s, double t, double delta) {
  return s <= delta ? 0.0 : 1.0 - (delta + t) / (s + t);
}

/// P{S_delta <= s}, by quadrature of the conditional law against T.
inline double s_cdf(double s, double delta, double theta) {
  if (s <= delta) return 0.0;
  auto f = [&](double t) {
    return theta / delta * std::pow(1.0 + t / delta, -theta - 1.0) * s_given_t_cdf(s, t, delta);
  };
  return intensity::detail::integrate(f, 0.0, kInf, 1e-12);
}

struct ShortLivedSample {
  double s = 0.0;
  double t = 0.0;
};

inline ShortLivedSample sample_ST(double delta, double theta, Stream& rng) {
  if (!(delta > 0.0) || !(theta > 0.0)) throw std::invalid_argument("sample_ST: need delta, theta > 0");
  ShortLivedSample out;
  out.t = delta * std::expm1(-std::log(rng.uniform_pos()) / theta);
  out.s = (delta + out.t) / (1.0 - rng.uniform()) - out.t;
  return out;
}

/// Argmin of y - x over atoms of Xi^(1) with x in (delta, x_max]; nullopt
/// when the truncated window holds no atom.
inline std::optional<ShortLivedSample> sample_ST_by_atoms(double delta, double theta, double x_max, Stream& rng) {
  const auto xi = sample_xi(ConeWindow{{Interval{delta, x_max}}, Interval{delta, kInf}}, theta, rng);
  std::optional<ShortLivedSample> best;
  for (const auto& a : xi.atoms) {
    const double life = a.y - a.x[0];
    if (!best || life < best->t || (life == best->t && a.x[0] < best->s)) best = ShortLivedSample{a.x[0], life};
  }
  return best;
}

/// P{S_delta > x_max}: the probability that truncating the strip at x_max
/// changes the argmin.
inline double st_truncation_error(double delta, double theta, double x_max) {
  auto f = [&](double t) { return theta * std::pow(1.0 + t / delta, -theta) / (x_max + t); };
  return intensity::detail::integrate(f, 0.0, kInf, 1e-14);
}

// ---------------------------------------------------------------------------
// Q(t) = Z(theta log(1 + t/delta))

inline double q_cumulative_intensity(double t, double delta, double theta) {
  return t <= 0.0 ? 0.0 : theta * std::log1p(t / delta);
}

/// Event times of Q up to t_max, from unit-rate arrivals E_k mapped through
/// t = delta (e^{E/theta} - 1).
inline std::vector<double> sample_Q_path(double delta, double theta, double t_max, Stream& rng) {
  if (!(delta > 0.0) || !(theta > 0.0) || !(t_max >= 0.0))
    throw std::invalid_argument("sample_Q_path: need delta, theta > 0 and t_max >= 0");
  std::vector<double> times;
  double e = 0.0;
  for (;;) {
    e += rng.exponential();
    const double t = delta * std::expm1(e / theta);
    if (t > t_max) break;
    times.push_back(t);
  }
  return times;
}

/// Right-continuous counting path #{event <= t} on a grid.
inline std::vector<std::uint64_t> counting_path(const std::vector<double>& times, const std::vector<double>& t_grid) {
  std::vector<std::uint64_t> out;
  out.reserve(t_grid.size());
  for (double t : t_grid)
    out.push_back(static_cast<std::uint64_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin()));
  return out;
}

}  // namespace crpx::limit
