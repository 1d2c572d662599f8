#pragma once

// Verification suites. Each suite simulates the process (or evaluates the
// exact oracles), compares with the limit laws and returns a SuiteReport.
// Every random number descends from SuiteConfig::seed through named
// sub-streams and per-replicate results are reduced in replicate order, so a
// report depends only on its configuration, never on the worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crpx/crp_engine.hpp"
#include "crpx/exact_oracle.hpp"
#include "crpx/intensity.hpp"
#include "crpx/limit_sampler.hpp"
#include "crpx/parallel.hpp"
#include "crpx/rng.hpp"
#include "crpx/stats.hpp"

namespace crpx::verify {

using stats::GofReport;
using stats::Json;

struct SuiteConfig {
  std::string suite;
  std::uint64_t seed = 1;
  unsigned workers = 0;  // not part of the report
  std::vector<double> thetas{1.0};
  std::vector<std::uint64_t> ns{100000};
  std::uint64_t reps = 2000;
  std::uint64_t limit_reps = 10000;
  double threshold = stats::kDefaultThreshold;
  double alpha = 2.0;
  double delta = 0.5;
  unsigned order = 1;
  std::vector<double> grid;
  std::vector<double> points;
  std::vector<double> marginal_grid;
  double horizon_factor = 1.0;  // horizon = horizon_factor * n
  std::string engine = "full";  // full | singleton
  std::uint64_t families = 1000;

  Json to_json() const {
    return Json{{"suite", suite},
                {"seed", seed},
                {"thetas", thetas},
                {"ns", ns},
                {"reps", reps},
                {"limit_reps", limit_reps},
                {"threshold", threshold},
                {"alpha", alpha},
                {"delta", delta},
                {"order", order},
                {"grid", grid},
                {"points", points},
                {"marginal_grid", marginal_grid},
                {"horizon_factor", horizon_factor},
                {"engine", engine},
                {"families", families}};
  }
};

struct SuiteReport {
  std::string suite;
  Json config;
  std::vector<GofReport> reports;
  bool pass = true;

  void add(GofReport r) {
    pass = pass && r.pass;
    reports.push_back(std::move(r));
  }

  Json to_json() const {
    Json out{{"suite", suite}, {"pass", pass}, {"config", config}, {"reports", Json::array()}};
    for (const auto& r : reports) out["reports"].push_back(stats::to_json(r));
    return out;
  }

  std::string dump() const { return to_json().dump(2); }

  const GofReport& find(const std::string& test) const {
    for (const auto& r : reports)
      if (r.test == test) return r;
    throw std::out_of_range("SuiteReport: no test named " + test);
  }
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"theorem1", "counts", "fpc",    "minpoint", "shortlived",
                                              "qprocess", "lemma2", "oracle", "ewens",    "measure"};
  return names;
}

/// Defaults of each suite; these are the acceptance configurations.
inline SuiteConfig default_config(const std::string& suite) {
  SuiteConfig c;
  c.suite = suite;
  if (suite == "theorem1") {
    c.seed = 11;
    c.reps = 2000;
    c.order = 2;
    c.horizon_factor = 2.0;
  } else if (suite == "counts") {
    c.seed = 5;
    c.reps = 5000;
    c.limit_reps = 20000;
    c.alpha = 2.0;
    c.order = 3;
  } else if (suite == "fpc") {
    c.seed = 13;
    c.reps = 2000;
    c.grid = {1.0, 2.0};
    c.points = {0.3, 0.7, 1.2};
    c.marginal_grid = {0.5, 1.0, 2.0, 8.0};
  } else if (suite == "minpoint") {
    c.seed = 17;
    c.reps = 4000;
    c.grid = {1.0, 2.0};
    c.points = {0.5, 0.8};
  } else if (suite == "shortlived") {
    c.seed = 19;
    c.reps = 2000;
    c.limit_reps = 10000;
    c.delta = 0.5;
    c.horizon_factor = 50000.0;
    c.engine = "singleton";
  } else if (suite == "qprocess") {
    c.seed = 23;
    c.reps = 4000;
    c.delta = 1.0;
    c.grid = {std::expm1(0.5), std::expm1(1.0), std::expm1(2.0), std::expm1(3.0)};
    c.horizon_factor = 100000.0;
    c.engine = "singleton";
  } else if (suite == "lemma2") {
    c.thetas = {1.0, 2.5};
    c.ns = {100, 250, 500, 1000, 2000};
    c.reps = 0;
  } else if (suite == "oracle") {
    c.seed = 3;
    c.thetas = {0.3, 1.0, 2.7};
    c.families = 1000;
    c.reps = 0;
  } else if (suite == "ewens") {
    c.seed = 29;
    c.thetas = {0.5, 1.0, 2.0};
    c.ns = {1, 2, 3, 4, 5};
    c.reps = 1000000;
  } else if (suite == "measure") {
    c.seed = 31;
    c.thetas = {1.0, 2.5};
    c.reps = 20;
  } else {
    throw std::invalid_argument("unknown suite: " + suite);
  }
  return c;
}

namespace detail {

inline std::uint64_t rep_seed(const SuiteConfig& c, std::uint64_t param, std::uint64_t rep,
                              std::string_view purpose = "trajectory") {
  return derive_seed(c.seed, {name_id(c.suite), param, rep, name_id(purpose)});
}

inline std::uint64_t horizon_of(const SuiteConfig& c, std::uint64_t n) {
  const long double h = std::ceil(static_cast<long double>(c.horizon_factor) * static_cast<long double>(n));
  if (!(h >= 1.0L)) throw std::invalid_argument("horizon_factor * n must be at least 1");
  return static_cast<std::uint64_t>(h);
}

inline TrajectoryObservables simulate(const SuiteConfig& c, const CrpParams& p, const TrackerConfig& t) {
  if (c.engine == "singleton") return run_singletons(p, t);
  if (c.engine == "full") return run(p, t);
  throw std::invalid_argument("unknown engine: " + c.engine);
}

inline std::string tag(const std::string& base, double theta, std::uint64_t n) {
  Json j{{"theta", theta}, {"n", n}};
  return base + " " + j.dump();
}

inline std::vector<std::uint64_t> snapshot_steps(std::uint64_t n, const std::vector<double>& ts, std::uint64_t horizon) {
  std::vector<std::uint64_t> s;
  for (double t : ts) {
    const std::uint64_t v = scaled_floor(n, t);
    if (v == 0 || v > horizon) throw std::invalid_argument("grid time outside [1/n, horizon/n]");
    s.push_back(v);
  }
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

inline std::uint64_t snapshot_value(const TrajectoryObservables& obs, std::uint64_t step, unsigned k) {
  for (const auto& snap : obs.count_snapshots)
    if (snap.step == step) return snap.counts.at(k - 1);
  throw std::out_of_range("snapshot not recorded");
}

// C_1 at each snapshot against the atom count of {x <= t < y} plus the
// singletons still open at the horizon; returns the number of mismatches.
inline std::uint64_t bridge_mismatches(const TrajectoryObservables& obs) {
  std::uint64_t bad = 0;
  for (const auto& snap : obs.count_snapshots)
    if (snap.counts.at(0) != singleton_count_at(obs.atoms(1), obs.open_by_order.at(0), snap.step)) ++bad;
  return bad;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// theorem1: window counts of the scaled point measures against Pois(mass)

inline std::vector<std::pair<std::string, ConeWindow>> theorem1_windows() {
  return {
      {"N1 x(0.2,1] y(1,2]", ConeWindow{{Interval{0.2, 1.0}}, Interval{1.0, 2.0}}},
      {"N1 x(0.1,0.5] y(0.5,1.5]", ConeWindow{{Interval{0.1, 0.5}}, Interval{0.5, 1.5}}},
      {"N1 x(0.05,1] y(0.2,2]", ConeWindow{{Interval{0.05, 1.0}}, Interval{0.2, 2.0}}},
      {"N2 x(0,0.5]x(0.5,1] y(1,2]", ConeWindow{{Interval{0.0, 0.5}, Interval{0.5, 1.0}}, Interval{1.0, 2.0}}},
      {"N2 x(0,1]x(0,1] y(0.5,2]", ConeWindow{{Interval{0.0, 1.0}, Interval{0.0, 1.0}}, Interval{0.5, 2.0}}},
      {"N2 x(0.1,0.6]x(0.3,1.5] y(0.4,2]", ConeWindow{{Interval{0.1, 0.6}, Interval{0.3, 1.5}}, Interval{0.4, 2.0}}},
  };
}

inline SuiteReport verify_theorem1(const SuiteConfig& c) {
  SuiteReport rep{c.suite, c.to_json(), {}, true};
  const auto windows = theorem1_windows();
  unsigned n_max = 1;
  for (const auto& [name, w] : windows) n_max = std::max<unsigned>(n_max, static_cast<unsigned>(w.order()));
  std::uint64_t param = 0;
  for (double theta : c.thetas)
    for (std::uint64_t n : c.ns) {
      const std::uint64_t horizon = detail::horizon_of(c, n);
      for (const auto& [name, w] : windows)
        if (w.y.hi * static_cast<double>(n) > static_cast<double>(horizon))
          throw std::invalid_argument("theorem1: window " + name + " reaches beyond the horizon");
      TrackerConfig trackers;
      trackers.n_max = n_max;
      trackers.snapshot_steps = detail::snapshot_steps(n, {0.5, 1.0, c.horizon_factor}, horizon);

      struct Result {
        std::vector<std::uint64_t> counts;
        std::uint64_t bridge_bad = 0;
      };
      const auto results = parallel_map(c.reps, c.workers, [&](std::size_t r) {
        const auto obs = run(CrpParams{theta, detail::rep_seed(c, param, r), horizon}, trackers);
        Result out;
        for (const auto& [name, w] : windows) out.counts.push_back(count_atoms(obs.atoms(static_cast<unsigned>(w.order())), w, n));
        out.bridge_bad = detail::bridge_mismatches(obs);
        return out;
      });

      std::uint64_t bridge_bad = 0;
      for (const auto& r : results) bridge_bad += r.bridge_bad;
      rep.add(stats::exact_check(static_cast<double>(bridge_bad), 0.0, c.reps,
                                 detail::tag("C1 equals atoms in {x<=t<y}", theta, n)));

      for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        const auto& [name, w] = windows[wi];
        const double mass = intensity::mass(w, theta);
        std::vector<std::uint64_t> counts;
        counts.reserve(results.size());
        std::uint64_t zeros = 0;
        for (const auto& r : results) {
          counts.push_back(r.counts[wi]);
          zeros += r.counts[wi] == 0 ? 1 : 0;
        }
        rep.add(stats::chi2_poisson(counts, mass, detail::tag("poisson " + name, theta, n), c.threshold)
                    .with("mass", mass));
        rep.add(stats::proportion_band(zeros, c.reps, std::exp(-mass), detail::tag("void " + name, theta, n)));
        rep.add(stats::mean_band(counts, mass, detail::tag("mean " + name, theta, n)));
      }
      ++param;
    }
  return rep;
}

// ---------------------------------------------------------------------------
// counts: block counts at n and floor(alpha n)

inline SuiteReport verify_prop_counts(const SuiteConfig& c) {
  SuiteReport rep{c.suite, c.to_json(), {}, true};
  const unsigned big_n = c.order;
  if (big_n < 1 || big_n > 5) throw std::invalid_argument("counts: order must be in 1..5");
  if (!(c.alpha > 1.0)) throw std::invalid_argument("counts: alpha must exceed 1");
  std::uint64_t param = 0;
  for (double theta : c.thetas)
    for (std::uint64_t n : c.ns) {
      const std::uint64_t later = scaled_floor(n, c.alpha);
      if (later <= n) throw std::invalid_argument("counts: floor(alpha n) must exceed n");
      TrackerConfig trackers;
      trackers.n_max = big_n;
      trackers.atoms = false;
      trackers.snapshot_steps = {n, later};

      // row r < N: C_{r+1}(P_n); row N + r: C_{r+1}(P_{alpha n})
      const auto results = parallel_map(c.reps, c.workers, [&](std::size_t r) {
        const auto obs = run(CrpParams{theta, detail::rep_seed(c, param, r), later}, trackers);
        std::vector<std::uint64_t> v(2 * big_n);
        for (unsigned k = 1; k <= big_n; ++k) {
          v[k - 1] = detail::snapshot_value(obs, n, k);
          v[big_n + k - 1] = detail::snapshot_value(obs, later, k);
        }
        return v;
      });
      auto column = [&](std::size_t idx) {
        std::vector<std::uint64_t> col;
        col.reserve(results.size());
        for (const auto& r : results) col.push_back(r[idx]);
        return col;
      };

      for (unsigned i = 1; i <= big_n; ++i) {
        double row = intensity::lambda_tail(theta, c.alpha, i, big_n);
        for (unsigned j = i; j <= big_n; ++j) row += intensity::lambda_ij(theta, c.alpha, i, j);
        const auto col = column(i - 1);
        const std::string name = "C" + std::to_string(i) + "(n)";
        rep.add(stats::mean_band(col, row, detail::tag("mean " + name, theta, n)));
        rep.add(stats::chi2_poisson(col, row, detail::tag("poisson " + name, theta, n), c.threshold));
      }
      for (unsigned j = 1; j <= big_n; ++j) {
        double col_sum = 0.0;
        for (unsigned i = 0; i <= j; ++i) col_sum += intensity::lambda_ij(theta, c.alpha, i, j);
        const auto col = column(big_n + j - 1);
        const std::string name = "C" + std::to_string(j) + "(alpha n)";
        rep.add(stats::mean_band(col, col_sum, detail::tag("mean " + name, theta, n)));
        rep.add(stats::chi2_poisson(col, col_sum, detail::tag("poisson " + name, theta, n), c.threshold));
      }
      for (unsigned i = 1; i <= big_n; ++i)
        for (unsigned j = 1; j <= big_n; ++j) {
          const double target = i <= j ? intensity::lambda_ij(theta, c.alpha, i, j) : 0.0;
          rep.add(stats::covariance_band(column(i - 1), column(big_n + j - 1), target,
                                         detail::tag("cov C" + std::to_string(i) + "(n) C" + std::to_string(j) + "(alpha n)",
                                                     theta, n)));
        }

      // joint law of the first min(N,3) coordinates at both times against
      // the construction from independent Poisson variables X_ij
      const unsigned shown = std::min(big_n, 3u);
      Stream limit_rng(detail::rep_seed(c, param, 0, "limit"));
      std::vector<std::vector<std::uint64_t>> pre, lim;
      for (const auto& r : results) {
        std::vector<std::uint64_t> key;
        for (unsigned k = 0; k < shown; ++k) key.push_back(r[k]);
        for (unsigned k = 0; k < shown; ++k) key.push_back(r[big_n + k]);
        pre.push_back(std::move(key));
      }
      for (std::uint64_t s = 0; s < c.limit_reps; ++s) {
        std::vector<std::uint64_t> now(big_n, 0), later_c(big_n, 0);
        for (unsigned j = 1; j <= big_n; ++j)
          for (unsigned i = 0; i <= j; ++i) {
            const std::uint64_t x = limit_rng.poisson(intensity::lambda_ij(theta, c.alpha, i, j));
            later_c[j - 1] += x;
            if (i >= 1) now[i - 1] += x;
          }
        for (unsigned i = 1; i <= big_n; ++i) now[i - 1] += limit_rng.poisson(intensity::lambda_tail(theta, c.alpha, i, big_n));
        std::vector<std::uint64_t> key;
        for (unsigned k = 0; k < shown; ++k) key.push_back(now[k]);
        for (unsigned k = 0; k < shown; ++k) key.push_back(later_c[k]);
        lim.push_back(std::move(key));
      }
      rep.add(stats::chi2_two_sample(pre, lim, detail::tag("joint law vs X_ij construction", theta, n), c.threshold));
      ++param;
    }
  return rep;
}

// ---------------------------------------------------------------------------
// fpc: C_1 along a time grid against the X_1 process

inline SuiteReport verify_prop_fpc(const SuiteConfig& c) {
  SuiteReport rep{c.suite, c.to_json(), {}, true};
  if (c.grid.empty() || c.grid.size() > 4) throw std::invalid_argument("fpc: grid must hold 1..4 times");
  if (!std::is_sorted(c.grid.begin(), c.grid.end())) throw std::invalid_argument("fpc: grid must be increasing");
  std::vector<double> all = c.grid;
  all.insert(all.end(), c.marginal_grid.begin(), c.marginal_grid.end());
  const double t_max = *std::max_element(all.begin(), all.end());

  // z points: every combination of c.points over the grid, plus 0.5 everywhere
  std::vector<std::vector<double>> zs;
  {
    const std::size_t r = c.grid.size();
    std::vector<std::size_t> idx(r, 0);
    if (!c.points.empty())
      for (;;) {
        std::vector<double> z(r);
        for (std::size_t m = 0; m < r; ++m) z[m] = c.points[idx[m]];
        zs.push_back(std::move(z));
        std::size_t m = 0;
        while (m < r && ++idx[m] == c.points.size()) idx[m++] = 0;
        if (m == r) break;
      }
    zs.emplace_back(r, 0.5);
  }

  std::uint64_t param = 0;
  for (double theta : c.thetas)
    for (std::uint64_t n : c.ns) {
      const std::uint64_t horizon = scaled_floor(n, t_max);
      TrackerConfig trackers;
      trackers.n_max = 1;
      trackers.snapshot_steps = detail::snapshot_steps(n, all, horizon);

      struct Result {
        std::vector<std::uint64_t> grid_c1;
        std::vector<std::uint64_t> marginal_c1;
        std::uint64_t bridge_bad = 0;
      };
      const auto results = parallel_map(c.reps, c.workers, [&](std::size_t r) {
        const auto obs = detail::simulate(c, CrpParams{theta, detail::rep_seed(c, param, r), horizon}, trackers);
        Result out;
        for (double t : c.grid) out.grid_c1.push_back(detail::snapshot_value(obs, scaled_floor(n, t), 1));
        for (double t : c.marginal_grid) out.marginal_c1.push_back(detail::snapshot_value(obs, scaled_floor(n, t), 1));
        out.bridge_bad = detail::bridge_mismatches(obs);
        return out;
      });

      std::uint64_t bridge_bad = 0;
      for (const auto& r : results) bridge_bad += r.bridge_bad;
      rep.add(stats::exact_check(static_cast<double>(bridge_bad), 0.0, c.reps,
                                 detail::tag("C1 equals atoms in {x<=t<y}", theta, n)));

      for (const auto& z : zs) {
        std::vector<double> vals;
        vals.reserve(results.size());
        for (const auto& r : results) {
          double v = 1.0;
          for (std::size_t m = 0; m < z.size(); ++m) v *= std::pow(z[m], static_cast<double>(r.grid_c1[m]));
          vals.push_back(v);
        }
        rep.add(stats::mean_band(vals, limit::pgf_x1(theta, c.grid, z),
                                 detail::tag("pgf z=" + Json(z).dump() + " grid=" + Json(c.grid).dump(), theta, n))
                    .with("z", z));
      }
      for (std::size_t g = 0; g < c.marginal_grid.size(); ++g) {
        std::vector<std::uint64_t> col;
        for (const auto& r : results) col.push_back(r.marginal_c1[g]);
        Json t = c.marginal_grid[g];
        rep.add(stats::chi2_poisson(col, theta, detail::tag("X1(t) poisson t=" + t.dump(), theta, n), c.threshold));
      }
      ++param;
    }
  return rep;
}

// ---------------------------------------------------------------------------
// minpoint: least singleton against L

inline SuiteReport verify_prop_ML(const SuiteConfig& c) {
  SuiteReport rep{c.suite, c.to_json(), {}, true};
  if (c.grid.empty() || c.grid.size() != c.points.size())
    throw std::invalid_argument("minpoint: grid and points must have equal, positive length");
  for (std::size_t m = 0; m < c.grid.size(); ++m)
    if (!(c.points[m] < c.grid[m])) throw std::invalid_argument("minpoint: need x_m < t_m");
  const double t_max = *std::max_element(c.grid.begin(), c.grid.end());

  std::uint64_t param = 0;
  for (double theta : c.thetas)
    for (std::uint64_t n : c.ns) {
      const std::uint64_t horizon = scaled_floor(n, t_max);
      TrackerConfig trackers;
      trackers.n_max = 1;
      trackers.atoms = c.engine == "singleton";
      trackers.first_singleton = true;
      trackers.scale = n;

      const auto paths = parallel_map(c.reps, c.workers, [&](std::size_t r) {
        const auto obs = detail::simulate(c, CrpParams{theta, detail::rep_seed(c, param, r), horizon}, trackers);
        return observe_first_singleton(obs, c.grid);
      });

      double min_value = kInf;
      for (const auto& p : paths) min_value = std::min(min_value, *std::min_element(p.begin(), p.end()));
      rep.add(stats::exact_check(min_value > 0.0 ? 0.0 : 1.0, 0.0, c.reps, detail::tag("M''/n > 0", theta, n)));

      for (std::size_t m = 0; m < c.grid.size(); ++m) {
        std::uint64_t hits = 0;
        for (const auto& p : paths) hits += p[m] > c.points[m] ? 1 : 0;
        const double target = limit::survival_L(theta, {c.grid[m]}, {c.points[m]});
        rep.add(stats::proportion_band(hits, c.reps, target,
                                       detail::tag("survival t=" + Json(c.grid[m]).dump() + " x=" + Json(c.points[m]).dump(),
                                                   theta, n)));
      }
      if (c.grid.size() > 1) {
        std::uint64_t hits = 0;
        for (const auto& p : paths) {
          bool all = true;
          for (std::size_t m = 0; m < c.grid.size(); ++m) all = all && p[m] > c.points[m];
          hits += all ? 1 : 0;
        }
        rep.add(stats::proportion_band(hits, c.reps, limit::survival_L(theta, c.grid, c.points),
                                       detail::tag("joint survival grid=" + Json(c.grid).dump() +
                                                       " x=" + Json(c.points).dump(),
                                                   theta, n)));
      }
      ++param;
    }
  return rep;
}

// ---------------------------------------------------------------------------
// shortlived: the fastest singleton born after delta n

inline SuiteReport verify_prop_ST(const SuiteConfig& c) {
  SuiteReport rep{c.suite, c.to_json(), {}, true};
  if (!(c.delta > 0.0)) throw std::invalid_argument("shortlived: delta must be positive");
  std::uint64_t param = 0;
  for (double theta : c.thetas)
    for (std::uint64_t n : c.ns) {
      const std::uint64_t horizon = detail::horizon_of(c, n);
      TrackerConfig trackers;
      trackers.n_max = 1;
      trackers.shortlived_delta = c.delta;
      trackers.scale = n;

      const auto results = parallel_map(c.reps, c.workers, [&](std::size_t r) {
        const auto obs = detail::simulate(c, CrpParams{theta, detail::rep_seed(c, param, r), horizon}, trackers);
        return observe_shortlived(obs, c.delta, n);
      });

      std::vector<double> s_pre, t_pre, d_pre;
      std::uint64_t censored = 0;
      double min_s = kInf;
      std::uint64_t below_delta = 0;
      for (const auto& r : results) {
        if (r.censored) {
          ++censored;
          continue;
        }
        s_pre.push_back(r.s);
        t_pre.push_back(r.t);
        d_pre.push_back(r.s + r.t);
        min_s = std::min(min_s, r.s);
        below_delta += r.t <= c.delta ? 1 : 0;
      }
      const double frac = static_cast<double>(censored) / static_cast<double>(c.reps);
      rep.add(stats::budget_check(frac, 0.01, c.reps, detail::tag("censored fraction", theta, n))
                  .with("censored", censored)
                  .with("horizon", horizon));
      const double floor_s = static_cast<double>(scaled_floor(n, c.delta)) / static_cast<double>(n);
      rep.add(stats::exact_check(min_s >= floor_s ? 0.0 : floor_s - min_s, 0.0, s_pre.size(),
                                 detail::tag("S/n >= floor(delta n)/n", theta, n)));

      const double delta = c.delta;
      rep.add(stats::ks_continuous(t_pre, [&](double t) { return limit::t_cdf(t, delta, theta); },
                                   detail::tag("ks T/n vs Pareto", theta, n), c.threshold));
      rep.add(stats::proportion_band(below_delta, t_pre.size(), limit::t_cdf(delta, delta, theta),
                                     detail::tag("P{T/n <= delta}", theta, n)));

      Stream limit_rng(detail::rep_seed(c, param, 0, "limit"));
      std::vector<double> s_lim, t_lim, d_lim;
      for (std::uint64_t i = 0; i < c.limit_reps; ++i) {
        const auto st = limit::sample_ST(delta, theta, limit_rng);
        s_lim.push_back(st.s);
        t_lim.push_back(st.t);
        d_lim.push_back(st.s + st.t);
      }
      rep.add(stats::ks_two_sample(s_pre, s_lim, detail::tag("ks2 S", theta, n), c.threshold));
      rep.add(stats::ks_two_sample(t_pre, t_lim, detail::tag("ks2 T", theta, n), c.threshold));
      rep.add(stats::ks_two_sample(d_pre, d_lim, detail::tag("ks2 S+T", theta, n), c.threshold));
      ++param;
    }
  return rep;
}

// ---------------------------------------------------------------------------
// qprocess: counts of short-lived singletons against Z(theta log(1 + t/delta))

inline SuiteReport verify_prop_Z(const SuiteConfig& c) {
  SuiteReport rep{c.suite, c.to_json(), {}, true};
  if (c.grid.empty() || !std::is_sorted(c.grid.begin(), c.grid.end()) || !(c.grid.front() > 0.0))
    throw std::invalid_argument("qprocess: grid must be positive and increasing");
  std::uint64_t param = 0;
  for (double theta : c.thetas)
    for (std::uint64_t n : c.ns) {
      const std::uint64_t horizon = detail::horizon_of(c, n);
      TrackerConfig trackers;
      trackers.n_max = 1;
      trackers.scale = n;

      std::vector<double> ts{0.0};
      ts.insert(ts.end(), c.grid.begin(), c.grid.end());
      const auto paths = parallel_map(c.reps, c.workers, [&](std::size_t r) {
        const auto obs = detail::simulate(c, CrpParams{theta, detail::rep_seed(c, param, r), horizon}, trackers);
        return observe_q_path(obs, c.delta, ts, n);
      });

      std::uint64_t q0 = 0;
      for (const auto& p : paths) q0 += p[0];
      rep.add(stats::exact_check(static_cast<double>(q0), 0.0, c.reps, detail::tag("Q(0) = 0", theta, n)));

      std::vector<std::vector<std::uint64_t>> inc(c.grid.size());
      for (const auto& p : paths)
        for (std::size_t g = 0; g < c.grid.size(); ++g) inc[g].push_back(p[g + 1] - p[g]);
      for (std::size_t g = 0; g < c.grid.size(); ++g) {
        const double lo = ts[g], hi = ts[g + 1];
        const double mean = limit::q_cumulative_intensity(hi, c.delta, theta) - limit::q_cumulative_intensity(lo, c.delta, theta);
        const std::string span = "(" + Json(lo).dump() + "," + Json(hi).dump() + "]";
        rep.add(stats::chi2_poisson(inc[g], mean, detail::tag("increment poisson " + span, theta, n), c.threshold));
        rep.add(stats::mean_band(inc[g], mean, detail::tag("increment mean " + span, theta, n)));
      }
      for (std::size_t a = 0; a < c.grid.size(); ++a)
        for (std::size_t b = a + 1; b < c.grid.size(); ++b)
          rep.add(stats::covariance_band(inc[a], inc[b], 0.0,
                                         detail::tag("cov increments " + std::to_string(a + 1) + "," + std::to_string(b + 1),
                                                     theta, n)));
      for (std::size_t g = 0; g < c.grid.size(); ++g) {
        std::vector<std::uint64_t> q;
        for (const auto& p : paths) q.push_back(p[g + 1]);
        rep.add(stats::chi2_poisson(q, limit::q_cumulative_intensity(c.grid[g], c.delta, theta),
                                    detail::tag("Q(t) poisson t=" + Json(c.grid[g]).dump(), theta, n), c.threshold));
      }
      ++param;
    }
  return rep;
}

// ---------------------------------------------------------------------------
// lemma2: exact lattice sums against mass^r

/// Relative gaps below this are rounding noise; at theta = 1 the r = 1 sum
/// telescopes to the mass exactly.
inline constexpr double kLatticeRoundoff = 1e-12;

inline ConeWindow lemma2_window() { return ConeWindow{{Interval{0.5, 1.0}}, Interval{1.0, 2.0}}; }

inline SuiteReport verify_lemma2_riemann(const SuiteConfig& c) {
  SuiteReport rep{c.suite, c.to_json(), {}, true};
  std::vector<std::uint64_t> ns = c.ns;
  std::sort(ns.begin(), ns.end());
  const ConeWindow w = lemma2_window();
  for (double theta : c.thetas) {
    const double mass = intensity::mass(w, theta);
    for (unsigned r = 1; r <= 2; ++r) {
      const double target = std::pow(mass, static_cast<double>(r));
      Json sums = Json::array();
      std::vector<double> gaps;
      double fitted_c = 0.0;
      for (std::uint64_t n : ns) {
        const double sum = oracle::lattice_moment(w, theta, n, r);
        const double gap = std::fabs(sum - target) / target;
        gaps.push_back(gap);
        fitted_c = std::max(fitted_c, gap * static_cast<double>(n));
        sums.push_back(Json{{"n", n}, {"sum", sum}, {"relative_gap", gap}});
      }
      std::uint64_t increases = 0;
      for (std::size_t i = 1; i < gaps.size(); ++i)
        increases += gaps[i] >= gaps[i - 1] && gaps[i] > kLatticeRoundoff ? 1 : 0;
      Json meta{{"theta", theta}, {"r", r}};
      rep.add(stats::exact_check(static_cast<double>(increases), 0.0, ns.size(),
                                 "gap decreasing in n " + meta.dump())
                  .with("sums", sums)
                  .with("limit", target)
                  .with("fitted_C", fitted_c));
      rep.add(stats::budget_check(gaps.back(), 0.02, ns.back(), "relative gap at largest n " + meta.dump()));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// oracle: the two exact routes for joint block probabilities

inline oracle::TupleFamily worked_example() {
  return oracle::TupleFamily{{BlockAtom{{3, 7, 11}, 19}, BlockAtom{{6, 12, 21}, 24}}, 1.0};
}

inline double relative_error(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

inline oracle::TupleFamily random_family(Stream& rng, double theta, std::uint64_t m_max, unsigned r_max, unsigned n_max) {
  const unsigned r = 1 + static_cast<unsigned>(rng.uniform() * r_max);
  const unsigned n = 1 + static_cast<unsigned>(rng.uniform() * n_max);
  std::vector<std::uint64_t> pool;
  std::set<std::uint64_t> used;
  while (pool.size() < r * (n + 1)) {
    const std::uint64_t v = 1 + static_cast<std::uint64_t>(rng.uniform() * static_cast<double>(m_max));
    if (used.insert(v).second) pool.push_back(v);
  }
  oracle::TupleFamily f;
  f.theta = theta;
  for (unsigned s = 0; s < r; ++s) {
    std::vector<std::uint64_t> part(pool.begin() + s * (n + 1), pool.begin() + (s + 1) * (n + 1));
    std::sort(part.begin(), part.end());
    f.tuples.push_back(BlockAtom{{part.begin(), part.end() - 1}, part.back()});
  }
  return f;
}

inline SuiteReport verify_oracle(const SuiteConfig& c) {
  SuiteReport rep{c.suite, c.to_json(), {}, true};

  Stream rng(detail::rep_seed(c, 0, 0, "families"));
  double worst = 0.0;
  for (std::uint64_t i = 0; i < c.families; ++i) {
    const double theta = c.thetas.at(static_cast<std::size_t>(rng.uniform() * static_cast<double>(c.thetas.size())));
    const auto f = random_family(rng, theta, 500, 3, 4);
    const auto a = oracle::joint_probability(f);
    const auto b = oracle::stepwise_probability(f);
    worst = std::max(worst, relative_error(a.value, b.value));
  }
  rep.add(stats::exact_check(worst, 1e-10, c.families, "joint vs stepwise, random families (max relative error)"));

  const auto ex = worked_example();
  const double closed = 36.0 / (57120.0 * 255024.0);
  const double joint = oracle::joint_probability(ex).value;
  const double step = oracle::stepwise_probability(ex).value;
  rep.add(stats::exact_check(relative_error(joint, step), 1e-13, 1, "worked example: joint vs stepwise")
              .with("joint", joint)
              .with("stepwise", step));
  rep.add(stats::exact_check(relative_error(joint, closed), 1e-13, 1, "worked example: joint vs 36/(57120*255024)")
              .with("closed", closed));
  const auto l = oracle::overlap_counts(ex);
  rep.add(stats::exact_check(l == std::vector<std::uint64_t>{2, 0} ? 0.0 : 1.0, 0.0, 1, "worked example: overlap counts")
              .with("l", l));
  const auto sets = oracle::step_sets(ex);
  const std::vector<std::vector<std::uint64_t>> k_expected{{3}, {6}, {3}, {3, 7}, {6}, {3, 7, 11}, {6, 12}, {6, 12, 21}};
  const std::vector<std::vector<std::uint64_t>> l_expected{{3}, {3, 6}, {3, 6, 7}, {3, 6, 7, 11}, {3, 6, 7, 11, 12},
                                                           {6, 12}, {6, 12, 21}, {}};
  rep.add(stats::exact_check(sets.K == k_expected && sets.L == l_expected ? 0.0 : 1.0, 0.0, 1,
                             "worked example: step sets K_j and L_j"));

  // theta -> infinity: P ~ theta^r prod N!/theta^(N+1)
  double worst_large = 0.0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto f = random_family(rng, 1e6, 500, 3, 4);
    double approx = 1.0;
    for (const auto& t : f.tuples)
      approx *= special::factorial(static_cast<unsigned>(t.order())) / std::pow(1e6, static_cast<double>(t.order()));
    worst_large = std::max(worst_large, relative_error(oracle::joint_probability(f).value, approx));
  }
  rep.add(stats::exact_check(worst_large, 1e-2, 50, "large theta asymptotic (theta = 1e6)"));
  return rep;
}

// ---------------------------------------------------------------------------
// ewens: exhaustive laws and Monte Carlo frequencies at small n

inline std::string labels_of(const SetPartition& p) {
  std::uint64_t n = 0;
  for (const auto& b : p) n += b.size();
  std::string s(n, '\0');
  for (std::size_t b = 0; b < p.size(); ++b)
    for (auto e : p[b]) s[e - 1] = static_cast<char>(b);
  return s;
}

inline SuiteReport verify_ewens(const SuiteConfig& c) {
  SuiteReport rep{c.suite, c.to_json(), {}, true};
  constexpr std::uint64_t kChunk = 10000;
  std::uint64_t param = 0;
  for (double theta : c.thetas)
    for (std::uint64_t n : c.ns) {
      if (n < 1 || n > 10) throw std::invalid_argument("ewens: n must be in 1..10");
      const auto dist = oracle::exhaustive_partition_distribution(static_cast<unsigned>(n), theta);
      double total = 0.0, worst = 0.0;
      std::map<std::string, std::size_t> index;
      std::vector<double> probs;
      for (const auto& [blocks, p] : dist) {
        total += p;
        worst = std::max(worst, std::fabs(p - oracle::ewens_partition_pmf(blocks, theta)));
        index.emplace(labels_of(blocks), probs.size());
        probs.push_back(p);
      }
      rep.add(stats::exact_check(std::fabs(total - 1.0), 1e-12, dist.size(), detail::tag("exhaustive law sums to 1", theta, n)));
      rep.add(stats::exact_check(worst, 1e-12, dist.size(), detail::tag("exhaustive law vs Ewens pmf", theta, n)));
      if (n <= 8) {
        const auto by_perm = oracle::cycle_type_law_by_permutations(n, theta);
        const auto by_part = oracle::cycle_type_law(dist, n);
        double err = by_perm.size() == by_part.size() ? 0.0 : 1.0;
        for (const auto& [type, p] : by_perm) {
          auto it = by_part.find(type);
          err = std::max(err, it == by_part.end() ? 1.0 : std::fabs(it->second - p));
        }
        rep.add(stats::exact_check(err, 1e-12, by_perm.size(), detail::tag("cycle-type law: partitions vs permutations", theta, n)));
      }

      if (c.reps > 0) {
        const std::uint64_t chunks = (c.reps + kChunk - 1) / kChunk;
        const auto partial = parallel_map(chunks, c.workers, [&](std::size_t ch) {
          Stream rng(detail::rep_seed(c, param, ch, "chunk"));
          std::vector<std::uint64_t> counts(probs.size(), 0);
          const std::uint64_t todo = std::min<std::uint64_t>(kChunk, c.reps - ch * kChunk);
          std::string key(n, '\0');
          for (std::uint64_t i = 0; i < todo; ++i) {
            PartitionState st(0);
            for (std::uint64_t s = 1; s <= n; ++s) st.apply(draw_insertion(rng, theta, s));
            for (std::uint64_t e = 1; e <= n; ++e) key[e - 1] = static_cast<char>(st.block_of(e));
            ++counts.at(index.at(key));
          }
          return counts;
        });
        std::vector<std::uint64_t> counts(probs.size(), 0);
        for (const auto& part : partial)
          for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += part[i];

        double max_z = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
          const auto band = stats::proportion_band(counts[i], c.reps, probs[i], "");
          max_z = std::max(max_z, std::fabs(band.statistic));
        }
        rep.add(stats::value_band(max_z, 1.0, 0.0, c.reps, detail::tag("MC frequencies, largest |z| over partitions", theta, n))
                    .with("partitions", probs.size()));
        if (c.reps >= 200)
          rep.add(stats::chi2_multinomial(counts, probs, detail::tag("MC frequencies chi2", theta, n), c.threshold));
      }
      ++param;
    }

  // permutations: uniform at theta = 1, n = 3; identity weight at theta = 2, n = 4
  {
    const std::uint64_t draws = 60000;
    std::map<std::vector<std::uint64_t>, std::uint64_t> seen;
    std::vector<std::uint64_t> base{1, 2, 3};
    std::vector<std::vector<std::uint64_t>> perms;
    do perms.push_back(base);
    while (std::next_permutation(base.begin(), base.end()));
    for (std::uint64_t i = 0; i < draws; ++i)
      ++seen[permutation_sample(CrpParams{1.0, detail::rep_seed(c, 1000, i, "perm3"), 3})];
    std::vector<std::uint64_t> counts;
    for (const auto& p : perms) counts.push_back(seen[p]);
    rep.add(stats::chi2_multinomial(counts, std::vector<double>(6, 1.0 / 6.0),
                                    "permutations of [3] uniform at theta=1", c.threshold));

    rep.add(stats::exact_check(std::fabs(oracle::ewens_permutation_pmf(4, 4, 2.0) - 16.0 / 120.0), 1e-15, 1,
                               "identity of [4] at theta=2 has probability 16/120"));
    std::uint64_t ident = 0;
    for (std::uint64_t i = 0; i < draws; ++i) {
      const auto p = permutation_sample(CrpParams{2.0, detail::rep_seed(c, 1001, i, "perm4"), 4});
      ident += p == std::vector<std::uint64_t>{1, 2, 3, 4} ? 1 : 0;
    }
    rep.add(stats::proportion_band(ident, draws, 16.0 / 120.0, "identity frequency of [4] at theta=2"));

    std::uint64_t mismatched = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      const CrpParams p{0.5 + static_cast<double>(i % 4), detail::rep_seed(c, 1002, i, "match"), 50 + i};
      const auto cycles = permutation_run(p);
      const auto blocks = simulate(p).blocks();
      std::vector<std::vector<std::uint64_t>> sorted_cycles;
      for (auto cyc : cycles) {
        std::sort(cyc.begin(), cyc.end());
        sorted_cycles.push_back(std::move(cyc));
      }
      mismatched += sorted_cycles == blocks ? 0 : 1;
    }
    rep.add(stats::exact_check(static_cast<double>(mismatched), 0.0, 200, "cycles of permutation_run equal blocks of the partition run"));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// measure: deterministic identities of mu^(N) and the lambda constants

inline ConeWindow random_window(Stream& rng, unsigned order) {
  ConeWindow w;
  for (unsigned i = 0; i < order; ++i) {
    double a = 3.0 * rng.uniform(), b = 3.0 * rng.uniform();
    if (a > b) std::swap(a, b);
    if (rng.uniform() < 0.25) a = 0.0;
    w.x.push_back({a, b + 0.05});
  }
  const double lo = 0.1 + 2.0 * rng.uniform();
  w.y = {lo, rng.uniform() < 0.3 ? kInf : lo + 0.1 + 3.0 * rng.uniform()};
  return w;
}

inline SuiteReport verify_measure(const SuiteConfig& c) {
  SuiteReport rep{c.suite, c.to_json(), {}, true};
  Stream rng(detail::rep_seed(c, 0, 0, "windows"));
  double scale_err = 0.0, consist_err = 0.0, numeric_err = 0.0;
  std::uint64_t checked = 0;
  for (double theta : c.thetas)
    for (std::uint64_t i = 0; i < c.reps; ++i) {
      const unsigned order = 1 + static_cast<unsigned>(rng.uniform() * 3.0);
      const ConeWindow w = random_window(rng, order);
      const double cfac = std::exp(std::log(0.1) + rng.uniform() * std::log(100.0));
      const double m = intensity::mass(w, theta);
      scale_err = std::max(scale_err, std::fabs(intensity::mass(w.scaled(cfac), theta) - m));
      for (unsigned extra = 0; extra <= 4; ++extra)
        consist_err = std::max(consist_err, std::fabs(intensity::consistency_check(w, order + extra, theta).diff));
      if (order <= 2) numeric_err = std::max(numeric_err, std::fabs(intensity::mass_numeric(w, theta) - m));
      if (order == 1)
        numeric_err = std::max(numeric_err, std::fabs(intensity::mass_numeric(intensity::lift(w, 2), theta) - m));
      ++checked;
    }
  rep.add(stats::exact_check(scale_err, 1e-8, checked, "scale invariance mass(cB) = mass(B)"));
  rep.add(stats::exact_check(consist_err, 1e-8, checked, "consistency mass_M(lift B) = mass_N(B), M <= N+4"));
  rep.add(stats::exact_check(numeric_err, 1e-8, checked, "exact mass vs nested quadrature, N <= 2 and lifted N=1 -> M=2"));

  double row_err = 0.0, tail_err = 0.0, sum_err = 0.0, negbin_err = 0.0;
  for (double theta : c.thetas)
    for (double alpha : {1.5, 2.0, 4.0})
      for (unsigned big_n = 1; big_n <= 8; ++big_n)
        for (unsigned i = 1; i <= std::min(big_n, 5u); ++i) {
          double row = intensity::lambda_tail(theta, alpha, i, big_n);
          for (unsigned j = i; j <= big_n; ++j) row += intensity::lambda_ij(theta, alpha, i, j);
          row_err = std::max(row_err, std::fabs(row - theta / i));
          tail_err = std::max(tail_err, std::fabs(intensity::lambda_tail(theta, alpha, i, big_n) -
                                                  intensity::lambda_tail_by_rows(theta, alpha, i, big_n)));
          double far = 0.0;
          for (unsigned j = big_n + 1; j <= 200; ++j) far += intensity::lambda_ij(theta, alpha, i, j);
          sum_err = std::max(sum_err, std::fabs(far - intensity::lambda_tail(theta, alpha, i, big_n)));
          const auto nb = intensity::negbin_cdf_identity_check(i, alpha, big_n);
          negbin_err = std::max(negbin_err, std::fabs(nb.cdf_sum - nb.beta_form));
        }
  rep.add(stats::exact_check(row_err, 1e-12, 0, "row identity sum_j lambda_ij + lambda_i,>N = theta/i"));
  rep.add(stats::exact_check(tail_err, 1e-12, 0, "tail: incomplete beta vs theta/i minus row"));
  rep.add(stats::exact_check(sum_err, 1e-12, 0, "tail: incomplete beta vs sum_{j=N+1}^{200} lambda_ij"));
  rep.add(stats::exact_check(negbin_err, 1e-12, 0, "negative binomial CDF vs incomplete beta"));
  return rep;
}

// ---------------------------------------------------------------------------

inline SuiteReport run_suite(const SuiteConfig& c) {
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
  if (c.suite == "theorem1") return verify_theorem1(c);
  if (c.suite == "counts") return verify_prop_counts(c);
  if (c.suite == "fpc") return verify_prop_fpc(c);
  if (c.suite == "minpoint") return verify_prop_ML(c);
  if (c.suite == "shortlived") return verify_prop_ST(c);
  if (c.suite == "qprocess") return verify_prop_Z(c);
  if (c.suite == "lemma2") return verify_lemma2_riemann(c);
  if (c.suite == "oracle") return verify_oracle(c);
  if (c.suite == "ewens") return verify_ewens(c);
  if (c.suite == "measure") return verify_measure(c);
  throw std::invalid_argument("unknown suite: " + c.suite);
}

}  // namespace crpx::verify
