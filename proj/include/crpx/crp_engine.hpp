#pragma once

// Sequential Chinese restaurant process.
//
// Element n arrives at step n. With probability theta/(theta+n-1) it opens a
// new block; otherwise it picks a uniform element k of [n-1] and joins k's
// block, which selects block B with probability |B|/(theta+n-1). One draw and
// O(1) work per step.
//
// Besides the partition itself the engine records, for every tracked order
// N <= n_max, the block atoms (k_1,...,k_N, m): the first N members of a block
// and the step at which it received member N+1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "crpx/atom.hpp"
#include "crpx/cone.hpp"
#include "crpx/rng.hpp"

namespace crpx {

struct CrpParams {
  double theta = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 1;

  void validate() const {
    if (!(theta > 0.0) || !std::isfinite(theta))
      throw std::invalid_argument("CrpParams: theta must be positive");
    if (horizon < 1) throw std::invalid_argument("CrpParams: horizon must be at least 1");
  }
};

/// Outcome of the insertion variable at one step: open a block, or join the
/// block of element `join`.
struct InsertionDraw {
  std::uint64_t step = 0;
  std::uint64_t join = 0;  // 0 encodes "new block"

  static InsertionDraw new_block(std::uint64_t step) noexcept { return {step, 0}; }
  static InsertionDraw join_element(std::uint64_t step, std::uint64_t k) noexcept { return {step, k}; }
  bool opens_block() const noexcept { return join == 0; }
};

/// P{new block} = theta/(theta+step-1), P{join k} = 1/(theta+step-1), k < step.
inline InsertionDraw draw_insertion(Stream& rng, double theta, std::uint64_t step) {
  const double u = rng.uniform() * (theta + static_cast<double>(step - 1));
  if (u < theta) return InsertionDraw::new_block(step);
  auto k = static_cast<std::uint64_t>(u - theta) + 1;
  if (k > step - 1) k = step - 1;
  return InsertionDraw::join_element(step, k);
}

/// Thrown when a draw does not fit the state it is applied to.
class TrajectoryDesync : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class PartitionState {
 public:
  static constexpr unsigned kMaxOrder = 16;

  struct Growth {
    std::uint32_t block = 0;
    std::uint64_t new_size = 0;
  };

  explicit PartitionState(unsigned n_max = 0) : n_max_(n_max), size_counts_(n_max + 2, 0) {
    if (n_max > kMaxOrder) throw std::invalid_argument("PartitionState: n_max must be <= 16");
  }

  std::uint64_t size() const noexcept { return element_block_.size(); }
  unsigned n_max() const noexcept { return n_max_; }
  std::size_t block_count() const noexcept { return block_size_.size(); }

  std::uint32_t block_of(std::uint64_t element) const { return element_block_.at(element - 1); }
  std::uint64_t block_size(std::uint32_t block) const { return block_size_.at(block); }

  /// Members of a block in ascending order while its size is at most
  /// n_max+1; empty afterwards.
  const std::vector<std::uint64_t>& small_members(std::uint32_t block) const {
    return members_.at(block);
  }

  /// C_k for 1 <= k <= n_max.
  std::uint64_t count_of_size(unsigned k) const {
    if (k == 0 || k > n_max_) throw std::out_of_range("count_of_size: k outside 1..n_max");
    return size_counts_[k];
  }

  /// Number of blocks larger than n_max.
  std::uint64_t overflow_count() const noexcept { return size_counts_.back(); }

  void reserve(std::uint64_t n) { element_block_.reserve(n); }

  Growth apply(const InsertionDraw& d) {
    const std::uint64_t n = size();
    if (d.step != n + 1) throw TrajectoryDesync("PartitionState: draw step does not follow state");
    if (d.opens_block()) {
      const auto b = static_cast<std::uint32_t>(block_size_.size());
      block_size_.push_back(1);
      members_.push_back({d.step});
      element_block_.push_back(b);
      ++size_counts_[bucket(1)];
      return {b, 1};
    }
    if (d.join > n) throw TrajectoryDesync("PartitionState: joined element not yet inserted");
    const std::uint32_t b = element_block_[d.join - 1];
    const std::uint64_t grown = ++block_size_[b];
    element_block_.push_back(b);
    --size_counts_[bucket(grown - 1)];
    ++size_counts_[bucket(grown)];
    if (grown <= n_max_ + 1) {
      members_[b].push_back(d.step);
    } else if (grown == n_max_ + 2) {
      members_[b].clear();
      members_[b].shrink_to_fit();
    }
    return {b, grown};
  }

  /// Full partition, recomputed from the element map.
  SetPartition blocks() const {
    SetPartition out(block_size_.size());
    for (std::uint64_t e = 1; e <= size(); ++e) out[element_block_[e - 1]].push_back(e);
    return out;
  }

  /// (C_1, ..., C_kmax) recomputed from scratch.
  std::vector<std::uint64_t> recount_sizes(unsigned kmax) const {
    std::vector<std::uint64_t> sizes(block_size_.size(), 0);
    for (auto b : element_block_) ++sizes[b];
    std::vector<std::uint64_t> c(kmax, 0);
    for (auto s : sizes)
      if (s >= 1 && s <= kmax) ++c[s - 1];
    return c;
  }

 private:
  std::size_t bucket(std::uint64_t s) const noexcept { return s <= n_max_ ? s : n_max_ + 1; }

  unsigned n_max_;
  std::vector<std::uint32_t> element_block_;
  std::vector<std::uint64_t> block_size_;
  std::vector<std::vector<std::uint64_t>> members_;
  std::vector<std::uint64_t> size_counts_;  // [0] unused, [n_max+1] = overflow
};

/// Functional form of PartitionState::apply.
inline PartitionState step(PartitionState state, const InsertionDraw& draw) {
  state.apply(draw);
  return state;
}

/// Drives a full trajectory, calling observer(state, draw, growth) after each
/// step.
template <class Observer>
PartitionState simulate(const CrpParams& params, unsigned n_max, Observer&& observer) {
  params.validate();
  Stream rng(params.seed);
  PartitionState state(n_max);
  state.reserve(params.horizon);
  for (std::uint64_t s = 1; s <= params.horizon; ++s) {
    const InsertionDraw d = draw_insertion(rng, params.theta, s);
    const auto g = state.apply(d);
    observer(state, d, g);
  }
  return state;
}

inline PartitionState simulate(const CrpParams& params, unsigned n_max = 0) {
  return simulate(params, n_max, [](const PartitionState&, const InsertionDraw&, PartitionState::Growth) {});
}

// ---------------------------------------------------------------------------
// Trackers

struct TrackerConfig {
  unsigned n_max = 1;
  bool atoms = true;
  std::vector<std::uint64_t> snapshot_steps;
  bool first_singleton = false;
  std::optional<double> shortlived_delta;
  std::uint64_t scale = 0;  // 0 means "the horizon"

  void validate(std::uint64_t horizon) const {
    if (n_max > PartitionState::kMaxOrder) throw std::invalid_argument("TrackerConfig: n_max must be <= 16");
    for (auto s : snapshot_steps)
      if (s == 0 || s > horizon) throw std::invalid_argument("TrackerConfig: snapshot step outside [1, horizon]");
    if (!std::is_sorted(snapshot_steps.begin(), snapshot_steps.end()))
      throw std::invalid_argument("TrackerConfig: snapshot steps must be sorted");
    if (shortlived_delta) {
      if (n_max < 1 || !atoms) throw std::invalid_argument("TrackerConfig: short-lived tracking needs N=1 atoms");
      const std::uint64_t sc = scale == 0 ? horizon : scale;
      if (!(*shortlived_delta > 0.0) || *shortlived_delta * static_cast<double>(sc) < 1.0)
        throw std::invalid_argument("TrackerConfig: need delta * scale >= 1");
    }
  }
};

struct CountSnapshot {
  std::uint64_t step = 0;
  std::vector<std::uint64_t> counts;  // counts[k-1] = C_k
  friend bool operator==(const CountSnapshot&, const CountSnapshot&) = default;
};

/// The least singleton changed to `least` at `step` (0 = no singleton).
struct SingletonChange {
  std::uint64_t step = 0;
  std::uint64_t least = 0;
  friend bool operator==(const SingletonChange&, const SingletonChange&) = default;
};

struct ShortLived {
  bool censored = true;
  std::uint64_t birth = 0;
  std::uint64_t lifetime = 0;
  friend bool operator==(const ShortLived&, const ShortLived&) = default;
};

struct TrajectoryObservables {
  double theta = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  std::uint64_t scale = 0;
  unsigned n_max = 0;
  std::vector<std::vector<BlockAtom>> atoms_by_order;  // [N-1]
  // First N members of blocks whose size is exactly N at the horizon.
  std::vector<std::vector<std::vector<std::uint64_t>>> open_by_order;  // [N-1]
  std::vector<CountSnapshot> count_snapshots;
  bool first_singleton_tracked = false;
  std::vector<SingletonChange> first_singleton_changes;
  std::optional<double> shortlived_delta;
  ShortLived shortlived;
  std::vector<std::uint64_t> shortlived_lifetimes;  // sorted, qualifying singletons only

  const std::vector<BlockAtom>& atoms(unsigned order) const { return atoms_by_order.at(order - 1); }

  friend bool operator==(const TrajectoryObservables&, const TrajectoryObservables&) = default;
};

inline std::uint64_t scaled_floor(std::uint64_t n, double t) {
  return static_cast<std::uint64_t>(std::floor(static_cast<long double>(n) * t));
}

/// Argmin of the lifetime m-k over singleton atoms born at or after `threshold`;
/// ties go to the earlier birth.
inline ShortLived shortest_singleton(const std::vector<BlockAtom>& singleton_atoms,
                                     std::uint64_t threshold) {
  ShortLived best;
  for (const auto& a : singleton_atoms) {
    if (a.k.at(0) < threshold) continue;
    const std::uint64_t life = a.m - a.k[0];
    if (best.censored || life < best.lifetime || (life == best.lifetime && a.k[0] < best.birth))
      best = {false, a.k[0], life};
  }
  return best;
}

inline std::vector<std::uint64_t> qualifying_lifetimes(const std::vector<BlockAtom>& singleton_atoms,
                                                       std::uint64_t threshold) {
  std::vector<std::uint64_t> out;
  for (const auto& a : singleton_atoms)
    if (a.k.at(0) >= threshold) out.push_back(a.m - a.k[0]);
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

inline void finish_shortlived(TrajectoryObservables& obs) {
  if (!obs.shortlived_delta) return;
  const std::uint64_t threshold = scaled_floor(obs.scale, *obs.shortlived_delta);
  obs.shortlived = shortest_singleton(obs.atoms(1), threshold);
  obs.shortlived_lifetimes = qualifying_lifetimes(obs.atoms(1), threshold);
}

inline TrajectoryObservables make_observables(const CrpParams& params, const TrackerConfig& trackers) {
  TrajectoryObservables obs;
  obs.theta = params.theta;
  obs.seed = params.seed;
  obs.horizon = params.horizon;
  obs.scale = trackers.scale == 0 ? params.horizon : trackers.scale;
  obs.n_max = trackers.n_max;
  obs.atoms_by_order.resize(trackers.n_max);
  obs.open_by_order.resize(trackers.n_max);
  obs.first_singleton_tracked = trackers.first_singleton;
  obs.shortlived_delta = trackers.shortlived_delta;
  return obs;
}

}  // namespace detail

/// One trajectory of length params.horizon with the requested trackers.
/// Identical inputs give identical observables.
inline TrajectoryObservables run(const CrpParams& params, const TrackerConfig& trackers) {
  params.validate();
  trackers.validate(params.horizon);
  TrajectoryObservables obs = detail::make_observables(params, trackers);

  const unsigned n_max = trackers.n_max;
  std::size_t next_snapshot = 0;
  std::uint64_t least = 0;

  auto observer = [&](const PartitionState& st, const InsertionDraw& d, PartitionState::Growth g) {
    if (trackers.atoms && g.new_size >= 2 && g.new_size <= n_max + 1) {
      const auto& mem = st.small_members(g.block);
      const auto order = static_cast<std::size_t>(g.new_size - 1);
      obs.atoms_by_order[order - 1].push_back(
          BlockAtom{std::vector<std::uint64_t>(mem.begin(), mem.begin() + static_cast<std::ptrdiff_t>(order)),
                    d.step});
    }
    if (trackers.first_singleton) {
      if (g.new_size == 1 && least == 0) {
        least = d.step;
        obs.first_singleton_changes.push_back({d.step, least});
      } else if (g.new_size == 2 && d.join == least) {
        std::uint64_t next = 0;
        for (std::uint64_t e = least + 1; e < d.step; ++e)
          if (st.block_size(st.block_of(e)) == 1) {
            next = e;
            break;
          }
        least = next;
        obs.first_singleton_changes.push_back({d.step, least});
      }
    }
    while (next_snapshot < trackers.snapshot_steps.size() && trackers.snapshot_steps[next_snapshot] == d.step) {
      CountSnapshot snap{d.step, std::vector<std::uint64_t>(n_max, 0)};
      for (unsigned k = 1; k <= n_max; ++k) snap.counts[k - 1] = st.count_of_size(k);
      obs.count_snapshots.push_back(std::move(snap));
      ++next_snapshot;
    }
  };

  const PartitionState final_state = simulate(params, n_max, observer);

  if (trackers.atoms) {
    for (std::uint32_t b = 0; b < final_state.block_count(); ++b) {
      const auto size = final_state.block_size(b);
      if (size >= 1 && size <= n_max) obs.open_by_order[size - 1].push_back(final_state.small_members(b));
    }
  }
  detail::finish_shortlived(obs);
  return obs;
}

// ---------------------------------------------------------------------------
// Singleton-only engine
//
// The singleton atoms (k, m) depend only on the insertion draws that open a
// block or hit a current singleton. With s singletons alive, step u is such
// an event with probability (theta+s)/(theta+u-1), decreasing in u. Event
// steps are found by discrete thinning: propose from a geometric law with
// the current (larger) rate, accept with the ratio of rates. The cost is per
// event rather than per step, so horizons of 10^8 are cheap. The law of the
// output is exactly that of run(...).atoms(1).

struct SingletonTrajectory {
  std::vector<BlockAtom> atoms;           // ordered by m
  std::vector<std::uint64_t> open;        // singletons alive at the horizon, ascending
};

inline SingletonTrajectory run_singleton_process(const CrpParams& params) {
  params.validate();
  Stream rng(params.seed);
  const double theta = params.theta;
  const std::uint64_t horizon = params.horizon;

  SingletonTrajectory out;
  std::vector<std::uint64_t> alive;
  std::uint64_t u = 0;  // last processed step
  for (;;) {
    const double s = static_cast<double>(alive.size());
    std::uint64_t cand = 0;
    std::uint64_t from = u;
    bool done = false;
    for (;;) {
      const double bound = (theta + s) / (theta + static_cast<double>(from));  // rate at step from+1
      const std::uint64_t gap = rng.geometric_failures(bound);
      if (gap >= horizon || from + 1 + gap > horizon) {
        done = true;
        break;
      }
      cand = from + 1 + gap;
      const double accept = (theta + static_cast<double>(from)) / (theta + static_cast<double>(cand - 1));
      if (accept >= 1.0 || rng.uniform() < accept) break;
      from = cand;
    }
    if (done) break;

    const double v = rng.uniform() * (theta + s);
    if (v < theta) {
      alive.push_back(cand);
    } else {
      auto idx = static_cast<std::size_t>(v - theta);
      if (idx >= alive.size()) idx = alive.size() - 1;
      out.atoms.push_back(BlockAtom{{alive[idx]}, cand});
      alive[idx] = alive.back();
      alive.pop_back();
    }
    u = cand;
  }
  std::sort(alive.begin(), alive.end());
  out.open = std::move(alive);
  return out;
}

/// C_1(P_step) from singleton atoms and the singletons open at the horizon.
inline std::uint64_t singleton_count_at(const std::vector<BlockAtom>& atoms,
                                        const std::vector<std::vector<std::uint64_t>>& open,
                                        std::uint64_t step) {
  std::uint64_t c = 0;
  for (const auto& a : atoms)
    if (a.k[0] <= step && step < a.m) ++c;
  for (const auto& o : open)
    if (o[0] <= step) ++c;
  return c;
}

/// Change points of the least singleton, reconstructed from singleton atoms
/// and open singletons.
inline std::vector<SingletonChange> singleton_changes_from_atoms(
    const std::vector<BlockAtom>& atoms, const std::vector<std::vector<std::uint64_t>>& open) {
  struct Event {
    std::uint64_t step;
    std::uint64_t element;
    bool birth;
  };
  std::vector<Event> ev;
  for (const auto& a : atoms) {
    ev.push_back({a.k[0], a.k[0], true});
    ev.push_back({a.m, a.k[0], false});
  }
  for (const auto& o : open) ev.push_back({o[0], o[0], true});
  std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.step < b.step; });

  std::set<std::uint64_t> alive;
  std::uint64_t least = 0;
  std::vector<SingletonChange> out;
  for (const auto& e : ev) {
    if (e.birth)
      alive.insert(e.element);
    else
      alive.erase(e.element);
    const std::uint64_t now = alive.empty() ? 0 : *alive.begin();
    if (now != least) {
      least = now;
      out.push_back({e.step, least});
    }
  }
  return out;
}

/// Same observables as run() restricted to n_max = 1, produced by the
/// singleton-only engine.
inline TrajectoryObservables run_singletons(const CrpParams& params, const TrackerConfig& trackers) {
  params.validate();
  trackers.validate(params.horizon);
  if (trackers.n_max != 1 || !trackers.atoms)
    throw std::invalid_argument("run_singletons: trackers must request N=1 atoms only");
  TrajectoryObservables obs = detail::make_observables(params, trackers);
  SingletonTrajectory traj = run_singleton_process(params);
  obs.atoms_by_order[0] = std::move(traj.atoms);
  for (auto k : traj.open) obs.open_by_order[0].push_back({k});
  for (auto s : trackers.snapshot_steps)
    obs.count_snapshots.push_back({s, {singleton_count_at(obs.atoms(1), obs.open_by_order[0], s)}});
  if (trackers.first_singleton)
    obs.first_singleton_changes = singleton_changes_from_atoms(obs.atoms(1), obs.open_by_order[0]);
  detail::finish_shortlived(obs);
  return obs;
}

// ---------------------------------------------------------------------------
// Permutations

inline constexpr std::uint64_t kMaxPermutationLength = 10'000'000;

/// Ewens permutation in one-line notation (perm[i-1] = sigma(i)), built by
/// the same draws as simulate(): element n opens a fixed point or is inserted
/// right after element k in k's cycle.
inline std::vector<std::uint64_t> permutation_sample(const CrpParams& params) {
  params.validate();
  if (params.horizon > kMaxPermutationLength)
    throw std::invalid_argument("permutation_sample: horizon too large to store");
  Stream rng(params.seed);
  std::vector<std::uint64_t> succ(params.horizon + 1, 0);
  for (std::uint64_t s = 1; s <= params.horizon; ++s) {
    const auto d = draw_insertion(rng, params.theta, s);
    if (d.opens_block()) {
      succ[s] = s;
    } else {
      succ[s] = succ[d.join];
      succ[d.join] = s;
    }
  }
  return {succ.begin() + 1, succ.end()};
}

/// Cycles of a permutation, each listed from its least element, ordered by
/// least element.
inline std::vector<std::vector<std::uint64_t>> cycles_of(const std::vector<std::uint64_t>& perm) {
  std::vector<bool> seen(perm.size() + 1, false);
  std::vector<std::vector<std::uint64_t>> out;
  for (std::uint64_t i = 1; i <= perm.size(); ++i) {
    if (seen[i]) continue;
    std::vector<std::uint64_t> cyc;
    for (std::uint64_t j = i; !seen[j]; j = perm[j - 1]) {
      seen[j] = true;
      cyc.push_back(j);
    }
    out.push_back(std::move(cyc));
  }
  return out;
}

inline std::vector<std::vector<std::uint64_t>> permutation_run(const CrpParams& params) {
  return cycles_of(permutation_sample(params));
}

// ---------------------------------------------------------------------------
// Observables

/// Xi_n^(N): atoms (k_1/scale, ..., k_N/scale, m/scale). Blocks that did not
/// reach size N+1 by the horizon contribute nothing.
inline PointMeasure extract_point_measure(const TrajectoryObservables& obs, unsigned order,
                                          std::uint64_t scale) {
  if (order == 0 || order > obs.n_max) throw std::invalid_argument("extract_point_measure: N not tracked");
  if (scale == 0) throw std::invalid_argument("extract_point_measure: scale must be positive");
  const double inv = 1.0 / static_cast<double>(scale);
  PointMeasure pm;
  pm.order = order;
  for (const auto& a : obs.atoms(order)) {
    if (!a.well_ordered()) throw std::logic_error("extract_point_measure: malformed atom");
    ConePoint p;
    p.x.reserve(order);
    for (auto k : a.k) p.x.push_back(static_cast<double>(k) * inv);
    p.y = static_cast<double>(a.m) * inv;
    pm.atoms.push_back(std::move(p));
  }
  return pm;
}

/// Number of scaled atoms of order N in a window. Coordinates are compared
/// on the lattice: j/scale in (lo, hi] iff floor(lo*scale) < j <= floor(hi*scale).
inline std::uint64_t count_atoms(const std::vector<BlockAtom>& atoms, const ConeWindow& w, std::uint64_t scale) {
  auto inside = [&](std::uint64_t j, const Interval& iv) {
    if (!(static_cast<long double>(j) > std::floor(static_cast<long double>(scale) * iv.lo))) return false;
    return !std::isfinite(iv.hi) || static_cast<long double>(j) <= std::floor(static_cast<long double>(scale) * iv.hi);
  };
  std::uint64_t c = 0;
  for (const auto& a : atoms) {
    bool in = a.k.size() == w.order() && inside(a.m, w.y);
    for (std::size_t i = 0; in && i < a.k.size(); ++i) in = inside(a.k[i], w.x[i]);
    c += in ? 1 : 0;
  }
  return c;
}

/// Raw M_step: least singleton of P_step, or step+1 when there is none.
inline std::uint64_t first_singleton(const TrajectoryObservables& obs, std::uint64_t step) {
  if (!obs.first_singleton_tracked) throw std::logic_error("first_singleton: tracker not enabled");
  if (step == 0 || step > obs.horizon) throw std::out_of_range("first_singleton: step outside trajectory");
  const auto& ch = obs.first_singleton_changes;
  auto it = std::upper_bound(ch.begin(), ch.end(), step,
                             [](std::uint64_t s, const SingletonChange& c) { return s < c.step; });
  if (it == ch.begin()) return step + 1;
  const std::uint64_t least = std::prev(it)->least;
  return least == 0 ? step + 1 : least;
}

/// M''_{floor(n t)}/n on a grid: the least singleton scaled by n, with value t
/// when P_{floor(n t)} has no singleton.
inline std::vector<double> observe_first_singleton(const TrajectoryObservables& obs,
                                                   const std::vector<double>& t_grid,
                                                   std::uint64_t scale = 0) {
  const std::uint64_t n = scale == 0 ? obs.scale : scale;
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const std::uint64_t s = scaled_floor(n, t);
    if (s == 0) throw std::out_of_range("observe_first_singleton: floor(n t) must be >= 1");
    const std::uint64_t m = first_singleton(obs, s);
    out.push_back(m == s + 1 ? t : static_cast<double>(m) / static_cast<double>(n));
  }
  return out;
}

struct ShortLivedScaled {
  bool censored = true;
  std::uint64_t birth = 0;
  std::uint64_t lifetime = 0;
  double s = 0.0;  // birth / n
  double t = 0.0;  // lifetime / n
};

/// (S_{delta,n}/n, T_{delta,n}/n) over the completed singletons of a
/// trajectory.
inline ShortLivedScaled observe_shortlived(const TrajectoryObservables& obs, double delta,
                                           std::uint64_t scale = 0) {
  if (obs.n_max < 1) throw std::invalid_argument("observe_shortlived: N=1 atoms not tracked");
  const std::uint64_t n = scale == 0 ? obs.scale : scale;
  if (!(delta > 0.0) || delta * static_cast<double>(n) < 1.0)
    throw std::invalid_argument("observe_shortlived: need delta * n >= 1");
  const ShortLived r = shortest_singleton(obs.atoms(1), scaled_floor(n, delta));
  ShortLivedScaled out{r.censored, r.birth, r.lifetime, 0.0, 0.0};
  if (!r.censored) {
    out.s = static_cast<double>(r.birth) / static_cast<double>(n);
    out.t = static_cast<double>(r.lifetime) / static_cast<double>(n);
  }
  return out;
}

/// Q_{delta,n}(t) on a grid: qualifying singletons whose lifetime is at most
/// floor(n t).
inline std::vector<std::uint64_t> observe_q_path(const TrajectoryObservables& obs, double delta,
                                                 const std::vector<double>& t_grid, std::uint64_t scale = 0) {
  if (obs.n_max < 1) throw std::invalid_argument("observe_q_path: N=1 atoms not tracked");
  const std::uint64_t n = scale == 0 ? obs.scale : scale;
  const auto lifetimes = qualifying_lifetimes(obs.atoms(1), scaled_floor(n, delta));
  std::vector<std::uint64_t> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const std::uint64_t cap = scaled_floor(n, t);
    out.push_back(static_cast<std::uint64_t>(
        std::upper_bound(lifetimes.begin(), lifetimes.end(), cap) - lifetimes.begin()));
  }
  return out;
}

}  // namespace crpx
