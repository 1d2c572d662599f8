#pragma once

// Sampling-free probabilities for the Chinese restaurant process.
//
// Two independent routes to the probability that a family of blocks
// {k_1^(s),...,k_N^(s),m^(s)} is present in P_{m^(s)} for every s:
//
//   joint_probability     closed product over the tuples, driven by the
//                         overlap counts l^(s);
//   stepwise_probability  explicit product over the insertion steps using
//                         the "must hit K_j" / "must avoid L_j" sets.
//
// Plus exhaustive small-n partition laws, the Ewens pmf, and lattice sums of
// the joint probability over windows.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crpx/atom.hpp"
#include "crpx/cone.hpp"
#include "crpx/special.hpp"

namespace crpx::oracle {

/// r disjoint increasing tuples (k_1,...,k_N,m) sharing the same N.
struct TupleFamily {
  std::vector<BlockAtom> tuples;
  double theta = 1.0;

  std::size_t r() const noexcept { return tuples.size(); }
  std::size_t order() const noexcept { return tuples.empty() ? 0 : tuples.front().order(); }

  void validate() const {
    if (!(theta > 0.0)) throw std::invalid_argument("TupleFamily: theta must be positive");
    if (tuples.empty()) throw std::invalid_argument("TupleFamily: need at least one tuple");
    const std::size_t n = order();
    if (n == 0) throw std::invalid_argument("TupleFamily: N must be at least 1");
    std::set<std::uint64_t> seen;
    for (const auto& t : tuples) {
      if (t.order() != n) throw std::invalid_argument("TupleFamily: tuples must share N");
      t.check();
      for (auto v : t.k)
        if (!seen.insert(v).second) throw std::invalid_argument("TupleFamily: tuples overlap");
      if (!seen.insert(t.m).second) throw std::invalid_argument("TupleFamily: tuples overlap");
    }
  }
};

/// A probability together with its logarithm. value may underflow to zero
/// while log_value stays finite.
struct ExactProbability {
  double value = 0.0;
  double log_value = -std::numeric_limits<double>::infinity();
};

/// Above this m the linear value is recovered from the log.
inline constexpr std::uint64_t kLogSpaceThreshold = 10000;

/// l^(s): number of first-N elements of other tuples that arrived before
/// m^(s) but whose own block is still open (m^(s') > m^(s)) at that time.
inline std::vector<std::uint64_t> overlap_counts(const TupleFamily& family) {
  family.validate();
  std::vector<std::uint64_t> l(family.r(), 0);
  for (std::size_t s = 0; s < family.r(); ++s) {
    const std::uint64_t ms = family.tuples[s].m;
    for (const auto& other : family.tuples) {
      if (!(other.m > ms)) continue;
      for (auto kp : other.k)
        if (kp < ms) ++l[s];
    }
  }
  return l;
}

/// theta^r prod_s N! / (theta + m^(s) - l^(s) - 1)_(N+1), with (x)_(n) the
/// falling factorial.
inline ExactProbability joint_probability(const TupleFamily& family) {
  const auto l = overlap_counts(family);
  const auto n = family.order();
  const double theta = family.theta;
  const double log_nfact = special::lgamma(static_cast<double>(n) + 1.0);
  const double nfact = special::factorial(static_cast<unsigned>(n));

  ExactProbability p;
  p.log_value = static_cast<double>(family.r()) * std::log(theta);
  double value = std::pow(theta, static_cast<double>(family.r()));
  std::uint64_t m_max = 0;
  for (std::size_t s = 0; s < family.r(); ++s) {
    const std::uint64_t m = family.tuples[s].m;
    m_max = std::max(m_max, m);
    const double base = theta + static_cast<double>(m) - static_cast<double>(l[s]) - 1.0;
    if (!(base - static_cast<double>(n) > 0.0))
      throw std::domain_error("joint_probability: non-positive falling-factorial argument");
    p.log_value += log_nfact - special::log_falling(base, n + 1);
    value *= nfact / special::falling(base, n + 1);
  }
  p.value = m_max > kLogSpaceThreshold ? std::exp(p.log_value) : value;
  return p;
}

/// Sorted event steps a_j with the sets K_j (where I_{a_j} must land) and
/// L_j (what every step strictly between a_j and a_{j+1} must avoid).
struct StepSets {
  std::vector<std::uint64_t> a;
  std::vector<std::vector<std::uint64_t>> K;
  std::vector<std::vector<std::uint64_t>> L;
};

inline StepSets step_sets(const TupleFamily& family) {
  family.validate();
  const std::size_t n = family.order();

  struct Event {
    std::uint64_t step;
    std::size_t tuple;
    std::size_t position;  // 0..N-1 for k_p, N for m
  };
  std::vector<Event> events;
  for (std::size_t s = 0; s < family.r(); ++s) {
    const auto& t = family.tuples[s];
    for (std::size_t p = 0; p < n; ++p) events.push_back({t.k[p], s, p});
    events.push_back({t.m, s, n});
  }
  std::sort(events.begin(), events.end(),
            [](const Event& x, const Event& y) { return x.step < y.step; });

  StepSets out;
  for (const auto& e : events) {
    const auto& t = family.tuples[e.tuple];
    out.a.push_back(e.step);
    if (e.position == 0)
      out.K.push_back({t.k[0]});
    else
      out.K.emplace_back(t.k.begin(), t.k.begin() + static_cast<std::ptrdiff_t>(e.position));

    std::vector<std::uint64_t> lset;
    for (const auto& other : family.tuples)
      if (other.m > e.step)
        for (auto kp : other.k)
          if (kp <= e.step) lset.push_back(kp);
    std::sort(lset.begin(), lset.end());
    out.L.push_back(std::move(lset));
  }
  return out;
}

namespace detail {

// P{I_step in set} under P{I_n = n} = theta/(theta+n-1), P{I_n = k} = 1/(theta+n-1).
inline double insertion_mass(const std::vector<std::uint64_t>& set, std::uint64_t step,
                             double theta) {
  double w = 0.0;
  for (auto k : set) {
    if (k == step)
      w += theta;
    else if (k < step)
      w += 1.0;
  }
  return w / (theta + static_cast<double>(step) - 1.0);
}

}  // namespace detail

/// Same probability as joint_probability, multiplied out step by step.
inline ExactProbability stepwise_probability(const TupleFamily& family) {
  const StepSets sets = step_sets(family);
  const double theta = family.theta;
  double log_p = 0.0;
  double value = 1.0;
  for (std::size_t j = 0; j < sets.a.size(); ++j) {
    const double hit = detail::insertion_mass(sets.K[j], sets.a[j], theta);
    if (!(hit > 0.0)) throw std::domain_error("stepwise_probability: impossible step");
    log_p += std::log(hit);
    value *= hit;
    if (j + 1 == sets.a.size()) break;
    for (std::uint64_t i = sets.a[j] + 1; i < sets.a[j + 1]; ++i) {
      const double avoid = detail::insertion_mass(sets.L[j], i, theta);
      log_p += std::log1p(-avoid);
      value *= 1.0 - avoid;
    }
  }
  ExactProbability p;
  p.log_value = log_p;
  p.value = sets.a.back() > kLogSpaceThreshold ? std::exp(log_p) : value;
  return p;
}

/// Sandwich bounds on the joint probability used for the Riemann-sum
/// argument: theta^r prod N!/(theta+m)^(N+1) <= P <= theta^r prod
/// N!/(theta+m-(r+1)N-1)^(N+1). The upper bound is +inf when its base is
/// not positive.
inline std::pair<double, double> joint_probability_bounds(const TupleFamily& family) {
  family.validate();
  const double n = static_cast<double>(family.order());
  const double r = static_cast<double>(family.r());
  const double nfact = special::factorial(static_cast<unsigned>(family.order()));
  double lo = 1.0;
  double hi = 1.0;
  for (const auto& t : family.tuples) {
    const double m = static_cast<double>(t.m);
    lo *= family.theta * nfact / std::pow(family.theta + m, n + 1.0);
    const double base = family.theta + m - (r + 1.0) * n - 1.0;
    hi *= base > 0.0 ? family.theta * nfact / std::pow(base, n + 1.0)
                     : std::numeric_limits<double>::infinity();
  }
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// Small-n exhaustive laws

using PartitionDistribution = std::map<SetPartition, double>;

/// Blocks of a restricted growth string (label of element i = rgs[i-1]).
inline SetPartition partition_from_labels(const std::string& rgs) {
  SetPartition blocks;
  for (std::size_t i = 0; i < rgs.size(); ++i) {
    const auto label = static_cast<std::size_t>(static_cast<unsigned char>(rgs[i]));
    if (label >= blocks.size()) blocks.resize(label + 1);
    blocks[label].push_back(i + 1);
  }
  return blocks;
}

/// Exact law of P_n obtained by pushing probability mass through every
/// insertion draw, merging states by canonical form.
inline PartitionDistribution exhaustive_partition_distribution(unsigned n, double theta) {
  if (n > 10) throw std::invalid_argument("exhaustive_partition_distribution: n must be <= 10");
  if (!(theta > 0.0)) throw std::invalid_argument("exhaustive_partition_distribution: theta > 0");

  std::unordered_map<std::string, double> layer{{std::string{}, 1.0}};
  for (unsigned step = 1; step <= n; ++step) {
    std::unordered_map<std::string, double> next;
    const double denom = theta + static_cast<double>(step) - 1.0;
    for (const auto& [rgs, p] : layer) {
      unsigned char blocks = 0;
      for (char c : rgs) blocks = std::max<unsigned char>(blocks, static_cast<unsigned char>(c + 1));
      next[rgs + static_cast<char>(blocks)] += p * theta / denom;
      for (std::uint64_t k = 1; k < step; ++k) next[rgs + rgs[k - 1]] += p / denom;
    }
    layer = std::move(next);
  }

  PartitionDistribution out;
  for (const auto& [rgs, p] : layer) out.emplace(partition_from_labels(rgs), p);
  return out;
}

/// theta^{#blocks} prod_B (|B|-1)! / theta^(n).
inline double ewens_partition_pmf(const SetPartition& partition, double theta) {
  std::uint64_t n = 0;
  double log_w = 0.0;
  for (const auto& b : partition) {
    n += b.size();
    log_w += std::log(theta) + special::lgamma(static_cast<double>(b.size()));
  }
  return std::exp(log_w - special::log_rising(theta, n));
}

/// theta^{C(pi)} / theta^(n) for a permutation of [n] with C(pi) cycles.
inline double ewens_permutation_pmf(std::uint64_t cycles, std::uint64_t n, double theta) {
  return std::exp(static_cast<double>(cycles) * std::log(theta) - special::log_rising(theta, n));
}

/// Cycle type (C_1, ..., C_n) of a set partition or a cycle list.
inline std::vector<std::uint64_t> cycle_type(const SetPartition& blocks, std::uint64_t n) {
  std::vector<std::uint64_t> c(n, 0);
  for (const auto& b : blocks) ++c.at(b.size() - 1);
  return c;
}

/// Law of the cycle type from a partition distribution.
inline std::map<std::vector<std::uint64_t>, double> cycle_type_law(
    const PartitionDistribution& dist, std::uint64_t n) {
  std::map<std::vector<std::uint64_t>, double> out;
  for (const auto& [blocks, p] : dist) out[cycle_type(blocks, n)] += p;
  return out;
}

/// Law of the cycle type obtained by summing the Ewens pmf over all n!
/// permutations (n <= 8).
inline std::map<std::vector<std::uint64_t>, double> cycle_type_law_by_permutations(
    std::uint64_t n, double theta) {
  if (n > 8) throw std::invalid_argument("cycle_type_law_by_permutations: n must be <= 8");
  std::vector<std::uint64_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::map<std::vector<std::uint64_t>, double> out;
  do {
    std::vector<bool> seen(n, false);
    std::vector<std::uint64_t> c(n, 0);
    std::uint64_t cycles = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (seen[i]) continue;
      std::uint64_t len = 0;
      for (std::uint64_t j = i; !seen[j]; j = perm[j]) {
        seen[j] = true;
        ++len;
      }
      ++c[len - 1];
      ++cycles;
    }
    out[c] += ewens_permutation_pmf(cycles, n, theta);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// ---------------------------------------------------------------------------
// Lattice sums over a window

/// theta N! / (theta + m - l - 1)_(N+1): the factor one tuple contributes to
/// joint_probability.
inline double tuple_factor(double theta, std::size_t n, std::uint64_t m, std::uint64_t l) {
  const double base = theta + static_cast<double>(m) - static_cast<double>(l) - 1.0;
  if (!(base - static_cast<double>(n) > 0.0)) throw std::domain_error("tuple_factor: non-positive base");
  return theta * special::factorial(static_cast<unsigned>(n)) / special::falling(base, n + 1);
}

inline constexpr std::uint64_t kMaxLatticeTuples = 100'000'000;

namespace detail {

// Integers j with j/n in (lo, hi].
inline std::pair<std::uint64_t, std::uint64_t> lattice_range(const Interval& iv, std::uint64_t n) {
  const auto nn = static_cast<long double>(n);
  const auto first = static_cast<std::uint64_t>(std::floor(nn * iv.lo)) + 1;
  const auto last = static_cast<std::uint64_t>(std::floor(nn * iv.hi));
  return {first, last};
}

inline void check_lattice_window(const ConeWindow& w, unsigned r) {
  w.validate();
  if (w.order() != 1) throw std::invalid_argument("lattice sum: only N = 1 windows are supported");
  if (r < 1 || r > 2) throw std::invalid_argument("lattice sum: r must be 1 or 2");
  if (!std::isfinite(w.y.hi) || !std::isfinite(w.x[0].hi))
    throw std::invalid_argument("lattice sum: window must be bounded");
}

}  // namespace detail

/// Sum over ordered r-tuples of pairwise disjoint lattice atoms (k, m) with
/// (k/n, m/n) in the window of P{all r blocks are present}, N = 1, r <= 2.
/// Grouped by (m_1, m_2), so the cost is quadratic in the number of m values.
inline double lattice_moment(const ConeWindow& w, double theta, std::uint64_t n, unsigned r) {
  detail::check_lattice_window(w, r);
  const auto [k_lo, k_hi] = detail::lattice_range(w.x[0], n);
  const auto [m_lo, m_hi] = detail::lattice_range(w.y, n);
  // #{k in window : k < x}
  auto below = [&](std::uint64_t x) -> double {
    if (x <= k_lo || k_hi < k_lo) return 0.0;
    const std::uint64_t top = std::min(x - 1, k_hi);
    return static_cast<double>(top - k_lo + 1);
  };
  long double total = 0;
  if (r == 1) {
    for (std::uint64_t m = std::max<std::uint64_t>(m_lo, 2); m <= m_hi; ++m)
      total += below(m) * tuple_factor(theta, 1, m, 0);
    return static_cast<double>(total);
  }
  for (std::uint64_t m1 = std::max<std::uint64_t>(m_lo, 2); m1 <= m_hi; ++m1) {
    const double a = below(m1);
    if (a == 0.0) continue;
    const double f1 = a >= 2.0 ? tuple_factor(theta, 1, m1, 1) : 0.0;
    const double f0 = tuple_factor(theta, 1, m1, 0);
    long double inner = 0;
    for (std::uint64_t m2 = m1 + 1; m2 <= m_hi; ++m2) {
      const double b = below(m2) - below(m1 + 1);
      inner += (a * (a - 1.0) * f1 + a * b * f0) * tuple_factor(theta, 1, m2, 0);
    }
    total += inner;
  }
  return static_cast<double>(2 * total);
}

/// The same sum by enumerating every tuple family and calling
/// joint_probability. Throws std::length_error beyond kMaxLatticeTuples.
inline double lattice_moment_brute(const ConeWindow& w, double theta, std::uint64_t n, unsigned r) {
  detail::check_lattice_window(w, r);
  const auto [k_lo, k_hi] = detail::lattice_range(w.x[0], n);
  const auto [m_lo, m_hi] = detail::lattice_range(w.y, n);
  std::vector<BlockAtom> atoms;
  for (std::uint64_t m = m_lo; m <= m_hi; ++m)
    for (std::uint64_t k = k_lo; k <= k_hi && k < m; ++k) atoms.push_back(BlockAtom{{k}, m});
  const double count = std::pow(static_cast<double>(atoms.size()), static_cast<double>(r));
  if (count > static_cast<double>(kMaxLatticeTuples))
    throw std::length_error("lattice_moment_brute: too many tuples");
  long double total = 0;
  if (r == 1) {
    for (const auto& a : atoms) total += joint_probability(TupleFamily{{a}, theta}).value;
    return static_cast<double>(total);
  }
  for (const auto& a : atoms)
    for (const auto& b : atoms) {
      if (a.k[0] == b.k[0] || a.k[0] == b.m || a.m == b.k[0] || a.m == b.m) continue;
      total += joint_probability(TupleFamily{{a, b}, theta}).value;
    }
  return static_cast<double>(total);
}

}  // namespace crpx::oracle
