#include <cmath>

#include <gtest/gtest.h>

#include "crpx/exact_oracle.hpp"
#include "crpx/rng.hpp"
#include "crpx/verify.hpp"

using namespace crpx;
using namespace crpx::oracle;

namespace {

TupleFamily example() { return TupleFamily{{BlockAtom{{3, 7, 11}, 19}, BlockAtom{{6, 12, 21}, 24}}, 1.0}; }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST(Overlap, SingleTuple) { EXPECT_EQ(overlap_counts(TupleFamily{{BlockAtom{{2, 5}, 9}}, 1.0}), (std::vector<std::uint64_t>{0})); }

TEST(Overlap, WorkedExample) { EXPECT_EQ(overlap_counts(example()), (std::vector<std::uint64_t>{2, 0})); }

TEST(Overlap, SeparatedTuples) {
  EXPECT_EQ(overlap_counts(TupleFamily{{BlockAtom{{1, 2}, 3}, BlockAtom{{4, 5}, 6}}, 1.0}),
            (std::vector<std::uint64_t>{0, 0}));
}

TEST(Joint, SmallestFamily) {
  const auto p = joint_probability(TupleFamily{{BlockAtom{{1}, 2}}, 1.0});
  EXPECT_DOUBLE_EQ(p.value, 0.5);
  for (double theta : {0.3, 2.0, 7.5})
    EXPECT_NEAR(joint_probability(TupleFamily{{BlockAtom{{1}, 2}}, theta}).value, 1.0 / (theta + 1.0), 1e-15);
}

TEST(Joint, WorkedExampleBothRoutes) {
  const double want = 36.0 / (57120.0 * 255024.0);
  const auto j = joint_probability(example());
  const auto s = stepwise_probability(example());
  EXPECT_LE(rel(j.value, want), 1e-13);
  EXPECT_LE(rel(s.value, want), 1e-13);
  EXPECT_NEAR(j.value, 2.4713e-9, 1e-13);
}

TEST(Joint, LogValueConsistent) {
  const auto j = joint_probability(example());
  EXPECT_LE(rel(std::exp(j.log_value), j.value), 1e-12);
}

TEST(Joint, LargeThetaAsymptotic) {
  // theta^r prod N! / theta^(N+1) when theta dominates every m
  const double theta = 1e6;
  auto f = example();
  f.theta = theta;
  const double approx = std::pow(theta, 2) * 6.0 * 6.0 / std::pow(theta, 8);
  EXPECT_NEAR(joint_probability(f).value / approx, 1.0, 1e-3);
}

TEST(Joint, BoundsBracketTheValue) {
  const auto [lo, hi] = joint_probability_bounds(example());
  const double v = joint_probability(example()).value;
  EXPECT_LE(lo, v);
  EXPECT_GE(hi, v);
}

TEST(Joint, RejectsBadFamilies) {
  EXPECT_THROW(joint_probability(TupleFamily{{BlockAtom{{3}, 5}, BlockAtom{{5}, 8}}, 1.0}), std::invalid_argument);
  EXPECT_THROW(joint_probability(TupleFamily{{BlockAtom{{3}, 2}}, 1.0}), std::invalid_argument);
  EXPECT_THROW(joint_probability(TupleFamily{{BlockAtom{{1}, 2}}, 0.0}), std::invalid_argument);
  EXPECT_THROW(joint_probability(TupleFamily{{BlockAtom{{1}, 4}, BlockAtom{{2, 3}, 5}}, 1.0}), std::invalid_argument);
}

TEST(Stepwise, StepSetsOfTheWorkedExample) {
  const auto s = step_sets(example());
  using V = std::vector<std::vector<std::uint64_t>>;
  EXPECT_EQ(s.a, (std::vector<std::uint64_t>{3, 6, 7, 11, 12, 19, 21, 24}));
  EXPECT_EQ(s.K, (V{{3}, {6}, {3}, {3, 7}, {6}, {3, 7, 11}, {6, 12}, {6, 12, 21}}));
  EXPECT_EQ(s.L, (V{{3}, {3, 6}, {3, 6, 7}, {3, 6, 7, 11}, {3, 6, 7, 11, 12}, {6, 12}, {6, 12, 21}, {}}));
}

TEST(Stepwise, AgreesWithJointOnRandomFamilies) {
  Stream rng(derive_seed(3, {name_id("oracle-test")}));
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const double theta = std::vector<double>{0.3, 1.0, 2.7}[i % 3];
    const auto f = verify::random_family(rng, theta, 500, 3, 4);
    worst = std::max(worst, rel(joint_probability(f).value, stepwise_probability(f).value));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Ewens, TwoElements) {
  const auto d = exhaustive_partition_distribution(2, 1.0);
  EXPECT_NEAR(d.at(SetPartition{{1}, {2}}), 0.5, 1e-15);
  EXPECT_NEAR(d.at(SetPartition{{1, 2}}), 0.5, 1e-15);
}

TEST(Ewens, OneBlockOfThree) {
  EXPECT_NEAR(exhaustive_partition_distribution(3, 1.0).at(SetPartition{{1, 2, 3}}), 2.0 / 6.0, 1e-15);
}

TEST(Ewens, NormalisedAndEqualToThePmf) {
  for (double theta : {0.5, 1.0, 2.0})
    for (unsigned n = 1; n <= 7; ++n) {
      const auto d = exhaustive_partition_distribution(n, theta);
      double total = 0.0;
      for (const auto& [p, v] : d) {
        total += v;
        EXPECT_NEAR(v, ewens_partition_pmf(p, theta), 1e-12);
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Ewens, BellNumbers) {
  const std::vector<std::size_t> bell{1, 2, 5, 15, 52, 203, 877};
  for (unsigned n = 1; n <= 7; ++n) EXPECT_EQ(exhaustive_partition_distribution(n, 1.3).size(), bell[n - 1]);
}

TEST(Ewens, CycleTypesAgreeWithPermutationCount) {
  for (double theta : {0.5, 2.0})
    for (unsigned n = 1; n <= 6; ++n) {
      const auto a = cycle_type_law(exhaustive_partition_distribution(n, theta), n);
      const auto b = cycle_type_law_by_permutations(n, theta);
      ASSERT_EQ(a.size(), b.size());
      for (const auto& [k, v] : a) EXPECT_NEAR(v, b.at(k), 1e-12);
    }
}

TEST(Lattice, FastSumEqualsEnumeration) {
  const ConeWindow w{{Interval{0.5, 1.0}}, Interval{1.0, 2.0}};
  for (double theta : {1.0, 2.5})
    for (std::uint64_t n : {6u, 10u, 20u})
      for (unsigned r : {1u, 2u}) {
        const double fast = lattice_moment(w, theta, n, r);
        const double slow = lattice_moment_brute(w, theta, n, r);
        EXPECT_LE(rel(fast, slow), 1e-12) << theta << " " << n << " " << r;
      }
}

TEST(Lattice, FirstMomentTelescopesAtThetaOne) {
  // sum over m in (n, 2n] of (n/2) / (m (m - 1)) = 1/4 exactly
  const ConeWindow w{{Interval{0.5, 1.0}}, Interval{1.0, 2.0}};
  EXPECT_NEAR(lattice_moment(w, 1.0, 300, 1), 0.25, 1e-13);
}

TEST(Lattice, RejectsUnsupportedWindows) {
  const ConeWindow two{{Interval{0.0, 0.5}, Interval{0.5, 1.0}}, Interval{1.0, 2.0}};
  EXPECT_THROW(lattice_moment(two, 1.0, 10, 1), std::invalid_argument);
  const ConeWindow w{{Interval{0.5, 1.0}}, Interval{1.0, 2.0}};
  EXPECT_THROW(lattice_moment(w, 1.0, 10, 3), std::invalid_argument);
  EXPECT_THROW(lattice_moment_brute(w, 1.0, 2000, 2), std::length_error);
}
