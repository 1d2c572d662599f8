#include <cmath>

#include <gtest/gtest.h>

#include "crpx/intensity.hpp"
#include "crpx/rng.hpp"
#include "crpx/verify.hpp"

using namespace crpx;
using namespace crpx::intensity;

TEST(Mass, LogarithmicStrip) {
  // a < x <= b, y > x
  const ConeWindow w{{Interval{1.0, std::exp(1.0)}}, Interval{1.0, kInf}};
  EXPECT_NEAR(mass(w, 1.0), 1.0, 1e-14);
  EXPECT_NEAR(mass(w, 2.5), 2.5, 1e-14);
}

TEST(Mass, StraddlingWindowHasMassTheta) {
  for (double t : {0.3, 1.0, 7.0})
    for (double theta : {0.5, 1.0, 3.0})
      EXPECT_NEAR(mass(window_covering(t, t), theta), theta, 1e-13)
          << "x <= t < y at t=" << t;
}

TEST(Mass, BoundedBox) {
  // theta * int_0^1 int_1^2 y^-2 dy dx = theta / 2
  const ConeWindow w{{Interval{0.0, 1.0}}, Interval{1.0, 2.0}};
  EXPECT_NEAR(mass(w, 1.0), 0.5, 1e-15);
}

TEST(Mass, ZeroForEmptyBoxes) {
  const ConeWindow w{{Interval{2.0, 3.0}}, Interval{0.5, 1.5}};
  EXPECT_EQ(mass(w, 1.0), 0.0);
}

TEST(Mass, RejectsWindowsTouchingZero) {
  const ConeWindow w{{Interval{0.0, 1.0}}, Interval{0.0, 2.0}};
  EXPECT_THROW(mass(w, 1.0), std::domain_error);
  EXPECT_THROW(mass(ConeWindow{{Interval{0.0, 1.0}}, Interval{1.0, 2.0}}, 0.0), std::invalid_argument);
}

TEST(Mass, ScaleInvariance) {
  Stream rng(derive_seed(31, {name_id("scale-test")}));
  for (int i = 0; i < 20; ++i) {
    const auto w = verify::random_window(rng, 1 + i % 3);
    const double m = mass(w, 1.7);
    for (double c : {0.01, 0.5, 3.0, 250.0}) EXPECT_NEAR(mass(w.scaled(c), 1.7), m, 1e-10 * std::max(1.0, m));
  }
}

TEST(Mass, ExactAgreesWithQuadrature) {
  Stream rng(derive_seed(31, {name_id("quadrature-test")}));
  for (int i = 0; i < 20; ++i) {
    const auto w = verify::random_window(rng, 1 + i % 2);
    EXPECT_NEAR(mass(w, 2.5), mass_numeric(w, 2.5), 1e-8) << i;
  }
}

TEST(Consistency, IdentityLift) {
  const ConeWindow w{{Interval{0.1, 0.7}}, Interval{1.0, 3.0}};
  EXPECT_EQ(consistency_check(w, 1, 1.3).diff, 0.0);
}

TEST(Consistency, OneToTwo) {
  const ConeWindow w{{Interval{0.0, 1.0}}, Interval{1.0, 2.0}};
  for (double theta : {1.0, 2.5}) {
    const auto r = consistency_check(w, 2, theta);
    EXPECT_NEAR(r.mass_n, theta * 0.5, 1e-14);
    EXPECT_NEAR(r.mass_m_lifted, r.mass_n, 1e-12);
  }
}

TEST(Consistency, RandomWindowsToOrderThree) {
  Stream rng(derive_seed(31, {name_id("consistency-test")}));
  for (int i = 0; i < 20; ++i) {
    const auto w = verify::random_window(rng, 1);
    EXPECT_LE(std::abs(consistency_check(w, 3, 2.5).diff), 1e-8);
  }
}

TEST(Lambda, Examples) {
  EXPECT_NEAR(lambda_ij(1.0, 2.0, 1, 1), 0.5, 1e-15);
  EXPECT_NEAR(lambda_tail(1.0, 2.0, 1, 1), 0.5, 1e-15);
  double row = lambda_tail(2.0, 3.0, 2, 5);
  for (unsigned j = 2; j <= 5; ++j) row += lambda_ij(2.0, 3.0, 2, j);
  EXPECT_NEAR(row, 1.0, 1e-12);
}

TEST(Lambda, RowIdentity) {
  for (double alpha : {1.5, 2.0, 4.0})
    for (unsigned n = 1; n <= 8; ++n)
      for (unsigned i = 1; i <= std::min(n, 5u); ++i)
        EXPECT_NEAR(lambda_tail(1.3, alpha, i, n), lambda_tail_by_rows(1.3, alpha, i, n), 1e-12);
}

TEST(Lambda, NegativeBinomialIdentity) {
  const auto a = negbin_cdf_identity_check(1, 2.0, 1);
  EXPECT_NEAR(a.cdf_sum, 0.5, 1e-15);
  EXPECT_TRUE(a.holds);
  const auto b = negbin_cdf_identity_check(2, 2.0, 2);
  EXPECT_NEAR(b.cdf_sum, 0.25, 1e-15);
  EXPECT_TRUE(b.holds);
  EXPECT_NEAR(negbin_cdf_identity_check(1, 2.0, 60).cdf_sum, 1.0, 1e-15);
}

TEST(Windows, BoxesOfTheGrid) {
  const std::vector<double> grid{1.0, 2.0};
  const auto t11 = window_t(grid, 1, 1);
  EXPECT_EQ(t11.x[0], (Interval{0.0, 1.0}));
  EXPECT_EQ(t11.y, (Interval{1.0, 2.0}));
  EXPECT_EQ(window_t(grid, 2, 2).y.hi, kInf);
  EXPECT_THROW(window_t(grid, 2, 1), std::invalid_argument);
  for (unsigned i = 1; i <= 2; ++i)
    for (unsigned j = i; j <= 2; ++j) EXPECT_NEAR(mass(window_t(grid, i, j), 1.0), 0.5, 1e-14);
}
