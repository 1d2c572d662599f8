#include <cmath>

#include <gtest/gtest.h>

#include "crpx/rng.hpp"
#include "crpx/stats.hpp"

using namespace crpx;
using namespace crpx::stats;

namespace {

std::vector<std::uint64_t> poisson_draws(double mean, int n, std::uint64_t seed) {
  Stream rng(seed);
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) out.push_back(rng.poisson(mean));
  return out;
}

}  // namespace

TEST(Distributions, ReferenceValues) {
  EXPECT_NEAR(chi2_sf(3.841458820694124, 1.0), 0.05, 1e-12);
  EXPECT_NEAR(chi2_sf(0.0, 3.0), 1.0, 1e-15);
  EXPECT_NEAR(kolmogorov_sf(1.0), 0.26999967167735456, 1e-12);
  EXPECT_NEAR(kolmogorov_sf(1.3580986393225505), 0.05, 1e-9);
  EXPECT_NEAR(kolmogorov_sf(0.3), 0.9999906941986655, 1e-12);
}

TEST(ChiSquarePoisson, NullHolds) {
  const auto r = chi2_poisson(poisson_draws(1.0, 10000, 1), 1.0);
  EXPECT_TRUE(r.pass) << r.p_value;
  EXPECT_GE(r.p_value, 0.0);
  EXPECT_LE(r.p_value, 1.0);
}

TEST(ChiSquarePoisson, DetectsWrongMean) {
  const auto r = chi2_poisson(poisson_draws(2.0, 10000, 2), 1.0);
  EXPECT_FALSE(r.pass);
  EXPECT_LT(r.p_value, 1e-6);
}

TEST(ChiSquarePoisson, DegenerateAllZero) {
  const auto r = chi2_poisson(std::vector<std::uint64_t>(1000, 0), 1e-9);
  EXPECT_TRUE(r.pass);
}

TEST(ChiSquarePoisson, NeedsEnoughSamples) {
  EXPECT_THROW(chi2_poisson(std::vector<std::uint64_t>(10, 0), 1.0), std::invalid_argument);
}

TEST(Kolmogorov, UniformsPassExponentialsFail) {
  Stream rng(3);
  std::vector<double> u, e;
  for (int i = 0; i < 5000; ++i) {
    u.push_back(rng.uniform());
    e.push_back(rng.exponential());
  }
  auto identity = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_TRUE(ks_continuous(u, identity).pass);
  EXPECT_FALSE(ks_continuous(e, identity).pass);
}

TEST(Kolmogorov, TwoSample) {
  Stream rng(4);
  std::vector<double> a, b, c;
  for (int i = 0; i < 3000; ++i) {
    a.push_back(rng.exponential());
    b.push_back(rng.exponential());
    c.push_back(rng.exponential() * 1.2);
  }
  EXPECT_TRUE(ks_two_sample(a, b).pass);
  EXPECT_FALSE(ks_two_sample(a, c).pass);
}

TEST(ChiSquare, TwoSampleHomogeneity) {
  const auto a = poisson_draws(1.0, 5000, 5);
  const auto b = poisson_draws(1.0, 5000, 6);
  const auto c = poisson_draws(1.3, 5000, 7);
  EXPECT_TRUE(chi2_two_sample(a, b).pass);
  EXPECT_FALSE(chi2_two_sample(a, c).pass);
}

TEST(ChiSquare, Multinomial) {
  EXPECT_TRUE(chi2_multinomial({2500, 2480, 5020}, {0.25, 0.25, 0.5}).pass);
  EXPECT_FALSE(chi2_multinomial({3000, 2000, 5000}, {0.25, 0.25, 0.5}).pass);
  EXPECT_THROW(chi2_multinomial({1, 2}, {1.0}), std::invalid_argument);
}

TEST(Bands, Proportion) {
  const auto ok = proportion_band(5000, 10000, 0.5, "half");
  EXPECT_TRUE(ok.pass);
  EXPECT_DOUBLE_EQ(ok.statistic, 0.0);
  // 4.5 standard errors out
  EXPECT_FALSE(proportion_band(5225, 10000, 0.5, "off").pass);
  EXPECT_TRUE(proportion_band(5195, 10000, 0.5, "inside").pass);
}

TEST(Bands, MeanAndCovariance) {
  Stream rng(8);
  std::vector<double> x, y, z;
  for (int i = 0; i < 20000; ++i) {
    const double a = rng.exponential(), b = rng.exponential();
    x.push_back(a);
    y.push_back(b);
    z.push_back(a + b);
  }
  EXPECT_TRUE(mean_band(x, 1.0, "mean").pass);
  EXPECT_TRUE(covariance_band(x, y, 0.0, "independent").pass);
  EXPECT_TRUE(covariance_band(x, z, 1.0, "shared").pass);
  EXPECT_FALSE(covariance_band(x, z, 0.0, "wrong").pass);
}

TEST(Reports, PassMatchesThreshold) {
  const auto r = chi2_poisson(poisson_draws(1.0, 1000, 9), 1.0, "p", 0.999999);
  EXPECT_EQ(r.pass, r.p_value >= 0.999999);
  EXPECT_TRUE(exact_check(0.0, 0.0, 1, "zero").pass);
  EXPECT_FALSE(exact_check(1e-9, 1e-10, 1, "small").pass);
  EXPECT_TRUE(budget_check(0.005, 0.01, 100, "budget").pass);
  EXPECT_FALSE(budget_check(0.02, 0.01, 100, "budget").pass);
  const auto j = to_json(r);
  EXPECT_EQ(j["test"], "p");
  EXPECT_TRUE(j.contains("p_value"));
}
