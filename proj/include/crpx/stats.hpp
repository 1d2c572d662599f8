#pragma once

// Goodness-of-fit tests and standard-error bands. Every check produces a
// GofReport with a p-value in [0,1] and pass == (p >= threshold).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "json.hpp"

namespace crpx::stats {

using Json = nlohmann::ordered_json;

inline constexpr double kDefaultThreshold = 1e-3;
/// Two-sided normal tail beyond 4 standard errors.
inline const double kFourSigma = std::erfc(4.0 / std::sqrt(2.0));
/// Stand-in for an infinite z-score (JSON has no infinity).
inline constexpr double kInfZ = 1e300;

struct GofReport {
  std::string test;
  std::string kind;  // chi2 | ks | ks2 | chi2-2s | band | exact | budget
  double statistic = 0.0;
  double p_value = 1.0;
  double threshold = kDefaultThreshold;
  std::uint64_t sample_size = 0;
  bool pass = true;
  Json meta = Json::object();

  GofReport& with(const std::string& key, Json value) {
    meta[key] = std::move(value);
    return *this;
  }
};

inline GofReport finish(GofReport r) {
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  r.pass = r.p_value >= r.threshold;
  return r;
}

inline Json to_json(const GofReport& r) {
  return Json{{"test", r.test},          {"kind", r.kind},
              {"statistic", r.statistic}, {"p_value", r.p_value},
              {"threshold", r.threshold}, {"sample_size", r.sample_size},
              {"pass", r.pass},           {"meta", r.meta}};
}

/// Upper tail of the chi-square law.
inline double chi2_sf(double stat, double df) {
  if (df <= 0.0) return 1.0;
  if (stat <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * stat);
}

/// Kolmogorov distribution upper tail Q(lambda) = P{sup|B| > lambda}.
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    constexpr double kPi = 3.14159265358979323846;
    const double w = kPi * kPi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) sum += std::exp(-static_cast<double>((2 * k - 1) * (2 * k - 1)) * w);
    return std::clamp(1.0 - std::sqrt(2.0 * kPi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double ks_pvalue(double d, double n_eff) {
  const double rn = std::sqrt(n_eff);
  return kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d);
}

/// Pearson chi-square against Pois(mean), bins merged left to right until
/// each holds expected count >= 5; the last bin is the upper tail.
inline GofReport chi2_poisson(const std::vector<std::uint64_t>& samples, double mean, std::string name = "chi2_poisson",
                              double threshold = kDefaultThreshold) {
  if (samples.size() < 200) throw std::invalid_argument("chi2_poisson: need at least 200 samples");
  if (!(mean >= 0.0)) throw std::invalid_argument("chi2_poisson: mean must be nonnegative");
  const auto n = static_cast<double>(samples.size());
  const std::uint64_t top = *std::max_element(samples.begin(), samples.end());

  // pmf up to the point where the tail is negligible or past the data
  std::vector<double> pmf;
  double p = std::exp(-mean);
  double cum = 0.0;
  for (std::uint64_t k = 0;; ++k) {
    if (k > 0) p *= mean / static_cast<double>(k);
    pmf.push_back(p);
    cum += p;
    if ((k > top && (1.0 - cum) * n < 5.0) || k > top + 1000) break;
  }

  // bins: [edge_b, edge_{b+1}), the last one open-ended
  std::vector<std::uint64_t> edges{0};
  double acc = 0.0;
  double used = 0.0;
  for (std::uint64_t k = 0; k < pmf.size(); ++k) {
    acc += pmf[k];
    if (acc * n >= 5.0 && (1.0 - used - acc) * n >= 5.0) {
      used += acc;
      acc = 0.0;
      edges.push_back(k + 1);
    }
  }
  const std::size_t bins = edges.size();
  std::vector<double> expected(bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo_cdf = std::accumulate(pmf.begin(), pmf.begin() + static_cast<std::ptrdiff_t>(edges[b]), 0.0);
    const double hi_cdf = b + 1 < bins
                              ? std::accumulate(pmf.begin(), pmf.begin() + static_cast<std::ptrdiff_t>(edges[b + 1]), 0.0)
                              : 1.0;
    expected[b] = std::max(0.0, hi_cdf - lo_cdf) * n;
  }
  std::vector<double> observed(bins, 0.0);
  for (auto s : samples) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), s);
    observed[static_cast<std::size_t>(it - edges.begin()) - 1] += 1.0;
  }
  double stat = 0.0;
  for (std::size_t b = 0; b < bins; ++b)
    if (expected[b] > 0.0) stat += (observed[b] - expected[b]) * (observed[b] - expected[b]) / expected[b];

  GofReport r;
  r.test = std::move(name);
  r.kind = "chi2";
  r.statistic = stat;
  r.p_value = chi2_sf(stat, static_cast<double>(bins) - 1.0);
  r.threshold = threshold;
  r.sample_size = samples.size();
  r.with("mean", mean).with("bins", bins);
  return finish(std::move(r));
}

/// Pearson chi-square of observed category counts against probabilities.
/// Categories with expected count below 5 are pooled into one bin.
inline GofReport chi2_multinomial(const std::vector<std::uint64_t>& observed, const std::vector<double>& probs,
                                  std::string name = "chi2_multinomial", double threshold = kDefaultThreshold) {
  if (observed.size() != probs.size() || observed.empty())
    throw std::invalid_argument("chi2_multinomial: counts and probabilities differ in length");
  double n = 0.0;
  for (auto o : observed) n += static_cast<double>(o);
  if (n < 200.0) throw std::invalid_argument("chi2_multinomial: need at least 200 samples");
  std::vector<std::pair<double, double>> cells;  // observed, expected
  std::pair<double, double> rest{0.0, 0.0};
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = probs[i] * n;
    if (e >= 5.0)
      cells.emplace_back(static_cast<double>(observed[i]), e);
    else {
      rest.first += static_cast<double>(observed[i]);
      rest.second += e;
    }
  }
  if (rest.second > 0.0 || rest.first > 0.0) cells.push_back(rest);
  double stat = 0.0;
  for (const auto& [o, e] : cells) {
    if (e > 0.0)
      stat += (o - e) * (o - e) / e;
    else if (o > 0.0)
      stat = kInfZ;
  }
  GofReport r;
  r.test = std::move(name);
  r.kind = "chi2";
  r.statistic = stat;
  r.p_value = chi2_sf(stat, static_cast<double>(cells.size()) - 1.0);
  r.threshold = threshold;
  r.sample_size = static_cast<std::uint64_t>(n);
  r.with("cells", cells.size());
  return finish(std::move(r));
}

/// One-sample Kolmogorov-Smirnov test with the asymptotic p-value.
inline GofReport ks_continuous(std::vector<double> samples, const std::function<double(double)>& cdf,
                               std::string name = "ks", double threshold = kDefaultThreshold) {
  if (samples.size() < 100) throw std::invalid_argument("ks_continuous: need at least 100 samples");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  GofReport r;
  r.test = std::move(name);
  r.kind = "ks";
  r.statistic = d;
  r.p_value = ks_pvalue(d, n);
  r.threshold = threshold;
  r.sample_size = samples.size();
  return finish(std::move(r));
}

inline GofReport ks_two_sample(std::vector<double> a, std::vector<double> b, std::string name = "ks2",
                               double threshold = kDefaultThreshold) {
  if (a.size() < 100 || b.size() < 100) throw std::invalid_argument("ks_two_sample: need at least 100 samples each");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  GofReport r;
  r.test = std::move(name);
  r.kind = "ks2";
  r.statistic = d;
  r.p_value = ks_pvalue(d, na * nb / (na + nb));
  r.threshold = threshold;
  r.sample_size = a.size() + b.size();
  return finish(std::move(r));
}

/// Chi-square test that two samples of discrete keys share one law.
/// Categories with pooled count below 10 go into a single residual bin.
template <class Key>
GofReport chi2_two_sample(const std::vector<Key>& a, const std::vector<Key>& b, std::string name = "chi2_2s",
                          double threshold = kDefaultThreshold) {
  if (a.size() < 200 || b.size() < 200) throw std::invalid_argument("chi2_two_sample: need at least 200 samples each");
  std::map<Key, std::pair<double, double>> table;
  for (const auto& k : a) table[k].first += 1.0;
  for (const auto& k : b) table[k].second += 1.0;
  std::vector<std::pair<double, double>> cells;
  std::pair<double, double> rest{0.0, 0.0};
  for (const auto& [k, c] : table) {
    if (c.first + c.second >= 10.0)
      cells.push_back(c);
    else {
      rest.first += c.first;
      rest.second += c.second;
    }
  }
  if (rest.first + rest.second > 0.0) cells.push_back(rest);
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  double stat = 0.0;
  for (const auto& [ca, cb] : cells) {
    const double tot = ca + cb;
    const double ea = tot * na / (na + nb);
    const double eb = tot * nb / (na + nb);
    stat += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
  }
  GofReport r;
  r.test = std::move(name);
  r.kind = "chi2-2s";
  r.statistic = stat;
  r.p_value = chi2_sf(stat, static_cast<double>(cells.size()) - 1.0);
  r.threshold = threshold;
  r.sample_size = a.size() + b.size();
  r.with("cells", cells.size());
  return finish(std::move(r));
}

// ---------------------------------------------------------------------------
// Standard-error bands: pass iff |estimate - target| <= 4 se.

inline GofReport value_band(double estimate, double se, double target, std::uint64_t n, std::string name) {
  GofReport r;
  r.test = std::move(name);
  r.kind = "band";
  const double diff = estimate - target;
  const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(kInfZ, diff));
  r.statistic = z;
  r.p_value = std::erfc(std::fabs(z) / std::sqrt(2.0));
  r.threshold = kFourSigma;
  r.sample_size = n;
  r.with("estimate", estimate).with("target", target).with("se", se);
  return finish(std::move(r));
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

template <class T>
Moments moments(const std::vector<T>& xs) {
  Moments m;
  if (xs.empty()) return m;
  double s = 0.0;
  for (auto x : xs) s += static_cast<double>(x);
  m.mean = s / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double q = 0.0;
    for (auto x : xs) q += (static_cast<double>(x) - m.mean) * (static_cast<double>(x) - m.mean);
    m.var = q / static_cast<double>(xs.size() - 1);
  }
  return m;
}

template <class T>
GofReport mean_band(const std::vector<T>& xs, double target, std::string name) {
  if (xs.size() < 2) throw std::invalid_argument("mean_band: need at least 2 samples");
  const auto m = moments(xs);
  return value_band(m.mean, std::sqrt(m.var / static_cast<double>(xs.size())), target, xs.size(), std::move(name));
}

/// Binomial proportion against p0 with the null standard error.
inline GofReport proportion_band(std::uint64_t hits, std::uint64_t n, double p0, std::string name) {
  if (n == 0) throw std::invalid_argument("proportion_band: empty sample");
  const double est = static_cast<double>(hits) / static_cast<double>(n);
  const double se = std::sqrt(p0 * (1.0 - p0) / static_cast<double>(n));
  return value_band(est, se, p0, n, std::move(name));
}

/// Sample covariance against a target, with the delta-method standard error
/// sd((x - xbar)(y - ybar)) / sqrt(n).
template <class T, class U>
GofReport covariance_band(const std::vector<T>& x, const std::vector<U>& y, double target, std::string name) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("covariance_band: need paired samples");
  const auto mx = moments(x);
  const auto my = moments(y);
  std::vector<double> prod(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    prod[i] = (static_cast<double>(x[i]) - mx.mean) * (static_cast<double>(y[i]) - my.mean);
  const auto mp = moments(prod);
  const auto n = static_cast<double>(x.size());
  const double cov = mp.mean * n / (n - 1.0);
  return value_band(cov, std::sqrt(mp.var / n), target, x.size(), std::move(name));
}

/// Deterministic identity: pass iff error <= tol.
inline GofReport exact_check(double error, double tol, std::uint64_t n, std::string name) {
  GofReport r;
  r.test = std::move(name);
  r.kind = "exact";
  r.statistic = error;
  r.p_value = error <= tol ? 1.0 : 0.0;
  r.threshold = 1.0;
  r.sample_size = n;
  r.with("tolerance", tol);
  return finish(std::move(r));
}

/// Resource or censoring budget: pass iff used <= allowed.
inline GofReport budget_check(double used, double allowed, std::uint64_t n, std::string name) {
  GofReport r;
  r.test = std::move(name);
  r.kind = "budget";
  r.statistic = used;
  r.p_value = used <= allowed ? 1.0 : 0.0;
  r.threshold = 1.0;
  r.sample_size = n;
  r.with("allowed", allowed);
  return finish(std::move(r));
}

}  // namespace crpx::stats
