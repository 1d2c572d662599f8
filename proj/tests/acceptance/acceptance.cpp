// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.
//
//   acceptance [--only 1,4,12] [--workers K]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crpx/crpx.hpp"

using namespace crpx;
using verify::SuiteConfig;
using verify::SuiteReport;

namespace {

unsigned g_workers = 0;
std::map<std::string, SuiteConfig> g_configs;
std::map<std::string, SuiteReport> g_reports;
std::map<std::string, double> g_seconds;

struct Verdict {
  bool pass = true;
  std::string detail;
};

const SuiteReport& suite(const std::string& name) {
  auto it = g_reports.find(name);
  if (it != g_reports.end()) return it->second;
  auto c = verify::default_config(name);
  c.workers = g_workers;
  const auto t0 = std::chrono::steady_clock::now();
  auto rep = verify::run_suite(c);
  g_seconds[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  g_configs[name] = c;
  return g_reports.emplace(name, std::move(rep)).first->second;
}

std::vector<const stats::GofReport*> matching(const SuiteReport& rep, const std::string& part) {
  std::vector<const stats::GofReport*> out;
  for (const auto& r : rep.reports)
    if (r.test.find(part) != std::string::npos) out.push_back(&r);
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Every report whose name contains `part` passes, and there is at least one.
bool all_pass(const SuiteReport& rep, const std::string& part, std::string& detail) {
  const auto rs = matching(rep, part);
  if (rs.empty()) {
    detail += " [no check named '" + part + "']";
    return false;
  }
  bool ok = true;
  double min_p = 1.0;
  for (const auto* r : rs) {
    ok = ok && r->pass;
    min_p = std::min(min_p, r->p_value);
  }
  detail += (detail.empty() ? "" : " ") + part + ": " + std::to_string(rs.size()) + " check(s), min p " + fmt("%.3g", min_p) + ";";
  return ok;
}

std::string runtime(const std::string& name, double limit, bool& ok) {
  const double s = g_seconds.at(name);
  ok = ok && s < limit;
  return " runtime " + fmt("%.1f", s) + " s (< " + fmt("%.0f", limit) + " s)";
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// ---------------------------------------------------------------------------

Verdict oracle_duality() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& rep = suite("oracle");
  const auto rs = matching(rep, "joint vs stepwise, random families");
  Verdict v;
  const auto& c = g_configs.at("oracle");
  v.pass = rs.size() == 1 && c.families == 1000 && c.thetas == std::vector<double>{0.3, 1.0, 2.7};
  const double err = rs.empty() ? kInf : rs[0]->statistic;
  v.pass = v.pass && err <= 1e-10;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.pass = v.pass && secs < 10.0;
  v.detail = "1000 families, max relative error " + fmt("%.2e", err) + " (<= 1e-10); runtime " + fmt("%.2f", secs) +
             " s (< 10 s)";
  return v;
}

Verdict worked_example() {
  const auto f = verify::worked_example();
  const double want = 36.0 / (57120.0 * 255024.0);
  const double j = oracle::joint_probability(f).value;
  const double s = oracle::stepwise_probability(f).value;
  const bool overlap = oracle::overlap_counts(f) == std::vector<std::uint64_t>{2, 0};
  Verdict v;
  v.pass = overlap && rel(j, want) <= 1e-13 && rel(s, want) <= 1e-13 && rel(j, s) <= 1e-13;
  v.detail = "joint " + fmt("%.10e", j) + ", stepwise " + fmt("%.10e", s) + ", target " + fmt("%.10e", want) +
             "; max relative difference " + fmt("%.1e", std::max({rel(j, want), rel(s, want), rel(j, s)})) +
             " (<= 1e-13); l = (2,0) " + (overlap ? "ok" : "WRONG");
  return v;
}

Verdict ewens() {
  double sum_err = 0.0, pmf_err = 0.0;
  for (double theta : {0.5, 1.0, 2.0})
    for (unsigned n = 1; n <= 5; ++n) {
      double total = 0.0;
      for (const auto& [p, val] : oracle::exhaustive_partition_distribution(n, theta)) {
        total += val;
        pmf_err = std::max(pmf_err, std::abs(val - oracle::ewens_partition_pmf(p, theta)));
      }
      sum_err = std::max(sum_err, std::abs(total - 1.0));
    }
  const auto& rep = suite("ewens");
  Verdict v;
  v.pass = sum_err <= 1e-12 && pmf_err <= 1e-12 && rep.pass && g_configs.at("ewens").reps == 1000000;
  v.detail = "sum error " + fmt("%.1e", sum_err) + ", pmf error " + fmt("%.1e", pmf_err) + " (<= 1e-12);";
  all_pass(rep, "frequencies", v.detail);
  v.detail += std::string(" suite ") + (rep.pass ? "pass" : "FAIL") + ";" + runtime("ewens", 60.0, v.pass);
  return v;
}

Verdict theorem1() {
  const auto& rep = suite("theorem1");
  Verdict v;
  const auto& c = g_configs.at("theorem1");
  v.pass = c.ns == std::vector<std::uint64_t>{100000} && c.reps == 2000 && c.thetas == std::vector<double>{1.0};
  v.pass = all_pass(rep, "poisson N1", v.detail) && v.pass;
  v.pass = all_pass(rep, "poisson N2", v.detail) && v.pass;
  v.pass = all_pass(rep, "void", v.detail) && v.pass;
  v.pass = v.pass && matching(rep, "poisson N1").size() == 3 && matching(rep, "poisson N2").size() == 3;
  v.detail += runtime("theorem1", 300.0, v.pass);
  return v;
}

Verdict counts() {
  const auto& rep = suite("counts");
  Verdict v;
  const double lam11 = intensity::lambda_ij(1.0, 2.0, 1, 1);
  v.pass = std::abs(lam11 - 0.5) <= 1e-15;
  v.pass = all_pass(rep, "mean C", v.detail) && v.pass;
  v.pass = all_pass(rep, "cov C1(n) C1(alpha n)", v.detail) && v.pass;
  v.pass = v.pass && matching(rep, "mean C").size() == 6;
  v.detail += " lambda_11 = " + fmt("%.3g", lam11) + ";" + runtime("counts", 600.0, v.pass);
  return v;
}

Verdict fpc() {
  const auto& rep = suite("fpc");
  Verdict v;
  const double target = limit::pgf_x1(1.0, {1.0, 2.0}, {0.5, 0.5});
  v.pass = std::abs(target - std::exp(-0.875)) <= 1e-15;
  v.pass = all_pass(rep, "pgf z=[0.5,0.5] grid=[1.0,2.0]", v.detail) && v.pass;
  v.pass = all_pass(rep, "X1(t) poisson", v.detail) && v.pass;
  v.pass = v.pass && matching(rep, "X1(t) poisson").size() == 4;
  v.detail += " target e^-0.875 = " + fmt("%.6f", target);
  return v;
}

Verdict minpoint() {
  const auto& rep = suite("minpoint");
  Verdict v;
  v.pass = std::abs(limit::survival_L(1.0, {1.0}, {0.5}) - std::exp(-0.5)) <= 1e-15;
  v.pass = all_pass(rep, "survival t=1.0 x=0.5 ", v.detail) && v.pass;
  const auto rs = matching(rep, "survival t=1.0 x=0.5 ");
  if (!rs.empty()) v.detail += " z = " + fmt("%.2f", rs[0]->statistic) + " (|z| < 4)";
  return v;
}

Verdict shortlived() {
  const auto& rep = suite("shortlived");
  Verdict v;
  const auto ks = matching(rep, "ks T/n vs Pareto");
  const auto cens = matching(rep, "censored fraction");
  v.pass = ks.size() == 1 && cens.size() == 1 && ks[0]->p_value >= 1e-3 && cens[0]->statistic < 0.01;
  if (v.pass)
    v.detail = "KS p = " + fmt("%.3g", ks[0]->p_value) + " (>= 1e-3), censored fraction " +
               fmt("%.4f", cens[0]->statistic) + " (< 0.01), " + std::to_string(ks[0]->sample_size) + " replicates";
  else
    v.detail = "checks missing or failing";
  return v;
}

Verdict qprocess() {
  const auto& rep = suite("qprocess");
  Verdict v;
  v.pass = std::abs(limit::q_cumulative_intensity(std::expm1(1.0), 1.0, 1.0) - 1.0) <= 1e-15;
  v.pass = all_pass(rep, "increment poisson", v.detail) && v.pass;
  v.pass = all_pass(rep, "Q(t) poisson t=1.718", v.detail) && v.pass;
  v.pass = v.pass && rep.pass;
  v.detail += std::string(" suite ") + (rep.pass ? "pass" : "FAIL");
  return v;
}

Verdict measure() {
  const auto& rep = suite("measure");
  Verdict v;
  auto stat = [&](const std::string& part) {
    const auto rs = matching(rep, part);
    return rs.empty() ? kInf : rs[0]->statistic;
  };
  const double scale = stat("scale invariance");
  const double consist = stat("consistency");
  const double row = stat("row identity");
  v.pass = scale <= 1e-8 && consist <= 1e-8 && row <= 1e-12 && rep.pass && g_configs.at("measure").reps == 20;
  v.detail = "scale " + fmt("%.1e", scale) + ", consistency " + fmt("%.1e", consist) + " (<= 1e-8); row identity " +
             fmt("%.1e", row) + " (<= 1e-12)";
  return v;
}

Verdict lemma2() {
  const auto& rep = suite("lemma2");
  Verdict v;
  v.pass = rep.pass && g_configs.at("lemma2").ns.back() == 2000;
  double worst = 0.0;
  for (const auto* r : matching(rep, "relative gap at largest n")) worst = std::max(worst, r->statistic);
  v.pass = v.pass && worst <= 0.02 && matching(rep, "gap decreasing").size() >= 2;
  v.detail = "largest relative gap at n=2000 " + fmt("%.4f", worst) + " (<= 0.02);";
  all_pass(rep, "gap decreasing", v.detail);
  return v;
}

Verdict determinism() {
  Verdict v;
  std::string bad;
  for (const auto& name : verify::suite_names()) {
    const auto& first = suite(name);
    auto c = g_configs.at(name);
    c.workers = c.workers == 1 ? 3 : 1;
    if (verify::run_suite(c).dump() != first.dump()) bad += " " + name;
  }
  v.pass = bad.empty();
  v.detail = std::to_string(verify::suite_names().size()) + " suites rerun with a different worker count; " +
             (bad.empty() ? std::string("all byte-identical") : "differences in" + bad);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    } else if (!std::strcmp(argv[i], "--workers") && i + 1 < argc) {
      g_workers = static_cast<unsigned>(std::stoul(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--only 1,2,...] [--workers K]\n");
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"oracle duality on random families", oracle_duality},
      {"worked example, both oracles", worked_example},
      {"Ewens exactness and Monte Carlo", ewens},
      {"Poisson limit on windows, N = 1, 2", theorem1},
      {"block counts at n and 2n", counts},
      {"X_1 finite-dimensional laws", fpc},
      {"least singleton against L", minpoint},
      {"fastest singleton after delta n", shortlived},
      {"short-lived singleton counting process", qprocess},
      {"measure identities", measure},
      {"lattice sums converge to mass^r", lemma2},
      {"byte-identical reruns", determinism},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
