// crpx: command-line front end.
//
//   crpx simulate --theta 1 --n 100000 --seed 7 --track-atoms 1
//   crpx verify oracle --families 1000 --seed 3
//   crpx probe --family "3,7,11,19;6,12,21,24" --theta 1
//   crpx mass --window '{"x":[[0,1]],"y":[1,2]}' --theta 1
//   crpx sample-limit --window '{"x":[[0,1]],"y":[1,"inf"]}' --theta 1 --seed 4
//   crpx law --theta 1 --delta 0.5 --t 0.1,1
//   crpx plotdata L --theta 1 --tmax 3 --seed 5
//   crpx replay out/manifest.json --out again
//
// Every subcommand takes --config FILE with flat key=value lines; flags on the
// command line win over the file. CRPX_OUT_DIR sets the output directory when
// --out is not given.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crpx/crpx.hpp"

namespace fs = std::filesystem;
using crpx::io::Json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options of one subcommand, remembered so they can be echoed in a manifest
// and turned back into a command line.
struct Registry {
  struct Entry {
    std::string name;
    CLI::Option* opt;
    std::function<Json()> get;
    bool flag = false;
    bool echo = true;
  };
  CLI::App* app = nullptr;
  std::vector<Entry> entries;
  bool given_only = false;  // echo only options that were set
  std::vector<CLI::Option*> needed;

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help, bool echo = true) {
    auto* o = app->add_option("--" + name, var, help);
    if constexpr (!std::is_same_v<T, std::string>) {
      if constexpr (requires { var.push_back(var.front()); }) o->delimiter(',');
    }
    entries.push_back({name, o, [&var] { return Json(var); }, false, echo});
    return o;
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    auto* o = app->add_flag("--" + name, var, help);
    entries.push_back({name, o, [&var] { return Json(var); }, true, true});
    return o;
  }

  bool given(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return e.opt->count() > 0;
    throw std::logic_error("no option " + name);
  }

  Json echo() const {
    Json j = Json::object();
    for (const auto& e : entries)
      if (e.echo && (!given_only || e.opt->count() > 0)) j[e.name] = e.get();
    return j;
  }

  std::vector<std::string> arguments() const {
    std::vector<std::string> args;
    for (const auto& e : entries) {
      if (!e.echo || (given_only && e.opt->count() == 0)) continue;
      const Json v = e.get();
      if (e.flag) {
        if (v.get<bool>()) args.push_back("--" + e.name);
        continue;
      }
      if (v.is_array()) {
        if (v.empty()) continue;
        std::string joined;
        for (std::size_t i = 0; i < v.size(); ++i) joined += (i ? "," : "") + scalar(v[i]);
        args.push_back("--" + e.name);
        args.push_back(joined);
      } else {
        args.push_back("--" + e.name);
        args.push_back(scalar(v));
      }
    }
    return args;
  }

  static std::string scalar(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

  /// Required options may come from the config file, so the check waits
  /// until it has been read.
  CLI::Option* require(CLI::Option* o) {
    o->description(o->get_description() + " (required)");
    needed.push_back(o);
    return o;
  }

  /// Fills options not given on the command line from a key=value file.
  void apply_config(const std::string& path) {
    fill_from(path);
    for (const auto* o : needed)
      if (o->count() == 0) throw ConfigError(o->get_name() + " is required");
  }

  void fill_from(const std::string& path) {
    if (path.empty()) return;
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
    std::vector<CLI::ConfigItem> items;
    try {
      items = CLI::ConfigINI().from_file(path);
    } catch (const std::exception& e) {
      throw ConfigError("cannot read config " + path + ": " + e.what());
    }
    for (const auto& item : items) {
      if (item.name == "config" || item.name == "++" || item.name == "--") continue;
      auto* o = app->get_option_no_throw("--" + item.name);
      if (o == nullptr) throw ConfigError(path + ": unknown key '" + item.name + "'");
      if (o->count() > 0) continue;
      try {
        o->add_result(item.inputs);
        o->run_callback();
      } catch (const CLI::Error& e) {
        throw ConfigError(path + ": " + e.what());
      }
    }
  }
};

struct Common {
  std::string config;
  std::string out;
  unsigned workers = 0;
};

void add_common(Registry& reg, Common& c, bool with_out) {
  reg.app->add_option("--config", c.config, "flat key=value file; command-line flags take precedence");
  reg.add("workers", c.workers, "worker threads (0 = all cores); results do not depend on it", false);
  if (with_out)
    reg.add("out", c.out, "output directory", false)->envname("CRPX_OUT_DIR")->default_val("crpx-out");
}

Json manifest(const std::string& command, const Registry& reg, const std::vector<std::string>& positional,
              const std::vector<std::string>& files) {
  Json m;
  m["tool"] = "crpx";
  m["version"] = crpx::kVersion;
  m["command"] = command;
  m["positional"] = positional;
  m["config"] = reg.echo();
  m["arguments"] = reg.arguments();
  m["files"] = files;
  return m;
}

// ---------------------------------------------------------------------------
// Window parsing: {"x": [[lo, hi], ...], "y": [lo, hi]}, hi may be "inf" or null.

double bound(const Json& v) {
  if (v.is_null()) return crpx::kInf;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity") return crpx::kInf;
    throw ConfigError("bad window bound: " + s);
  }
  if (!v.is_number()) throw ConfigError("bad window bound: " + v.dump());
  return v.get<double>();
}

crpx::Interval interval(const Json& v) {
  if (!v.is_array() || v.size() != 2) throw ConfigError("window interval must be [lo, hi]: " + v.dump());
  return {bound(v[0]), bound(v[1])};
}

crpx::ConeWindow parse_window(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("window is not valid JSON: ") + e.what());
  }
  if (!j.contains("x") || !j.contains("y") || !j["x"].is_array())
    throw ConfigError("window needs \"x\": [[lo,hi],...] and \"y\": [lo,hi]");
  crpx::ConeWindow w;
  for (const auto& iv : j["x"]) w.x.push_back(interval(iv));
  w.y = interval(j["y"]);
  w.validate();
  return w;
}

Json window_json(const crpx::ConeWindow& w) {
  auto b = [](double v) { return std::isfinite(v) ? Json(v) : Json("inf"); };
  Json x = Json::array();
  for (const auto& iv : w.x) x.push_back(Json::array({b(iv.lo), b(iv.hi)}));
  return Json{{"x", x}, {"y", Json::array({b(w.y.lo), b(w.y.hi)})}};
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void check_formats(const std::vector<std::string>& formats, const std::vector<std::string>& allowed) {
  for (const auto& f : formats)
    if (std::find(allowed.begin(), allowed.end(), f) == allowed.end())
      throw ConfigError("unsupported format: " + f);
}

bool wants(const std::vector<std::string>& formats, const std::string& f) {
  return std::find(formats.begin(), formats.end(), f) != formats.end();
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  Common common;
  double theta = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t reps = 1;
  unsigned track_atoms = 1;
  std::vector<std::uint64_t> snapshots;
  bool first_singleton = false;
  double delta = 0.0;
  std::uint64_t scale = 0;
  std::string engine = "full";
  std::vector<std::string> formats{"csv", "jsonl"};
};

void setup_simulate(Registry& reg, SimulateOptions& o) {
  add_common(reg, o.common, true);
  reg.require(reg.add("theta", o.theta, "concentration theta > 0"));
  reg.require(reg.add("n", o.n, "number of customers (horizon)"));
  reg.require(reg.add("seed", o.seed, "master seed"));
  reg.add("reps", o.reps, "independent trajectories");
  reg.add("track-atoms", o.track_atoms, "record block atoms for N = 1..value (0..16)");
  reg.add("snapshots", o.snapshots, "steps at which to record block-size counts");
  reg.flag("first-singleton", o.first_singleton, "record the path of the least singleton");
  reg.add("delta", o.delta, "record short-lived singletons born after delta * scale");
  reg.add("scale", o.scale, "scaling n for observables (default: the horizon)");
  reg.add("engine", o.engine, "full | singleton")->check(CLI::IsMember({"full", "singleton"}));
  reg.add("format", o.formats, "csv, jsonl");
}

std::vector<std::string> run_simulate(const SimulateOptions& o) {
  check_formats(o.formats, {"csv", "jsonl"});
  crpx::CrpParams base{o.theta, o.seed, o.n};
  base.validate();
  if (o.reps == 0) throw ConfigError("reps must be positive");
  crpx::TrackerConfig trackers;
  trackers.n_max = o.track_atoms;
  trackers.atoms = o.track_atoms > 0;
  trackers.snapshot_steps = o.snapshots;
  std::sort(trackers.snapshot_steps.begin(), trackers.snapshot_steps.end());
  trackers.first_singleton = o.first_singleton;
  if (o.delta > 0.0) trackers.shortlived_delta = o.delta;
  trackers.scale = o.scale;
  trackers.validate(o.n);
  if (o.engine == "singleton" && (o.track_atoms > 1 || !o.snapshots.empty()))
    throw ConfigError("the singleton engine records only N=1 atoms");

  const auto results = crpx::parallel_map(o.reps, o.common.workers, [&](std::size_t r) {
    crpx::CrpParams p = base;
    p.seed = crpx::derive_seed(o.seed, {crpx::name_id("simulate"), r, crpx::name_id("trajectory")});
    return o.engine == "singleton" ? crpx::run_singletons(p, trackers) : crpx::run(p, trackers);
  });

  const fs::path dir = o.common.out;
  std::vector<std::string> files;
  if (wants(o.formats, "csv"))
    for (unsigned order = 1; order <= o.track_atoms; ++order) {
      const std::string name = "atoms_N" + std::to_string(order) + ".csv";
      auto out = crpx::io::open_output(dir / name);
      out << crpx::io::atoms_header(order) << "\r\n";
      for (std::size_t r = 0; r < results.size(); ++r) crpx::io::write_atoms(out, r, order, results[r].atoms(order));
      if (!out) throw std::runtime_error("write failed: " + (dir / name).string());
      files.push_back(name);
    }
  if (wants(o.formats, "jsonl")) {
    auto out = crpx::io::open_output(dir / "trajectories.jsonl");
    for (std::size_t r = 0; r < results.size(); ++r) out << crpx::io::to_json(results[r], r).dump() << '\n';
    if (!out) throw std::runtime_error("write failed: " + (dir / "trajectories.jsonl").string());
    files.push_back("trajectories.jsonl");
  }
  return files;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOptions {
  Common common;
  std::string suite;
  std::uint64_t seed = 0;
  std::uint64_t reps = 0;
  std::uint64_t limit_reps = 0;
  std::vector<double> thetas;
  std::vector<std::uint64_t> ns;
  double alpha = 0.0;
  double delta = 0.0;
  unsigned order = 0;
  std::vector<double> grid;
  std::vector<double> points;
  std::vector<double> marginal_grid;
  double horizon_factor = 0.0;
  std::string engine;
  std::uint64_t families = 0;
  double threshold = 0.0;
};

void setup_verify(Registry& reg, VerifyOptions& o) {
  reg.app->add_option("suite", o.suite, "suite name")->required()->check(CLI::IsMember(crpx::verify::suite_names()));
  add_common(reg, o.common, true);
  reg.add("seed", o.seed, "master seed (default: the suite's own)");
  reg.add("reps", o.reps, "Monte Carlo replicates per parameter point");
  reg.add("limit-reps", o.limit_reps, "replicates drawn from the limit object");
  reg.add("theta", o.thetas, "theta values");
  reg.add("n", o.ns, "n values");
  reg.add("alpha", o.alpha, "geometric ratio for the counts suite");
  reg.add("delta", o.delta, "delta for shortlived and qprocess");
  reg.add("order", o.order, "largest N");
  reg.add("grid", o.grid, "time grid");
  reg.add("points", o.points, "evaluation points");
  reg.add("marginal-grid", o.marginal_grid, "times for marginal checks");
  reg.add("horizon-factor", o.horizon_factor, "horizon as a multiple of n");
  reg.add("engine", o.engine, "full | singleton")->check(CLI::IsMember({"full", "singleton"}));
  reg.add("families", o.families, "random families for the oracle suite");
  reg.add("threshold", o.threshold, "p-value threshold");
}

crpx::verify::SuiteConfig suite_config(const Registry& reg, const VerifyOptions& o) {
  auto c = crpx::verify::default_config(o.suite);
  c.workers = o.common.workers;
  if (reg.given("seed")) c.seed = o.seed;
  if (reg.given("reps")) c.reps = o.reps;
  if (reg.given("limit-reps")) c.limit_reps = o.limit_reps;
  if (reg.given("theta")) c.thetas = o.thetas;
  if (reg.given("n")) c.ns = o.ns;
  if (reg.given("alpha")) c.alpha = o.alpha;
  if (reg.given("delta")) c.delta = o.delta;
  if (reg.given("order")) c.order = o.order;
  if (reg.given("grid")) c.grid = o.grid;
  if (reg.given("points")) c.points = o.points;
  if (reg.given("marginal-grid")) c.marginal_grid = o.marginal_grid;
  if (reg.given("horizon-factor")) c.horizon_factor = o.horizon_factor;
  if (reg.given("engine")) c.engine = o.engine;
  if (reg.given("families")) c.families = o.families;
  if (reg.given("threshold")) c.threshold = o.threshold;
  for (double t : c.thetas)
    if (!(t > 0.0)) throw ConfigError("theta must be positive");
  return c;
}

std::string summary(const crpx::verify::SuiteReport& rep) {
  std::ostringstream os;
  for (const auto& r : rep.reports) {
    os << (r.pass ? "PASS " : "FAIL ") << r.test << "  [" << r.kind << "] stat=" << std::setprecision(6)
       << r.statistic << " p=" << r.p_value << " n=" << r.sample_size << '\n';
  }
  os << "suite " << rep.suite << ": " << (rep.pass ? "PASS" : "FAIL") << " (" << rep.reports.size() << " checks)\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// probe

std::vector<crpx::BlockAtom> parse_family(const std::string& text) {
  std::vector<crpx::BlockAtom> tuples;
  std::stringstream all(text);
  std::string part;
  while (std::getline(all, part, ';')) {
    std::vector<std::uint64_t> v;
    std::stringstream ps(part);
    std::string tok;
    while (std::getline(ps, tok, ',')) {
      try {
        std::size_t used = 0;
        const auto x = std::stoull(tok, &used);
        if (used != tok.size() && tok.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(tok);
        v.push_back(x);
      } catch (const std::exception&) {
        throw ConfigError("bad integer in family: '" + tok + "'");
      }
    }
    if (v.size() < 2) throw ConfigError("each tuple needs k_1,...,k_N,m with N >= 1");
    crpx::BlockAtom a;
    a.m = v.back();
    v.pop_back();
    a.k = std::move(v);
    tuples.push_back(std::move(a));
  }
  if (tuples.empty()) throw ConfigError("empty family");
  return tuples;
}

Json probability_json(const crpx::oracle::ExactProbability& p) {
  return Json{{"value", p.value}, {"log_value", p.log_value}};
}

// ---------------------------------------------------------------------------
// plotdata

std::vector<double> linspace(double a, double b, std::size_t count) {
  std::vector<double> out;
  for (std::size_t i = 0; i <= count; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(count));
  return out;
}

void write_atoms_csv(const fs::path& path, const std::vector<crpx::ConePoint>& atoms) {
  auto out = crpx::io::open_output(path);
  out << "x,y\r\n";
  for (const auto& a : atoms) out << num(a.x[0]) << ',' << num(a.y) << "\r\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Breakpoints of the step paths on [t_min, t_max]: the ends plus every atom
// coordinate inside.
std::vector<double> breakpoints(const std::vector<crpx::ConePoint>& atoms, double t_min, double t_max) {
  std::vector<double> ts{t_min, t_max};
  for (const auto& a : atoms)
    for (double v : {a.x[0], a.y})
      if (v > t_min && v < t_max) ts.push_back(v);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

struct PlotOptions {
  Common common;
  std::string kind;
  double theta = 1.0;
  std::uint64_t seed = 0;
  double tmin = 0.0;
  double tmax = 3.0;
  std::vector<double> grid;
};

void setup_plot(Registry& reg, PlotOptions& o) {
  reg.app->add_option("kind", o.kind, "L | X1 | Tij")->required()->check(CLI::IsMember({"L", "X1", "Tij"}));
  add_common(reg, o.common, true);
  reg.add("theta", o.theta, "theta > 0");
  reg.require(reg.add("seed", o.seed, "master seed"));
  reg.add("tmin", o.tmin, "left end of the time range for L (default tmax/100)");
  reg.add("tmax", o.tmax, "right end of the time range for L");
  reg.add("grid", o.grid, "time grid for X1 and Tij");
}

std::vector<std::string> run_plot(const PlotOptions& o) {
  if (!(o.theta > 0.0)) throw ConfigError("theta must be positive");
  std::vector<double> grid = o.grid;
  if (grid.empty()) grid = o.kind == "Tij" ? std::vector<double>{1.0, 1.6, 2.5, 3.0} : std::vector<double>{0.5, 1.0, 2.0};
  if (!std::is_sorted(grid.begin(), grid.end()) || grid.front() <= 0.0 ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end())
    throw ConfigError("grid must be positive and strictly increasing");

  double t_min = 0.0;
  double t_max = 0.0;
  if (o.kind == "L") {
    t_max = o.tmax;
    t_min = o.tmin > 0.0 ? o.tmin : o.tmax / 100.0;
    if (!(t_max > t_min) || !(t_min > 0.0)) throw ConfigError("need 0 < tmin < tmax");
  } else {
    t_min = grid.front();
    t_max = grid.back();
  }
  crpx::Stream rng(crpx::derive_seed(o.seed, {crpx::name_id("plotdata"), crpx::name_id(o.kind), crpx::name_id("atoms")}));
  const auto sample = crpx::limit::sample_xi(crpx::intensity::window_covering(t_min, t_max), o.theta, rng);
  const fs::path dir = o.common.out;
  std::vector<std::string> files{"atoms.csv"};
  write_atoms_csv(dir / "atoms.csv", sample.atoms);

  if (o.kind == "L") {
    const auto ts = breakpoints(sample.atoms, t_min, t_max);
    const auto l = crpx::limit::path_L(sample.atoms, ts);
    const auto x1 = crpx::limit::path_X1(sample.atoms, ts);
    auto out = crpx::io::open_output(dir / "path.csv");
    out << "t,L,X1\r\n";
    for (std::size_t i = 0; i < ts.size(); ++i) out << num(ts[i]) << ',' << num(l[i]) << ',' << x1[i] << "\r\n";
    files.push_back("path.csv");
  } else if (o.kind == "X1") {
    const auto x1 = crpx::limit::path_X1(sample.atoms, grid);
    const auto l = crpx::limit::path_L(sample.atoms, grid);
    auto out = crpx::io::open_output(dir / "path.csv");
    out << "t,X1,L\r\n";
    for (std::size_t i = 0; i < grid.size(); ++i) out << num(grid[i]) << ',' << x1[i] << ',' << num(l[i]) << "\r\n";
    files.push_back("path.csv");
  } else {
    const auto counts = crpx::limit::t_box_counts(sample.atoms, grid);
    const auto lam = crpx::limit::lambda_prime(o.theta, grid);
    auto out = crpx::io::open_output(dir / "boxes.csv");
    out << "i,j,x_lo,x_hi,y_lo,y_hi,count,lambda\r\n";
    const auto r = static_cast<unsigned>(grid.size());
    for (unsigned i = 1; i <= r; ++i)
      for (unsigned j = i; j <= r; ++j) {
        const auto w = crpx::intensity::window_t(grid, i, j);
        out << i << ',' << j << ',' << num(w.x[0].lo) << ',' << num(w.x[0].hi) << ',' << num(w.y.lo) << ','
            << (std::isfinite(w.y.hi) ? num(w.y.hi) : std::string("inf")) << ',' << counts[i - 1][j - 1] << ','
            << num(lam[i - 1][j - 1]) << "\r\n";
      }
    files.push_back("boxes.csv");
  }
  return files;
}

// ---------------------------------------------------------------------------
// sample-limit

struct SampleOptions {
  Common common;
  std::string window;
  double theta = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t reps = 1;
  std::vector<std::string> formats{"csv"};
};

void setup_sample(Registry& reg, SampleOptions& o) {
  add_common(reg, o.common, true);
  reg.require(reg.add("window", o.window, "window as JSON, e.g. {\"x\":[[0,1]],\"y\":[1,\"inf\"]}"));
  reg.add("theta", o.theta, "theta > 0");
  reg.require(reg.add("seed", o.seed, "master seed"));
  reg.add("reps", o.reps, "independent samples");
  reg.add("format", o.formats, "csv, jsonl");
}

std::vector<std::string> run_sample(const SampleOptions& o) {
  check_formats(o.formats, {"csv", "jsonl"});
  if (!(o.theta > 0.0)) throw ConfigError("theta must be positive");
  if (o.reps == 0) throw ConfigError("reps must be positive");
  const auto w = parse_window(o.window);
  crpx::limit::WindowSampler sampler(w, o.theta);
  const auto samples = crpx::parallel_map(o.reps, o.common.workers, [&](std::size_t r) {
    crpx::Stream rng(crpx::derive_seed(o.seed, {crpx::name_id("sample-limit"), r, crpx::name_id("atoms")}));
    return sampler.sample(rng);
  });
  const fs::path dir = o.common.out;
  std::vector<std::string> files;
  if (wants(o.formats, "csv")) {
    auto out = crpx::io::open_output(dir / "atoms.csv");
    out << "replicate";
    for (std::size_t i = 1; i <= w.order(); ++i) out << ",x" << i;
    out << ",y\r\n";
    for (std::size_t r = 0; r < samples.size(); ++r)
      for (const auto& a : samples[r].atoms) {
        out << r;
        for (double x : a.x) out << ',' << num(x);
        out << ',' << num(a.y) << "\r\n";
      }
    files.push_back("atoms.csv");
  }
  if (wants(o.formats, "jsonl")) {
    auto out = crpx::io::open_output(dir / "samples.jsonl");
    for (std::size_t r = 0; r < samples.size(); ++r) {
      Json atoms = Json::array();
      for (const auto& a : samples[r].atoms) {
        Json row = a.x;
        row.push_back(a.y);
        atoms.push_back(std::move(row));
      }
      out << Json{{"replicate", r}, {"count", samples[r].count}, {"atoms", atoms}}.dump() << '\n';
    }
    files.push_back("samples.jsonl");
  }
  double total = 0.0;
  for (const auto& s : samples) total += static_cast<double>(s.count);
  std::cout << Json{{"window", window_json(w)},
                    {"mass", sampler.mass()},
                    {"mean_count", total / static_cast<double>(samples.size())},
                    {"replicates", samples.size()}}
                   .dump(2)
            << '\n';
  return files;
}

// ---------------------------------------------------------------------------

int fail_config(const std::string& msg) {
  std::cerr << "crpx: " << msg << '\n';
  return kExitConfig;
}

void write_manifest(const fs::path& dir, const Json& m) { crpx::io::write_text(dir / "manifest.json", m.dump(2) + "\n"); }

int run_cli(std::vector<std::string> args);

int dispatch(CLI::App& app, int argc, const char* const* argv) {
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(crpx::kVersion));

  Registry sim_reg{app.add_subcommand("simulate", "run CRP trajectories and record block atoms")};
  SimulateOptions sim;
  setup_simulate(sim_reg, sim);

  Registry ver_reg{app.add_subcommand("verify", "run a verification suite; exit 0 iff it passes")};
  VerifyOptions ver;
  ver_reg.given_only = true;
  setup_verify(ver_reg, ver);
  bool text_only = false;
  ver_reg.app->add_flag("--quiet", text_only, "print only the suite verdict");

  Registry probe_reg{app.add_subcommand("probe", "both exact oracles for one tuple family")};
  std::string family;
  double probe_theta = 1.0;
  std::string probe_config;
  probe_reg.app->add_option("--config", probe_config, "flat key=value file");
  probe_reg.require(probe_reg.add("family", family, "tuples k_1,...,k_N,m separated by ';'"));
  probe_reg.add("theta", probe_theta, "theta > 0");

  Registry mass_reg{app.add_subcommand("mass", "intensity mass of a window")};
  std::string mass_window;
  double mass_theta = 1.0;
  std::size_t lift_to = 0;
  bool numeric = false;
  std::string mass_config;
  mass_reg.app->add_option("--config", mass_config, "flat key=value file");
  mass_reg.require(mass_reg.add("window", mass_window, "window as JSON"));
  mass_reg.add("theta", mass_theta, "theta > 0");
  mass_reg.add("lift", lift_to, "also check consistency against order M");
  mass_reg.flag("numeric", numeric, "cross-check by nested quadrature (N <= 3)");

  Registry sample_reg{app.add_subcommand("sample-limit", "draw the limiting Poisson measure on a window")};
  SampleOptions sample;
  setup_sample(sample_reg, sample);

  Registry law_reg{app.add_subcommand("law", "closed-form limit laws as JSON")};
  double law_theta = 1.0;
  double law_delta = 0.0;
  std::vector<double> law_t, law_s, law_grid, law_z, law_x;
  std::string law_config;
  law_reg.app->add_option("--config", law_config, "flat key=value file");
  law_reg.add("theta", law_theta, "theta > 0");
  law_reg.add("delta", law_delta, "delta for the short-lived singleton laws");
  law_reg.add("t", law_t, "lifetimes / times for the T cdf and the Q mean");
  law_reg.add("s", law_s, "birth times for the S cdf");
  law_reg.add("grid", law_grid, "time grid for X_1 and L");
  law_reg.add("z", law_z, "pgf arguments, one per grid point");
  law_reg.add("x", law_x, "levels for the L survival function, one per grid point");

  Registry plot_reg{app.add_subcommand("plotdata", "data for plots of limit atoms and paths")};
  PlotOptions plot;
  setup_plot(plot_reg, plot);

  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  std::string manifest_path;
  std::string replay_out;
  replay->add_option("manifest", manifest_path, "manifest.json")->required();
  replay->add_option("--out", replay_out, "output directory (default: the manifest's directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim_reg.app) {
      sim_reg.apply_config(sim.common.config);
      const auto files = run_simulate(sim);
      write_manifest(sim.common.out, manifest("simulate", sim_reg, {}, files));
      std::cout << "wrote " << files.size() << " file(s) to " << sim.common.out << '\n';
      return 0;
    }
    if (*ver_reg.app) {
      ver_reg.apply_config(ver.common.config);
      const auto cfg = suite_config(ver_reg, ver);
      const auto rep = crpx::verify::run_suite(cfg);
      const std::string name = "verify_" + cfg.suite + ".json";
      crpx::io::write_text(fs::path(ver.common.out) / name, rep.dump() + "\n");
      auto m = manifest("verify", ver_reg, {cfg.suite}, {name});
      m["config"] = cfg.to_json();
      write_manifest(ver.common.out, m);
      const auto text = summary(rep);
      if (text_only)
        std::cout << text.substr(text.rfind("suite "));
      else
        std::cout << text;
      return rep.pass ? 0 : kExitFail;
    }
    if (*probe_reg.app) {
      probe_reg.apply_config(probe_config);
      crpx::oracle::TupleFamily f{parse_family(family), probe_theta};
      f.validate();
      const auto joint = crpx::oracle::joint_probability(f);
      const auto step = crpx::oracle::stepwise_probability(f);
      const auto sets = crpx::oracle::step_sets(f);
      const double denom = std::max(std::abs(joint.value), std::abs(step.value));
      Json tuples = Json::array();
      for (const auto& t : f.tuples) {
        Json row = t.k;
        row.push_back(t.m);
        tuples.push_back(row);
      }
      std::cout << Json{{"theta", f.theta},
                        {"tuples", tuples},
                        {"l", crpx::oracle::overlap_counts(f)},
                        {"steps", sets.a},
                        {"K", sets.K},
                        {"L", sets.L},
                        {"joint", probability_json(joint)},
                        {"stepwise", probability_json(step)},
                        {"relative_difference", denom > 0 ? std::abs(joint.value - step.value) / denom : 0.0}}
                       .dump(2)
                << '\n';
      return 0;
    }
    if (*mass_reg.app) {
      mass_reg.apply_config(mass_config);
      if (!(mass_theta > 0.0)) throw ConfigError("theta must be positive");
      const auto w = parse_window(mass_window);
      Json out{{"window", window_json(w)}, {"theta", mass_theta}, {"mass", crpx::intensity::mass(w, mass_theta)}};
      if (numeric) {
        if (w.order() > 3) throw ConfigError("--numeric supports N <= 3");
        out["mass_numeric"] = crpx::intensity::mass_numeric(w, mass_theta);
      }
      if (lift_to > 0) {
        const auto c = crpx::intensity::consistency_check(w, lift_to, mass_theta);
        out["consistency"] = Json{{"M", lift_to}, {"mass_lifted", c.mass_m_lifted}, {"diff", c.diff}};
      }
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    if (*sample_reg.app) {
      sample_reg.apply_config(sample.common.config);
      const auto files = run_sample(sample);
      write_manifest(sample.common.out, manifest("sample-limit", sample_reg, {}, files));
      return 0;
    }
    if (*law_reg.app) {
      law_reg.apply_config(law_config);
      if (!(law_theta > 0.0)) throw ConfigError("theta must be positive");
      Json out{{"theta", law_theta}};
      if (!law_t.empty() || !law_s.empty()) {
        if (!(law_delta > 0.0)) throw ConfigError("--t and --s need --delta > 0");
        out["delta"] = law_delta;
      }
      if (!law_t.empty()) {
        Json tc = Json::array(), qm = Json::array();
        for (double t : law_t) {
          tc.push_back(crpx::limit::t_cdf(t, law_delta, law_theta));
          qm.push_back(crpx::limit::q_cumulative_intensity(t, law_delta, law_theta));
        }
        out["t"] = law_t;
        out["T_cdf"] = tc;
        out["Q_mean"] = qm;
      }
      if (!law_s.empty()) {
        Json sc = Json::array();
        for (double s : law_s) sc.push_back(crpx::limit::s_cdf(s, law_delta, law_theta));
        out["s"] = law_s;
        out["S_cdf"] = sc;
      }
      if (!law_grid.empty()) {
        if (!std::is_sorted(law_grid.begin(), law_grid.end()) || law_grid.front() <= 0.0)
          throw ConfigError("grid must be positive and increasing");
        out["grid"] = law_grid;
        out["lambda_prime"] = crpx::limit::lambda_prime(law_theta, law_grid);
        if (!law_z.empty()) out["pgf_X1"] = crpx::limit::pgf_x1(law_theta, law_grid, law_z);
        if (!law_x.empty()) out["survival_L"] = crpx::limit::survival_L(law_theta, law_grid, law_x);
      } else if (!law_z.empty() || !law_x.empty()) {
        throw ConfigError("--z and --x need --grid");
      }
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    if (*plot_reg.app) {
      plot_reg.apply_config(plot.common.config);
      const auto files = run_plot(plot);
      write_manifest(plot.common.out, manifest("plotdata", plot_reg, {plot.kind}, files));
      std::cout << "wrote " << files.size() + 1 << " file(s) to " << plot.common.out << '\n';
      return 0;
    }
    if (*replay) {
      const auto m = crpx::io::read_json(manifest_path);
      if (m.value("tool", "") != "crpx" || !m.contains("command") || !m.contains("arguments"))
        throw ConfigError(manifest_path + " is not a crpx manifest");
      if (m.value("version", "") != crpx::kVersion)
        std::cerr << "crpx: manifest written by version " << m.value("version", "?") << ", replaying with "
                  << crpx::kVersion << '\n';
      std::vector<std::string> args{m["command"].get<std::string>()};
      for (const auto& p : m["positional"]) args.push_back(p.get<std::string>());
      for (const auto& a : m["arguments"]) args.push_back(a.get<std::string>());
      args.push_back("--out");
      args.push_back(replay_out.empty() ? fs::path(manifest_path).parent_path().string() : replay_out);
      if (args.back().empty()) args.back() = ".";
      return run_cli(args);
    }
  } catch (const ConfigError& e) {
    return fail_config(e.what());
  } catch (const std::invalid_argument& e) {
    return fail_config(e.what());
  } catch (const std::domain_error& e) {
    return fail_config(e.what());
  } catch (const std::exception& e) {
    std::cerr << "crpx: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitConfig;
}

int run_cli(std::vector<std::string> args) {
  CLI::App app{"crpx: Chinese restaurant process scaling limits"};
  std::vector<const char*> argv{"crpx"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return dispatch(app, static_cast<int>(argv.size()), argv.data());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crpx: Chinese restaurant process scaling limits"};
  return dispatch(app, argc, argv);
}
