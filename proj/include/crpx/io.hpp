#pragma once

// Output formats: atoms as CSV (one file per N), trajectories as JSON lines,
// reports and manifests as JSON.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "crpx/crp_engine.hpp"

namespace crpx::io {

using Json = nlohmann::ordered_json;

/// RFC 4180 quoting: fields holding a comma, quote or line break are quoted
/// and embedded quotes doubled.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_field(fields[i]);
  }
  os << "\r\n";
}

inline std::string atoms_header(unsigned order) {
  std::string h = "replicate,N";
  for (unsigned i = 1; i <= order; ++i) h += ",k" + std::to_string(i);
  return h + ",m";
}

inline void write_atoms(std::ostream& os, std::uint64_t replicate, unsigned order, const std::vector<BlockAtom>& atoms) {
  for (const auto& a : atoms) {
    os << replicate << ',' << order;
    for (auto k : a.k) os << ',' << k;
    os << ',' << a.m << "\r\n";
  }
}

inline Json to_json(const TrajectoryObservables& obs, std::uint64_t replicate) {
  Json j;
  j["replicate"] = replicate;
  j["theta"] = obs.theta;
  j["seed"] = obs.seed;
  j["horizon"] = obs.horizon;
  j["n_max"] = obs.n_max;
  Json atoms = Json::object();
  Json open = Json::object();
  for (unsigned order = 1; order <= obs.n_max; ++order) {
    Json list = Json::array();
    for (const auto& a : obs.atoms(order)) {
      Json row = a.k;
      row.push_back(a.m);
      list.push_back(std::move(row));
    }
    atoms[std::to_string(order)] = std::move(list);
    open[std::to_string(order)] = obs.open_by_order[order - 1];
  }
  j["atoms"] = std::move(atoms);
  j["open"] = std::move(open);
  Json snaps = Json::array();
  for (const auto& s : obs.count_snapshots) snaps.push_back(Json{{"step", s.step}, {"counts", s.counts}});
  j["count_snapshots"] = std::move(snaps);
  if (obs.first_singleton_tracked) {
    Json path = Json::array();
    for (const auto& c : obs.first_singleton_changes) path.push_back(Json::array({c.step, c.least}));
    j["first_singleton_changes"] = std::move(path);
  }
  if (obs.shortlived_delta) {
    j["shortlived"] = Json{{"delta", *obs.shortlived_delta},
                           {"censored", obs.shortlived.censored},
                           {"birth", obs.shortlived.birth},
                           {"lifetime", obs.shortlived.lifetime}};
    j["q_lifetimes"] = obs.shortlived_lifetimes;
  }
  return j;
}

/// Opens a file for writing, creating parent directories; failures name the
/// path.
inline std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error("invalid JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace crpx::io
