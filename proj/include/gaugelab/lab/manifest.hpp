#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaugelab/core/errors.hpp"

#ifndef GAUGELAB_VERSION
#define GAUGELAB_VERSION "unknown"
#endif

namespace gaugelab {

enum class Relation { at_most, at_least, holds };

struct CriterionResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  Relation relation = Relation::at_most;
  bool pass = false;
  std::string note;

  static CriterionResult at_most(std::string name, double measured, double tol, std::string note = {}) {
    return {std::move(name), measured, tol, Relation::at_most, std::isfinite(measured) && measured <= tol, std::move(note)};
  }
  static CriterionResult at_least(std::string name, double measured, double tol, std::string note = {}) {
    return {std::move(name), measured, tol, Relation::at_least, std::isfinite(measured) && measured >= tol, std::move(note)};
  }
  /// A yes/no property; measured carries the worst margin for the record.
  static CriterionResult holds(std::string name, bool ok, double measured, std::string note = {}) {
    return {std::move(name), measured, 0.0, Relation::holds, ok, std::move(note)};
  }
};

inline const char* relation_symbol(Relation r) {
  switch (r) {
    case Relation::at_most: return "<=";
    case Relation::at_least: return ">=";
    case Relation::holds: return "holds";
  }
  return "?";
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Everything a run reports. Fields under "timing" are the only ones that
/// differ between repeated runs of one config.
struct RunManifest {
  std::string experiment;
  std::string anchor;
  nlohmann::json config = nlohmann::json::object();
  std::string code_version = GAUGELAB_VERSION;
  std::string started, finished;
  double wall_seconds = 0.0;
  std::string status = "completed";
  std::vector<CriterionResult> criteria;
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json timings = nlohmann::json::object();
  std::vector<std::string> warnings;
  std::vector<std::string> outputs;

  void add(CriterionResult c) {
    for (const auto& e : criteria)
      if (e.name == c.name) throw InvalidInput("RunManifest: criterion '" + c.name + "' recorded twice");
    criteria.push_back(std::move(c));
  }

  bool all_pass() const {
    for (const auto& c : criteria)
      if (!c.pass) return false;
    return true;
  }
};

inline nlohmann::json to_json(const CriterionResult& c) {
  return {{"name", c.name},
          {"measured", c.measured},
          {"tolerance", c.tolerance},
          {"relation", relation_symbol(c.relation)},
          {"pass", c.pass},
          {"note", c.note}};
}

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json j;
  j["experiment"] = m.experiment;
  j["anchor"] = m.anchor;
  j["code_version"] = m.code_version;
  j["config"] = m.config;
  j["status"] = m.status;
  j["criteria"] = nlohmann::json::array();
  for (const auto& c : m.criteria) j["criteria"].push_back(to_json(c));
  j["all_pass"] = m.all_pass();
  j["metrics"] = m.metrics;
  j["warnings"] = m.warnings;
  j["outputs"] = m.outputs;
  j["timing"] = {{"start", m.started}, {"end", m.finished}, {"wall_seconds", m.wall_seconds}, {"stages", m.timings}};
  return j;
}

inline void write_manifest(const std::filesystem::path& run_dir, const RunManifest& m) {
  std::ofstream os(run_dir / "manifest.json");
  if (!os) throw IoError("write_manifest: cannot open " + (run_dir / "manifest.json").string());
  os << to_json(m).dump(2) << '\n';
}

inline nlohmann::json read_manifest(const std::filesystem::path& run_dir) {
  std::ifstream is(run_dir / "manifest.json");
  if (!is) throw IoError("read_manifest: no manifest.json in " + run_dir.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("read_manifest: ") + e.what());
  }
}

}  // namespace gaugelab
