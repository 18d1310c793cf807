#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gaugelab/analytic/conformal.hpp"

namespace gaugelab {

/// Malformed or incomplete configuration; maps to exit code 4.
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::invalid_input, w) {}
};

/// INI experiment description. Every physical parameter is a required key;
/// run.output_dir is taken relative to the working directory, other paths
/// relative to the config file. Lookups of absent keys throw ConfigError.
/// Keys are "section.name".
class ExperimentConfig {
 public:
  ExperimentConfig() = default;
  ExperimentConfig(boost::property_tree::ptree tree, std::filesystem::path base_dir)
      : tree_(std::move(tree)), base_(std::move(base_dir)) {
    experiment = text("run.experiment");
    output_dir = text("run.output_dir");
    seed = static_cast<std::uint64_t>(integer("run.seed"));
    if (tree_.get_child_optional("sl2")) sl2().validate();
  }

  std::string experiment;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;

  bool has(const std::string& key) const { return static_cast<bool>(tree_.get_optional<std::string>(key)); }

  std::string text(const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) throw ConfigError("config: missing required key '" + key + "'");
    used_.insert(key);
    return *v;
  }

  double number(const std::string& key) const {
    const std::string s = text(key);
    std::istringstream is(s);
    double v = 0.0;
    if (!(is >> v) || !(is >> std::ws).eof() || !std::isfinite(v))
      throw ConfigError("config: '" + key + "' is not a finite number: " + s);
    return v;
  }

  long long integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v)) throw ConfigError("config: '" + key + "' must be an integer");
    return static_cast<long long>(v);
  }

  bool flag(const std::string& key) const {
    const std::string s = text(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config: '" + key + "' must be true or false");
  }

  /// Comma-separated numbers; "pi" and "pi/k" are accepted.
  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(text(key));
    for (std::string item; std::getline(ss, item, ',');) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      out.push_back(parse_number(key, item));
    }
    if (out.empty()) throw ConfigError("config: '" + key + "' is empty");
    return out;
  }

  double angle(const std::string& key) const {
    const auto v = numbers(key);
    if (v.size() != 1) throw ConfigError("config: '" + key + "' must hold one value");
    return v.front();
  }

  /// Relative paths resolve against the config file directory.
  std::filesystem::path path(const std::string& key, bool must_exist = true) const {
    std::filesystem::path p = text(key);
    if (p.is_relative()) p = base_ / p;
    if (must_exist && !std::filesystem::exists(p)) throw ConfigError("config: file for '" + key + "' not found: " + p.string());
    return p;
  }

  Sl2Params sl2() const {
    const Sl2Params g{number("sl2.a"), number("sl2.b"), number("sl2.c"), number("sl2.d")};
    if (std::abs(g.det() - 1.0) > 1e-12) throw ConfigError("config: sl2 requires ad - bc = 1");
    return g;
  }

  PeriodicGrid2D grid(const std::string& n_key = "grid.N") const {
    const auto n = integer(n_key);
    const double l = number("grid.L");
    if (n < 4 || n % 2 != 0 || !(l > 0.0)) throw ConfigError("config: grid needs even N >= 4 and L > 0");
    return PeriodicGrid2D(static_cast<int>(n), l);
  }

  /// [radial] rho_max with either M or h.
  RadialGrid radial_grid() const {
    const double rho_max = number("radial.rho_max");
    const long long m = has("radial.M") ? integer("radial.M") : std::llround(rho_max / number("radial.h"));
    if (m < 8 || !(rho_max > 0.0)) throw ConfigError("config: radial grid needs M >= 8 and rho_max > 0");
    return RadialGrid(static_cast<int>(m), rho_max);
  }

  /// Keys present in the file but never read by the pipeline.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [section, body] : tree_)
      for (const auto& [name, value] : body) {
        const std::string key = section + "." + name;
        if (!used_.count(key)) out.push_back(key);
      }
    return out;
  }

  /// section -> key -> value, in file order.
  const boost::property_tree::ptree& tree() const noexcept { return tree_; }
  boost::property_tree::ptree& tree() noexcept { return tree_; }

 private:
  static double parse_number(const std::string& key, const std::string& item) {
    const double pi = std::numbers::pi;
    if (item == "pi") return pi;
    if (item.rfind("pi/", 0) == 0) {
      std::istringstream is(item.substr(3));
      double k = 0.0;
      if (is >> k && (is >> std::ws).eof() && k != 0.0) return pi / k;
    }
    std::istringstream is(item);
    double v = 0.0;
    if (!(is >> v) || !(is >> std::ws).eof() || !std::isfinite(v))
      throw ConfigError("config: bad entry '" + item + "' in '" + key + "'");
    return v;
  }

  boost::property_tree::ptree tree_;
  std::filesystem::path base_;
  mutable std::set<std::string> used_;
};

inline ExperimentConfig parse_config(std::istream& is, const std::filesystem::path& base_dir = ".") {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return ExperimentConfig(std::move(tree), base_dir);
}

inline ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("config: cannot open " + file.string());
  return parse_config(is, file.parent_path());
}

/// GAUGELAB_OUTPUT_DIR replaces run.output_dir; GAUGELAB_THREADS sets the
/// OpenMP thread count. Returns the thread count applied (0 = unchanged).
inline int apply_env_overrides(ExperimentConfig& cfg) {
  if (const char* dir = std::getenv("GAUGELAB_OUTPUT_DIR"); dir && *dir) {
    cfg.output_dir = dir;
    cfg.tree().put("run.output_dir", dir);
  }
  if (const char* th = std::getenv("GAUGELAB_THREADS"); th && *th) {
    char* end = nullptr;
    const long n = std::strtol(th, &end, 10);
    if (*end != '\0' || n < 1) throw ConfigError("GAUGELAB_THREADS must be a positive integer");
    set_thread_count(static_cast<int>(n));
    return static_cast<int>(n);
  }
  return 0;
}

}  // namespace gaugelab
