#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaugelab/lab/csv.hpp"
#include "gaugelab/lab/manifest.hpp"

namespace gaugelab {

struct PlotEmission {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

namespace detail {

/// Long-format copy of selected columns of a wide log: t,series,value.
inline void melt(const CsvTable& t, const std::string& x, const std::vector<std::string>& cols, const std::string& prefix,
                 std::ofstream& os) {
  const int ix = t.column(x);
  for (const auto& name : cols) {
    const int ic = t.column(name);
    if (ix < 0 || ic < 0) continue;
    for (const auto& r : t.rows) os << r[ix] << ',' << prefix << name << ',' << r[ic] << '\n';
  }
}

}  // namespace detail

/// Builds plots/<curve>.csv from the logs of a finished run plus
/// plots/schema.json describing the columns. A curve without a source log
/// is skipped with a warning.
inline PlotEmission emit_plot_data(const std::filesystem::path& run_dir) {
  read_manifest(run_dir);
  PlotEmission out;
  const auto plots = run_dir / "plots";
  nlohmann::json schema = nlohmann::json::object();
  auto has = [&](const char* f) { return std::filesystem::exists(run_dir / f); };
  auto open = [&](const std::string& curve) {
    std::filesystem::create_directories(plots);
    out.files.push_back(plots / (curve + ".csv"));
    std::ofstream os(out.files.back());
    if (!os) throw IoError("emit_plot_data: cannot write " + out.files.back().string());
    return os;
  };

  if (has("ll_log.csv") || has("radial_log.csv") || has("h3.csv")) {
    auto os = open("norms_vs_t");
    os << "t,series,value\n";
    if (has("ll_log.csv")) detail::melt(read_csv(run_dir / "ll_log.csv"), "t", {"H1", "H2", "H3", "energy"}, "spin ", os);
    if (has("radial_log.csv")) detail::melt(read_csv(run_dir / "radial_log.csv"), "t", {"massQ", "H2Q"}, "radial ", os);
    if (has("h3.csv")) detail::melt(read_csv(run_dir / "h3.csv"), "t", {"H3", "h2_sq"}, "family ", os);
    schema["norms_vs_t"] = {{"t", "time of the run that wrote the source log"},
                            {"series", "source and norm: spin H1/H2/H3/energy, radial massQ/H2Q, family H3/h2_sq"},
                            {"value", "norm value"}};
  } else {
    out.warnings.push_back("norms_vs_t: no ll_log.csv, radial_log.csv or h3.csv in run");
  }

  if (has("bound.csv")) {
    const CsvTable t = read_csv(run_dir / "bound.csv");
    auto os = open("bound_vs_measured");
    os << "t,T,bound,measured_H3\n";
    for (const auto& r : t.rows) os << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << '\n';
    schema["bound_vs_measured"] = {{"t", "family time"},
                                   {"T", "drift-run time (c + dt)/(a + bt)"},
                                   {"bound", "fitted lower bound on ||S||_H3 (square root of the squared-norm bound)"},
                                   {"measured_H3", "||S - S_far||_H3 of the spin field from the gauge bridge"}};
  } else {
    out.warnings.push_back("bound_vs_measured: no bound.csv in run");
  }

  if (has("shoot.json")) {
    std::ifstream is(run_dir / "shoot.json");
    const auto reports = nlohmann::json::parse(is);
    auto os = open("defect_vs_alpha");
    os << std::setprecision(17) << "E,alpha,defect\n";
    for (const auto& rep : reports)
      for (const auto& pt : rep["defect_curve"]) os << rep["E"].get<double>() << ',' << pt[0].get<double>() << ',' << pt[1].get<double>() << '\n';
    schema["defect_vs_alpha"] = {{"E", "eigenvalue parameter of the profile equation"},
                                 {"alpha", "initial slope q ~ alpha rho"},
                                 {"defect", "|q| where the shot stops (zero crossing, escape or grid end)"}};
  } else {
    out.warnings.push_back("defect_vs_alpha: no shoot.json in run");
  }

  if (has("error.csv")) {
    const CsvTable t = read_csv(run_dir / "error.csv");
    auto os = open("error_vs_t");
    os << "t,series,error\n";
    for (const auto& r : t.rows) os << r[0] << ',' << r[1] << ',' << r[2] << '\n';
    schema["error_vs_t"] = {{"t", "time"}, {"series", "what is measured (grid, step or quantity)"}, {"error", "error or residual value"}};
  } else {
    out.warnings.push_back("error_vs_t: no error.csv in run");
  }

  if (!out.files.empty()) {
    std::ofstream os(plots / "schema.json");
    os << schema.dump(2) << '\n';
  }
  return out;
}

}  // namespace gaugelab
