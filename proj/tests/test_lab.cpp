#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>

#include "gaugelab/lab/csv.hpp"
#include "gaugelab/lab/experiments.hpp"
#include "gaugelab/lab/plot.hpp"

#ifndef GAUGELAB_CONFIG_DIR
#define GAUGELAB_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using namespace gaugelab;

namespace {

ExperimentConfig from_text(const std::string& ini) {
  std::istringstream is(ini);
  return parse_config(is);
}

const char* kRunHeader = R"([run]
experiment = gauge-round-trip
output_dir = unused
seed = 3
)";

/// Small gauge-round-trip run; about a second on one core.
std::string round_trip_ini(const fs::path& out) {
  return R"([run]
experiment = gauge-round-trip
output_dir = )" + out.string() + R"(
seed = 7

[grid]
N = 192
L = 16

[soliton]
delta = 0
time = 0

[taper]
margin = 4
width = 1

[frame]
eps_pole = 1e-6
rotate_poles = true
substeps = 4
restriction_tolerance = 1e-6

[criteria]
spin_tolerance = 1e-5
unitarity_tolerance = 1e-10
)";
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("gaugelab_lab_test_" + name);
  fs::remove_all(d);
  return d;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Config, RequiresRunSection) {
  EXPECT_THROW(from_text("[grid]\nN = 16\n"), ConfigError);
  EXPECT_THROW(from_text("[run]\nexperiment = x\noutput_dir = o\n"), ConfigError);
  EXPECT_THROW(from_text("[run\nexperiment = x\n"), ConfigError);
}

TEST(Config, MissingKeyIsAConfigError) {
  const auto c = from_text(kRunHeader);
  EXPECT_EQ(c.experiment, "gauge-round-trip");
  EXPECT_EQ(c.seed, 3u);
  EXPECT_THROW(c.number("grid.L"), ConfigError);
  EXPECT_FALSE(c.has("grid.L"));
}

TEST(Config, NumbersAcceptPiFractions) {
  const auto c = from_text(std::string(kRunHeader) + "[s]\nlist = 0, pi/4, pi, 0.5\nbad = 1, x\nflag = maybe\n");
  const auto v = c.numbers("s.list");
  ASSERT_EQ(v.size(), 4u);
  EXPECT_DOUBLE_EQ(v[1], std::numbers::pi / 4);
  EXPECT_DOUBLE_EQ(v[2], std::numbers::pi);
  EXPECT_DOUBLE_EQ(v[3], 0.5);
  EXPECT_THROW(c.numbers("s.bad"), ConfigError);
  EXPECT_THROW(c.flag("s.flag"), ConfigError);
  EXPECT_THROW(c.angle("s.list"), ConfigError);
}

TEST(Config, GridsAreValidated) {
  const auto c = from_text(std::string(kRunHeader) + "[grid]\nN = 33\nL = 4\n[radial]\nrho_max = 10\nh = 0.1\n");
  EXPECT_THROW(c.grid(), ConfigError);
  EXPECT_EQ(c.radial_grid().size(), 100);
}

TEST(Config, Sl2DeterminantIsChecked) {
  EXPECT_THROW(from_text(std::string(kRunHeader) + "[sl2]\na = 1\nb = 1\nc = 1\nd = 1\n"), ConfigError);
  const auto c = from_text(std::string(kRunHeader) + "[sl2]\na = 2\nb = 0\nc = 0\nd = 0.5\n");
  EXPECT_DOUBLE_EQ(c.sl2().d, 0.5);
}

TEST(Config, UnusedKeysAreReported) {
  const auto c = from_text(std::string(kRunHeader) + "[grid]\nN = 32\nL = 4\nextra = 1\n");
  c.grid();
  const auto unused = c.unused_keys();
  ASSERT_EQ(unused.size(), 1u);
  EXPECT_EQ(unused.front(), "grid.extra");
}

TEST(Config, EnvironmentOverridesOutputDir) {
  auto c = from_text(kRunHeader);
  ::setenv("GAUGELAB_OUTPUT_DIR", "/tmp/elsewhere", 1);
  ::setenv("GAUGELAB_THREADS", "1", 1);
  EXPECT_EQ(apply_env_overrides(c), 1);
  EXPECT_EQ(c.output_dir, fs::path("/tmp/elsewhere"));
  EXPECT_EQ(c.text("run.output_dir"), "/tmp/elsewhere");
  ::setenv("GAUGELAB_THREADS", "zero", 1);
  EXPECT_THROW(apply_env_overrides(c), ConfigError);
  ::unsetenv("GAUGELAB_OUTPUT_DIR");
  ::unsetenv("GAUGELAB_THREADS");
}

TEST(Config, ShippedConfigsParse) {
  int count = 0;
  for (const auto& e : fs::directory_iterator(GAUGELAB_CONFIG_DIR)) {
    if (e.path().extension() != ".ini") continue;
    const auto c = load_config(e.path());
    EXPECT_NO_THROW(find_experiment(c.experiment)) << e.path();
    ++count;
  }
  EXPECT_GE(count, 11);
}

TEST(Registry, NamesAreUniqueAndFindable) {
  std::set<std::string> names;
  for (const auto& e : experiment_registry()) {
    EXPECT_TRUE(names.insert(e.name).second) << e.name;
    EXPECT_FALSE(e.anchor.empty());
    EXPECT_EQ(&find_experiment(e.name), &e);
  }
  EXPECT_EQ(names.size(), 11u);
  EXPECT_THROW(find_experiment("no-such-experiment"), ConfigError);
}

TEST(Manifest, DuplicateCriterionIsRejected) {
  RunManifest m;
  m.add(CriterionResult::at_most("x", 1.0, 2.0));
  EXPECT_THROW(m.add(CriterionResult::at_least("x", 1.0, 0.0)), InvalidInput);
  EXPECT_TRUE(m.all_pass());
  m.add(CriterionResult::at_least("y", std::nan(""), 0.0));
  EXPECT_FALSE(m.all_pass());
  const auto j = to_json(m);
  EXPECT_EQ(j["criteria"].size(), 2u);
  EXPECT_FALSE(j["all_pass"].get<bool>());
  EXPECT_TRUE(j.contains("timing"));
}

TEST(Manifest, ExitCodes) {
  RunManifest m;
  EXPECT_EQ(exit_code(m), 0);
  m.add(CriterionResult::holds("z", false, 0.0));
  EXPECT_EQ(exit_code(m), 2);
  EXPECT_EQ(exit_code(ConfigError("c")), 4);
  EXPECT_EQ(exit_code(IoError("i")), 4);
  EXPECT_EQ(exit_code(InstabilityError("s")), 3);
  EXPECT_EQ(exit_code(HorizonError("h")), 3);
}

TEST(Csv, WriterChecksWidthAndRoundTrips) {
  const fs::path dir = fresh_dir("csv");
  fs::create_directories(dir);
  {
    CsvWriter w(dir / "t.csv", {"a", "b"});
    w.row(0.1, 2);
    EXPECT_THROW(w.row(1.0), InvalidInput);
  }
  const CsvTable t = read_csv(dir / "t.csv");
  EXPECT_EQ(t.column("b"), 1);
  EXPECT_EQ(t.column("c"), -1);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(std::stod(t.rows[0][0]), 0.1);
  EXPECT_THROW(read_csv(dir / "missing.csv"), IoError);
  fs::remove_all(dir);
}

TEST(Plot, NeedsManifestAndWarnsOnMissingCurves) {
  const fs::path dir = fresh_dir("plot");
  fs::create_directories(dir);
  EXPECT_THROW(emit_plot_data(dir), IoError);
  write_manifest(dir, RunManifest{});
  const PlotEmission e = emit_plot_data(dir);
  EXPECT_TRUE(e.files.empty());
  EXPECT_EQ(e.warnings.size(), 4u);
  EXPECT_FALSE(fs::exists(dir / "plots"));
  fs::remove_all(dir);
}

TEST(Run, RoundTripWritesManifestAndPlots) {
  const fs::path dir = fresh_dir("run");
  const RunManifest m = run_experiment(from_text(round_trip_ini(dir)));
  EXPECT_TRUE(m.all_pass());
  EXPECT_EQ(m.status, "completed");
  EXPECT_TRUE(m.warnings.empty());
  const auto j = read_manifest(dir);
  EXPECT_EQ(j["experiment"], "gauge-round-trip");
  EXPECT_EQ(j["config"]["grid"]["N"], "192");
  for (const auto& out : m.outputs) EXPECT_TRUE(fs::exists(dir / out)) << out;
  const PlotEmission e = emit_plot_data(dir);
  ASSERT_EQ(e.files.size(), 1u);
  EXPECT_EQ(e.files.front().filename(), "error_vs_t.csv");
  EXPECT_TRUE(fs::exists(dir / "plots" / "schema.json"));
  fs::remove_all(dir);
}

TEST(Run, RepeatedRunsGiveIdenticalCsv) {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  run_experiment(from_text(round_trip_ini(a)));
  run_experiment(from_text(round_trip_ini(b)));
  int compared = 0;
  for (const auto& f : fs::directory_iterator(a)) {
    if (f.path().extension() != ".csv") continue;
    EXPECT_EQ(read_bytes(f.path()), read_bytes(b / f.path().filename())) << f.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 2);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Run, FailingPipelineStillWritesManifest) {
  const fs::path dir = fresh_dir("fail");
  std::string ini = round_trip_ini(dir);
  ini.replace(ini.find("rotate_poles = true"), 19, "rotate_poles = false");
  EXPECT_THROW(run_experiment(from_text(ini)), PoleError);
  const auto j = read_manifest(dir);
  EXPECT_EQ(j["status"].get<std::string>().rfind("failed: ", 0), 0u);
  fs::remove_all(dir);
}

TEST(Run, UnusedKeyBecomesWarning) {
  const fs::path dir = fresh_dir("warn");
  const RunManifest m = run_experiment(from_text(round_trip_ini(dir) + "[extra]\nknob = 1\n"));
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_NE(m.warnings.front().find("extra.knob"), std::string::npos);
  fs::remove_all(dir);
}
