#include <iostream>

#include <CLI11.hpp>

#include "gaugelab/lab/experiments.hpp"
#include "gaugelab/lab/plot.hpp"

using namespace gaugelab;

namespace {

int run(const std::string& file) {
  ExperimentConfig cfg = load_config(file);
  apply_env_overrides(cfg);
  const RunManifest m = run_experiment(cfg);
  std::cout << m.experiment << ": " << m.status << " -> " << cfg.output_dir.string() << '\n';
  for (const auto& c : m.criteria)
    std::cout << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name << ": " << c.measured << ' '
              << relation_symbol(c.relation) << ' ' << c.tolerance << '\n';
  for (const auto& w : m.warnings) std::cout << "  warning: " << w << '\n';
  return exit_code(m);
}

int plot(const std::string& dir) {
  const PlotEmission e = emit_plot_data(dir);
  for (const auto& f : e.files) std::cout << f.string() << '\n';
  for (const auto& w : e.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gauge-equivalence experiment driver"};
  app.require_subcommand(1);
  std::string config, run_dir;
  auto* run_cmd = app.add_subcommand("run", "run the experiment described by an INI config");
  run_cmd->add_option("config", config, "config file")->required();
  auto* list_cmd = app.add_subcommand("list", "list registered experiments");
  auto* plot_cmd = app.add_subcommand("plot", "emit plot CSVs for a finished run");
  plot_cmd->add_option("run_dir", run_dir, "run directory holding manifest.json")->required();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 4;
  }
  try {
    if (run_cmd->parsed()) return run(config);
    if (plot_cmd->parsed()) return plot(run_dir);
    if (list_cmd->parsed())
      for (const auto& e : experiment_registry()) std::cout << e.name << "\t" << e.anchor << '\n';
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
