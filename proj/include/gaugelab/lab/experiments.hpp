#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gaugelab/analytic/ansatz.hpp"
#include "gaugelab/analytic/conformal.hpp"
#include "gaugelab/analytic/line_soliton.hpp"
#include "gaugelab/analytic/shooting.hpp"
#include "gaugelab/analytic/soliton.hpp"
#include "gaugelab/core/snapshot.hpp"
#include "gaugelab/gauge/blocks.hpp"
#include "gaugelab/gauge/frame.hpp"
#include "gaugelab/lab/config.hpp"
#include "gaugelab/lab/csv.hpp"
#include "gaugelab/lab/manifest.hpp"
#include "gaugelab/ll/dynamics.hpp"

namespace gaugelab {

/// What a pipeline sees: the config, the manifest being built and the run
/// directory. Files go through output() so the manifest lists them.
class RunContext {
 public:
  RunContext(const ExperimentConfig& c, RunManifest& m) : cfg(c), manifest(m), dir(c.output_dir) {}

  const ExperimentConfig& cfg;
  RunManifest& manifest;
  std::filesystem::path dir;

  std::filesystem::path output(const std::string& name) {
    manifest.outputs.push_back(name);
    return dir / name;
  }
  void metric(const std::string& key, nlohmann::json v) { manifest.metrics[key] = std::move(v); }
  void warn(std::string w) { manifest.warnings.push_back(std::move(w)); }

  template <class Fn>
  auto stage(const std::string& name, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto done = [&] { manifest.timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      done();
    } else {
      auto out = fn();
      done();
      return out;
    }
  }
};

struct Experiment {
  std::string name;
  std::string anchor;
  std::function<void(RunContext&)> pipeline;
};

namespace pipeline {

inline std::string label(const std::string& key, double v) {
  std::ostringstream os;
  os << key << '=' << std::setprecision(6) << v;
  return os.str();
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline RadialProfile initial_profile(const ExperimentConfig& c, const RadialGrid& grid) {
  const std::string source = c.text("initial_data.source");
  if (source == "snapshot") return read_profile_csv(c.path("initial_data.path"));
  if (source != "builtin") throw ConfigError("config: initial_data.source must be builtin or snapshot");
  const std::string name = c.text("initial_data.name");
  if (name != "vortex") throw ConfigError("config: unknown builtin initial data '" + name + "'");
  const double a = c.number("initial_data.amplitude"), w = c.number("initial_data.width");
  if (!(w > 0.0)) throw ConfigError("config: initial_data.width must be positive");
  // A rho exp(-rho^2 / w^2)
  return RadialProfile::sample(grid, [&](double r) { return cplx(a * r * std::exp(-r * r / (w * w))); });
}

inline RadialProfile initial_profile(const ExperimentConfig& c) {
  if (c.text("initial_data.source") == "snapshot") return initial_profile(c, RadialGrid(8, 1.0));
  return initial_profile(c, c.radial_grid());
}

inline Convention convention(const ExperimentConfig& c) {
  const std::string s = c.text("radial.convention");
  if (s == "qq") return Convention::qq;
  if (s == "qrho1") return Convention::qrho1;
  throw ConfigError("config: radial.convention must be qq or qrho1");
}

/// Solver part of a radial run; the drift comes from sl2 when radial.drift is true.
inline RadialRunConfig radial_config(const ExperimentConfig& c) {
  if (c.text("solver.scheme") != "rk4") throw ConfigError("config: radial runs support solver.scheme = rk4");
  RadialRunConfig r;
  r.dt = c.number("solver.dt");
  r.cfl_safety = c.number("solver.cfl_safety");
  if (!(r.cfl_safety > 0.0 && r.cfl_safety <= 1.0)) throw ConfigError("config: solver.cfl_safety in (0, 1]");
  r.scheme.convention = convention(c);
  r.scheme.fd_order = static_cast<int>(c.integer("radial.fd_order"));
  if (c.flag("radial.drift")) {
    const Sl2Params g = c.sl2();
    r.drift = DriftParams{g.b, g.d};
  }
  return r;
}

inline const RadialSnapshot& snapshot_at(const RadialRunResult& run, double t) {
  for (const auto& s : run.snapshots)
    if (std::abs(s.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return s;
  throw InvalidInput("snapshot_at: no stored snapshot at the requested time");
}

inline double spin_l2_distance(const SpinField& a, const SpinField& b) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[c][k] - b[c][k]) * (a[c][k] - b[c][k]);
  return std::sqrt(s) * a.grid().dx();
}

inline TaperAxes soliton_taper_axes(double delta) {
  const bool cx = std::abs(std::cos(delta)) > 1e-12, sy = std::abs(std::sin(delta)) > 1e-12;
  if (cx && sy) throw ConfigError("config: tapered soliton data needs an axis-aligned delta (0 or pi/2)");
  return {cx, sy};
}

// ---------------------------------------------------------------------------

inline void soliton_residual(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const double l = c.number("grid.L");
  const auto sizes = std::vector<long long>{c.integer("grid.N_coarse"), c.integer("grid.N_fine")};
  const auto deltas = c.numbers("soliton.delta");
  const auto times = c.numbers("soliton.times");
  const double window = c.number("soliton.window_half_width");
  const double tol = c.number("criteria.residual_tolerance");
  const double drop = c.number("criteria.drop_factor");
  const double max_seconds = c.number("criteria.max_seconds");

  CsvWriter table(ctx.output("residuals.csv"), {"delta", "t", "N", "residual", "residual_full_grid"});
  CsvWriter err(ctx.output("error.csv"), {"t", "series", "error"});
  double slowest = 0.0;
  nlohmann::json cases = nlohmann::json::array();
  for (double delta : deltas) {
    const SolitonParams params{delta};
    const bool wrap = std::abs(std::cos(delta)) > 1e-12 && std::abs(std::sin(delta)) > 1e-12;
    double worst_fine = 0.0, worst_drop = std::numeric_limits<double>::infinity();
    for (double t : times) {
      std::vector<double> res;
      for (long long n : sizes) {
        const auto t0 = std::chrono::steady_clock::now();
        const SolitonProvider p(PeriodicGrid2D(static_cast<int>(n), l), params, wrap);
        const double r = window > 0.0 ? ll_residual(p, t, ResidualWindow{window}) : ll_residual(p, t);
        slowest = std::max(slowest, seconds_since(t0));
        const double full = ll_residual(p, t);
        table.row(delta, t, n, r, full);
        err.row(t, label("delta", delta) + " " + label("N", static_cast<double>(n)), r);
        res.push_back(r);
      }
      worst_fine = std::max(worst_fine, res[1]);
      if (res[0] > tol) worst_drop = std::min(worst_drop, res[0] / res[1]);
      cases.push_back({{"delta", delta}, {"t", t}, {"coarse", res[0]}, {"fine", res[1]}});
    }
    const std::string tag = " (" + label("delta", delta) + ")";
    ctx.manifest.add(CriterionResult::at_most("fine-grid residual" + tag, worst_fine, tol));
    if (std::isinf(worst_drop))
      ctx.manifest.add(CriterionResult::holds("residual drop per doubling" + tag, true, 0.0, "coarse grid already at tolerance"));
    else
      ctx.manifest.add(CriterionResult::at_least("residual drop per doubling" + tag, worst_drop, drop));
  }
  ctx.metric("cases", cases);
  ctx.metric("window_half_width", window);
  ctx.manifest.add(CriterionResult::at_most("seconds per evaluation", slowest, max_seconds));
}

inline void ll_accuracy(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const auto t_start = std::chrono::steady_clock::now();
  const PeriodicGrid2D grid = c.grid();
  const SolitonParams params{c.angle("soliton.delta")};
  const double t_end = c.number("evolution.t_end");
  const int samples = static_cast<int>(c.integer("evolution.error_samples"));
  const int levels = static_cast<int>(c.integer("evolution.levels"));
  const double margin = c.number("taper.margin"), width = c.number("taper.width");
  if (c.text("solver.scheme") != "projected_rk4") throw ConfigError("config: ll-accuracy measures solver.scheme = projected_rk4");
  const double cfl = c.number("solver.cfl_safety");
  const double err_tol = c.number("criteria.error_tolerance");
  const double min_order = c.number("criteria.min_order");
  const double constraint_tol = c.number("criteria.constraint_tolerance");
  const double max_seconds = c.number("criteria.max_seconds");
  if (levels < 3 || samples < 1 || !(t_end > 0.0)) throw ConfigError("config: need levels >= 3, error_samples >= 1, t_end > 0");

  // Coarsest step: the stability limit rounded down so every sample time is hit.
  const double dt_limit = cfl * grid.dx() * grid.dx() / 4.0;
  const double m = samples * std::ceil(t_end / (samples * dt_limit));
  const double dt0 = t_end / m;

  const SolitonProvider exact(grid, params);
  const SpinField s0 = taper_to_far_field(exact.spin(0.0), {0.0, 0.0, 1.0}, margin, width, soliton_taper_axes(params.delta));
  ctx.metric("taper_l2_offset", spin_l2_distance(s0, exact.spin(0.0)));

  CsvWriter conv(ctx.output("convergence.csv"), {"level", "dt", "steps", "l2_error", "max_constraint_dev"});
  CsvWriter err(ctx.output("error.csv"), {"t", "series", "error"});
  std::vector<SpinField> finals;
  std::vector<LLLogRow> log;
  double worst_err = 0.0, worst_dev = 0.0;
  for (int lev = 0; lev < levels; ++lev) {
    const double dt = dt0 / std::ldexp(1.0, lev);
    LLSolver solver(s0, {dt, LLScheme::projected_rk4, cfl, 1, 1e-6});
    const bool finest = lev + 1 == levels;
    if (finest) log.push_back(ll_log_row(solver.state(), 0.0));
    ctx.stage(label("level", lev), [&] {
      for (int k = 1; k <= samples; ++k) {
        const double t = t_end * k / samples;
        solver.advance(t);
        err.row(t, label("dt", dt), spin_l2_distance(solver.state(), exact.spin(t)));
        if (finest) log.push_back(ll_log_row(solver.state(), t));
      }
    });
    const double e = spin_l2_distance(solver.state(), exact.spin(t_end));
    const double dev = std::max(solver.max_drift(), constraint_deviation(solver.state()));
    conv.row(lev, dt, solver.steps(), e, dev);
    worst_err = std::max(worst_err, e);
    worst_dev = std::max(worst_dev, dev);
    finals.push_back(solver.state());
  }
  write_ll_log(ctx.output("ll_log.csv"), log);
  write_snapshot(ctx.output("spin_final.bin"), spin_snapshot(finals.back(), t_end));
  const std::size_t k = finals.size() - 3;
  const double d01 = spin_l2_distance(finals[k], finals[k + 1]);
  const double d12 = spin_l2_distance(finals[k + 1], finals[k + 2]);
  const double order = std::log2(d01 / d12);
  ctx.metric("self_differences", {d01, d12});
  ctx.manifest.add(CriterionResult::at_most("L2 error vs closed form", worst_err, err_tol));
  ctx.manifest.add(CriterionResult::at_least("dt convergence order", order, min_order));
  ctx.manifest.add(CriterionResult::at_most("max | |s|^2 - 1 |", worst_dev, constraint_tol));
  ctx.manifest.add(CriterionResult::at_most("runtime seconds", seconds_since(t_start), max_seconds));
}

inline void mass_conservation(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const auto t_start = std::chrono::steady_clock::now();
  RadialRunConfig rc = radial_config(c);
  rc.t_end = c.number("evolution.t_end");
  rc.snapshot_every = c.number("evolution.log_every");
  const double tol = c.number("criteria.mass_drift_tolerance");
  const double max_seconds = c.number("criteria.max_seconds");
  const RadialProfile q0 = initial_profile(c);
  const auto run = ctx.stage("radial run", [&] { return run_radial(q0, 0.0, rc); });
  write_radial_log(ctx.output("radial_log.csv"), run.log);
  write_profile_csv(ctx.output("profile_final.csv"), run.snapshots.back().q);
  double drift = 0.0;
  for (const auto& row : run.log) drift = std::max(drift, std::abs(row.mass / run.log.front().mass - 1.0));
  ctx.metric("steps", run.steps);
  ctx.metric("dt", run.dt);
  ctx.metric("initial_mass", run.log.front().mass);
  ctx.metric("edge_max", run.edge_max);
  ctx.manifest.add(CriterionResult::at_most("relative L2 drift", drift, tol));
  ctx.manifest.add(CriterionResult::at_most("runtime seconds", seconds_since(t_start), max_seconds));
}

inline void ansatz_consistency(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const PeriodicGrid2D grid = c.grid();
  const RadialGrid rg = c.radial_grid();
  const RadialGrid fine(2 * rg.size(), rg.rho_max());
  const auto times = c.numbers("evolution.times");
  const int points = static_cast<int>(c.integer("interp.points"));
  const double factor = c.number("criteria.residual_factor");
  const double min_order = c.number("criteria.min_restriction_order");
  const double floor = c.number("criteria.roundoff_floor");
  RadialRunConfig rc = radial_config(c);
  if (rc.drift) throw ConfigError("config: ansatz-consistency uses the drift-free equation (radial.drift = false)");
  rc.t_end = *std::max_element(times.begin(), times.end());
  rc.extra_times = times;
  const auto coarse = ctx.stage("radial run h", [&] { return run_radial(initial_profile(c, rg), 0.0, rc); });
  const auto refined = ctx.stage("radial run h/2", [&] { return run_radial(initial_profile(c, fine), 0.0, rc); });

  RadialScheme alt = rc.scheme;
  alt.fd_order = rc.scheme.fd_order == 4 ? 6 : 4;
  CsvWriter table(ctx.output("ansatz.csv"), {"t", "h", "eq_q", "eq_r", "eq_p", "truncation_estimate", "ratio",
                                             "restriction1", "restriction2"});
  CsvWriter err(ctx.output("error.csv"), {"t", "series", "error"});
  double worst_ratio = 0.0, worst_order = std::numeric_limits<double>::infinity();
  for (double t : times) {
    std::array<double, 2> r1{}, r2{};
    int level = 0;
    for (const RadialRunResult* run : {&coarse, &refined}) {
      const RadialSnapshot& snap = snapshot_at(*run, t);
      const SchrodingerState s = ansatz_state(snap.q, grid, points, rc.scheme.tail);
      const System8Residual res = system8_residual(s, ansatz_rates(snap.rate, grid, points));
      const auto [a, b] = restriction_residual(s);
      const RadialProfile own = radialQQ_rhs(snap.q, rc.scheme), other = radialQQ_rhs(snap.q, alt);
      std::vector<cplx> diff(static_cast<std::size_t>(snap.q.size()));
      for (int j = 0; j < snap.q.size(); ++j) diff[j] = own[j] - other[j];
      const double est = std::sqrt(radial_lp_integral(diff, snap.q.grid(), 2.0));
      const double ratio = res.max() / est;
      table.row(t, snap.q.grid().h(), res.eq_q, res.eq_r, res.eq_p, est, ratio, a, b);
      if (level == 0) {
        worst_ratio = std::max(worst_ratio, ratio);
        err.row(t, "system residual", res.max());
        err.row(t, "radial truncation estimate", est);
      }
      r1[level] = a;
      r2[level] = b;
      ++level;
    }
    for (const auto& r : {r1, r2})
      if (r[1] > floor) worst_order = std::min(worst_order, std::log2(r[0] / r[1]));
  }
  ctx.manifest.add(CriterionResult::at_most("system residual / truncation estimate", worst_ratio, factor));
  if (std::isinf(worst_order))
    ctx.manifest.add(CriterionResult::holds("restriction refinement order", true, 0.0, "all restriction residuals at roundoff"));
  else
    ctx.manifest.add(CriterionResult::at_least("restriction refinement order", worst_order, min_order));
}

/// Drift run feeding a conformal family, with a snapshot at T(t) for every t.
inline RadialRunResult family_run(RunContext& ctx, const Sl2Params& g, const std::vector<double>& times) {
  RadialRunConfig rc = radial_config(ctx.cfg);
  if (!rc.drift || rc.drift->b != g.b || rc.drift->d != g.d)
    throw ConfigError("config: conformal families need radial.drift = true with the sl2 (b, d)");
  rc.t_end = 0.0;
  for (double t : times) {
    rc.extra_times.push_back(g.big_t(t));
    rc.t_end = std::max(rc.t_end, g.big_t(t));
  }
  return ctx.stage("radial run", [&] { return run_radial(initial_profile(ctx.cfg), 0.0, rc); });
}

inline ConformalFamily make_family(const ExperimentConfig& c, const RadialRunResult& run, const Sl2Params& g,
                                   const PeriodicGrid2D& grid) {
  const RadialRunConfig rc = radial_config(c);
  return {RadialHistory(run, rc.scheme.convention == Convention::qrho1, static_cast<int>(c.integer("interp.points")),
                        rc.scheme.fd_order, rc.scheme.tail),
          g, grid};
}

inline void conformal_invariance(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const Sl2Params g = c.sl2();
  const auto times = c.numbers("evolution.times");
  const double tol = c.number("criteria.residual_tolerance");
  const auto run = family_run(ctx, g, times);
  const ConformalFamily fam = make_family(c, run, g, c.grid());
  CsvWriter table(ctx.output("conformal.csv"), {"t", "T", "eq_q", "eq_r", "eq_p", "restriction1", "restriction2"});
  CsvWriter err(ctx.output("error.csv"), {"t", "series", "error"});
  double worst = 0.0;
  ctx.stage("family residuals", [&] {
    for (double t : times) {
      const SchrodingerState s = fam.state(t);
      const System8Residual res = system8_residual(s, fam.rates(t));
      const auto [a, b] = restriction_residual(s);
      table.row(t, g.big_t(t), res.eq_q, res.eq_r, res.eq_p, a, b);
      err.row(t, "max residual", std::max({res.max(), a, b}));
      worst = std::max({worst, res.max(), a, b});
    }
  });
  double drift = 0.0;
  for (const auto& row : run.log) drift = std::max(drift, std::abs(row.mass / run.log.front().mass - 1.0));
  ctx.metric("radial_mass_drift", drift);
  ctx.manifest.add(CriterionResult::at_most("max residual of equations and restrictions", worst, tol));
}

inline void gauge_round_trip(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const PeriodicGrid2D grid = c.grid();
  const SolitonParams params{c.angle("soliton.delta")};
  const double t = c.number("soliton.time");
  const double spin_tol = c.number("criteria.spin_tolerance");
  const double unit_tol = c.number("criteria.unitarity_tolerance");
  FrameOptions opt;
  opt.eps_pole = c.number("frame.eps_pole");
  opt.rotate_poles = c.flag("frame.rotate_poles");
  FrameIntegrationConfig fc;
  fc.substeps = static_cast<int>(c.integer("frame.substeps"));
  const double rtol = c.number("frame.restriction_tolerance");

  const SpinField s = taper_to_far_field(SolitonProvider(grid, params).spin(t), {0.0, 0.0, 1.0}, c.number("taper.margin"),
                                         c.number("taper.width"), soliton_taper_axes(params.delta));
  const GaugeFrame frame = frame_from_spin(s, opt);
  const FrameFields fields = ctx.stage("fields from frame", [&] { return fields_from_frame(frame, s, rtol); });
  const std::size_t origin = grid.index(grid.origin_index(), grid.origin_index());
  fc.base = frame.g.at(origin);
  const FrameIntegration back = ctx.stage("frame from fields", [&] { return frame_from_fields(fields.state, fc); });
  const SpinField s2 = spin_from_frame(back.frame);

  double worst = 0.0;
  for (int a = 0; a < 3; ++a) worst = std::max(worst, max_abs(s2[a] - s[a]));
  const double unit = std::max(frame.max_unitarity_defect(), back.max_unitarity_defect);

  // Gauge probe: a constant random phase gamma leaves |q|, |r| unchanged.
  std::mt19937_64 rng(ctx.cfg.seed);
  const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  FrameOptions rotated = opt;
  rotated.gamma = ComplexField2D(grid, std::vector<cplx>(grid.size(), std::polar(1.0, phase)));
  const FrameFields probe = fields_from_frame(frame_from_spin(s, rotated), s, rtol);
  double gauge_gap = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    gauge_gap = std::max({gauge_gap, std::abs(std::abs(probe.state.q[k]) - std::abs(fields.state.q[k])),
                          std::abs(std::abs(probe.state.r[k]) - std::abs(fields.state.r[k]))});

  {
    CsvWriter cut(ctx.output("roundtrip_cut.csv"), {"x", "s1", "s2", "s3", "s1_back", "s2_back", "s3_back"});
    const int j = grid.origin_index();
    for (int i = 0; i < grid.n(); ++i) {
      const std::size_t k = grid.index(i, j);
      cut.row(grid.coord(i), s[0][k], s[1][k], s[2][k], s2[0][k], s2[1][k], s2[2][k]);
    }
    CsvWriter err(ctx.output("error.csv"), {"t", "series", "error"});
    err.row(t, "spin round trip", worst);
  }
  write_snapshot(ctx.output("frame.bin"), frame_snapshot(back.frame));
  ctx.metric("pole_rotation_used", frame.chart->rotation.b != cplx(0.0) || frame.chart->rotation.a != cplx(1.0));
  ctx.metric("t_row_defect", fields.t_row_defect);
  ctx.metric("path_discrepancy", back.path_discrepancy);
  ctx.metric("gauge_probe_phase", phase);
  ctx.metric("gauge_probe_modulus_gap", gauge_gap);
  ctx.metric("max_abs_q", max_abs(fields.state.q));
  ctx.manifest.add(CriterionResult::at_most("spin round-trip max error", worst, spin_tol));
  ctx.manifest.add(CriterionResult::at_most("frame unitarity defect", unit, unit_tol));
}

inline void lower_bound(RunContext& ctx) {
  const auto& c = ctx.cfg;
  RadialRunConfig rc = radial_config(c);
  rc.t_end = c.number("evolution.t_end");
  rc.snapshot_every = c.number("evolution.log_every");
  const double fit = c.number("criteria.fit_window");
  const auto run = ctx.stage("radial run", [&] { return run_radial(initial_profile(c), 0.0, rc); });
  write_radial_log(ctx.output("radial_log.csv"), run.log);
  const double inv0 = 1.0 / run.log.front().h2;
  double c1 = -std::numeric_limits<double>::infinity();
  for (const auto& row : run.log)
    if (row.t > 0.0 && row.t <= fit * (1.0 + 1e-12)) c1 = std::max(c1, (1.0 / row.h2 - inv0) / row.t);
  if (std::isinf(c1)) throw ConfigError("config: no logged time inside the fit window");
  CsvWriter table(ctx.output("lower_bound.csv"), {"t", "h2_sq", "ratio", "fitted_c1"});
  double worst = -std::numeric_limits<double>::infinity(), worst_t = 0.0;
  for (const auto& row : run.log) {
    if (row.t <= 0.0) continue;
    const double ratio = (1.0 / row.h2 - inv0) / row.t;
    table.row(row.t, row.h2, ratio, c1);
    if (ratio > worst) worst = ratio, worst_t = row.t;
  }
  ctx.metric("fitted_c1", c1);
  ctx.metric("max_ratio", worst);
  ctx.metric("max_ratio_at", worst_t);
  // Bounded by the fitted constant means ratio / C1 <= 1 everywhere.
  ctx.manifest.add(CriterionResult::at_most("max ratio / fitted C1", worst / c1, 1.0 + 1e-12));
}

inline void blowup_window(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const Sl2Params g = c.sl2();
  const PeriodicGrid2D grid = c.grid();
  const double step = c.number("blowup.t_step"), stop = c.number("blowup.t_stop");
  const double fit = c.number("blowup.fit_window");
  const double resolution = c.number("blowup.max_path_discrepancy");
  const double min_growth = c.number("criteria.min_growth");
  FrameIntegrationConfig fc;
  fc.substeps = static_cast<int>(c.integer("frame.substeps"));
  const double rho_max = c.radial_grid().rho_max();
  if (!(step > 0.0)) throw ConfigError("config: blowup.t_step must be positive");

  std::vector<double> covered;
  std::string exhausted;
  for (long k = 0;; ++k) {
    const double t = step * static_cast<double>(k);
    if (t > stop * (1.0 + 1e-12)) break;
    const double al = g.alpha(t);
    if (!(al > 0.0)) {
      exhausted = "a + bt reached zero at t=" + std::to_string(t);
      break;
    }
    if (std::sqrt(2.0) * grid.half_length() / al > rho_max) {
      exhausted = "rescaled box exceeds the radial domain at t=" + std::to_string(t);
      break;
    }
    covered.push_back(t);
  }
  const auto run = family_run(ctx, g, covered);
  const ConformalFamily fam = make_family(c, run, g, grid);

  std::vector<H3Sample> samples;
  CsvWriter table(ctx.output("h3.csv"), {"t", "T", "alpha", "H3", "h2_sq", "path_discrepancy", "unitarity_defect"});
  ctx.stage("frames", [&] {
    for (double t : covered) {
      const FrameIntegration fi = frame_from_fields(fam.state(t), fc);
      if (fi.path_discrepancy > resolution) {
        exhausted = "frame path discrepancy above threshold at t=" + std::to_string(t);
        break;
      }
      const double h3 = spin_h3_excess(spin_from_frame(fi.frame));
      const double h2 = radial_h2_seminorm_sq(fam.history().profile(g.big_t(t)));
      table.row(t, g.big_t(t), g.alpha(t), h3, h2, fi.path_discrepancy, fi.max_unitarity_defect);
      samples.push_back({t, g.big_t(t), h2, h3});
    }
  });
  if (samples.size() < 2) throw InvalidInput("blowup-window: fewer than two resolved times");
  const H3Bound bound = h3_lower_bound(g, samples, fit);
  write_bound_csv(ctx.output("bound.csv"), bound.rows);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& r : bound.rows) margin = std::min(margin, (r.measured_h3 - r.bound) / r.bound);
  const double growth = samples.back().measured_h3 / samples.front().measured_h3;
  if (!exhausted.empty()) ctx.manifest.status = "blow-up window exhausted";
  ctx.metric("window", exhausted.empty() ? "all requested times resolved" : exhausted);
  ctx.metric("last_resolved_t", samples.back().t);
  ctx.metric("fit", {{"C", bound.fit.c}, {"C1", bound.fit.c1}, {"t_fit", bound.fit.t_fit}});
  ctx.manifest.add(CriterionResult::at_least("H3 growth factor", growth, min_growth));
  ctx.manifest.add(CriterionResult::holds("bound below measured at every time", bound.measured_above_bound, margin,
                                          "measured is the smallest (measured - bound) / bound"));
  ctx.manifest.add(CriterionResult::holds("clean halt at window exhaustion", !exhausted.empty(), samples.back().t));
}

inline void third_derivative_blocks(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const Sl2Params g = c.sl2();
  const double t = c.number("blocks.time");
  const double tol = c.number("criteria.relative_tolerance");
  const auto run = family_run(ctx, g, {0.0, t});
  const ConformalFamily fam = make_family(c, run, g, c.grid());
  const BlockComparison cmp = ctx.stage("blocks", [&] { return third_derivative_blocks(fam, t); });
  CsvWriter table(ctx.output("blocks.csv"), {"block", "printed_gap", "corrected_gap", "norm"});
  const char* names[] = {"A", "D", "H"};
  for (int k = 0; k < 3; ++k) {
    table.row(names[k], cmp.printed[k], cmp.corrected[k], cmp.norms[k]);
    ctx.metric(std::string("corrected_gap_") + names[k], cmp.corrected[k]);
    ctx.manifest.add(CriterionResult::at_most(std::string("block ") + names[k] + " closed form vs general", cmp.printed[k], tol));
  }
  ctx.metric("alpha", cmp.alpha);
  ctx.metric("h2", cmp.h2);
  ctx.metric("l6_cubed", cmp.l6_cubed);
}

inline void solitary_wave(RunContext& ctx) {
  const auto& c = ctx.cfg;
  ShootConfig sc;
  sc.grid = c.radial_grid();
  sc.alpha_start = c.number("shoot.alpha_start");
  sc.bracket_limit = c.number("shoot.bracket_limit");
  sc.bisection_steps = static_cast<int>(c.integer("shoot.bisection_steps"));
  sc.outer_iterations = static_cast<int>(c.integer("shoot.outer_iterations"));
  sc.defect_tolerance = c.number("shoot.defect_tolerance");
  sc.fixed_point_tolerance = c.number("shoot.fixed_point_tolerance");
  sc.escape = c.number("shoot.escape");
  sc.curve_points = static_cast<int>(c.integer("shoot.curve_points"));
  sc.relaxation = c.number("shoot.relaxation");
  CsvWriter err(ctx.output("shoot_summary.csv"), {"E", "converged", "outer_iterations", "fixed_point_gap", "boundary_defect"});
  nlohmann::json reports = nlohmann::json::array();
  for (double e : c.numbers("shoot.E")) {
    const ShootReport rep = ctx.stage(label("E", e), [&] { return solitary_wave_shoot(e, sc); });
    err.row(e, rep.converged ? 1 : 0, rep.outer_iterations, rep.fixed_point_gap, rep.defect);
    reports.push_back(to_json(rep));
    if (rep.profile) write_profile_csv(ctx.output("profile_" + label("E", e) + ".csv"), *rep.profile);
    if (!rep.converged) ctx.warn(label("E", e) + ": " + rep.reason);
  }
  std::ofstream os(ctx.output("shoot.json"));
  os << reports.dump(2) << '\n';
  ctx.metric("reports", reports.size());
}

inline void line_soliton(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const PeriodicGrid2D grid = c.grid();
  const double tol = c.number("criteria.restriction_tolerance");
  const int scan = static_cast<int>(c.integer("line.scan_points"));
  CsvWriter table(ctx.output("kappa_scan.csv"), {"delta", "phase", "restriction2"});
  double worst = 0.0;
  nlohmann::json rows = nlohmann::json::array();
  for (double delta : c.numbers("soliton.delta")) {
    const LineSolitonReport rep = line_soliton_report(grid, {delta}, scan);
    for (const auto& [phi, r2] : rep.scan) table.row(delta, phi, r2);
    worst = std::max({worst, rep.consistent.restriction1, rep.consistent.restriction2});
    rows.push_back({{"delta", delta},
                    {"printed", {rep.printed.restriction1, rep.printed.restriction2, rep.printed.equations.max()}},
                    {"consistent", {rep.consistent.restriction1, rep.consistent.restriction2, rep.consistent.equations.max()}},
                    {"best_phase", rep.best_phase}});
  }
  ctx.metric("residuals [restriction1, restriction2, equations]", rows);
  ctx.manifest.add(CriterionResult::at_most("restrictions with kappa = -exp(-2i delta)", worst, tol));
}

}  // namespace pipeline

inline const std::vector<Experiment>& experiment_registry() {
  static const std::vector<Experiment> reg = {
      {"soliton-residual", "travelling line soliton of the LL equation, closed form", pipeline::soliton_residual},
      {"ll-accuracy", "LL equation s_t = s x Laplacian s with projected RK4", pipeline::ll_accuracy},
      {"mass-conservation", "L2 conservation of the radial equation with drift", pipeline::mass_conservation},
      {"ansatz-consistency", "vorticity-one radial ansatz of the NLS-type system", pipeline::ansatz_consistency},
      {"conformal-invariance", "SL(2,R) conformal family of the NLS-type system", pipeline::conformal_invariance},
      {"gauge-round-trip", "gauge equivalence of the LL equation and the NLS-type system", pipeline::gauge_round_trip},
      {"lower-bound", "lower bound on ||grad^2 Q||^2 along the drift run", pipeline::lower_bound},
      {"blowup-window", "H3 growth of the spin field along the conformal family", pipeline::blowup_window},
      {"third-derivative-blocks", "third derivatives of S in the frame, blocks A, D, H", pipeline::third_derivative_blocks},
      {"solitary-wave", "solitary-wave profile equation, exploratory shooting", pipeline::solitary_wave},
      {"line-soliton-report", "line-soliton constant in the restrictions", pipeline::line_soliton},
  };
  return reg;
}

inline const Experiment& find_experiment(const std::string& name) {
  for (const auto& e : experiment_registry())
    if (e.name == name) return e;
  throw ConfigError("config: unknown experiment '" + name + "' (see `lab list`)");
}

inline nlohmann::json config_echo(const ExperimentConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [section, body] : c.tree())
    for (const auto& [key, value] : body) j[section][key] = value.data();
  return j;
}

/// Runs the named pipeline and writes manifest.json into cfg.output_dir,
/// also when the pipeline throws (status then records the failure).
inline RunManifest run_experiment(const ExperimentConfig& cfg) {
  const Experiment& e = find_experiment(cfg.experiment);
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("run_experiment: cannot create " + cfg.output_dir.string());
  RunManifest m;
  m.experiment = e.name;
  m.anchor = e.anchor;
  m.config = config_echo(cfg);
  m.started = utc_timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  RunContext ctx(cfg, m);
  auto finish = [&] {
    m.finished = utc_timestamp();
    m.wall_seconds = pipeline::seconds_since(t0);
    for (const auto& k : cfg.unused_keys()) m.warnings.push_back("unused config key '" + k + "'");
    write_manifest(cfg.output_dir, m);
  };
  try {
    e.pipeline(ctx);
  } catch (const Error& err) {
    m.status = std::string("failed: ") + err.what();
    finish();
    throw;
  }
  finish();
  return m;
}

/// 0 all criteria pass, 2 a criterion failed.
inline int exit_code(const RunManifest& m) { return m.all_pass() ? 0 : 2; }

/// 4 for configuration and file problems, 3 for solver failures.
inline int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::invalid_input:
    case ErrorKind::io: return 4;
    default: return 3;
  }
}

}  // namespace gaugelab
