#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <vector>

#include "gaugelab/core/radial.hpp"
#include "gaugelab/nls/state.hpp"

namespace gaugelab {

/// Sign convention of the radial equation.
///   qq:    i Q_t - Delta_1 Q - Q (2|Q|^2 - 4 I) = 0
///   qrho1: i Q_t + Delta_1 Q + Q (2|Q|^2 - 4 I) = 0
/// Each is the complex conjugate of the other.
enum class Convention { qq, qrho1 };

inline double convention_sign(Convention c) { return c == Convention::qq ? -1.0 : 1.0; }

struct RadialScheme {
  Convention convention = Convention::qq;
  int fd_order = 4;
  TailRule tail = TailRule::fourth_order;
};

/// Q_t of the drift-free radial equation, Delta_1 Q = Q'' + Q'/rho - Q/rho^2.
inline RadialProfile radialQQ_rhs(const RadialProfile& q, const RadialScheme& scheme = {}) {
  const auto lap = radial_laplacian(q, scheme.fd_order);
  const auto tail = nonlocal_tail(q, scheme.tail);
  const cplx si(0.0, convention_sign(scheme.convention));
  RadialProfile out(q.grid());
  for (int j = 0; j < q.size(); ++j) out[j] = si * (lap[j] + q[j] * (2.0 * std::norm(q[j]) - 4.0 * tail[j]));
  return out;
}

/// Adds the drift (b / (d - b t)) (Q + rho Q_rho) to radialQQ_rhs, i.e. the
/// term -(i b / (d - b t))(Q + rho Q_rho) in the i Q_t form.
inline RadialProfile drift_rhs(const RadialProfile& q, double t, const DriftParams& drift,
                                const RadialScheme& scheme = {Convention::qrho1}) {
  const double den = drift.denominator(t);
  if (!(den > 0.0)) throw HorizonError("drift_rhs: d - b t must stay positive");
  RadialProfile out = radialQQ_rhs(q, scheme);
  if (drift.b == 0.0) return out;
  const auto der = radial_derivatives(q, scheme.fd_order);
  const double c = drift.b / den;
  for (int j = 0; j < q.size(); ++j) out[j] += c * (q[j] + q.grid().rho(j) * der.d1[j]);
  return out;
}

/// Largest explicit RK4 step for the radial operator on [t0, t1]: the
/// imaginary-axis bound 2.8 over the stencil spectral radius.
inline double radial_stable_dt(const RadialGrid& grid, const std::optional<DriftParams>& drift, double t0, double t1) {
  const double h = grid.h();
  double radius = 16.0 / (3.0 * h * h);
  if (drift && drift->b != 0.0) {
    const double den = std::min(drift->denominator(t0), drift->denominator(t1));
    if (!(den > 0.0)) throw HorizonError("radial_stable_dt: horizon inside the run interval");
    radius += std::abs(drift->b / den) * (1.0 + 1.4 * grid.rho_max() / h);
  }
  return 2.8 / radius;
}

struct RadialRunConfig {
  double t_end = 1.0;
  double dt = 0.0;  ///< 0 selects cfl_safety * radial_stable_dt
  double cfl_safety = 0.5;
  RadialScheme scheme{};
  std::optional<DriftParams> drift{};
  /// Snapshot cadence in time (0 = only t0, t_end and extra times).
  double snapshot_every = 0.0;
  std::vector<double> extra_times{};
  /// Largest |Q| admitted at the outer node of the initial data.
  double edge_tolerance = 1e-10;
};

struct RadialSnapshot {
  double t;
  RadialProfile q;
  RadialProfile rate;
};

struct RadialLogRow {
  double t, mass, h2, lower_bound_value, drift_coeff;
};

struct RadialRunResult {
  std::vector<RadialSnapshot> snapshots;
  std::vector<RadialLogRow> log;
  double dt = 0.0;
  std::size_t steps = 0;
  double edge_max = 0.0;  ///< max |Q(rho_max)| seen during the run
};

inline RadialProfile radial_rate(const RadialProfile& q, double t, const RadialRunConfig& cfg) {
  return cfg.drift ? drift_rhs(q, t, *cfg.drift, cfg.scheme) : radialQQ_rhs(q, cfg.scheme);
}

namespace detail {

inline RadialProfile radial_axpy(const RadialProfile& q, double c, const RadialProfile& k) {
  RadialProfile out(q.grid());
  for (int j = 0; j < q.size(); ++j) out[j] = q[j] + c * k[j];
  return out;
}

}  // namespace detail

/// RK4 run from (t0, q0) to cfg.t_end. Every output time (cadence, extras,
/// t_end) is hit exactly; the log has one row per output time.
inline RadialRunResult run_radial(const RadialProfile& q0, double t0, const RadialRunConfig& cfg) {
  if (!(cfg.t_end >= t0)) throw InvalidInput("run_radial: t_end before t0");
  if (std::abs(q0[q0.size() - 1]) > cfg.edge_tolerance)
    throw InvalidInput("run_radial: |Q(rho_max)| above edge tolerance; enlarge rho_max");
  const double limit = radial_stable_dt(q0.grid(), cfg.drift, t0, cfg.t_end);
  const double dt = cfg.dt > 0.0 ? cfg.dt : cfg.cfl_safety * limit;
  if (dt > limit * (1.0 + 1e-12)) throw InvalidInput("run_radial: dt above the RK4 stability bound");

  std::vector<double> outputs{t0, cfg.t_end};
  if (cfg.snapshot_every > 0.0)
    for (double t = t0 + cfg.snapshot_every; t < cfg.t_end; t += cfg.snapshot_every) outputs.push_back(t);
  for (double t : cfg.extra_times)
    if (t >= t0 && t <= cfg.t_end) outputs.push_back(t);
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
                outputs.end());

  RadialRunResult res;
  res.dt = dt;
  const double h2_0 = radial_h2_seminorm_sq(q0);
  auto record = [&](const RadialProfile& q, double t) {
    res.snapshots.push_back({t, q, radial_rate(q, t, cfg)});
    const double h2 = radial_h2_seminorm_sq(q);
    const double dc = cfg.drift ? cfg.drift->b / cfg.drift->denominator(t) : 0.0;
    res.log.push_back({t, radial_mass(q), h2, (h2 > 0.0 && h2_0 > 0.0) ? 1.0 / h2 - 1.0 / h2_0 : 0.0, dc});
  };

  RadialProfile q = q0;
  double t = t0;
  record(q, t);
  for (std::size_t o = 1; o < outputs.size(); ++o) {
    const double span = outputs[o] - t;
    const auto n = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
    const double h = span / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k1 = radial_rate(q, t, cfg);
      const auto k2 = radial_rate(detail::radial_axpy(q, h / 2, k1), t + h / 2, cfg);
      const auto k3 = radial_rate(detail::radial_axpy(q, h / 2, k2), t + h / 2, cfg);
      const auto k4 = radial_rate(detail::radial_axpy(q, h, k3), t + h, cfg);
      for (int j = 0; j < q.size(); ++j) q[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      t = (i + 1 == n) ? outputs[o] : t + h;
      ++res.steps;
      res.edge_max = std::max(res.edge_max, std::abs(q[q.size() - 1]));
      for (int j = 0; j < q.size(); ++j)
        if (!is_finite(q[j])) throw InstabilityError("run_radial: non-finite profile");
    }
    record(q, t);
  }
  return res;
}

inline void write_radial_log(const std::filesystem::path& path, const std::vector<RadialLogRow>& rows) {
  std::ofstream os(path);
  if (!os) throw IoError("write_radial_log: cannot open " + path.string());
  os << "t,massQ,H2Q,lower_bound_value,drift_coeff\n" << std::setprecision(17);
  for (const auto& r : rows)
    os << r.t << ',' << r.mass << ',' << r.h2 << ',' << r.lower_bound_value << ',' << r.drift_coeff << '\n';
}

/// Conjugate profile; maps solutions of one convention to the other.
inline RadialProfile conjugate(const RadialProfile& q) {
  RadialProfile out(q.grid());
  for (int j = 0; j < q.size(); ++j) out[j] = std::conj(q[j]);
  return out;
}

/// u = -|Q|^2 + 2 int_rho^inf |Q|^2 / tau dtau on the radial nodes.
inline std::vector<double> radial_u(const RadialProfile& q, TailRule rule = TailRule::fourth_order) {
  const auto tail = nonlocal_tail(q, rule);
  std::vector<double> u(q.size());
  for (int j = 0; j < q.size(); ++j) u[j] = -std::norm(q[j]) + 2.0 * tail[j];
  return u;
}

/// Radial closure lifted to the Cartesian grid.
inline RealField2D u_from_closure(const RadialProfile& q, const PeriodicGrid2D& grid, int points = 6,
                                  TailRule rule = TailRule::fourth_order) {
  if (q.grid().rho_max() < std::sqrt(2.0) * grid.half_length())
    throw DomainCoverageError("u_from_closure: rho_max must be at least sqrt(2) L");
  return lift_radial_even(radial_u(q, rule), q.grid(), grid, points);
}

}  // namespace gaugelab
