#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "gaugelab/analytic/soliton.hpp"
#include "gaugelab/nls/system8.hpp"

namespace gaugelab {

/// Line-soliton fields of the system: p = 0, q = e^{-it} sech(w),
/// r = kappa conj(q), u = -|q|^2, w = cos(delta) x + sin(delta) y.
/// With wrap_to_torus, w is reduced as in SolitonProvider.
inline SchrodingerState line_soliton_state(const PeriodicGrid2D& grid, const SolitonParams& params, cplx kappa,
                                           double t, bool wrap_to_torus = false) {
  const double c = std::abs(std::cos(params.delta)), sn = std::abs(std::sin(params.delta));
  const double period = 2.0 * grid.half_length() * std::max(c, sn);
  SchrodingerState s(grid);
  s.t = t;
  for (int i = 0; i < grid.n(); ++i)
    for (int j = 0; j < grid.n(); ++j) {
      double w = soliton_phase(params, grid.coord(i), grid.coord(j));
      if (wrap_to_torus) w = std::remainder(w, period);
      const cplx q = nls_seed(w, t);
      s.q(i, j) = q;
      s.r(i, j) = kappa * std::conj(q);
      s.u(i, j) = -std::norm(q);
    }
  return s;
}

inline SchrodingerRates line_soliton_rates(const SchrodingerState& s, cplx kappa) {
  SchrodingerRates k(s.grid());
  for (std::size_t n = 0; n < s.q.size(); ++n) {
    k.q_t[n] = cplx(0.0, -1.0) * s.q[n];
    k.r_t[n] = kappa * std::conj(k.q_t[n]);
  }
  return k;
}

/// The constant the restrictions and the third equation require.
inline cplx consistent_kappa(double delta) { return -std::polar(1.0, -2.0 * delta); }

/// The constant -(1 - i)/(1 + i) = i.
inline cplx printed_kappa() { return -cplx(1.0, -1.0) / cplx(1.0, 1.0); }

struct KappaResidual {
  cplx kappa{};
  double restriction1 = 0.0, restriction2 = 0.0;
  System8Residual equations{};
};

struct LineSolitonReport {
  double delta = 0.0;
  KappaResidual printed, consistent;
  /// kappa = e^{i phi} on a uniform phase scan, second-restriction residual.
  std::vector<std::pair<double, double>> scan;
  double best_phase = 0.0;
};

inline KappaResidual kappa_residual(const PeriodicGrid2D& grid, const SolitonParams& params, cplx kappa, bool wrap) {
  const SchrodingerState s = line_soliton_state(grid, params, kappa, 0.0, wrap);
  const auto [r1, r2] = restriction_residual(s);
  return {kappa, r1, r2, system8_residual(s, line_soliton_rates(s, kappa))};
}

/// Residuals of the printed constant, of -e^{-2i delta}, and of a scan of
/// unit phases. Periodic data needs delta in {0, pi/4, pi/2} (with wrap for
/// the diagonal).
inline LineSolitonReport line_soliton_report(const PeriodicGrid2D& grid, const SolitonParams& params,
                                                   int scan_points = 72) {
  const double c = std::cos(params.delta), sn = std::sin(params.delta);
  const bool wrap = std::abs(c) > 1e-12 && std::abs(sn) > 1e-12;
  LineSolitonReport rep;
  rep.delta = params.delta;
  rep.printed = kappa_residual(grid, params, printed_kappa(), wrap);
  rep.consistent = kappa_residual(grid, params, consistent_kappa(params.delta), wrap);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < scan_points; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / scan_points;
    const SchrodingerState s = line_soliton_state(grid, params, std::polar(1.0, phi), 0.0, wrap);
    const double r2 = restriction_residual(s).second;
    rep.scan.emplace_back(phi, r2);
    if (r2 < best) best = r2, rep.best_phase = phi;
  }
  return rep;
}

}  // namespace gaugelab
