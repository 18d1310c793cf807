#pragma once

#include <cmath>

#include "gaugelab/nls/radial.hpp"
#include "gaugelab/nls/system8.hpp"

namespace gaugelab {

namespace detail {

/// e^{-i theta} at a node, zero at the origin.
inline cplx unit_phase_minus(double x, double y) {
  const double rho = std::hypot(x, y);
  return rho == 0.0 ? cplx{} : cplx(x / rho, -y / rho);
}

}  // namespace detail

/// Vortex ansatz p = 0, q = e^{-i theta} Q, r = -e^{-i theta} conj(Q),
/// u = -|Q|^2 + 2 int_rho^inf |Q|^2 / tau.
inline SchrodingerState ansatz_state(const RadialProfile& q, const PeriodicGrid2D& grid, int points = 6,
                                     TailRule rule = TailRule::fourth_order) {
  SchrodingerState s(grid);
  s.q = lift_radial(q, grid, points);
  s.r = lift_radial(conjugate(q), grid, points);
  for (auto& v : s.r.values()) v = -v;
  s.u = u_from_closure(q, grid, points, rule);
  return s;
}

/// Rates of the ansatz fields from a radial rate Q_t.
inline SchrodingerRates ansatz_rates(const RadialProfile& rate, const PeriodicGrid2D& grid, int points = 6) {
  SchrodingerRates k(grid);
  k.q_t = lift_radial(rate, grid, points);
  k.r_t = lift_radial(conjugate(rate), grid, points);
  for (auto& v : k.r_t.values()) v = -v;
  return k;
}

}  // namespace gaugelab
