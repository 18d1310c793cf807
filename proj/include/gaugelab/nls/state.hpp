#pragma once

#include <complex>

#include "gaugelab/core/field.hpp"

namespace gaugelab {

/// Analytic non-decaying parts carried outside the periodic fields:
/// p_full = p + p_zbar * zbar and u_full = u + u_zzbar * z zbar, with
/// z = (x + iy) / 2. Spectral derivatives only ever see decaying data.
struct AffineBackground {
  cplx p_zbar{};
  double u_zzbar = 0.0;
  /// d/dt of p_zbar, needed by the third equation.
  cplx p_zbar_rate{};

  bool is_zero() const noexcept { return p_zbar == cplx{} && u_zzbar == 0.0 && p_zbar_rate == cplx{}; }
};

inline cplx zbar_at(double x, double y) { return cplx(0.5 * x, -0.5 * y); }
inline double zzbar_at(double x, double y) { return 0.25 * (x * x + y * y); }

/// Fields (p, q, r, u) of the Schrödinger-type system at time t.
struct SchrodingerState {
  ComplexField2D p, q, r;
  RealField2D u;
  double t = 0.0;
  AffineBackground background{};

  explicit SchrodingerState(const PeriodicGrid2D& g) : p(g), q(g), r(g), u(g) {}

  const PeriodicGrid2D& grid() const noexcept { return q.grid(); }

  /// p including the affine background, at every node.
  ComplexField2D full_p() const {
    if (background.p_zbar == cplx{}) return p;
    const auto& g = grid();
    ComplexField2D out = p;
    for (int i = 0; i < g.n(); ++i)
      for (int j = 0; j < g.n(); ++j) out(i, j) += background.p_zbar * zbar_at(g.coord(i), g.coord(j));
    return out;
  }

  RealField2D full_u() const {
    if (background.u_zzbar == 0.0) return u;
    const auto& g = grid();
    RealField2D out = u;
    for (int i = 0; i < g.n(); ++i)
      for (int j = 0; j < g.n(); ++j) out(i, j) += background.u_zzbar * zzbar_at(g.coord(i), g.coord(j));
    return out;
  }

  bool all_finite() const noexcept { return p.all_finite() && q.all_finite() && r.all_finite() && u.all_finite(); }
};

/// Time derivatives of (p, q, r); p_zbar_rate is the rate of the affine
/// coefficient.
struct SchrodingerRates {
  ComplexField2D p_t, q_t, r_t;
  cplx p_zbar_rate{};

  explicit SchrodingerRates(const PeriodicGrid2D& g) : p_t(g), q_t(g), r_t(g) {}
};

/// Drift coefficient b / (d - b t) of the radial blow-up equation.
struct DriftParams {
  double b = 0.0;
  double d = 1.0;

  double denominator(double t) const noexcept { return d - b * t; }
};

}  // namespace gaugelab
