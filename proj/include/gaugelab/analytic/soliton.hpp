#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "gaugelab/core/field.hpp"

namespace gaugelab {

struct SolitonParams {
  double delta = 0.0;
};

/// Soliton profile as a function of the phase coordinate w:
///   s1 = 2 sh(w)/ch^2(w) cos t,  s2 = 2 sh(w)/ch^2(w) sin t,  s3 = 1 - 2/ch^2(w).
inline std::array<double, 3> soliton_spin_w(double w, double t) {
  // sh/ch^2 and 1/ch^2 written with sech to stay finite for large |w|.
  const double sech = 1.0 / std::cosh(w);
  const double amp = 2.0 * std::tanh(w) * sech;
  return {amp * std::cos(t), amp * std::sin(t), 1.0 - 2.0 * sech * sech};
}

inline std::array<double, 3> soliton_spin_rate_w(double w, double t) {
  const double sech = 1.0 / std::cosh(w);
  const double amp = 2.0 * std::tanh(w) * sech;
  return {-amp * std::sin(t), amp * std::cos(t), 0.0};
}

inline double soliton_phase(const SolitonParams& p, double x, double y) {
  return std::cos(p.delta) * x + std::sin(p.delta) * y;
}

/// Travelling line soliton of the LL equation, w = cos(delta) x + sin(delta) y.
inline std::array<double, 3> soliton_spin(const SolitonParams& p, double x, double y, double t) {
  return soliton_spin_w(soliton_phase(p, x, y), t);
}

inline std::array<double, 3> soliton_spin_rate(const SolitonParams& p, double x, double y, double t) {
  return soliton_spin_rate_w(soliton_phase(p, x, y), t);
}

/// 1-soliton of i q_t - q_ss - 2 q |q|^2 = 0: q = e^{-it} sech(s).
inline cplx nls_seed(double s, double t) { return std::polar(1.0 / std::cosh(s), -t); }

/// d/dt and d^2/ds^2 of nls_seed, for residual oracles.
inline cplx nls_seed_rate(double s, double t) { return cplx(0.0, -1.0) * nls_seed(s, t); }
inline cplx nls_seed_ss(double s, double t) {
  const double th = std::tanh(s);
  return nls_seed(s, t) * (th * th - 1.0 / (std::cosh(s) * std::cosh(s)));
}

/// Samples the soliton on a periodic grid. With wrap_to_torus the phase w is
/// reduced modulo 2L max(|cos delta|, |sin delta|), which makes the sampled
/// field periodic for tan(delta) in {0, +-1, infinity}; the profile is then
/// kinked (not smooth) where w wraps.
class SolitonProvider {
 public:
  SolitonProvider(const PeriodicGrid2D& grid, SolitonParams params, bool wrap_to_torus = false)
      : grid_(grid), params_(params), wrap_(wrap_to_torus) {}

  SpinField spin(double t) const {
    return SpinField::sample(grid_, [&](double x, double y) { return soliton_spin_w(w(x, y), t); });
  }
  TangentField spin_rate(double t) const {
    return TangentField::sample(grid_, [&](double x, double y) { return soliton_spin_rate_w(w(x, y), t); });
  }

  const PeriodicGrid2D& grid() const noexcept { return grid_; }
  const SolitonParams& params() const noexcept { return params_; }

 private:
  double w(double x, double y) const {
    const double w0 = soliton_phase(params_, x, y);
    if (!wrap_) return w0;
    const double c = std::abs(std::cos(params_.delta)), sn = std::abs(std::sin(params_.delta));
    return std::remainder(w0, 2.0 * grid_.half_length() * std::max(c, sn));
  }

  PeriodicGrid2D grid_;
  SolitonParams params_;
  bool wrap_;
};

}  // namespace gaugelab
