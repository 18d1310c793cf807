#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaugelab/core/parallel.hpp"
#include "gaugelab/core/spectral.hpp"
#include "gaugelab/nls/state.hpp"

namespace gaugelab {

namespace detail {

inline ComplexField2D product(const ComplexField2D& a, const ComplexField2D& b) {
  return map_field(a, b, [](const cplx& x, const cplx& y) { return x * y; });
}

/// Derivative of a pointwise product, dealiased before differentiation.
inline ComplexField2D d_product(const ComplexField2D& a, const ComplexField2D& b, Derivative which) {
  return spectral_derivative(dealias(product(a, b)), which);
}

inline double zbar_l2(const PeriodicGrid2D& g) {
  // int |zbar|^2 over the box = int (x^2 + y^2) / 4 = (2L)^2 * (2 L^2 / 3) / 4.
  const double l = g.half_length();
  return std::sqrt(4.0 * l * l * (2.0 * l * l / 3.0) / 4.0);
}

}  // namespace detail

/// (p_t, q_t, r_t) solved from the three evolution equations:
///   i q_t = q_{z zbar} - 2uq + 2(pbar q)_z - 2p q_zbar - 4|p|^2 q
///   i r_t = -r_{z zbar} + 2ur + 2(pbar r)_z - 2p r_zbar + 4|p|^2 r
///   i p_t = (qr)_zbar - u_z
inline SchrodingerRates system8_rhs(const SchrodingerState& s) {
  if (!s.all_finite()) throw InstabilityError("system8_rhs: non-finite state");
  const auto& g = s.grid();
  const ComplexField2D pf = s.full_p();
  const ComplexField2D pfb = conj(pf);
  const RealField2D uf = s.full_u();

  const ComplexField2D lap_q = spectral_derivative(s.q, Derivative::laplacian);
  const ComplexField2D lap_r = spectral_derivative(s.r, Derivative::laplacian);
  const ComplexField2D q_zb = spectral_derivative(s.q, Derivative::dzbar);
  const ComplexField2D r_zb = spectral_derivative(s.r, Derivative::dzbar);
  const ComplexField2D pq_z = detail::d_product(pfb, s.q, Derivative::dz);
  const ComplexField2D pr_z = detail::d_product(pfb, s.r, Derivative::dz);
  const ComplexField2D qr_zb = detail::d_product(s.q, s.r, Derivative::dzbar);
  const ComplexField2D u_z = spectral_derivative(to_complex(s.u), Derivative::dz);

  const cplx mi(0.0, -1.0);
  SchrodingerRates out(g);
  parallel_for(s.q.size(), [&](std::size_t k) {
    const double p2 = std::norm(pf[k]);
    out.q_t[k] = mi * (lap_q[k] - 2.0 * uf[k] * s.q[k] + 2.0 * pq_z[k] - 2.0 * pf[k] * q_zb[k] - 4.0 * p2 * s.q[k]);
    out.r_t[k] = mi * (-lap_r[k] + 2.0 * uf[k] * s.r[k] + 2.0 * pr_z[k] - 2.0 * pf[k] * r_zb[k] + 4.0 * p2 * s.r[k]);
    out.p_t[k] = mi * (qr_zb[k] - u_z[k]);
  });
  // Affine part of the third equation: i c_t zbar = -u_zzbar zbar.
  out.p_zbar_rate = mi * (-s.background.u_zzbar);
  if (!(out.q_t.all_finite() && out.r_t.all_finite() && out.p_t.all_finite()))
    throw InstabilityError("system8_rhs: non-finite rates");
  return out;
}

struct System8Residual {
  double eq_q = 0.0, eq_r = 0.0, eq_p = 0.0;
  double max() const noexcept { return std::max({eq_q, eq_r, eq_p}); }
};

/// L2 norms of the three equations for a state with known time derivatives.
inline System8Residual system8_residual(const SchrodingerState& s, const SchrodingerRates& actual) {
  const SchrodingerRates rhs = system8_rhs(s);
  System8Residual res;
  res.eq_q = l2_norm(actual.q_t - rhs.q_t);
  res.eq_r = l2_norm(actual.r_t - rhs.r_t);
  res.eq_p = l2_norm(actual.p_t - rhs.p_t) +
             std::abs(actual.p_zbar_rate - rhs.p_zbar_rate) * detail::zbar_l2(s.grid());
  return res;
}

/// L2 norms of the two restriction defects
///   pbar_z + p_zbar - (|q|^2 - |r|^2),   rbar_z + q_zbar - 2(p rbar - pbar q).
inline std::pair<double, double> restriction_residual(const SchrodingerState& s) {
  const auto& g = s.grid();
  const ComplexField2D pf = s.full_p();
  const ComplexField2D rb = conj(s.r);
  const ComplexField2D pb_z = spectral_derivative(conj(s.p), Derivative::dz);
  const ComplexField2D p_zb = spectral_derivative(s.p, Derivative::dzbar);
  const ComplexField2D rb_z = spectral_derivative(rb, Derivative::dz);
  const ComplexField2D q_zb = spectral_derivative(s.q, Derivative::dzbar);
  // The affine part contributes conj(c) + c at every node.
  const double affine = 2.0 * s.background.p_zbar.real();
  ComplexField2D d1(g), d2(g);
  for (std::size_t k = 0; k < d1.size(); ++k) {
    d1[k] = pb_z[k] + p_zb[k] + affine - (std::norm(s.q[k]) - std::norm(s.r[k]));
    d2[k] = rb_z[k] + q_zb[k] - 2.0 * (pf[k] * rb[k] - std::conj(pf[k]) * s.q[k]);
  }
  return {l2_norm(d1), l2_norm(d2)};
}

struct SpectralClosure {
  RealField2D u;
  double imag_defect = 0.0;  ///< max |Im| discarded when taking the real part
  double mean_defect = 0.0;  ///< |k = 0 coefficient| of the source, per unit area
  std::vector<std::string> warnings;
};

/// u = Re d_z^{-1}[(qr)_zbar - i p_t] on the zero-mean part, then shifted
/// so its mean on the box boundary is zero (u decays at infinity). p_t
/// defaults to zero.
inline SpectralClosure u_from_closure(const ComplexField2D& q, const ComplexField2D& r,
                                      const ComplexField2D* p_t = nullptr) {
  const auto& g = q.grid();
  ComplexField2D src = detail::d_product(q, r, Derivative::dzbar);
  if (p_t)
    for (std::size_t k = 0; k < src.size(); ++k) src[k] -= cplx(0.0, 1.0) * (*p_t)[k];
  const Spectrum spec(src);
  const double mean = std::abs(spec.coefficients()[0]) / static_cast<double>(g.size());
  const ComplexField2D uc = spec.multiplied([&](int mx, int my) -> cplx {
                                  const cplx sym = detail::derivative_symbol(g, Derivative::dz, mx, my);
                                  return std::abs(sym) == 0.0 ? cplx{} : 1.0 / sym;
                                })
                                .field();
  SpectralClosure out{real_part(uc), 0.0, mean, {}};
  for (const auto& v : uc.values()) out.imag_defect = std::max(out.imag_defect, std::abs(v.imag()));
  const double ring = boundary_mean(out.u);
  for (auto& v : out.u.values()) v -= ring;
  if (mean > 1e-12 * std::max(1.0, max_abs(src)))
    out.warnings.push_back("u_from_closure: source has a nonzero k=0 mode; constant mode set to 0");
  return out;
}

// ---------------------------------------------------------------------------
// Conservation

struct MassSample {
  double t = 0.0;
  double mass_q = 0.0;
  double mass_r = 0.0;
};

inline MassSample mass_sample(const SchrodingerState& s) {
  const double nq = l2_norm(s.q), nr = l2_norm(s.r);
  return {s.t, nq * nq, nr * nr};
}

struct ConservationReport {
  double mass_q0 = 0.0, mass_r0 = 0.0;
  double max_drift_q = 0.0, max_drift_r = 0.0;  ///< max relative drift vs t0
  double drift_rate_q = 0.0, drift_rate_r = 0.0;  ///< max_drift / elapsed time
};

inline ConservationReport conservation_report(std::span<const MassSample> series) {
  ConservationReport rep;
  if (series.empty()) return rep;
  rep.mass_q0 = series.front().mass_q;
  rep.mass_r0 = series.front().mass_r;
  auto rel = [](double m, double m0) { return m0 > 0.0 ? std::abs(m - m0) / m0 : std::abs(m - m0); };
  for (const auto& s : series) {
    rep.max_drift_q = std::max(rep.max_drift_q, rel(s.mass_q, rep.mass_q0));
    rep.max_drift_r = std::max(rep.max_drift_r, rel(s.mass_r, rep.mass_r0));
  }
  const double span = series.back().t - series.front().t;
  if (span > 0.0) {
    rep.drift_rate_q = rep.max_drift_q / span;
    rep.drift_rate_r = rep.max_drift_r / span;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Evolution of the full system (experimental away from the ansatz families)

struct System8Config {
  double dt = 1e-3;
  double cfl_safety = 0.5;
};

/// RK4 on (p, q, r) with u recomputed by the spectral closure at every stage
/// and the rates dealiased.
class System8Solver {
 public:
  System8Solver(SchrodingerState s0, System8Config cfg) : s_(std::move(s0)), cfg_(cfg) {
    const double dx = s_.grid().dx();
    if (!(cfg_.dt > 0.0) || cfg_.dt > cfg_.cfl_safety * dx * dx / 4.0 * (1.0 + 1e-12))
      throw InvalidInput("System8Config: dt exceeds cfl_safety * dx^2 / 4");
    if (!s_.background.is_zero()) throw InvalidInput("System8Solver: affine backgrounds are not evolved");
    close(s_);
    masses_.push_back(mass_sample(s_));
  }

  const SchrodingerState& state() const noexcept { return s_; }
  const std::vector<MassSample>& masses() const noexcept { return masses_; }

  void advance(double t_end) {
    const double span = t_end - s_.t;
    if (span <= 0.0) return;
    const auto n = static_cast<std::size_t>(std::ceil(span / cfg_.dt - 1e-9));
    const double h = span / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      step(h);
      if (i + 1 == n) s_.t = t_end;
      masses_.push_back(mass_sample(s_));
    }
  }

 private:
  static void close(SchrodingerState& s) { s.u = u_from_closure(s.q, s.r).u; }

  static SchrodingerRates rates(SchrodingerState s) {
    close(s);
    SchrodingerRates k = system8_rhs(s);
    k.p_t = dealias(k.p_t);
    k.q_t = dealias(k.q_t);
    k.r_t = dealias(k.r_t);
    return k;
  }

  static SchrodingerState shifted(const SchrodingerState& s, double c, const SchrodingerRates& k) {
    SchrodingerState out = s;
    for (std::size_t n = 0; n < s.q.size(); ++n) {
      out.p[n] += c * k.p_t[n];
      out.q[n] += c * k.q_t[n];
      out.r[n] += c * k.r_t[n];
    }
    return out;
  }

  void step(double h) {
    const auto k1 = rates(s_);
    const auto k2 = rates(shifted(s_, h / 2, k1));
    const auto k3 = rates(shifted(s_, h / 2, k2));
    const auto k4 = rates(shifted(s_, h, k3));
    for (std::size_t n = 0; n < s_.q.size(); ++n) {
      s_.p[n] += h / 6.0 * (k1.p_t[n] + 2.0 * k2.p_t[n] + 2.0 * k3.p_t[n] + k4.p_t[n]);
      s_.q[n] += h / 6.0 * (k1.q_t[n] + 2.0 * k2.q_t[n] + 2.0 * k3.q_t[n] + k4.q_t[n]);
      s_.r[n] += h / 6.0 * (k1.r_t[n] + 2.0 * k2.r_t[n] + 2.0 * k3.r_t[n] + k4.r_t[n]);
    }
    s_.t += h;
    close(s_);
    if (!s_.all_finite()) throw InstabilityError("System8Solver: non-finite state");
  }

  SchrodingerState s_;
  System8Config cfg_;
  std::vector<MassSample> masses_;
};

}  // namespace gaugelab
