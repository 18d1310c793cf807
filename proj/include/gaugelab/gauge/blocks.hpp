#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <vector>

#include "gaugelab/analytic/conformal.hpp"
#include "gaugelab/core/spectral.hpp"
#include "gaugelab/gauge/frame.hpp"

namespace gaugelab {

/// Off-diagonal entries of S_zzz, S_zbar zbar zbar and S_zz zbar in the frame.
struct Blocks {
  ComplexField2D a, d, h;
  explicit Blocks(const PeriodicGrid2D& g) : a(g), d(g), h(g) {}
};

/// A = (2pq - q_z)_z - 2p(2pq - q_z) - 4 q^2 r
/// D = (2 pb rb + rb_zbar)_zbar + 2 pb (2 pb rb + rb_zbar) + 4 rb^2 qb
/// H = (2pq - q_z)_zbar + 2 pb (2pq - q_z) + 4|r|^2 q
inline Blocks general_blocks(const SchrodingerState& s) {
  const auto& g = s.grid();
  const ComplexField2D p = s.full_p();
  const ComplexField2D pb = conj(p), qb = conj(s.q), rb = conj(s.r);
  const ComplexField2D q_z = spectral_derivative(s.q, Derivative::dz);
  const ComplexField2D rb_zb = spectral_derivative(rb, Derivative::dzbar);
  ComplexField2D w(g), v(g);
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = 2.0 * p[k] * s.q[k] - q_z[k];
    v[k] = 2.0 * pb[k] * rb[k] + rb_zb[k];
  }
  const ComplexField2D w_z = spectral_derivative(w, Derivative::dz);
  const ComplexField2D w_zb = spectral_derivative(w, Derivative::dzbar);
  const ComplexField2D v_zb = spectral_derivative(v, Derivative::dzbar);
  Blocks out(g);
  for (std::size_t k = 0; k < w.size(); ++k) {
    out.a[k] = w_z[k] - 2.0 * p[k] * w[k] - 4.0 * s.q[k] * s.q[k] * s.r[k];
    out.d[k] = v_zb[k] + 2.0 * pb[k] * v[k] + 4.0 * rb[k] * rb[k] * qb[k];
    out.h[k] = w_zb[k] + 2.0 * pb[k] * w[k] + 4.0 * std::norm(s.r[k]) * s.q[k];
  }
  return out;
}

enum class BlockForm { printed, corrected };

/// Closed forms on the conformal family in terms of f(R, T), with
/// E = exp(-i b rho^2 / (4 alpha)) and x-space derivatives of f(R) e^{-i theta}.
///   printed:   A = -(E/alpha) Q_zz - 4 (E/alpha^3)|Q|^2 Q
///              D =  (E/alpha) Q_zbzb + 4 (E/alpha^3)|Q|^2 conj(Q)
///              H = -(E/alpha) Q_zzb + 4 (E/alpha^3)|Q|^2 Q
///   corrected: A = -E W_zz + 4E|W|^2 W e^{-2i theta}
///              D = -E (W e^{2i theta})_zbzb + 4E|W|^2 W e^{4i theta},  W = Q/alpha
/// H is the same in both.
inline Blocks closed_form_blocks(const ConformalFamily& fam, double t, BlockForm form) {
  const auto& g = fam.grid();
  const double al = fam.alpha(t);
  const auto where = fam.history().locate(fam.params().big_t(t));
  Blocks out(g);
  const int n = g.n();
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < n; ++j) {
      const double x = g.coord(i), y = g.coord(j), rho = std::hypot(x, y);
      const std::size_t k = g.index(i, j);
      if (rho == 0.0) continue;
      const double big_r = rho / al;
      const RadialSample f = fam.history().at(big_r, where);
      const cplx e1(x / rho, y / rho);  // e^{i theta}
      const cplx em = std::conj(e1);
      const cplx e = fam.chirp(rho, al);
      const double a3 = al * al * al;
      // f'' -+ 3f'/R + 3f/R^2 and f'' + f'/R - f/R^2, carried with 1/alpha^2.
      const cplx lap_minus = f.f_rr - 3.0 * f.f_r / big_r + 3.0 * f.f / (big_r * big_r);
      const cplx lap_zero = f.f_rr + f.f_r / big_r - f.f / (big_r * big_r);
      const cplx cubic = std::norm(f.f) * f.f;
      const cplx q_zz = em * em * em * lap_minus / (al * al);
      const cplx q_zbzb = e1 * lap_zero / (al * al);
      const cplx q_zzb = em * lap_zero / (al * al);
      out.h[k] = -(e / al) * q_zzb + 4.0 * (e / a3) * cubic * em;
      if (form == BlockForm::printed) {
        out.a[k] = -(e / al) * q_zz - 4.0 * (e / a3) * cubic * em;
        out.d[k] = (e / al) * q_zbzb + 4.0 * (e / a3) * std::norm(f.f) * std::conj(f.f) * e1;
      } else {
        out.a[k] = -(e / a3) * em * em * em * lap_minus + 4.0 * (e / a3) * cubic * em * em * em;
        out.d[k] = -(e / a3) * e1 * e1 * e1 * lap_minus + 4.0 * (e / a3) * cubic * e1 * e1 * e1;
      }
    }
  });
  return out;
}

inline double relative_l2(const ComplexField2D& ref, const ComplexField2D& other) {
  const double den = l2_norm(ref);
  const double num = l2_norm(ref - other);
  return den > 0.0 ? num / den : num;
}

struct BlockComparison {
  std::array<double, 3> printed{};    ///< relative L2 gap of A, D, H vs the general expressions
  std::array<double, 3> corrected{};
  std::array<double, 3> norms{};      ///< ||A||, ||D||, ||H|| from the general expressions
  double alpha = 1.0;
  double h2 = 0.0;       ///< ||grad^2 Q(T)||
  double l6_cubed = 0.0;  ///< ||Q(T)||^3_{L^6}
};

/// Compares all three block evaluations at time t.
inline BlockComparison third_derivative_blocks(const ConformalFamily& fam, double t) {
  const SchrodingerState s = fam.state(t);
  const Blocks gen = general_blocks(s);
  const Blocks pr = closed_form_blocks(fam, t, BlockForm::printed);
  const Blocks co = closed_form_blocks(fam, t, BlockForm::corrected);
  BlockComparison c;
  c.printed = {relative_l2(gen.a, pr.a), relative_l2(gen.d, pr.d), relative_l2(gen.h, pr.h)};
  c.corrected = {relative_l2(gen.a, co.a), relative_l2(gen.d, co.d), relative_l2(gen.h, co.h)};
  c.norms = {l2_norm(gen.a), l2_norm(gen.d), l2_norm(gen.h)};
  c.alpha = fam.alpha(t);
  const RadialProfile q = fam.history().profile(fam.params().big_t(t));
  c.h2 = std::sqrt(radial_h2_seminorm_sq(q));
  c.l6_cubed = std::sqrt(radial_lp_integral(q.values(), q.grid(), 6.0));
  return c;
}

// ---------------------------------------------------------------------------
// H^3 lower bound

/// Spin H^3 norm of s - s_far, s_far the mean over the box boundary.
inline double spin_h3_excess(const SpinField& s) {
  double acc = 0.0;
  for (int a = 0; a < 3; ++a) {
    RealField2D c = s[a];
    const double far = boundary_mean(c);
    for (auto& v : c.values()) v -= far;
    const double n = sobolev_norm(c, 3);
    acc += n * n;
  }
  return std::sqrt(acc);
}

struct H3Sample {
  double t = 0.0;
  double big_t = 0.0;
  double h2_sq = 0.0;       ///< ||grad^2 Q(T)||^2 of the radial run
  double measured_h3 = 0.0;
};

/// bound is reported as a norm, i.e. the square root of the squared-norm bound.
struct H3BoundRow {
  double t, big_t, bound, measured_h3;
};

struct H3BoundFit {
  double c = 0.0;   ///< min over the fit window of measured^2 / shape
  double c1 = 0.0;  ///< max over the fit window of (1/h2_sq - 1/h2_sq(0)) / T
  double t_fit = 0.0;
};

struct H3Bound {
  std::vector<H3BoundRow> rows;
  H3BoundFit fit;
  bool measured_above_bound = true;
};

/// bound(t) = C alpha^{-3} (d - bT) / (C1 T + 1/||grad^2 Q_0||^2), compared
/// with the measured ||S||_{H^3}^2. C1 and C are fitted over t <= t_fit and
/// then frozen. samples.front() must be at T = 0.
inline H3Bound h3_lower_bound(const Sl2Params& g, const std::vector<H3Sample>& samples, double t_fit) {
  g.validate();
  if (samples.empty() || samples.front().big_t != 0.0)
    throw InvalidInput("h3_lower_bound: samples must start at T = 0");
  const double inv0 = 1.0 / samples.front().h2_sq;
  H3Bound out;
  out.fit.t_fit = t_fit;
  for (const auto& s : samples)
    if (s.t > 0.0 && s.t <= t_fit && s.big_t > 0.0)
      out.fit.c1 = std::max(out.fit.c1, (1.0 / s.h2_sq - inv0) / s.big_t);
  auto shape = [&](const H3Sample& s) {
    const double al = g.alpha(s.t);
    if (!(al > 0.0)) throw HorizonError("h3_lower_bound: a + bt must stay positive");
    return (g.d - g.b * s.big_t) / (al * al * al * (out.fit.c1 * s.big_t + inv0));
  };
  out.fit.c = std::numeric_limits<double>::infinity();
  for (const auto& s : samples)
    if (s.t <= t_fit) out.fit.c = std::min(out.fit.c, s.measured_h3 * s.measured_h3 / shape(s));
  for (const auto& s : samples) {
    const double bound = std::sqrt(out.fit.c * shape(s));
    out.rows.push_back({s.t, s.big_t, bound, s.measured_h3});
    if (s.measured_h3 < bound * (1.0 - 1e-12)) out.measured_above_bound = false;
  }
  return out;
}

inline void write_bound_csv(const std::filesystem::path& path, const std::vector<H3BoundRow>& rows) {
  std::ofstream os(path);
  if (!os) throw IoError("write_bound_csv: cannot open " + path.string());
  os << "t,T,bound,measured_H3\n" << std::setprecision(17);
  for (const auto& r : rows) os << r.t << ',' << r.big_t << ',' << r.bound << ',' << r.measured_h3 << '\n';
}

}  // namespace gaugelab
