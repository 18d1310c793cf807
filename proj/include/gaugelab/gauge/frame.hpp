#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "gaugelab/core/parallel.hpp"
#include "gaugelab/core/snapshot.hpp"
#include "gaugelab/core/spectral.hpp"
#include "gaugelab/core/su2.hpp"
#include "gaugelab/ll/dynamics.hpp"
#include "gaugelab/ll/matrix_form.hpp"
#include "gaugelab/nls/system8.hpp"

namespace gaugelab {

/// How a spin-derived frame was built: G = R G'(R^{-1} S R) diag(gamma, conj gamma).
struct FrameChart {
  Mat2 rotation = Mat2::identity();
  std::optional<ComplexField2D> gamma{};
};

/// SU(2) frame field at time t with -G sigma3 G^{-1} = S.
struct GaugeFrame {
  MatrixField g;
  double t = 0.0;
  std::optional<FrameChart> chart{};

  explicit GaugeFrame(const PeriodicGrid2D& grid) : g(grid) {}
  const PeriodicGrid2D& grid() const noexcept { return g.grid(); }

  double max_unitarity_defect() const {
    double w = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Mat2 m = g.at(k);
      w = std::max({w, unitarity_defect(m), std::abs(m.det() - 1.0)});
    }
    return w;
  }
};

struct FrameOptions {
  double eps_pole = 1e-6;
  bool rotate_poles = true;
  /// Unit-modulus gauge phase; gamma = 1 when absent.
  std::optional<ComplexField2D> gamma{};
};

namespace detail {

inline Mat2 gamma_frame(const Mat2& s) {
  const double s3 = s.a.real();
  return (s - sigma3) * cplx(0.0, 1.0 / std::sqrt(2.0 * (1.0 - s3)));
}

inline Mat2 gauge_diag(const FrameChart& c, std::size_t k) {
  const cplx gm = c.gamma ? (*c.gamma)[k] : cplx(1.0);
  return {gm, 0.0, 0.0, std::conj(gm)};
}

/// Direction the field keeps furthest away from, among a fixed deterministic
/// set of candidates.
inline std::array<double, 3> least_visited_direction(const SpinField& s) {
  std::vector<std::array<double, 3>> cand;
  const int k = 96;
  for (int i = 0; i < k; ++i) {
    // Fibonacci sphere.
    const double z = 1.0 - 2.0 * (i + 0.5) / k;
    const double r = std::sqrt(1.0 - z * z), phi = i * 2.399963229728653;
    cand.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  for (int a = 0; a < 3; ++a)
    for (double sg : {1.0, -1.0}) {
      std::array<double, 3> e{0.0, 0.0, 0.0};
      e[a] = sg;
      cand.push_back(e);
    }
  std::array<double, 3> best = cand.front();
  double best_gap = -1.0;
  for (const auto& n : cand) {
    double gap = 2.0;
    for (std::size_t q = 0; q < s.size() && gap > best_gap; ++q) {
      const auto v = s.at(q);
      gap = std::min(gap, 1.0 - (n[0] * v[0] + n[1] * v[1] + n[2] * v[2]));
    }
    if (gap > best_gap) best_gap = gap, best = n;
  }
  return best;
}

}  // namespace detail

/// G = i (2(1 - s3))^{-1/2} (S - sigma3) diag(gamma, conj gamma). When some
/// node has 1 - s3 < eps_pole the field is first conjugated by a fixed
/// rotation taking a direction it avoids to the pole.
inline GaugeFrame frame_from_spin(const SpinField& s, const FrameOptions& opt = {}) {
  double gap = 2.0;
  for (std::size_t k = 0; k < s.size(); ++k) gap = std::min(gap, 1.0 - s[2][k]);
  FrameChart chart;
  chart.gamma = opt.gamma;
  if (gap < opt.eps_pole) {
    if (!opt.rotate_poles)
      throw PoleError("frame_from_spin: s3 reaches the pole; enable rotate_poles or choose another chart");
    const auto n = detail::least_visited_direction(s);
    chart.rotation = su2_pole_rotation(n);
    double gap_rot = 2.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const auto v = s.at(k);
      gap_rot = std::min(gap_rot, 1.0 - (n[0] * v[0] + n[1] * v[1] + n[2] * v[2]));
    }
    if (gap_rot < opt.eps_pole) throw PoleError("frame_from_spin: the field covers the sphere; no pole-free chart");
  }
  GaugeFrame out(s.grid());
  out.chart = chart;
  const Mat2 r = chart.rotation, rinv = r.dagger();
  parallel_for(s.size(), [&](std::size_t k) {
    const Mat2 sp = rinv * spin_matrix(s.at(k)) * r;
    out.g.set(k, r * detail::gamma_frame(sp) * detail::gauge_diag(chart, k));
  });
  return out;
}

/// S = -G sigma3 G^{-1}.
inline SpinField spin_from_frame(const GaugeFrame& f) {
  SpinField out(f.grid());
  parallel_for(f.g.size(), [&](std::size_t k) {
    const Mat2 g = f.g.at(k);
    out.set(k, spin_vector((g * sigma3 * g.dagger()) * -1.0));
  });
  return out;
}

/// Spectral derivative of every entry.
inline MatrixField matrix_derivative(const MatrixField& g, Derivative which) {
  MatrixField out(g.grid());
  for (int e = 0; e < 4; ++e) out.entry(e) = spectral_derivative(g.entry(e), which);
  return out;
}

/// Fields read off a spin-derived frame.
struct FrameFields {
  SchrodingerState state;
  /// max |(G^{-1}G_t)_12 - (i q_zbar + 2i pbar q)|, the t-row consistency check.
  double t_row_defect = 0.0;
  /// max |Re (G^{-1}G_t)_11|, zero for an exact su(2) element.
  double t_row_trace_defect = 0.0;
};

/// U = -G^{-1} G_z = [[p, q], [r, -p]]; u = i (G^{-1} G_t)_11 with G_t from
/// the chart formula and s_t = s x laplacian(s). Fails when either
/// restriction residual (L2) exceeds restriction_tolerance.
inline FrameFields fields_from_frame(const GaugeFrame& f, const SpinField& s, double restriction_tolerance = 1e-6) {
  if (!f.chart) throw InvalidInput("fields_from_frame: frame has no spin chart, so G_t is unavailable");
  const auto& g = f.grid();
  const MatrixField gz = matrix_derivative(f.g, Derivative::dz);
  const TangentField st = ll_rhs(s);
  const FrameChart& chart = *f.chart;
  const Mat2 r = chart.rotation, rinv = r.dagger();

  FrameFields out{SchrodingerState(g)};
  out.state.t = f.t;
  RealField2D trace_def(g);
  ComplexField2D g12(g);
  parallel_for(f.g.size(), [&](std::size_t k) {
    const Mat2 gi = f.g.at(k).dagger();
    const Mat2 u = (gi * gz.at(k)) * -1.0;
    out.state.p[k] = u.a;
    out.state.q[k] = u.b;
    out.state.r[k] = u.c;
    const Mat2 sp = rinv * spin_matrix(s.at(k)) * r;
    const auto v = st.at(k);
    const Mat2 spt = rinv * Mat2{cplx(v[2]), cplx(v[0], v[1]), cplx(v[0], -v[1]), cplx(-v[2])} * r;
    const double w = 2.0 * (1.0 - sp.a.real());
    const Mat2 dg = (spt * (1.0 / std::sqrt(w)) + (sp - sigma3) * (spt.a.real() / (w * std::sqrt(w)))) * cplx(0.0, 1.0);
    const Mat2 gt = r * dg * detail::gauge_diag(chart, k);
    const Mat2 a = gi * gt;
    out.state.u[k] = (cplx(0.0, 1.0) * a.a).real();
    trace_def[k] = std::abs(a.a.real());
    g12[k] = a.b;
  });
  const ComplexField2D q_zb = spectral_derivative(out.state.q, Derivative::dzbar);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const cplx expect = cplx(0.0, 1.0) * q_zb[k] + cplx(0.0, 2.0) * std::conj(out.state.p[k]) * out.state.q[k];
    out.t_row_defect = std::max(out.t_row_defect, std::abs(g12[k] - expect));
    out.t_row_trace_defect = std::max(out.t_row_trace_defect, trace_def[k]);
  }
  const auto [r1, r2] = restriction_residual(out.state);
  if (std::max(r1, r2) > restriction_tolerance)
    throw CompatibilityError("fields_from_frame: extracted fields violate the restrictions (gauge extraction failed)");
  return out;
}

struct FrameIntegrationConfig {
  int substeps = 1;
  bool both_orders = true;
  /// Largest tolerated max-node Frobenius gap between the two path orders.
  double compatibility_threshold = std::numeric_limits<double>::infinity();
  /// Frame value at the origin node.
  Mat2 base = Mat2::identity();
};

struct FrameIntegration {
  GaugeFrame frame;  ///< x-then-y path order
  double path_discrepancy = 0.0;
  double max_unitarity_defect = 0.0;
};

namespace detail {

/// Periodic coefficient fields (p, psi, phi) on a staggered ladder of
/// sub-cell shifts along one axis, plus the affine part of p.
class FrameCoefficients {
 public:
  FrameCoefficients(const SchrodingerState& s, int substeps) : m_(substeps), grid_(s.grid()), c_(s.background.p_zbar) {
    ComplexField2D psi(grid_), phi(grid_);
    for (std::size_t k = 0; k < psi.size(); ++k) {
      const cplx rb = std::conj(s.r[k]);
      psi[k] = 0.5 * (s.q[k] - rb);
      phi[k] = cplx(0.0, 0.5) * (s.q[k] + rb);
    }
    base_ = {s.p, psi, phi};
    const double step = grid_.dx() / (2.0 * m_);
    for (int axis = 0; axis < 2; ++axis)
      for (int k = 1; k < 2 * m_; ++k) {
        const double sx = axis == 0 ? k * step : 0.0, sy = axis == 1 ? k * step : 0.0;
        shifted_[axis].push_back({fourier_shift(base_[0], sx, sy), fourier_shift(base_[1], sx, sy),
                                  fourier_shift(base_[2], sx, sy)});
      }
  }

  int substeps() const noexcept { return m_; }

  /// Connection along the axis at node (i, j) shifted by k / (2m) cells.
  Mat2 connection(int axis, int i, int j, int k) const {
    int ii = i, jj = j;
    const std::vector<ComplexField2D>* src = &base_;
    if (k == 2 * m_) (axis == 0 ? ii : jj) += 1;
    else if (k > 0) src = &shifted_[axis][k - 1];
    const std::size_t n = grid_.index(ii, jj);
    const double frac = (k == 2 * m_) ? 0.0 : k / (2.0 * m_);
    const double x = grid_.coord(ii) + (axis == 0 ? frac * grid_.dx() : 0.0);
    const double y = grid_.coord(jj) + (axis == 1 ? frac * grid_.dx() : 0.0);
    const cplx p = (*src)[0][n] + c_ * zbar_at(x, y);
    const cplx w = (*src)[axis == 0 ? 1 : 2][n];
    const double d = axis == 0 ? p.imag() : p.real();
    return {cplx(0.0, d), w, -std::conj(w), cplx(0.0, -d)};
  }

 private:
  int m_;
  PeriodicGrid2D grid_;
  cplx c_;
  std::vector<ComplexField2D> base_;
  std::array<std::vector<std::vector<ComplexField2D>>, 2> shifted_;
};

/// One cell of G_axis = -G A_axis from node (i, j) towards +axis (dir = +1)
/// or -axis (dir = -1); RK4 with SU(2) projection after every substep.
inline Mat2 frame_cell_step(const FrameCoefficients& c, const PeriodicGrid2D& grid, int axis, int i, int j, int dir,
                            Mat2 g) {
  const int m = c.substeps();
  const double h = dir * grid.dx() / m;
  int bi = i, bj = j;
  if (dir < 0) (axis == 0 ? bi : bj) -= 1;
  for (int sub = 0; sub < m; ++sub) {
    const int k0 = dir > 0 ? 2 * sub : 2 * m - 2 * sub;
    const Mat2 a0 = c.connection(axis, bi, bj, k0);
    const Mat2 a1 = c.connection(axis, bi, bj, k0 + dir);
    const Mat2 a2 = c.connection(axis, bi, bj, k0 + 2 * dir);
    const Mat2 k1 = (g * a0) * -1.0;
    const Mat2 k2 = ((g + k1 * (h / 2)) * a1) * -1.0;
    const Mat2 k3 = ((g + k2 * (h / 2)) * a1) * -1.0;
    const Mat2 k4 = ((g + k3 * h) * a2) * -1.0;
    g = project_su2(g + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0));
  }
  return g;
}

/// Integrates from the origin node along `first`, then along the other axis
/// for every line independently.
inline MatrixField integrate_frame(const FrameCoefficients& c, const PeriodicGrid2D& grid, int first, const Mat2& base) {
  const int n = grid.n(), o = grid.origin_index();
  MatrixField out(grid);
  auto idx = [&](int axis, int along, int across) { return axis == 0 ? grid.index(along, across) : grid.index(across, along); };
  auto sweep = [&](int axis, int across) {
    // The origin node of this line must already be set.
    for (int a = o; a + 1 < n; ++a) {
      const int i = axis == 0 ? a : across, j = axis == 0 ? across : a;
      out.set(idx(axis, a + 1, across), frame_cell_step(c, grid, axis, i, j, +1, out.at(idx(axis, a, across))));
    }
    for (int a = o; a > 0; --a) {
      const int i = axis == 0 ? a : across, j = axis == 0 ? across : a;
      out.set(idx(axis, a - 1, across), frame_cell_step(c, grid, axis, i, j, -1, out.at(idx(axis, a, across))));
    }
  };
  out.set(grid.index(o, o), base);
  sweep(first, o);
  const int second = 1 - first;
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t line) { sweep(second, static_cast<int>(line)); });
  return out;
}

}  // namespace detail

/// Frame from the spatial rows G_x = -G [[i Im p, psi], [-conj psi, -i Im p]],
/// G_y = -G [[i Re p, phi], [-conj phi, -i Re p]], psi = (q - conj r)/2,
/// phi = i(q + conj r)/2, integrated from the origin node. Half-node
/// coefficients come from trigonometric interpolation.
inline FrameIntegration frame_from_fields(const SchrodingerState& s, const FrameIntegrationConfig& cfg = {}) {
  if (cfg.substeps < 1) throw InvalidInput("frame_from_fields: substeps >= 1");
  const auto& grid = s.grid();
  const detail::FrameCoefficients coef(s, cfg.substeps);
  FrameIntegration out{GaugeFrame(grid)};
  out.frame.t = s.t;
  out.frame.g = detail::integrate_frame(coef, grid, 0, cfg.base);
  if (cfg.both_orders) {
    const MatrixField other = detail::integrate_frame(coef, grid, 1, cfg.base);
    for (std::size_t k = 0; k < other.size(); ++k)
      out.path_discrepancy = std::max(out.path_discrepancy, (other.at(k) - out.frame.g.at(k)).frobenius());
    if (out.path_discrepancy > cfg.compatibility_threshold)
      throw CompatibilityError("frame_from_fields: x- and y-first path orders disagree beyond threshold");
  }
  out.max_unitarity_defect = out.frame.max_unitarity_defect();
  return out;
}

/// Four complex entry fields in the field snapshot layout.
inline Snapshot frame_snapshot(const GaugeFrame& f) {
  Snapshot snap{f.t, {}};
  for (int e = 0; e < 4; ++e) snap.fields.push_back(f.g.entry(e));
  return snap;
}

inline GaugeFrame frame_from_snapshot(const Snapshot& snap) {
  if (snap.fields.size() != 4) throw InvalidInput("frame_from_snapshot: expected 4 fields");
  GaugeFrame f(snap.fields.front().grid());
  f.t = snap.t;
  for (int e = 0; e < 4; ++e) f.g.entry(e) = snap.fields[e];
  return f;
}

}  // namespace gaugelab
