#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gaugelab/analytic/ansatz.hpp"
#include "gaugelab/core/parallel.hpp"

namespace gaugelab {

/// (a, b; c, d) in SL(2, R).
struct Sl2Params {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  double det() const noexcept { return a * d - b * c; }
  void validate() const {
    if (std::abs(det() - 1.0) > 1e-12) throw InvalidInput("Sl2Params: ad - bc must equal 1 to 1e-12");
  }
  double alpha(double t) const noexcept { return a + b * t; }
  double big_t(double t) const noexcept { return (c + d * t) / alpha(t); }
  Sl2Params inverse() const noexcept { return {d, -b, -c, a}; }
};

/// Pointwise values of a radial profile family f(R, T) and its derivatives.
struct RadialSample {
  cplx f{}, f_r{}, f_rr{}, f_t{};
  double tail = 0.0;  ///< int_R^inf |f|^2 / tau dtau
};

/// A stored radial run seen as a function of (R, T): Lagrange in R, linear
/// in T between snapshots. Set conjugate_values for a run made in the
/// qrho1 convention.
class RadialHistory {
 public:
  RadialHistory(const RadialRunResult& run, bool conjugate_values, int points = 6, int fd_order = 4,
                TailRule rule = TailRule::fourth_order)
      : points_(points) {
    if (run.snapshots.empty()) throw InvalidInput("RadialHistory: empty run");
    for (const auto& snap : run.snapshots) {
      Slice s{snap.t, snap.q.grid(), {}, {}, {}, {}, {}};
      const RadialProfile q = conjugate_values ? conjugate(snap.q) : snap.q;
      const RadialProfile k = conjugate_values ? conjugate(snap.rate) : snap.rate;
      const auto der = radial_derivatives(q, fd_order);
      s.f = q.values();
      s.f_t = k.values();
      s.f_r = der.d1;
      s.f_rr = der.d2;
      s.tail = nonlocal_tail(q, rule);
      slices_.push_back(std::move(s));
    }
    for (std::size_t i = 1; i < slices_.size(); ++i)
      if (!(slices_[i].t > slices_[i - 1].t)) throw InvalidInput("RadialHistory: snapshot times must increase");
  }

  double t_min() const noexcept { return slices_.front().t; }
  double t_max() const noexcept { return slices_.back().t; }
  double rho_max() const noexcept { return slices_.front().grid.rho_max(); }

  /// Locates T; throws DomainCoverageError outside the stored range.
  std::pair<std::size_t, double> locate(double t) const {
    const double tol = 1e-12 * std::max(1.0, std::abs(t_max()));
    if (t < t_min() - tol || t > t_max() + tol)
      throw DomainCoverageError("RadialHistory: T outside the stored run (no extrapolation)");
    if (slices_.size() == 1) return {0, 0.0};
    auto it = std::upper_bound(slices_.begin(), slices_.end(), t, [](double v, const Slice& s) { return v < s.t; });
    std::size_t i = it == slices_.begin() ? 0 : static_cast<std::size_t>(it - slices_.begin()) - 1;
    i = std::min(i, slices_.size() - 2);
    for (std::size_t j : {i, i + 1})
      if (std::abs(slices_[j].t - t) <= tol) return {j, 0.0};
    return {i, (t - slices_[i].t) / (slices_[i + 1].t - slices_[i].t)};
  }

  RadialSample at(double r, std::pair<std::size_t, double> where) const {
    const auto [i, w] = where;
    RadialSample out = sample(slices_[i], r);
    if (w == 0.0) return out;
    const RadialSample hi = sample(slices_[i + 1], r);
    out.f = (1.0 - w) * out.f + w * hi.f;
    out.f_r = (1.0 - w) * out.f_r + w * hi.f_r;
    out.f_rr = (1.0 - w) * out.f_rr + w * hi.f_rr;
    out.f_t = (1.0 - w) * out.f_t + w * hi.f_t;
    out.tail = (1.0 - w) * out.tail + w * hi.tail;
    return out;
  }

  RadialSample at(double r, double t) const { return at(r, locate(t)); }

  /// f(., T) on the stored radial grid.
  RadialProfile profile(double t) const {
    const auto [i, w] = locate(t);
    RadialProfile out(slices_[i].grid);
    for (int j = 0; j < out.size(); ++j)
      out[j] = w == 0.0 ? slices_[i].f[j] : (1.0 - w) * slices_[i].f[j] + w * slices_[i + 1].f[j];
    return out;
  }

  /// True when t coincides with a stored snapshot.
  bool is_node(double t) const { return locate(t).second == 0.0; }

 private:
  struct Slice {
    double t;
    RadialGrid grid;
    std::vector<cplx> f, f_t, f_r, f_rr;
    std::vector<double> tail;
  };

  RadialSample sample(const Slice& s, double r) const {
    // f and f'' are odd through the origin, f' and the tail even.
    RadialSample out;
    out.f = RadialInterpolator<cplx>(s.grid, s.f, points_, -1)(r);
    out.f_t = RadialInterpolator<cplx>(s.grid, s.f_t, points_, -1)(r);
    out.f_r = RadialInterpolator<cplx>(s.grid, s.f_r, points_, +1)(r);
    out.f_rr = RadialInterpolator<cplx>(s.grid, s.f_rr, points_, -1)(r);
    out.tail = RadialInterpolator<double>(s.grid, s.tail, points_, +1)(r);
    return out;
  }

  std::vector<Slice> slices_;
  int points_;
};

/// Two-parameter family generated by an SL(2, R) element from a drift run
/// with the same (b, d):
///   alpha = a + bt, T = (c + dt)/alpha, R = rho/alpha, E = exp(-i b rho^2 / (4 alpha)),
///   q = E f(R, T) e^{-i theta} / alpha,  r = -conj(E f) e^{-i theta} / alpha,
///   p = -i b zbar / (2 alpha),  u = -(|f|^2 - 2 I(R, T)) / alpha^2 + b^2 z zbar / (2 alpha^2).
class ConformalFamily {
 public:
  ConformalFamily(RadialHistory history, Sl2Params sl2, PeriodicGrid2D grid)
      : h_(std::move(history)), sl2_(sl2), grid_(grid) {
    sl2_.validate();
  }

  const Sl2Params& params() const noexcept { return sl2_; }
  const RadialHistory& history() const noexcept { return h_; }
  const PeriodicGrid2D& grid() const noexcept { return grid_; }

  double alpha(double t) const {
    const double a = sl2_.alpha(t);
    if (!(a > 0.0)) throw HorizonError("ConformalFamily: a + bt must stay positive");
    return a;
  }

  AffineBackground background(double t) const {
    const double al = alpha(t), b = sl2_.b;
    return {cplx(0.0, -b / (2.0 * al)), b * b / (2.0 * al * al), cplx(0.0, b * b / (2.0 * al * al))};
  }

  SchrodingerState state(double t) const {
    const double al = alpha(t);
    const auto where = h_.locate(sl2_.big_t(t));
    check_coverage(al);
    SchrodingerState s(grid_);
    s.t = t;
    s.background = background(t);
    const int n = grid_.n();
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
      for (int j = 0; j < n; ++j) {
        const double x = grid_.coord(static_cast<int>(i)), y = grid_.coord(j);
        const double rho = std::hypot(x, y);
        const RadialSample f = h_.at(rho / al, where);
        const cplx e = chirp(rho, al), ph = detail::unit_phase_minus(x, y);
        s.q(static_cast<int>(i), j) = e * f.f * ph / al;
        s.r(static_cast<int>(i), j) = -std::conj(e * f.f) * ph / al;
        s.u(static_cast<int>(i), j) = -(std::norm(f.f) - 2.0 * f.tail) / (al * al);
      }
    });
    return s;
  }

  /// Exact-in-time rates by the chain rule: R_t = -bR/alpha, T_t = 1/alpha^2,
  /// f_T from the stored rate.
  SchrodingerRates rates(double t) const {
    const double al = alpha(t), b = sl2_.b;
    const auto where = h_.locate(sl2_.big_t(t));
    check_coverage(al);
    SchrodingerRates k(grid_);
    k.p_zbar_rate = background(t).p_zbar_rate;
    const int n = grid_.n();
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
      for (int j = 0; j < n; ++j) {
        const double x = grid_.coord(static_cast<int>(i)), y = grid_.coord(j);
        const double rho = std::hypot(x, y), big_r = rho / al;
        const RadialSample f = h_.at(big_r, where);
        const cplx e = chirp(rho, al), ph = detail::unit_phase_minus(x, y);
        const cplx log_rate(-b / al, b * b * rho * rho / (4.0 * al * al));  // d/dt log(E / alpha)
        const cplx df = f.f_r * (-b * big_r / al) + f.f_t / (al * al);
        k.q_t(static_cast<int>(i), j) = e * ph / al * (log_rate * f.f + df);
        k.r_t(static_cast<int>(i), j) = -std::conj(e / al) * ph * (std::conj(log_rate) * std::conj(f.f) + std::conj(df));
      }
    });
    return k;
  }

  /// Radial values at (rho, t) needed by the closed-form block expressions.
  RadialSample radial(double rho, double t) const { return h_.at(rho / alpha(t), sl2_.big_t(t)); }

  cplx chirp(double rho, double al) const { return std::polar(1.0, -sl2_.b * rho * rho / (4.0 * al)); }

 private:
  void check_coverage(double al) const {
    if (std::sqrt(2.0) * grid_.half_length() / al > h_.rho_max())
      throw DomainCoverageError("ConformalFamily: rescaled box exceeds the radial domain");
  }

  RadialHistory h_;
  Sl2Params sl2_;
  PeriodicGrid2D grid_;
};

/// Conformal image of a radial solution Q(rho, t) of the drift-free equation:
/// (E / alpha) Q(rho / alpha, T).
template <class Fn>
auto conformal_radial(Fn&& q, const Sl2Params& g) {
  return [q = std::forward<Fn>(q), g](double rho, double t) -> cplx {
    const double al = g.alpha(t);
    return std::polar(1.0 / al, -g.b * rho * rho / (4.0 * al)) * q(rho / al, g.big_t(t));
  };
}

}  // namespace gaugelab
