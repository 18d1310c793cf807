#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "gaugelab/core/field.hpp"
#include "gaugelab/core/grid.hpp"

namespace gaugelab {

/// Complex profile Q(rho) on a staggered radial grid. Q is extended oddly
/// through rho = 0 (vorticity-one regularity, Q ~ rho) and by zero beyond
/// rho_max.
class RadialProfile {
 public:
  explicit RadialProfile(const RadialGrid& grid) : grid_(grid), q_(grid.size(), cplx{}) {}
  RadialProfile(const RadialGrid& grid, std::vector<cplx> q) : grid_(grid), q_(std::move(q)) {
    if (static_cast<int>(q_.size()) != grid_.size()) throw InvalidInput("RadialProfile: size mismatch");
  }

  template <class Fn>
  static RadialProfile sample(const RadialGrid& grid, Fn&& fn) {
    RadialProfile p(grid);
    for (int j = 0; j < grid.size(); ++j) p.q_[j] = fn(grid.rho(j));
    return p;
  }

  const RadialGrid& grid() const noexcept { return grid_; }
  int size() const noexcept { return grid_.size(); }
  cplx& operator[](int j) noexcept { return q_[j]; }
  const cplx& operator[](int j) const noexcept { return q_[j]; }
  std::vector<cplx>& values() noexcept { return q_; }
  const std::vector<cplx>& values() const noexcept { return q_; }

  /// Value at any integer index using the parity and zero extensions.
  cplx extended(int j) const noexcept {
    if (j < 0) return -q_[-j - 1];
    if (j >= size()) return {};
    return q_[j];
  }

  /// |Q(rho_0)| / rho_0, the finite constant of the regularity proxy.
  double regularity_constant() const { return std::abs(q_[0]) / grid_.rho(0); }

 private:
  RadialGrid grid_;
  std::vector<cplx> q_;
};

/// Radial mass 2 pi sum |Q_j|^2 rho_j h, i.e. ||Q e^{-i theta}||^2_{L^2(R^2)}.
inline double radial_mass(const RadialProfile& q) {
  double s = 0.0;
  for (int j = 0; j < q.size(); ++j) s += std::norm(q[j]) * q.grid().rho(j);
  return 2.0 * std::numbers::pi * s * q.grid().h();
}

enum class TailRule {
  trapezoid,    ///< cumulative trapezoid; monotone for any data
  fourth_order  ///< cell rule h/24 (-g_{j-1} + 13 g_j + 13 g_{j+1} - g_{j+2})
};

/// I(rho_j) = int_{rho_j}^infty |Q|^2 / tau dtau, accumulated inward from the
/// outer node where I = 0.
inline std::vector<double> nonlocal_tail(const RadialProfile& q, TailRule rule = TailRule::trapezoid) {
  const int m = q.size();
  const double h = q.grid().h();
  auto g = [&](int j) {
    if (j >= m) return 0.0;
    if (j < 0) return -std::norm(q[-j - 1]) / q.grid().rho(-j - 1);  // odd in rho
    return std::norm(q[j]) / q.grid().rho(j);
  };
  std::vector<double> tail(m, 0.0);
  for (int j = m - 2; j >= 0; --j) {
    const double cell = (rule == TailRule::trapezoid)
                            ? 0.5 * h * (g(j) + g(j + 1))
                            : h / 24.0 * (-g(j - 1) + 13.0 * g(j) + 13.0 * g(j + 1) - g(j + 2));
    tail[j] = tail[j + 1] + cell;
  }
  return tail;
}

/// Finite-difference first and second derivatives on the staggered grid
/// using the parity extension. order is 4 or 6.
struct RadialDerivatives {
  std::vector<cplx> d1;
  std::vector<cplx> d2;
};

inline RadialDerivatives radial_derivatives(const RadialProfile& q, int order = 4) {
  const int m = q.size();
  const double h = q.grid().h();
  RadialDerivatives out{std::vector<cplx>(m), std::vector<cplx>(m)};
  auto e = [&](int j) { return q.extended(j); };
  for (int j = 0; j < m; ++j) {
    if (order == 4) {
      out.d1[j] = (e(j - 2) - 8.0 * e(j - 1) + 8.0 * e(j + 1) - e(j + 2)) / (12.0 * h);
      out.d2[j] = (-e(j - 2) + 16.0 * e(j - 1) - 30.0 * e(j) + 16.0 * e(j + 1) - e(j + 2)) / (12.0 * h * h);
    } else if (order == 6) {
      out.d1[j] = (-e(j - 3) + 9.0 * e(j - 2) - 45.0 * e(j - 1) + 45.0 * e(j + 1) - 9.0 * e(j + 2) + e(j + 3)) /
                  (60.0 * h);
      out.d2[j] = (2.0 * e(j - 3) - 27.0 * e(j - 2) + 270.0 * e(j - 1) - 490.0 * e(j) + 270.0 * e(j + 1) -
                   27.0 * e(j + 2) + 2.0 * e(j + 3)) /
                  (180.0 * h * h);
    } else {
      throw InvalidInput("radial_derivatives: order must be 4 or 6");
    }
  }
  return out;
}

/// Vorticity-one radial Laplacian Q'' + Q'/rho - Q/rho^2, evaluated as
/// rho P'' + 3 P' with the even function P = Q / rho so the stencil order
/// holds uniformly up to the first node.
inline std::vector<cplx> radial_laplacian(const RadialProfile& q, int order = 4) {
  std::vector<cplx> pv(q.size());
  for (int j = 0; j < q.size(); ++j) pv[j] = q[j] / q.grid().rho(j);
  RadialProfile p(q.grid(), pv);
  const int m = q.size();
  const double h = q.grid().h();
  auto e = [&](int j) { return j < 0 ? p[-j - 1] : p.extended(j); };  // even extension
  std::vector<cplx> out(m);
  for (int j = 0; j < m; ++j) {
    cplx d1, d2;
    if (order == 4) {
      d1 = (e(j - 2) - 8.0 * e(j - 1) + 8.0 * e(j + 1) - e(j + 2)) / (12.0 * h);
      d2 = (-e(j - 2) + 16.0 * e(j - 1) - 30.0 * e(j) + 16.0 * e(j + 1) - e(j + 2)) / (12.0 * h * h);
    } else if (order == 6) {
      d1 = (-e(j - 3) + 9.0 * e(j - 2) - 45.0 * e(j - 1) + 45.0 * e(j + 1) - 9.0 * e(j + 2) + e(j + 3)) / (60.0 * h);
      d2 = (2.0 * e(j - 3) - 27.0 * e(j - 2) + 270.0 * e(j - 1) - 490.0 * e(j) + 270.0 * e(j + 1) -
            27.0 * e(j + 2) + 2.0 * e(j + 3)) /
           (180.0 * h * h);
    } else {
      throw InvalidInput("radial_laplacian: order must be 4 or 6");
    }
    out[j] = q.grid().rho(j) * d2 + 3.0 * d1;
  }
  return out;
}

/// ||grad^2 Q e^{-i theta}||^2_{L^2(R^2)} = 2 pi int |Delta_1 Q|^2 rho drho.
inline double radial_h2_seminorm_sq(const RadialProfile& q) {
  const auto lap = radial_laplacian(q);
  double s = 0.0;
  for (int j = 0; j < q.size(); ++j) s += std::norm(lap[j]) * q.grid().rho(j);
  return 2.0 * std::numbers::pi * s * q.grid().h();
}

/// sum_j |Q_j|^sigma rho_j h (2 pi), the discrete L^sigma(R^2) integral.
inline double radial_lp_integral(const std::vector<cplx>& v, const RadialGrid& grid, double sigma) {
  double s = 0.0;
  for (int j = 0; j < grid.size(); ++j) s += std::pow(std::abs(v[j]), sigma) * grid.rho(j);
  return 2.0 * std::numbers::pi * s * grid.h();
}

/// Lagrange interpolation of nodal radial data at arbitrary rho >= 0 with
/// `points` stencil nodes (2 = linear, 4 = cubic, 6 = quintic). parity = -1
/// extends oddly through rho = 0, +1 evenly. Values beyond the outer node
/// are zero.
template <class T>
class RadialInterpolator {
 public:
  RadialInterpolator(const RadialGrid& grid, const std::vector<T>& values, int points, int parity = -1)
      : grid_(grid), v_(values), points_(points), parity_(parity) {
    if (points < 2 || points > 8 || points % 2 != 0)
      throw InvalidInput("RadialInterpolator: stencil size must be even in [2,8]");
    if (static_cast<int>(values.size()) != grid.size()) throw InvalidInput("RadialInterpolator: size mismatch");
  }

  T operator()(double rho) const {
    if (rho >= grid_.rho_max()) return T{};
    const double s = rho / grid_.h() - 0.5;  // fractional node index
    const int base = static_cast<int>(std::floor(s)) - (points_ / 2 - 1);
    T acc{};
    for (int a = 0; a < points_; ++a) {
      double w = 1.0;
      for (int b = 0; b < points_; ++b)
        if (b != a) w *= (s - (base + b)) / static_cast<double>(a - b);
      acc += w * at(base + a);
    }
    return acc;
  }

 private:
  T at(int j) const noexcept {
    if (j < 0) return static_cast<double>(parity_) * v_[-j - 1];
    if (j >= grid_.size()) return T{};
    return v_[j];
  }

  RadialGrid grid_;
  const std::vector<T>& v_;
  int points_;
  int parity_;
};

inline RadialInterpolator<cplx> interpolator(const RadialProfile& q, int points) {
  return RadialInterpolator<cplx>(q.grid(), q.values(), points, -1);
}

/// Q(rho) e^{-i theta} on the Cartesian grid, linear interpolation in rho,
/// origin node set to zero.
inline ComplexField2D lift_radial(const RadialProfile& q, const PeriodicGrid2D& grid, int points = 2) {
  if (q.grid().rho_max() < std::sqrt(2.0) * grid.half_length())
    throw DomainCoverageError("lift_radial: rho_max must be at least sqrt(2) L");
  const auto interp = interpolator(q, points);
  ComplexField2D out(grid);
  const int n = grid.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = grid.coord(i), y = grid.coord(j);
      const double rho = std::hypot(x, y);
      if (rho == 0.0) continue;
      out(i, j) = interp(rho) * cplx(x / rho, -y / rho);
    }
  return out;
}

/// Real radial function f(rho) (e.g. u or the tail) on the Cartesian grid,
/// even extension through the origin.
inline RealField2D lift_radial_even(const std::vector<double>& f, const RadialGrid& rgrid, const PeriodicGrid2D& grid,
                                    int points = 2) {
  const RadialInterpolator<double> interp(rgrid, f, points, +1);
  RealField2D out(grid);
  const int n = grid.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = interp(std::hypot(grid.coord(i), grid.coord(j)));
  return out;
}

}  // namespace gaugelab
