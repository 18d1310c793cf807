#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "gaugelab/core/field.hpp"

namespace gaugelab {

/// 2x2 complex matrix, row-major: [[a, b], [c, d]].
struct Mat2 {
  cplx a{}, b{}, c{}, d{};

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  Mat2& operator+=(const Mat2& o) {
    a += o.a, b += o.b, c += o.c, d += o.d;
    return *this;
  }
  Mat2& operator-=(const Mat2& o) {
    a -= o.a, b -= o.b, c -= o.c, d -= o.d;
    return *this;
  }
  Mat2& operator*=(cplx s) {
    a *= s, b *= s, c *= s, d *= s;
    return *this;
  }
  friend Mat2 operator+(Mat2 x, const Mat2& y) { return x += y; }
  friend Mat2 operator-(Mat2 x, const Mat2& y) { return x -= y; }
  friend Mat2 operator*(Mat2 x, cplx s) { return x *= s; }
  friend Mat2 operator*(cplx s, Mat2 x) { return x *= s; }
  friend Mat2 operator*(Mat2 x, double s) { return x *= s; }
  friend Mat2 operator*(double s, Mat2 x) { return x *= s; }
  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }

  cplx det() const { return a * d - b * c; }
  cplx trace() const { return a + d; }
  Mat2 dagger() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }
  Mat2 inverse() const {
    const cplx dt = det();
    return {d / dt, -b / dt, -c / dt, a / dt};
  }
  double frobenius() const { return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d)); }
};

inline constexpr Mat2 sigma1{0.0, 1.0, 1.0, 0.0};
inline const Mat2 sigma2{0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0};
inline constexpr Mat2 sigma3{1.0, 0.0, 0.0, -1.0};

/// ||G^dagger G - I||_F.
inline double unitarity_defect(const Mat2& g) { return (g.dagger() * g - Mat2::identity()).frobenius(); }

/// Nearest unitary (polar factor) followed by removal of the determinant
/// phase, giving the closest SU(2) element for matrices near SU(2).
inline Mat2 project_su2(const Mat2& g) {
  // For 2x2 positive A: sqrt(A) = (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A)).
  const Mat2 a = g.dagger() * g;
  const double sdet = std::sqrt(std::max(a.det().real(), 0.0));
  const double norm = std::sqrt(a.trace().real() + 2.0 * sdet);
  if (!(norm > 0.0)) throw InstabilityError("project_su2: singular matrix");
  const Mat2 root = (a + Mat2::identity() * sdet) * (1.0 / norm);
  Mat2 u = g * root.inverse();
  u *= 1.0 / std::sqrt(u.det());
  return u;
}

/// exp(i phi n.sigma) for a unit axis n.
inline Mat2 su2_rotation(const std::array<double, 3>& n, double phi) {
  const cplx is(0.0, std::sin(phi));
  const double c = std::cos(phi);
  return Mat2::identity() * c + (sigma1 * n[0] + sigma2 * n[1] + sigma3 * n[2]) * is;
}

/// SU(2) element R with R sigma3 R^{-1} = n.sigma for unit n.
inline Mat2 su2_pole_rotation(const std::array<double, 3>& n) {
  // Rotate the pole e3 onto n about axis e3 x n.
  const double ax = -n[1], ay = n[0];
  const double s = std::hypot(ax, ay);
  const double theta = std::atan2(s, n[2]);
  if (s < 1e-300) return n[2] > 0 ? Mat2::identity() : su2_rotation({1.0, 0.0, 0.0}, std::numbers::pi / 2);
  // exp(-i theta/2 a.sigma) rotates vectors by theta about a.
  return su2_rotation({ax / s, ay / s, 0.0}, -theta / 2);
}

/// Matrix field: one Mat2 per node, stored as four complex entry fields.
class MatrixField {
 public:
  explicit MatrixField(const PeriodicGrid2D& grid)
      : e_{ComplexField2D(grid), ComplexField2D(grid), ComplexField2D(grid), ComplexField2D(grid)} {}

  const PeriodicGrid2D& grid() const noexcept { return e_[0].grid(); }
  std::size_t size() const noexcept { return e_[0].size(); }

  Mat2 at(std::size_t k) const noexcept { return {e_[0][k], e_[1][k], e_[2][k], e_[3][k]}; }
  void set(std::size_t k, const Mat2& m) noexcept {
    e_[0][k] = m.a, e_[1][k] = m.b, e_[2][k] = m.c, e_[3][k] = m.d;
  }
  ComplexField2D& entry(int e) noexcept { return e_[e]; }
  const ComplexField2D& entry(int e) const noexcept { return e_[e]; }

 private:
  std::array<ComplexField2D, 4> e_;
};

}  // namespace gaugelab
