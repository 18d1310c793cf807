#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "gaugelab/core/errors.hpp"
#include "gaugelab/core/grid.hpp"

namespace gaugelab {

using cplx = std::complex<double>;

inline bool is_finite(double v) noexcept { return std::isfinite(v); }
inline bool is_finite(const cplx& v) noexcept { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

/// Scalar field sampled on the nodes of a PeriodicGrid2D.
template <class T>
class GridField {
 public:
  using value_type = T;

  explicit GridField(const PeriodicGrid2D& grid, T fill = T{}) : grid_(grid), values_(grid.size(), fill) {}
  GridField(const PeriodicGrid2D& grid, std::vector<T> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw InvalidInput("GridField: value count does not match grid");
  }

  /// Samples fn(x, y) at every node.
  template <class Fn>
  static GridField sample(const PeriodicGrid2D& grid, Fn&& fn) {
    GridField f(grid);
    const int n = grid.n();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) f.values_[grid.index(i, j)] = fn(grid.coord(i), grid.coord(j));
    return f;
  }

  const PeriodicGrid2D& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  T& operator[](std::size_t k) noexcept { return values_[k]; }
  const T& operator[](std::size_t k) const noexcept { return values_[k]; }
  T& operator()(int i, int j) noexcept { return values_[grid_.index(i, j)]; }
  const T& operator()(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }
  T* data() noexcept { return values_.data(); }
  const T* data() const noexcept { return values_.data(); }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](const T& v) { return is_finite(v); });
  }
  void require_finite(const char* where) const {
    if (!all_finite()) throw InvalidInput(std::string(where) + ": non-finite field values");
  }

  GridField& operator+=(const GridField& o) {
    same_grid(o);
    for (std::size_t k = 0; k < size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  GridField& operator-=(const GridField& o) {
    same_grid(o);
    for (std::size_t k = 0; k < size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  template <class S>
  GridField& operator*=(const S& s) {
    for (auto& v : values_) v *= s;
    return *this;
  }

  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  template <class S>
  friend GridField operator*(GridField a, const S& s)
    requires std::is_convertible_v<S, T>
  {
    return a *= s;
  }
  template <class S>
  friend GridField operator*(const S& s, GridField a)
    requires std::is_convertible_v<S, T>
  {
    return a *= s;
  }

 private:
  void same_grid(const GridField& o) const {
    if (!(grid_ == o.grid_)) throw InvalidInput("GridField: grid mismatch");
  }

  PeriodicGrid2D grid_;
  std::vector<T> values_;
};

using ComplexField2D = GridField<cplx>;
using RealField2D = GridField<double>;

/// Pointwise map of one or two fields.
template <class Fn, class T>
auto map_field(const GridField<T>& a, Fn&& fn) {
  using R = decltype(fn(a[0]));
  GridField<R> out(a.grid());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = fn(a[k]);
  return out;
}

template <class Fn, class T, class U>
auto map_field(const GridField<T>& a, const GridField<U>& b, Fn&& fn) {
  using R = decltype(fn(a[0], b[0]));
  if (!(a.grid() == b.grid())) throw InvalidInput("map_field: grid mismatch");
  GridField<R> out(a.grid());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = fn(a[k], b[k]);
  return out;
}

inline ComplexField2D to_complex(const RealField2D& f) {
  return map_field(f, [](double v) { return cplx(v, 0.0); });
}
inline RealField2D real_part(const ComplexField2D& f) {
  return map_field(f, [](const cplx& v) { return v.real(); });
}
inline RealField2D imag_part(const ComplexField2D& f) {
  return map_field(f, [](const cplx& v) { return v.imag(); });
}
inline ComplexField2D conj(const ComplexField2D& f) {
  return map_field(f, [](const cplx& v) { return std::conj(v); });
}

template <class T>
double max_abs(const GridField<T>& f) {
  double m = 0.0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

/// Discrete L2 norm (sum |f|^2 dx^2)^{1/2}.
template <class T>
double l2_norm(const GridField<T>& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  const double dx = f.grid().dx();
  return std::sqrt(s * dx * dx);
}

template <class T>
double integrate(const GridField<T>& f)
  requires std::is_same_v<T, double>
{
  double s = 0.0;
  for (double v : f.values()) s += v;
  const double dx = f.grid().dx();
  return s * dx * dx;
}

/// Nodes on the periodic seam (i = 0 or j = 0), i.e. the box boundary.
template <class T>
T boundary_mean(const GridField<T>& f) {
  const int n = f.grid().n();
  T s{};
  for (int k = 0; k < n; ++k) s += f(0, k) + (k > 0 ? f(k, 0) : T{});
  return s / static_cast<double>(2 * n - 1);
}

/// max | f - boundary_mean(f) | over the seam.
template <class T>
double boundary_variation(const GridField<T>& f) {
  const int n = f.grid().n();
  const T m = boundary_mean(f);
  double v = 0.0;
  for (int k = 0; k < n; ++k) v = std::max({v, std::abs(f(0, k) - m), std::abs(f(k, 0) - m)});
  return v;
}

/// Decaying-data contract: every component is constant to `tol` on the box
/// boundary.
template <class T>
void require_decayed(const GridField<T>& f, const char* where, double tol = 1e-10) {
  if (boundary_variation(f) > tol)
    throw InvalidInput(std::string(where) + ": field not constant on the box boundary (data must decay)");
}

struct TaperAxes {
  bool x = true;
  bool y = true;
};

/// Smooth window equal to 1 in the interior and decaying like
/// erfc((|x| - (L - margin)) / width) / 2 toward the box edge on each
/// selected axis.
inline RealField2D boundary_window(const PeriodicGrid2D& g, double margin, double width, TaperAxes axes = {}) {
  const double edge = g.half_length() - margin;
  auto w1 = [&](double x) { return 0.5 * std::erfc((std::abs(x) - edge) / width); };
  return RealField2D::sample(g, [&](double x, double y) { return (axes.x ? w1(x) : 1.0) * (axes.y ? w1(y) : 1.0); });
}

/// Three real components per node. The tag separates unit spin fields from
/// tangent (rate) fields at the type level.
template <class Tag>
class Vec3Field {
 public:
  explicit Vec3Field(const PeriodicGrid2D& grid) : c_{RealField2D(grid), RealField2D(grid), RealField2D(grid)} {}
  Vec3Field(RealField2D a, RealField2D b, RealField2D c) : c_{std::move(a), std::move(b), std::move(c)} {
    if (!(c_[0].grid() == c_[1].grid()) || !(c_[0].grid() == c_[2].grid()))
      throw InvalidInput("Vec3Field: component grid mismatch");
  }

  template <class Fn>
  static Vec3Field sample(const PeriodicGrid2D& grid, Fn&& fn) {
    Vec3Field f(grid);
    const int n = grid.n();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::array<double, 3> v = fn(grid.coord(i), grid.coord(j));
        const std::size_t k = grid.index(i, j);
        for (int a = 0; a < 3; ++a) f.c_[a][k] = v[a];
      }
    return f;
  }

  const PeriodicGrid2D& grid() const noexcept { return c_[0].grid(); }
  std::size_t size() const noexcept { return c_[0].size(); }

  RealField2D& operator[](int a) noexcept { return c_[a]; }
  const RealField2D& operator[](int a) const noexcept { return c_[a]; }

  std::array<double, 3> at(std::size_t k) const noexcept { return {c_[0][k], c_[1][k], c_[2][k]}; }
  void set(std::size_t k, const std::array<double, 3>& v) noexcept {
    for (int a = 0; a < 3; ++a) c_[a][k] = v[a];
  }

  bool all_finite() const noexcept { return c_[0].all_finite() && c_[1].all_finite() && c_[2].all_finite(); }

  template <class OtherTag>
  Vec3Field<OtherTag> retag() const {
    return Vec3Field<OtherTag>(c_[0], c_[1], c_[2]);
  }

 private:
  std::array<RealField2D, 3> c_;
};

struct SpinTag {};
struct TangentTag {};
using SpinField = Vec3Field<SpinTag>;
using TangentField = Vec3Field<TangentTag>;

/// max over nodes of | |s|^2 - 1 |.
inline double constraint_deviation(const SpinField& s) {
  double m = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double n2 = s[0][k] * s[0][k] + s[1][k] * s[1][k] + s[2][k] * s[2][k];
    m = std::max(m, std::abs(n2 - 1.0));
  }
  return m;
}

inline void normalize(SpinField& s);

/// Blends s toward the constant far value outside the window and projects
/// back to the sphere, so that truncated decaying data meets the
/// constant-boundary contract.
inline SpinField taper_to_far_field(const SpinField& s, const std::array<double, 3>& far, double margin,
                                    double width, TaperAxes axes = {}) {
  const RealField2D w = boundary_window(s.grid(), margin, width, axes);
  SpinField out(s.grid());
  for (int a = 0; a < 3; ++a)
    for (std::size_t k = 0; k < s.size(); ++k) out[a][k] = far[a] + w[k] * (s[a][k] - far[a]);
  normalize(out);
  return out;
}

inline void normalize(SpinField& s) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double n = std::sqrt(s[0][k] * s[0][k] + s[1][k] * s[1][k] + s[2][k] * s[2][k]);
    if (!(n > 0.0)) throw InstabilityError("normalize: zero spin vector");
    for (int a = 0; a < 3; ++a) s[a][k] /= n;
  }
}

}  // namespace gaugelab
