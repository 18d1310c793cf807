#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

#include "gaugelab/core/errors.hpp"

namespace gaugelab {

/// Uniform periodic grid on [-L, L)^2 with N points per axis.
///
/// Node (i, j) sits at (x_i, y_j) = (-L + i dx, -L + j dx) and is stored at
/// flat index i * N + j (x major). The origin is node (N/2, N/2).
class PeriodicGrid2D {
 public:
  PeriodicGrid2D(int n, double half_length) : n_(n), half_length_(half_length) {
    if (n < 16 || n % 2 != 0) throw InvalidInput("PeriodicGrid2D: N must be even and >= 16");
    if (!(half_length > 0.0) || !std::isfinite(half_length))
      throw InvalidInput("PeriodicGrid2D: L must be positive");
  }

  int n() const noexcept { return n_; }
  double half_length() const noexcept { return half_length_; }
  double dx() const noexcept { return 2.0 * half_length_ / n_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }
  std::size_t index(int i, int j) const noexcept { return static_cast<std::size_t>(i) * n_ + j; }
  double coord(int i) const noexcept { return -half_length_ + i * dx(); }
  int origin_index() const noexcept { return n_ / 2; }

  /// Signed mode number of FFT slot m: 0..N/2-1, then -N/2..-1.
  int mode(int m) const noexcept { return m < n_ / 2 ? m : m - n_; }
  /// k = pi * mode / L.
  double wavenumber(int m) const noexcept { return std::numbers::pi * mode(m) / half_length_; }
  double max_wavenumber() const noexcept { return std::numbers::pi * (n_ / 2) / half_length_; }

  friend bool operator==(const PeriodicGrid2D&, const PeriodicGrid2D&) = default;

 private:
  int n_;
  double half_length_;
};

/// Staggered radial grid rho_j = (j + 1/2) h, h = rho_max / M.
class RadialGrid {
 public:
  RadialGrid(int m, double rho_max) : m_(m), rho_max_(rho_max) {
    if (m < 8) throw InvalidInput("RadialGrid: need at least 8 nodes");
    if (!(rho_max > 0.0) || !std::isfinite(rho_max)) throw InvalidInput("RadialGrid: rho_max must be positive");
  }

  int size() const noexcept { return m_; }
  double rho_max() const noexcept { return rho_max_; }
  double h() const noexcept { return rho_max_ / m_; }
  double rho(int j) const noexcept { return (j + 0.5) * h(); }

  friend bool operator==(const RadialGrid&, const RadialGrid&) = default;

 private:
  int m_;
  double rho_max_;
};

}  // namespace gaugelab
