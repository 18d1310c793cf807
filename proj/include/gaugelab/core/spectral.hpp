#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "gaugelab/core/fft.hpp"
#include "gaugelab/core/field.hpp"

namespace gaugelab {

/// Spectral operators in the complex variable z = (x + iy)/2:
///   dz = dx - i dy,  dzbar = dx + i dy,  dz dzbar = laplacian.
enum class Derivative { dz, dzbar, dx, dy, laplacian };

namespace detail {

/// Multiplier for slots (mx, my). First-order symbols vanish on the Nyquist
/// row and column so real input stays real.
inline cplx derivative_symbol(const PeriodicGrid2D& g, Derivative which, int mx, int my) {
  const int half = g.n() / 2;
  const double kx = g.wavenumber(mx);
  const double ky = g.wavenumber(my);
  const double kx1 = (mx == half) ? 0.0 : kx;
  const double ky1 = (my == half) ? 0.0 : ky;
  switch (which) {
    case Derivative::dx: return {0.0, kx1};
    case Derivative::dy: return {0.0, ky1};
    case Derivative::dz: return {ky1, kx1};    // i kx - i (i ky)
    case Derivative::dzbar: return {-ky1, kx1};
    case Derivative::laplacian: return {-(kx * kx + ky * ky), 0.0};
  }
  return {};
}

}  // namespace detail

/// Field held in Fourier space, so several derivatives can share one forward
/// transform.
class Spectrum {
 public:
  explicit Spectrum(const ComplexField2D& f) : grid_(f.grid()), hat_(fft_forward(f)) {}
  Spectrum(const PeriodicGrid2D& grid, std::vector<cplx> hat) : grid_(grid), hat_(std::move(hat)) {}

  const PeriodicGrid2D& grid() const noexcept { return grid_; }
  const std::vector<cplx>& coefficients() const noexcept { return hat_; }

  template <class Symbol>
  Spectrum multiplied(Symbol&& symbol) const {
    std::vector<cplx> out(hat_.size());
    const int n = grid_.n();
    for (int mx = 0; mx < n; ++mx)
      for (int my = 0; my < n; ++my) {
        const std::size_t k = grid_.index(mx, my);
        out[k] = hat_[k] * symbol(mx, my);
      }
    return Spectrum(grid_, std::move(out));
  }

  Spectrum derivative(Derivative which) const {
    return multiplied([&](int mx, int my) { return detail::derivative_symbol(grid_, which, mx, my); });
  }

  ComplexField2D field() const { return fft_inverse(grid_, hat_); }

 private:
  PeriodicGrid2D grid_;
  std::vector<cplx> hat_;
};

inline ComplexField2D spectral_derivative(const ComplexField2D& f, Derivative which) {
  f.require_finite("spectral_derivative");
  return Spectrum(f).derivative(which).field();
}

inline RealField2D spectral_derivative(const RealField2D& f, Derivative which) {
  return real_part(spectral_derivative(to_complex(f), which));
}

/// 2/3-rule truncation: zero every mode with |m| > N/3 on either axis.
inline ComplexField2D dealias(const ComplexField2D& f) {
  const int cut = f.grid().n() / 3;
  const auto& g = f.grid();
  return Spectrum(f)
      .multiplied([&](int mx, int my) {
        return (std::abs(g.mode(mx)) > cut || std::abs(g.mode(my)) > cut) ? 0.0 : 1.0;
      })
      .field();
}

/// Trigonometric interpolation: f evaluated at (x + sx, y + sy) for every node.
inline ComplexField2D fourier_shift(const ComplexField2D& f, double sx, double sy) {
  const auto& g = f.grid();
  const int half = g.n() / 2;
  return Spectrum(f)
      .multiplied([&](int mx, int my) {
        // The Nyquist mode is split symmetrically so real data stays real.
        const double cx = (mx == half) ? std::cos(g.wavenumber(mx) * sx) : 1.0;
        const double cy = (my == half) ? std::cos(g.wavenumber(my) * sy) : 1.0;
        const double px = (mx == half) ? 0.0 : g.wavenumber(mx) * sx;
        const double py = (my == half) ? 0.0 : g.wavenumber(my) * sy;
        return cx * cy * std::polar(1.0, px + py);
      })
      .field();
}

namespace detail {

template <class Weight>
double weighted_spectral_norm(const ComplexField2D& f, Weight&& weight) {
  f.require_finite("sobolev_norm");
  const auto hat = fft_forward(f);
  const auto& g = f.grid();
  const int n = g.n();
  const double inv = 1.0 / static_cast<double>(g.size());
  double s = 0.0;
  for (int mx = 0; mx < n; ++mx)
    for (int my = 0; my < n; ++my) {
      const double kx = g.wavenumber(mx), ky = g.wavenumber(my);
      s += weight(kx * kx + ky * ky) * std::norm(hat[g.index(mx, my)] * inv);
    }
  // Parseval on the box: sum |f|^2 dx^2 = (2L)^2 sum |f_hat / N^2|^2.
  const double area = 4.0 * g.half_length() * g.half_length();
  return std::sqrt(s * area);
}

inline double check_order(int m) {
  if (m < 0 || m > 3) throw InvalidInput("sobolev_norm: order must be in {0,1,2,3}");
  return m;
}

}  // namespace detail

/// (sum_k (1 + |k|^2)^m |f_hat(k)|^2 (2L)^2)^{1/2} with f_hat = DFT / N^2,
/// i.e. the continuous H^m norm of the trigonometric interpolant.
inline double sobolev_norm(const ComplexField2D& f, int m) {
  const double order = detail::check_order(m);
  return detail::weighted_spectral_norm(f, [&](double k2) { return std::pow(1.0 + k2, order); });
}

inline double sobolev_norm(const RealField2D& f, int m) { return sobolev_norm(to_complex(f), m); }

template <class Tag>
double sobolev_norm(const Vec3Field<Tag>& s, int m) {
  double acc = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double v = sobolev_norm(s[a], m);
    acc += v * v;
  }
  return std::sqrt(acc);
}

/// Homogeneous seminorm (sum_k |k|^{2m} |f_hat|^2 (2L)^2)^{1/2}.
inline double sobolev_seminorm(const ComplexField2D& f, int m) {
  const double order = detail::check_order(m);
  return detail::weighted_spectral_norm(f, [&](double k2) { return std::pow(k2, order); });
}

}  // namespace gaugelab
