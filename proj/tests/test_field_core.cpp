#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "gaugelab/core/radial.hpp"
#include "gaugelab/core/snapshot.hpp"
#include "gaugelab/core/spectral.hpp"

using namespace gaugelab;
using std::numbers::pi;

namespace {

/// Smooth periodic field with a handful of random low modes.
ComplexField2D random_smooth_field(const PeriodicGrid2D& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  struct Mode {
    int kx, ky;
    cplx c;
  };
  std::vector<Mode> modes;
  for (int m = 0; m < 12; ++m) {
    const int kx = static_cast<int>(std::floor(u(rng) * 6)), ky = static_cast<int>(std::floor(u(rng) * 6));
    modes.push_back({kx, ky, {u(rng), u(rng)}});
  }
  const double l = g.half_length();
  return ComplexField2D::sample(g, [&](double x, double y) {
    cplx v{};
    for (const auto& md : modes) v += md.c * std::polar(1.0, pi * (md.kx * x + md.ky * y) / l);
    return v;
  });
}

double max_rel_diff(const ComplexField2D& a, const ComplexField2D& b) {
  return max_abs(a - b) / std::max(max_abs(b), 1e-300);
}

}  // namespace

TEST(PeriodicGrid, RejectsInvalidSizes) {
  EXPECT_THROW(PeriodicGrid2D(15, 1.0), InvalidInput);
  EXPECT_THROW(PeriodicGrid2D(8, 1.0), InvalidInput);
  EXPECT_THROW(PeriodicGrid2D(16, 0.0), InvalidInput);
  const PeriodicGrid2D g(16, pi);
  EXPECT_DOUBLE_EQ(g.wavenumber(0), 0.0);
  EXPECT_DOUBLE_EQ(g.wavenumber(1), 1.0);
  EXPECT_DOUBLE_EQ(g.wavenumber(8), -8.0);
  EXPECT_DOUBLE_EQ(g.wavenumber(15), -1.0);
  EXPECT_DOUBLE_EQ(g.coord(g.origin_index()), 0.0);
}

TEST(Spectral, DerivativeOfConstantVanishes) {
  const PeriodicGrid2D g(32, 3.0);
  const ComplexField2D f(g, cplx(2.5, -1.0));
  for (auto d : {Derivative::dz, Derivative::dzbar, Derivative::dx, Derivative::dy, Derivative::laplacian})
    EXPECT_LT(max_abs(spectral_derivative(f, d)), 1e-13);
}

TEST(Spectral, FourierEigenfunction) {
  const PeriodicGrid2D g(32, 2.0);
  const double k = pi / g.half_length();
  const auto f = ComplexField2D::sample(g, [&](double x, double) { return std::polar(1.0, k * x); });
  EXPECT_LT(max_abs(spectral_derivative(f, Derivative::dx) - f * cplx(0.0, k)), 1e-12);
  // With z = (x + iy)/2: dz e^{ikx} = ik e^{ikx}, dz dzbar = laplacian = -k^2.
  EXPECT_LT(max_abs(spectral_derivative(f, Derivative::dz) - f * cplx(0.0, k)), 1e-12);
  const auto fy = ComplexField2D::sample(g, [&](double, double y) { return std::polar(1.0, k * y); });
  EXPECT_LT(max_abs(spectral_derivative(fy, Derivative::dz) - fy * cplx(k, 0.0)), 1e-12);
  EXPECT_LT(max_abs(spectral_derivative(fy, Derivative::dzbar) - fy * cplx(-k, 0.0)), 1e-12);
  const auto both = ComplexField2D::sample(g, [&](double x, double y) { return std::polar(1.0, k * (x + 2 * y)); });
  const auto dzdzb = spectral_derivative(spectral_derivative(both, Derivative::dzbar), Derivative::dz);
  EXPECT_LT(max_abs(dzdzb - both * cplx(-5.0 * k * k, 0.0)), 1e-11);
}

TEST(Spectral, DzDzbarMatchesLaplacianOnRandomSmoothField) {
  const PeriodicGrid2D g(64, 5.0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto f = random_smooth_field(g, seed);
    const auto a = spectral_derivative(spectral_derivative(f, Derivative::dzbar), Derivative::dz);
    const auto b = spectral_derivative(f, Derivative::laplacian);
    EXPECT_LT(max_rel_diff(a, b), 1e-10);
  }
}

TEST(Spectral, MixedDerivativesCommute) {
  const PeriodicGrid2D g(32, 4.0);
  const auto f = random_smooth_field(g, 11);
  const auto xy = spectral_derivative(spectral_derivative(f, Derivative::dy), Derivative::dx);
  const auto yx = spectral_derivative(spectral_derivative(f, Derivative::dx), Derivative::dy);
  EXPECT_LT(max_abs(xy - yx), 1e-12 * std::max(1.0, max_abs(xy)));
}

TEST(Spectral, FourierRoundTrip) {
  const PeriodicGrid2D g(64, 7.0);
  const auto f = random_smooth_field(g, 5);
  const auto back = fft_inverse(g, fft_forward(f));
  EXPECT_LT(max_rel_diff(back, f), 1e-12);
}

TEST(Spectral, RejectsNonFiniteInput) {
  const PeriodicGrid2D g(16, 1.0);
  ComplexField2D f(g);
  f[3] = cplx(std::nan(""), 0.0);
  EXPECT_THROW(spectral_derivative(f, Derivative::dx), InvalidInput);
  EXPECT_THROW(sobolev_norm(f, 1), InvalidInput);
}

TEST(Spectral, FourierShiftInterpolatesBandLimitedData) {
  const PeriodicGrid2D g(32, 3.0);
  const auto f = random_smooth_field(g, 9);
  const double sx = 0.37 * g.dx(), sy = -0.21 * g.dx();
  const auto shifted = fourier_shift(f, sx, sy);
  const auto hat = fft_forward(f);
  // Oracle: direct summation of the trigonometric series at shifted points.
  const auto f_at = [&](double x, double y) {
    cplx v{};
    for (int mx = 0; mx < g.n(); ++mx)
      for (int my = 0; my < g.n(); ++my)
        v += hat[g.index(mx, my)] *
             std::polar(1.0, g.wavenumber(mx) * (x + g.half_length()) + g.wavenumber(my) * (y + g.half_length()));
    return v / static_cast<double>(g.size());
  };
  for (int i : {0, 5, 17}) {
    const int j = (i * 7) % g.n();
    EXPECT_LT(std::abs(shifted(i, j) - f_at(g.coord(i) + sx, g.coord(j) + sy)), 1e-11);
  }
}

TEST(Spectral, DealiasRemovesHighModes) {
  const PeriodicGrid2D g(48, 2.0);
  const double k = pi / g.half_length();
  const auto low = ComplexField2D::sample(g, [&](double x, double y) { return std::polar(1.0, k * (3 * x - 2 * y)); });
  const auto high = ComplexField2D::sample(g, [&](double x, double) { return std::polar(1.0, k * 20 * x); });
  EXPECT_LT(max_abs(dealias(low) - low), 1e-12);
  EXPECT_LT(max_abs(dealias(high)), 1e-12);
}

TEST(Sobolev, ZeroFieldHasZeroNorm) {
  const PeriodicGrid2D g(16, 1.0);
  const ComplexField2D f(g);
  for (int m = 0; m <= 3; ++m) EXPECT_EQ(sobolev_norm(f, m), 0.0);
  EXPECT_THROW(sobolev_norm(f, 4), InvalidInput);
}

TEST(Sobolev, SechCrossWindowMatchesQuadrature) {
  // f = sech(x) w(y) with w a smooth bump; ||f||_{L2}^2 = (int sech^2)(int w^2).
  const PeriodicGrid2D g(128, 20.0);
  const auto w = [](double y) { return std::exp(-y * y / 8.0); };
  const auto f = ComplexField2D::sample(g, [&](double x, double y) { return cplx(w(y) / std::cosh(x), 0.0); });
  const double int_w2 = std::sqrt(pi * 4.0);  // int exp(-y^2/4) dy
  EXPECT_NEAR(sobolev_norm(f, 0), std::sqrt(2.0 * int_w2), 1e-10);
  // m = 1 adds int |grad f|^2 = int (sech tanh)^2 int w^2 + int sech^2 int w'^2.
  const double int_st2 = 2.0 / 3.0;
  const double int_wp2 = int_w2 / 8.0;  // int (y/4)^2 exp(-y^2/4) dy = (1/16) 2 sqrt(pi)
  const double h1sq = 2.0 * int_w2 + int_st2 * int_w2 + 2.0 * int_wp2;
  EXPECT_NEAR(sobolev_norm(f, 1), std::sqrt(h1sq), 1e-9);
}

TEST(Sobolev, MonotoneInOrder) {
  const PeriodicGrid2D g(32, 2.0);
  for (std::uint64_t seed : {3u, 4u}) {
    const auto f = random_smooth_field(g, seed);
    EXPECT_LE(sobolev_norm(f, 0), sobolev_norm(f, 1));
    EXPECT_LE(sobolev_norm(f, 1), sobolev_norm(f, 2));
    EXPECT_LE(sobolev_norm(f, 2), sobolev_norm(f, 3));
  }
}

TEST(Boundary, DecayContractIsChecked) {
  const PeriodicGrid2D g(64, 15.0);
  const auto decayed = ComplexField2D::sample(g, [](double x, double y) { return cplx(std::exp(-(x * x + y * y)), 0); });
  EXPECT_NO_THROW(require_decayed(decayed, "test"));
  const auto wide = ComplexField2D::sample(g, [](double x, double) { return cplx(1.0 / std::cosh(x / 5.0), 0); });
  EXPECT_THROW(require_decayed(wide, "test"), InvalidInput);
}

TEST(NonlocalTail, ZeroProfile) {
  const RadialProfile q(RadialGrid(64, 8.0));
  for (double v : nonlocal_tail(q)) EXPECT_EQ(v, 0.0);
}

TEST(NonlocalTail, IndicatorOnOneToTwo) {
  // Oracle: I(1) = int_1^2 dtau / tau = ln 2 for Q = 1 on [1,2].
  for (int m : {400, 800, 1600}) {
    const RadialGrid g(m, 4.0);
    const auto q = RadialProfile::sample(g, [](double r) { return cplx(r >= 1.0 && r <= 2.0 ? 1.0 : 0.0, 0.0); });
    const auto tail = nonlocal_tail(q);
    const int j1 = static_cast<int>(std::lround(1.0 / g.h() - 0.5));
    // rho_j1 is within h/2 of 1; the jump costs at most one cell, O(h).
    EXPECT_NEAR(tail[j1], std::log(2.0 / g.rho(j1)), 2.0 * g.h());
    EXPECT_NEAR(tail[0], std::log(2.0), 2.0 * g.h());
  }
}

TEST(NonlocalTail, SmoothProfileConvergesAtDesignedOrder) {
  // Q = rho exp(-rho^2): int_rho^inf tau exp(-2 tau^2) dtau = exp(-2 rho^2)/4.
  auto err = [](int m, TailRule rule) {
    const RadialGrid g(m, 8.0);
    const auto q = RadialProfile::sample(g, [](double r) { return cplx(r * std::exp(-r * r), 0.0); });
    const auto tail = nonlocal_tail(q, rule);
    double e = 0.0;
    for (int j = 0; j < m; ++j) e = std::max(e, std::abs(tail[j] - std::exp(-2 * g.rho(j) * g.rho(j)) / 4.0));
    return e;
  };
  const double r2 = err(200, TailRule::trapezoid) / err(400, TailRule::trapezoid);
  const double r4 = err(200, TailRule::fourth_order) / err(400, TailRule::fourth_order);
  EXPECT_GT(r2, 3.5);
  EXPECT_GT(r4, 14.0);
}

TEST(NonlocalTail, MonotoneAndOrderPreserving) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const RadialGrid g(128, 10.0);
  RadialProfile a(g), b(g);
  for (int j = 0; j < g.size(); ++j) {
    const double mag = u(rng);
    a[j] = std::polar(mag, 2 * pi * u(rng));
    b[j] = std::polar(mag + u(rng), 2 * pi * u(rng));
  }
  const auto ta = nonlocal_tail(a), tb = nonlocal_tail(b);
  for (int j = 0; j + 1 < g.size(); ++j) {
    EXPECT_GE(ta[j], ta[j + 1]);
    EXPECT_GE(ta[j + 1], 0.0);
    EXPECT_LE(ta[j], tb[j]);
  }
  EXPECT_EQ(ta.back(), 0.0);
  // Linearity in |Q|^2.
  RadialProfile c(g);
  for (int j = 0; j < g.size(); ++j) c[j] = std::sqrt(2.0) * a[j];
  const auto tc = nonlocal_tail(c);
  for (int j = 0; j < g.size(); ++j) EXPECT_NEAR(tc[j], 2.0 * ta[j], 1e-12 * (1.0 + ta[j]));
}

TEST(RadialOperators, LaplacianFourthOrder) {
  // Q = rho exp(-rho^2): Q'' + Q'/rho - Q/rho^2 = (4 rho^3 - 8 rho) exp(-rho^2).
  auto err = [](int m) {
    const RadialGrid g(m, 8.0);
    const auto q = RadialProfile::sample(g, [](double r) { return cplx(r * std::exp(-r * r), 0.0); });
    const auto lap = radial_laplacian(q);
    double e = 0.0;
    for (int j = 0; j < m; ++j) {
      const double r = g.rho(j);
      e = std::max(e, std::abs(lap[j] - (4 * r * r * r - 8 * r) * std::exp(-r * r)));
    }
    return e;
  };
  EXPECT_GT(err(200) / err(400), 14.0);
}

TEST(LiftRadial, ZeroAndDomainCoverage) {
  const PeriodicGrid2D g(32, 4.0);
  EXPECT_EQ(max_abs(lift_radial(RadialProfile(RadialGrid(64, 6.0)), g)), 0.0);
  EXPECT_THROW(lift_radial(RadialProfile(RadialGrid(64, 5.0)), g), DomainCoverageError);
}

TEST(LiftRadial, RayRoundTripIsSecondOrder) {
  auto err = [](int m) {
    const PeriodicGrid2D g(64, 4.0);
    const RadialGrid rg(m, 6.0);
    const auto fn = [](double r) { return cplx(r * std::exp(-r * r), 0.5 * r * r * r * std::exp(-r * r)); };
    const auto lifted = lift_radial(RadialProfile::sample(rg, fn), g);
    double e = 0.0;
    const int o = g.origin_index();
    for (int i = o + 1; i < g.n(); ++i) e = std::max(e, std::abs(lifted(i, o) - fn(g.coord(i))));
    return e;
  };
  const double ratio = err(100) / err(200);
  EXPECT_GT(ratio, 3.3);
  EXPECT_LT(ratio, 4.7);
}

TEST(LiftRadial, SmoothAtOriginUnderRefinement) {
  // Q = rho exp(-rho^2) lifts to (x - iy) exp(-rho^2), whose Laplacian
  // (x - iy)(4 rho^2 - 8) exp(-rho^2) is smooth through the origin.
  auto lap_err = [](int n) {
    const PeriodicGrid2D g(n, 6.0);
    const RadialGrid rg(4000, 9.0);
    const auto lifted = lift_radial(RadialProfile::sample(rg, [](double r) { return cplx(r * std::exp(-r * r), 0); }), g);
    const auto lap = spectral_derivative(lifted, Derivative::laplacian);
    const auto exact = ComplexField2D::sample(g, [](double x, double y) {
      const double r2 = x * x + y * y;
      return cplx(x, -y) * (4 * r2 - 8) * std::exp(-r2);
    });
    return max_abs(lap - exact);
  };
  const double e64 = lap_err(64), e128 = lap_err(128);
  EXPECT_LT(e64, 1e-2);
  EXPECT_LT(e128, 1e-2);
}

TEST(RadialInterpolation, QuinticIsHighOrder) {
  auto err = [](int m) {
    const RadialGrid g(m, 6.0);
    const auto fn = [](double r) { return cplx(r * std::exp(-r * r), 0.0); };
    const auto q = RadialProfile::sample(g, fn);
    const auto it = interpolator(q, 6);
    double e = 0.0;
    for (double r = 0.013; r < 5.0; r += 0.0731) e = std::max(e, std::abs(it(r) - fn(r)));
    return e;
  };
  EXPECT_GT(err(100) / err(200), 40.0);
}

TEST(Snapshot, BinaryAndCsvRoundTrip) {
  const PeriodicGrid2D g(16, 2.0);
  const auto f = random_smooth_field(g, 77);
  const auto dir = std::filesystem::temp_directory_path() / "gaugelab_snapshot_test";
  std::filesystem::create_directories(dir);
  write_snapshot(dir / "f.bin", Snapshot{0.25, {f, conj(f)}});
  const auto back = read_snapshot(dir / "f.bin");
  ASSERT_EQ(back.fields.size(), 2u);
  EXPECT_EQ(back.t, 0.25);
  EXPECT_EQ(back.fields[0].grid(), g);
  for (std::size_t k = 0; k < f.size(); ++k) EXPECT_EQ(back.fields[0][k], f[k]);

  const auto q = RadialProfile::sample(RadialGrid(32, 4.0), [](double r) { return cplx(r, -r * r); });
  write_profile_csv(dir / "q.csv", q);
  const auto q2 = read_profile_csv(dir / "q.csv");
  ASSERT_EQ(q2.size(), q.size());
  for (int j = 0; j < q.size(); ++j) EXPECT_EQ(q2[j], q[j]);
  write_field_csv(dir / "f.csv", f);
  EXPECT_TRUE(std::filesystem::exists(dir / "f.csv"));
  std::filesystem::remove_all(dir);
}
