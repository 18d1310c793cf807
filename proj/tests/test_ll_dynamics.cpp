#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "gaugelab/analytic/soliton.hpp"
#include "gaugelab/ll/dynamics.hpp"
#include "gaugelab/ll/matrix_form.hpp"

using namespace gaugelab;
using std::numbers::pi;

namespace {

SpinField north_pole(const PeriodicGrid2D& g) {
  return SpinField::sample(g, [](double, double) { return std::array<double, 3>{0.0, 0.0, 1.0}; });
}

/// Smooth random unit field: normalized sum of a few random Gaussian bumps
/// added to the pole.
SpinField random_unit_field(const PeriodicGrid2D& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<double, 5>> bumps;
  for (int b = 0; b < 4; ++b) bumps.push_back({u(rng) * 2, u(rng) * 2, 0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)});
  auto s = SpinField::sample(g, [&](double x, double y) {
    std::array<double, 3> v{0.0, 0.0, 1.0};
    for (const auto& b : bumps) {
      const double w = std::exp(-((x - b[0]) * (x - b[0]) + (y - b[1]) * (y - b[1])) / 4.0);
      v[0] += b[2] * w, v[1] += b[3] * w, v[2] += b[4] * w;
    }
    return v;
  });
  normalize(s);
  return s;
}

double l2_distance(const SpinField& a, const SpinField& b) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < a.size(); ++k) s += std::pow(a[c][k] - b[c][k], 2);
  return std::sqrt(s) * a.grid().dx();
}

struct ConstantProvider {
  PeriodicGrid2D grid;
  SpinField spin(double) const { return north_pole(grid); }
  TangentField spin_rate(double) const { return TangentField(grid); }
};

}  // namespace

TEST(LLRhs, VanishesOnConstantField) {
  const PeriodicGrid2D g(32, 5.0);
  const auto rhs = ll_rhs(north_pole(g));
  for (int a = 0; a < 3; ++a) EXPECT_LT(max_abs(rhs[a]), 1e-14);
}

TEST(LLRhs, OrthogonalToSpin) {
  const PeriodicGrid2D g(64, 6.0);
  for (std::uint64_t seed : {1u, 2u}) {
    const auto s = random_unit_field(g, seed);
    const auto rhs = ll_rhs(s);
    double worst = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
      worst = std::max(worst, std::abs(s[0][k] * rhs[0][k] + s[1][k] * rhs[1][k] + s[2][k] * rhs[2][k]));
    EXPECT_LT(worst, 1e-10);
  }
}

TEST(LLRhs, MatchesSolitonTimeDerivative) {
  // delta = 0, t = 0: d/dt s = (0, 2 sh/ch^2, 0).
  const PeriodicGrid2D g(256, 20.0);
  const SolitonProvider p(g, {0.0});
  const auto rhs = ll_rhs(p.spin(0.0));
  const auto rate = p.spin_rate(0.0);
  double worst = 0.0;
  for (int a = 0; a < 3; ++a) worst = std::max(worst, max_abs(rhs[a] - rate[a]));
  EXPECT_LT(worst, 1e-5);
}

TEST(LLStep, EquilibriumIsUnchanged) {
  const PeriodicGrid2D g(32, 5.0);
  const auto s0 = north_pole(g);
  LLSolverConfig cfg;
  cfg.dt = 0.5 * g.dx() * g.dx() / 4.0;
  const auto s1 = ll_step(s0, cfg);
  for (int a = 0; a < 3; ++a)
    for (std::size_t k = 0; k < s0.size(); ++k) EXPECT_EQ(s1[a][k], s0[a][k]);
}

TEST(LLStep, RejectsCflViolation) {
  const PeriodicGrid2D g(32, 5.0);
  LLSolverConfig cfg;
  cfg.dt = 1.01 * g.dx() * g.dx() / 4.0;
  EXPECT_THROW(ll_step(north_pole(g), cfg), InvalidInput);
  cfg.dt = 0.5 * g.dx() * g.dx() / 4.0;
  cfg.cfl_safety = 0.4;
  EXPECT_THROW(ll_step(north_pole(g), cfg), InvalidInput);
}

TEST(LLStep, KeepsUnitLengthAndIsDeterministic) {
  const PeriodicGrid2D g(64, 6.0);
  const auto s0 = random_unit_field(g, 7);
  LLSolverConfig cfg;
  cfg.dt = 0.8 * g.dx() * g.dx() / 4.0;
  auto a = s0, b = s0;
  for (std::size_t n = 0; n < 5; ++n) {
    a = ll_step(a, cfg, n);
    b = ll_step(b, cfg, n);
    EXPECT_LE(constraint_deviation(a), 1e-12);
  }
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < a.size(); ++k) ASSERT_EQ(a[c][k], b[c][k]);
}

TEST(LLStep, FourthOrderInTimeOnSoliton) {
  // Self-convergence over a dt-halving triplet on a coarse grid; the seam is
  // tapered so no unresolved content competes with the time error.
  const PeriodicGrid2D g(128, 16.0);
  const SolitonProvider p(g, {0.0});
  const SpinField s0 = taper_to_far_field(p.spin(0.0), {0.0, 0.0, 1.0}, 4.0, 1.0, {true, false});
  const double t_end = 0.25;
  const double dt0 = 0.25 * g.dx() * g.dx() / 4.0;
  auto run = [&](double dt) {
    LLSolverConfig cfg;
    cfg.dt = dt;
    LLSolver solver(s0, cfg);
    solver.advance(t_end);
    return solver.state();
  };
  const auto a = run(dt0), b = run(dt0 / 2), c = run(dt0 / 4);
  const double order = std::log2(l2_distance(a, b) / l2_distance(b, c));
  EXPECT_GT(order, 3.7);
}

TEST(LLSolver, ConservesEnergyAndSpinIntegral) {
  const PeriodicGrid2D g(64, 10.0);
  const auto s0 = random_unit_field(g, 3);
  LLSolverConfig cfg;
  cfg.dt = 0.5 * g.dx() * g.dx() / 4.0;
  LLSolver solver(s0, cfg);
  solver.advance(0.2, 10);
  const double e0 = ll_energy(s0), e1 = ll_energy(solver.state());
  EXPECT_LT(std::abs(e1 - e0) / e0 / 0.2, 1e-6);
  const auto m0 = spin_integral(s0), m1 = spin_integral(solver.state());
  const double scale = std::hypot(m0[0], m0[1], m0[2]);
  for (int a = 0; a < 3; ++a) EXPECT_LT(std::abs(m1[a] - m0[a]) / scale / 0.2, 1e-6);
  EXPECT_FALSE(solver.log().empty());
  EXPECT_DOUBLE_EQ(solver.log().back().t, 0.2);
}

TEST(LLSolver, ImplicitMidpointAgreesWithRk4) {
  const PeriodicGrid2D g(32, 10.0);
  const auto s0 = random_unit_field(g, 5);
  LLSolverConfig rk;
  rk.dt = 0.5 * g.dx() * g.dx() / 4.0;
  LLSolverConfig mid = rk;
  mid.scheme = LLScheme::implicit_midpoint;
  mid.dt = rk.dt / 2;
  LLSolver a(s0, rk), b(s0, mid);
  a.advance(0.05);
  b.advance(0.05);
  EXPECT_LT(l2_distance(a.state(), b.state()), 1e-4);
  EXPECT_LE(constraint_deviation(b.state()), 1e-12);
}

TEST(LLSolver, AdaptiveKeepsDtOnQuietData) {
  const PeriodicGrid2D g(32, 5.0);
  LLSolverConfig cfg;
  cfg.dt = 0.5 * g.dx() * g.dx() / 4.0;
  LLSolver solver(north_pole(g), cfg, 0.0, {true, 1e-8});
  solver.advance(0.1);
  EXPECT_EQ(solver.dt(), cfg.dt);
  EXPECT_EQ(solver.status(), LLSolver::Status::running);
}

TEST(LLSolver, WritesPerStepCsv) {
  const PeriodicGrid2D g(16, 5.0);
  LLSolverConfig cfg;
  cfg.dt = 0.5 * g.dx() * g.dx() / 4.0;
  LLSolver solver(north_pole(g), cfg);
  solver.advance(10 * cfg.dt, 2);
  const auto path = std::filesystem::temp_directory_path() / "gaugelab_ll_log.csv";
  write_ll_log(path, solver.log());
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "t,H1,H2,H3,energy,constraint_max_dev");
  std::filesystem::remove(path);
}

TEST(LLResidual, ConstantFieldIsExact) {
  const PeriodicGrid2D g(32, 5.0);
  EXPECT_LT(ll_residual(ConstantProvider{g}, 0.3), 1e-14);
}

TEST(LLResidual, SolitonConvergesSpectrallyOnAxisAlignedCase) {
  const SolitonProvider coarse(PeriodicGrid2D(64, 20.0), {0.0});
  const SolitonProvider fine(PeriodicGrid2D(128, 20.0), {0.0});
  const ResidualWindow w{10.0};
  EXPECT_GT(ll_residual(coarse, 0.3, w) / ll_residual(fine, 0.3, w), 10.0);
}

TEST(Soliton, OriginValueAndUnitNorm) {
  for (double delta : {0.0, pi / 4, 1.0}) {
    const auto s = soliton_spin({delta}, 0.0, 0.0, 0.0);
    EXPECT_EQ(s[0], 0.0);
    EXPECT_EQ(s[1], 0.0);
    EXPECT_EQ(s[2], -1.0);
  }
}

TEST(MatrixForm, PolesAndRoundTrip) {
  const PeriodicGrid2D g(16, 1.0);
  const auto pole = to_matrix(north_pole(g));
  const Mat2 m = pole.at(0);
  EXPECT_EQ(m.a, cplx(1.0));
  EXPECT_EQ(m.d, cplx(-1.0));
  EXPECT_EQ(m.b, cplx(0.0));
  const Mat2 x = spin_matrix({1.0, 0.0, 0.0});
  EXPECT_EQ(x.b, cplx(1.0));
  EXPECT_EQ(x.c, cplx(1.0));
  EXPECT_EQ(x.a, cplx(0.0));

  const auto s = random_unit_field(PeriodicGrid2D(32, 3.0), 13);
  const auto back = from_matrix(to_matrix(s));
  for (int a = 0; a < 3; ++a)
    for (std::size_t k = 0; k < s.size(); ++k) ASSERT_EQ(back[a][k], s[a][k]);
}

TEST(MatrixForm, RejectsNonUnitSpin) {
  const PeriodicGrid2D g(16, 1.0);
  auto s = north_pole(g);
  s[2][5] = 1.1;
  EXPECT_THROW(from_matrix(to_matrix(s)), InvalidInput);
}
