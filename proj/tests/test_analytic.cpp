#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gaugelab/analytic/conformal.hpp"
#include "gaugelab/analytic/line_soliton.hpp"
#include "gaugelab/analytic/shooting.hpp"
#include "gaugelab/analytic/soliton.hpp"

using namespace gaugelab;
using std::numbers::pi;

namespace {

const Sl2Params kFocusing{1.0, -1.0, 0.0, 1.0};

RadialRunResult drift_run(const Sl2Params& g, const std::vector<double>& times, const RadialGrid& rg) {
  const auto q0 = RadialProfile::sample(rg, [](double r) { return cplx(0.1 * r * std::exp(-r * r)); });
  RadialRunConfig rc;
  rc.scheme.convention = Convention::qrho1;
  rc.drift = DriftParams{g.b, g.d};
  rc.t_end = 0.0;
  for (double t : times) {
    rc.extra_times.push_back(g.big_t(t));
    rc.t_end = std::max(rc.t_end, g.big_t(t));
  }
  return run_radial(q0, 0.0, rc);
}

}  // namespace

TEST(Sl2, ValidationAndInverse) {
  EXPECT_NO_THROW(kFocusing.validate());
  EXPECT_THROW((Sl2Params{1.0, 1.0, 1.0, 1.0}.validate()), InvalidInput);
  const Sl2Params g{2.0, 0.5, 1.0, 0.75};
  const Sl2Params h = g.inverse();
  EXPECT_NO_THROW(h.validate());
  // g^{-1} g = 1 entrywise.
  EXPECT_NEAR(h.a * g.a + h.b * g.c, 1.0, 1e-15);
  EXPECT_NEAR(h.a * g.b + h.b * g.d, 0.0, 1e-15);
  EXPECT_NEAR(h.c * g.a + h.d * g.c, 0.0, 1e-15);
  EXPECT_NEAR(h.c * g.b + h.d * g.d, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(kFocusing.alpha(0.25), 0.75);
  EXPECT_DOUBLE_EQ(kFocusing.big_t(0.25), 0.25 / 0.75);
}

TEST(ConformalRadial, InverseUndoesTheAction) {
  const auto q = [](double rho, double t) { return cplx(rho * std::exp(-rho * rho), t * rho); };
  const Sl2Params g{1.0, -0.5, 0.2, 0.9};
  const auto there = conformal_radial(q, g);
  const auto back = conformal_radial(there, g.inverse());
  for (double rho : {0.1, 0.7, 1.9})
    for (double t : {0.0, 0.3, 0.8}) EXPECT_NEAR(std::abs(back(rho, t) - q(rho, t)), 0.0, 1e-14) << rho << ' ' << t;
}

TEST(ConformalRadial, IdentityIsTrivial) {
  const auto q = [](double rho, double t) { return cplx(rho, t); };
  const auto same = conformal_radial(q, Sl2Params{});
  EXPECT_EQ(same(0.4, 0.6), q(0.4, 0.6));
}

TEST(ConformalFamily, SolvesSystemAndRestrictions) {
  const std::vector<double> times{0.0, 0.3};
  const RadialGrid rg(1000, 25.0);
  const ConformalFamily fam(RadialHistory(drift_run(kFocusing, times, rg), true), kFocusing, PeriodicGrid2D(96, 8.0));
  for (double t : times) {
    const SchrodingerState s = fam.state(t);
    EXPECT_LT(system8_residual(s, fam.rates(t)).max(), 1e-5) << "t = " << t;
    const auto [a, b] = restriction_residual(s);
    EXPECT_LT(std::max(a, b), 1e-6) << "t = " << t;
  }
}

TEST(ConformalFamily, CoverageAndRangeAreEnforced) {
  const RadialGrid rg(400, 10.0);
  const RadialHistory h(drift_run(kFocusing, {0.0, 0.2}, rg), true);
  EXPECT_THROW(h.locate(h.t_max() + 0.1), DomainCoverageError);
  EXPECT_THROW(h.locate(-0.1), DomainCoverageError);
  const ConformalFamily wide(h, kFocusing, PeriodicGrid2D(32, 8.0));
  EXPECT_THROW(wide.state(0.0), DomainCoverageError);
  const ConformalFamily fam(h, kFocusing, PeriodicGrid2D(32, 4.0));
  EXPECT_NO_THROW(fam.state(0.2));
  EXPECT_THROW(fam.state(0.3), DomainCoverageError);
  EXPECT_THROW(fam.alpha(1.5), HorizonError);
  EXPECT_THROW((ConformalFamily(h, Sl2Params{1.0, 1.0, 1.0, 1.0}, PeriodicGrid2D(32, 4.0))), InvalidInput);
}

TEST(ConformalFamily, AffineBackgroundIsPureImaginary) {
  const RadialGrid rg(400, 10.0);
  const ConformalFamily fam(RadialHistory(drift_run(kFocusing, {0.0}, rg), true), kFocusing, PeriodicGrid2D(32, 4.0));
  const AffineBackground bg = fam.background(0.5);
  EXPECT_DOUBLE_EQ(bg.p_zbar.real(), 0.0);
  EXPECT_DOUBLE_EQ(bg.p_zbar.imag(), 1.0);
  EXPECT_DOUBLE_EQ(bg.u_zzbar, 2.0);
}

TEST(LineSoliton, ConsistentConstantSatisfiesRestrictions) {
  const PeriodicGrid2D g(256, 20.0);
  const KappaResidual k = kappa_residual(g, {0.0}, consistent_kappa(0.0), false);
  EXPECT_LT(std::max(k.restriction1, k.restriction2), 1e-8);
  EXPECT_LT(k.equations.max(), 1e-5);
  const KappaResidual printed = kappa_residual(g, {0.0}, printed_kappa(), false);
  EXPECT_GT(printed.restriction2, 0.1);
}

TEST(LineSoliton, ConstantsAgreeOnlyOnTheDiagonal) {
  EXPECT_NEAR(std::abs(printed_kappa() - cplx(0.0, 1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(consistent_kappa(pi / 4) - printed_kappa()), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(consistent_kappa(0.0) + 1.0), 0.0, 1e-15);
  EXPECT_GT(std::abs(consistent_kappa(0.3) - printed_kappa()), 0.1);
}

TEST(LineSoliton, ScanFindsTheConsistentPhase) {
  const LineSolitonReport rep = line_soliton_report(PeriodicGrid2D(128, 16.0), {pi / 2}, 36);
  ASSERT_EQ(rep.scan.size(), 36u);
  EXPECT_NEAR(std::abs(std::polar(1.0, rep.best_phase) - consistent_kappa(pi / 2)), 0.0, 1e-12);
}

TEST(NlsSeed, SolvesCubicEquation) {
  for (double s : {-2.0, -0.3, 0.0, 0.9, 3.0})
    for (double t : {0.0, 0.7}) {
      const cplx q = nls_seed(s, t);
      const cplx res = cplx(0.0, 1.0) * nls_seed_rate(s, t) - nls_seed_ss(s, t) - 2.0 * q * std::norm(q);
      EXPECT_NEAR(std::abs(res), 0.0, 1e-14);
    }
  const double h = 1e-4;
  const cplx fd = (nls_seed(0.4 + h, 0.2) - 2.0 * nls_seed(0.4, 0.2) + nls_seed(0.4 - h, 0.2)) / (h * h);
  EXPECT_NEAR(std::abs(fd - nls_seed_ss(0.4, 0.2)), 0.0, 1e-6);
}

TEST(Shooting, ZeroSlopeIsTrivial) {
  ShootConfig cfg;
  cfg.grid = RadialGrid(200, 10.0);
  const Shot s = detail::shoot_once(0.0, 1.0, std::vector<double>(200, 0.0), cfg);
  EXPECT_EQ(s.kind, ShotKind::decays);
  for (double v : s.q) EXPECT_EQ(v, 0.0);
}

TEST(Shooting, ReportHasAllFields) {
  ShootConfig cfg;
  cfg.grid = RadialGrid(800, 12.0);
  cfg.outer_iterations = 3;
  cfg.curve_points = 5;
  const ShootReport rep = solitary_wave_shoot(1.0, cfg);
  const auto j = to_json(rep);
  for (const char* key : {"E", "alpha_bracket", "defect_curve", "converged", "reason", "outer_iterations", "fixed_point_gap",
                          "boundary_defect", "sigma_norms"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["defect_curve"].size(), 5u);
  EXPECT_EQ(rep.converged, rep.profile.has_value());
  EXPECT_EQ(rep.converged, rep.reason.empty());
}

TEST(Shooting, NegativeEnergyDoesNotConverge) {
  ShootConfig cfg;
  cfg.grid = RadialGrid(800, 12.0);
  cfg.outer_iterations = 3;
  const ShootReport rep = solitary_wave_shoot(-1.0, cfg);
  EXPECT_FALSE(rep.converged);
  EXPECT_FALSE(rep.reason.empty());
  EXPECT_FALSE(rep.profile.has_value());
}
