#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaugelab/core/radial.hpp"

namespace gaugelab {

/// Real profiles of q'' + q'/rho - q/rho^2 - E q + 2 q^3 - 4 q I[q] = 0,
/// I[q](rho) = int_rho^inf q^2 / tau, by shooting on q ~ alpha rho.
struct ShootConfig {
  RadialGrid grid{4000, 20.0};
  double alpha_start = 1.0;
  double bracket_limit = 1e6;
  int bisection_steps = 200;
  int outer_iterations = 60;
  double defect_tolerance = 1e-8;
  double fixed_point_tolerance = 1e-8;
  /// Trajectories with |q| beyond this are treated as escaping.
  double escape = 10.0;
  int curve_points = 41;
  /// Under-relaxation of the tail update, 1 = plain substitution.
  double relaxation = 0.5;
};

enum class ShotKind { decays, crosses_zero, escapes };

struct Shot {
  ShotKind kind = ShotKind::decays;
  std::vector<double> q;  ///< on the grid nodes up to `stop`, zero beyond
  int stop = 0;           ///< first node where the trajectory was classified
  double defect = 0.0;    ///< |q| at the truncation node
};

struct ShootReport {
  double e = 0.0;
  bool converged = false;
  std::string reason;
  std::pair<double, double> alpha_bracket{0.0, 0.0};
  std::vector<std::pair<double, double>> defect_curve;  ///< (alpha, defect) for the frozen-tail problem of the last outer iterate
  int outer_iterations = 0;
  double fixed_point_gap = 0.0;
  double defect = 0.0;
  std::optional<RadialProfile> profile;
  /// Discrete W^{1,sigma} norms for sigma = 2, 4, 6.
  std::vector<std::pair<double, double>> sigma_norms;
};

namespace detail {

inline double interp_linear(const std::vector<double>& v, const RadialGrid& g, double rho) {
  const double s = rho / g.h() - 0.5;
  if (s <= 0.0) return v.front();
  const int j = static_cast<int>(s);
  if (j + 1 >= g.size()) return v.back();
  const double w = s - j;
  return (1.0 - w) * v[j] + w * v[j + 1];
}

/// RK4 along the nodes with the tail frozen.
inline Shot shoot_once(double alpha, double e, const std::vector<double>& tail, const ShootConfig& cfg) {
  const auto& g = cfg.grid;
  Shot out;
  out.q.assign(g.size(), 0.0);
  if (alpha == 0.0) {
    out.stop = g.size() - 1;
    return out;
  }
  auto rhs = [&](double r, double q, double dq) {
    return -dq / r + q / (r * r) + e * q - 2.0 * q * q * q + 4.0 * q * interp_linear(tail, g, r);
  };
  double r = g.rho(0), q = alpha * r, dq = alpha;
  const double h = g.h();
  const double sign = alpha > 0.0 ? 1.0 : -1.0;
  bool falling = false;
  out.q[0] = q;
  for (int j = 1; j < g.size(); ++j) {
    const double k1q = dq, k1d = rhs(r, q, dq);
    const double k2q = dq + h / 2 * k1d, k2d = rhs(r + h / 2, q + h / 2 * k1q, dq + h / 2 * k1d);
    const double k3q = dq + h / 2 * k2d, k3d = rhs(r + h / 2, q + h / 2 * k2q, dq + h / 2 * k2d);
    const double k4q = dq + h * k3d, k4d = rhs(r + h, q + h * k3q, dq + h * k3d);
    q += h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
    dq += h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d);
    r += h;
    if (sign * q < 0.0) {
      out.kind = ShotKind::crosses_zero;
      out.stop = j;
      out.defect = std::abs(out.q[j - 1]);
      return out;
    }
    // Turning back up before reaching zero, or blowing up, means escape.
    if (sign * dq < 0.0) falling = true;
    if (std::abs(q) > cfg.escape || (falling && sign * dq > 0.0)) {
      out.kind = ShotKind::escapes;
      out.stop = j;
      out.defect = std::abs(out.q[j - 1]);
      return out;
    }
    out.q[j] = q;
  }
  out.stop = g.size() - 1;
  out.defect = std::abs(q);
  return out;
}

inline std::vector<double> tail_of(const std::vector<double>& q, const RadialGrid& g) {
  RadialProfile p(g);
  for (int j = 0; j < g.size(); ++j) p[j] = q[j];
  return nonlocal_tail(p, TailRule::fourth_order);
}

}  // namespace detail

/// Outer iteration on the frozen tail around a bisection on alpha between
/// a zero-crossing shot and an escaping one.
inline ShootReport solitary_wave_shoot(double e, const ShootConfig& cfg = {}) {
  const auto& g = cfg.grid;
  ShootReport rep;
  rep.e = e;
  std::vector<double> tail(g.size(), 0.0);
  Shot best;
  for (int outer = 0; outer < cfg.outer_iterations; ++outer) {
    rep.outer_iterations = outer + 1;
    // Bracket: small alpha escapes (linear growth), large alpha crosses zero.
    double lo = cfg.alpha_start, hi = cfg.alpha_start;
    ShotKind klo = detail::shoot_once(lo, e, tail, cfg).kind;
    ShotKind khi = klo;
    while (khi != ShotKind::crosses_zero && hi < cfg.bracket_limit) khi = detail::shoot_once(hi *= 2.0, e, tail, cfg).kind;
    while (klo == ShotKind::crosses_zero && lo > 1.0 / cfg.bracket_limit) klo = detail::shoot_once(lo /= 2.0, e, tail, cfg).kind;
    rep.defect_curve.clear();
    for (int k = 0; k < cfg.curve_points; ++k) {
      const double a = std::exp(std::log(std::max(lo, 1e-6)) +
                                (std::log(std::min(hi, cfg.bracket_limit)) - std::log(std::max(lo, 1e-6))) * k /
                                    std::max(1, cfg.curve_points - 1));
      rep.defect_curve.emplace_back(a, detail::shoot_once(a, e, tail, cfg).defect);
    }
    if (khi != ShotKind::crosses_zero || klo == ShotKind::crosses_zero) {
      rep.reason = "no sign change of the shot classification within the bracket limit";
      rep.alpha_bracket = {lo, hi};
      return rep;
    }
    for (int it = 0; it < cfg.bisection_steps && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (detail::shoot_once(mid, e, tail, cfg).kind == ShotKind::crosses_zero ? hi : lo) = mid;
    }
    rep.alpha_bracket = {lo, hi};
    best = detail::shoot_once(lo, e, tail, cfg);
    for (int j = best.stop; j < g.size(); ++j) best.q[j] = 0.0;
    const auto next = detail::tail_of(best.q, g);
    double gap = 0.0;
    for (int j = 0; j < g.size(); ++j) gap = std::max(gap, std::abs(next[j] - tail[j]));
    rep.fixed_point_gap = gap;
    rep.defect = best.defect;
    if (!std::isfinite(gap)) {
      rep.reason = "outer iteration diverged";
      return rep;
    }
    for (int j = 0; j < g.size(); ++j) tail[j] += cfg.relaxation * (next[j] - tail[j]);
    if (gap <= cfg.fixed_point_tolerance) break;
  }
  if (rep.fixed_point_gap > cfg.fixed_point_tolerance) {
    rep.reason = "outer iteration did not reach a fixed point";
    return rep;
  }
  if (rep.defect > cfg.defect_tolerance) {
    rep.reason = "boundary defect above tolerance (profile truncated where the shot departs)";
    return rep;
  }
  RadialProfile prof(g);
  for (int j = 0; j < g.size(); ++j) prof[j] = best.q[j];
  const auto der = radial_derivatives(prof);
  for (double sigma : {2.0, 4.0, 6.0})
    rep.sigma_norms.emplace_back(sigma, std::pow(radial_lp_integral(prof.values(), g, sigma) +
                                                     radial_lp_integral(der.d1, g, sigma),
                                                 1.0 / sigma));
  rep.profile = std::move(prof);
  rep.converged = true;
  return rep;
}

inline nlohmann::json to_json(const ShootReport& r) {
  nlohmann::json j;
  j["E"] = r.e;
  j["alpha_bracket"] = {r.alpha_bracket.first, r.alpha_bracket.second};
  j["defect_curve"] = nlohmann::json::array();
  for (const auto& [a, d] : r.defect_curve) j["defect_curve"].push_back({a, d});
  j["converged"] = r.converged;
  j["reason"] = r.reason;
  j["outer_iterations"] = r.outer_iterations;
  j["fixed_point_gap"] = r.fixed_point_gap;
  j["boundary_defect"] = r.defect;
  j["sigma_norms"] = nlohmann::json::array();
  for (const auto& [s, v] : r.sigma_norms) j["sigma_norms"].push_back({s, v});
  return j;
}

inline void write_shoot_report(const std::filesystem::path& path, const ShootReport& r) {
  std::ofstream os(path);
  if (!os) throw IoError("write_shoot_report: cannot open " + path.string());
  os << to_json(r).dump(2) << '\n';
}

}  // namespace gaugelab
