#pragma once

#include <cmath>
#include <concepts>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <string>
#include <vector>

#include "gaugelab/core/field.hpp"
#include "gaugelab/core/parallel.hpp"
#include "gaugelab/core/spectral.hpp"

namespace gaugelab {

/// Spectral Laplacian of each spin component. s1 and s2 share one complex
/// transform since the Laplacian symbol is real.
inline TangentField spin_laplacian(const SpinField& s) {
  const auto& g = s.grid();
  ComplexField2D packed(g);
  for (std::size_t k = 0; k < s.size(); ++k) packed[k] = cplx(s[0][k], s[1][k]);
  const auto l12 = spectral_derivative(packed, Derivative::laplacian);
  const auto l3 = spectral_derivative(to_complex(s[2]), Derivative::laplacian);
  TangentField out(g);
  for (std::size_t k = 0; k < s.size(); ++k) out.set(k, {l12[k].real(), l12[k].imag(), l3[k].real()});
  return out;
}

inline std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// s x laplacian(s).
inline TangentField ll_rhs(const SpinField& s) {
  const TangentField lap = spin_laplacian(s);
  TangentField out(s.grid());
  parallel_for(s.size(), [&](std::size_t k) { out.set(k, cross(s.at(k), lap.at(k))); });
  return out;
}

enum class LLScheme { projected_rk4, implicit_midpoint };

struct LLSolverConfig {
  double dt = 1e-3;
  LLScheme scheme = LLScheme::projected_rk4;
  double cfl_safety = 1.0;
  int renorm_every = 1;
  /// Largest | |s|^2 - 1 | tolerated before projection.
  double drift_tolerance = 1e-6;
  double midpoint_tolerance = 1e-12;
  int midpoint_max_iterations = 50;
};

inline void validate(const LLSolverConfig& cfg, const PeriodicGrid2D& grid) {
  if (!(cfg.dt > 0.0)) throw InvalidInput("LLSolverConfig: dt must be positive");
  if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0)) throw InvalidInput("LLSolverConfig: cfl_safety in (0,1]");
  if (cfg.renorm_every < 1) throw InvalidInput("LLSolverConfig: renorm_every >= 1");
  const double limit = cfg.cfl_safety * grid.dx() * grid.dx() / 4.0;
  if (cfg.scheme == LLScheme::projected_rk4 && cfg.dt > limit * (1.0 + 1e-12))
    throw InvalidInput("LLSolverConfig: dt exceeds cfl_safety * dx^2 / 4");
}

namespace detail {

inline SpinField axpy(const SpinField& s, double c, const TangentField& k) {
  SpinField out(s.grid());
  for (int a = 0; a < 3; ++a)
    for (std::size_t n = 0; n < s.size(); ++n) out[a][n] = s[a][n] + c * k[a][n];
  return out;
}

inline SpinField rk4_step(const SpinField& s, double dt) {
  const auto k1 = ll_rhs(s);
  const auto k2 = ll_rhs(axpy(s, dt / 2, k1));
  const auto k3 = ll_rhs(axpy(s, dt / 2, k2));
  const auto k4 = ll_rhs(axpy(s, dt, k3));
  SpinField out(s.grid());
  for (int a = 0; a < 3; ++a)
    for (std::size_t n = 0; n < s.size(); ++n)
      out[a][n] = s[a][n] + dt / 6.0 * (k1[a][n] + 2.0 * k2[a][n] + 2.0 * k3[a][n] + k4[a][n]);
  return out;
}

inline SpinField midpoint_step(const SpinField& s, const LLSolverConfig& cfg, double dt) {
  SpinField next = s;
  for (int it = 0; it < cfg.midpoint_max_iterations; ++it) {
    SpinField mid(s.grid());
    for (int a = 0; a < 3; ++a)
      for (std::size_t n = 0; n < s.size(); ++n) mid[a][n] = 0.5 * (s[a][n] + next[a][n]);
    SpinField candidate = axpy(s, dt, ll_rhs(mid));
    double change = 0.0;
    for (int a = 0; a < 3; ++a)
      for (std::size_t n = 0; n < s.size(); ++n) change = std::max(change, std::abs(candidate[a][n] - next[a][n]));
    next = std::move(candidate);
    if (change <= cfg.midpoint_tolerance) return next;
  }
  throw InstabilityError("implicit midpoint: fixed-point iteration did not converge");
}

}  // namespace detail

/// One step of size cfg.dt. step_index selects whether this step projects
/// back onto the sphere (every renorm_every-th step). drift, when given,
/// receives max | |s|^2 - 1 | before projection.
inline SpinField ll_step(const SpinField& s, const LLSolverConfig& cfg, std::size_t step_index = 0,
                         std::optional<double> dt_override = std::nullopt, double* drift = nullptr) {
  validate(cfg, s.grid());
  const double dt = dt_override.value_or(cfg.dt);
  if (cfg.scheme == LLScheme::projected_rk4 && dt > cfg.dt * (1.0 + 1e-12))
    throw InvalidInput("ll_step: step larger than the configured dt");
  SpinField next = cfg.scheme == LLScheme::projected_rk4 ? detail::rk4_step(s, dt) : detail::midpoint_step(s, cfg, dt);
  if (!next.all_finite()) throw InstabilityError("ll_step: non-finite spin values");
  const double dev = constraint_deviation(next);
  if (drift) *drift = dev;
  if (dev > cfg.drift_tolerance)
    throw InstabilityError("ll_step: |s| drifted beyond tolerance before projection");
  if ((step_index + 1) % static_cast<std::size_t>(cfg.renorm_every) == 0) normalize(next);
  return next;
}

/// Dirichlet energy int |grad s|^2.
inline double ll_energy(const SpinField& s) {
  double e = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double v = sobolev_seminorm(to_complex(s[a]), 1);
    e += v * v;
  }
  return e;
}

inline std::array<double, 3> spin_integral(const SpinField& s) {
  return {integrate(s[0]), integrate(s[1]), integrate(s[2])};
}

struct LLLogRow {
  double t, h1, h2, h3, energy, constraint_max_dev;
};

inline LLLogRow ll_log_row(const SpinField& s, double t) {
  return {t, sobolev_norm(s, 1), sobolev_norm(s, 2), sobolev_norm(s, 3), ll_energy(s), constraint_deviation(s)};
}

inline void write_ll_log(const std::filesystem::path& path, const std::vector<LLLogRow>& rows) {
  std::ofstream os(path);
  if (!os) throw IoError("write_ll_log: cannot open " + path.string());
  os << "t,H1,H2,H3,energy,constraint_max_dev\n" << std::setprecision(17);
  for (const auto& r : rows)
    os << r.t << ',' << r.h1 << ',' << r.h2 << ',' << r.h3 << ',' << r.energy << ',' << r.constraint_max_dev << '\n';
}

struct LLAdaptive {
  bool enabled = false;
  double dt_min = 1e-8;
};

/// Owns one spin state and advances it. With adaptive stepping enabled, dt is
/// halved whenever the H^2 norm doubles relative to the last reference, down
/// to dt_min.
class LLSolver {
 public:
  enum class Status { running, resolution_exhausted };

  LLSolver(SpinField s0, LLSolverConfig cfg, double t0 = 0.0, LLAdaptive adaptive = {})
      : s_(std::move(s0)), cfg_(cfg), t_(t0), dt_(cfg.dt), adaptive_(adaptive) {
    validate(cfg_, s_.grid());
    if (constraint_deviation(s_) > 1e-12) normalize(s_);
    if (adaptive_.enabled) h2_ref_ = sobolev_norm(s_, 2);
  }

  const SpinField& state() const noexcept { return s_; }
  double time() const noexcept { return t_; }
  double dt() const noexcept { return dt_; }
  Status status() const noexcept { return status_; }
  std::size_t steps() const noexcept { return steps_; }
  /// Largest pre-projection | |s|^2 - 1 | over all steps taken.
  double max_drift() const noexcept { return max_drift_; }
  const std::vector<LLLogRow>& log() const noexcept { return log_; }

  /// Advances to t_end with a uniform step no larger than the current dt,
  /// logging every log_every steps (0 disables logging).
  void advance(double t_end, std::size_t log_every = 0) {
    if (log_every > 0 && log_.empty()) log_.push_back(ll_log_row(s_, t_));
    while (t_ < t_end && status_ == Status::running) {
      const double span = t_end - t_;
      const auto n = static_cast<std::size_t>(std::ceil(span / dt_ - 1e-9));
      const double h = span / static_cast<double>(n);
      bool restarted = false;
      for (std::size_t i = 0; i < n; ++i) {
        double dev = 0.0;
        s_ = ll_step(s_, cfg_, steps_, h, &dev);
        max_drift_ = std::max(max_drift_, dev);
        ++steps_;
        t_ = (i + 1 == n) ? t_end : t_ + h;
        if (log_every > 0 && steps_ % log_every == 0) log_.push_back(ll_log_row(s_, t_));
        if (adaptive_.enabled && refine()) {
          restarted = true;
          break;
        }
      }
      if (!restarted) break;
    }
    if (log_every > 0 && log_.back().t != t_) log_.push_back(ll_log_row(s_, t_));
  }

 private:
  bool refine() {
    const double h2 = sobolev_norm(s_, 2);
    if (h2 <= 2.0 * h2_ref_) return false;
    h2_ref_ = h2;
    dt_ /= 2.0;
    if (dt_ < adaptive_.dt_min) status_ = Status::resolution_exhausted;
    return true;
  }

  SpinField s_;
  LLSolverConfig cfg_;
  double t_;
  double dt_;
  LLAdaptive adaptive_;
  double h2_ref_ = 0.0;
  Status status_ = Status::running;
  std::size_t steps_ = 0;
  double max_drift_ = 0.0;
  std::vector<LLLogRow> log_;
};

/// Anything that can supply a spin field and its exact time derivative.
template <class P>
concept SpinProvider = requires(const P& p, double t) {
  { p.spin(t) } -> std::convertible_to<SpinField>;
  { p.spin_rate(t) } -> std::convertible_to<TangentField>;
};

/// Optional square window |x|, |y| <= half_width for the residual maximum.
struct ResidualWindow {
  double half_width = 0.0;
};

/// max over nodes of |d_t s - s x laplacian(s)|.
template <SpinProvider P>
double ll_residual(const P& provider, double t, std::optional<ResidualWindow> window = std::nullopt) {
  const SpinField s = provider.spin(t);
  const TangentField rate = provider.spin_rate(t);
  const TangentField rhs = ll_rhs(s);
  const auto& g = s.grid();
  double worst = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      if (window && (std::abs(g.coord(i)) > window->half_width || std::abs(g.coord(j)) > window->half_width))
        continue;
      const std::size_t k = g.index(i, j);
      const double d = std::sqrt(std::pow(rate[0][k] - rhs[0][k], 2) + std::pow(rate[1][k] - rhs[1][k], 2) +
                                 std::pow(rate[2][k] - rhs[2][k], 2));
      worst = std::max(worst, d);
    }
  return worst;
}

}  // namespace gaugelab
