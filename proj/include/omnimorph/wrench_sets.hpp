#pragma once

// Feasible-force analysis under the symmetric input box: directional
// support values, the inscribed-sphere radius of the (optionally
// zero-torque) force set, and the tilt interval over which the platform can
// hover in any orientation.

#include "omnimorph/geometry.hpp"
#include "omnimorph/optimizer.hpp"
#include "omnimorph/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace omnimorph {

// Deterministic, nearly uniform unit directions (golden-angle spiral).
inline std::vector<Vec3> fibonacci_directions(int n) {
  if (n < 1) throw std::invalid_argument("fibonacci_directions: n must be positive");
  std::vector<Vec3> dirs;
  dirs.reserve(n);
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - 2.0 * (k + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * k;
    dirs.emplace_back(Vec3(r * std::cos(phi), r * std::sin(phi), z).normalized());
  }
  return dirs;
}

struct SupportResult {
  double value = 0.0;  // N, largest achievable force magnitude along dir
  Vec8 u_w = Vec8::Zero();
};

// max lambda s.t. A_f u = lambda * dir (and A_tau u = 0 when zero_torque),
// |u_i| <= u_w_max. lambda = 0 with u = 0 is always feasible.
inline SupportResult support_force(const PlatformParams& params, const PropellerLayout& layout,
                                   double alpha, const Vec3& dir, bool zero_torque) {
  if (std::abs(dir.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("support_force: dir must be unit-norm");

  const Mat68 A = allocation_matrix(params, layout, alpha);
  const int m = zero_torque ? 6 : 3;
  const int n = kNumProps + 1;  // eight speeds plus the force magnitude

  BoundedLP lp;
  lp.A_eq.setZero(m, n);
  lp.A_eq.block(0, 0, 3, kNumProps) = A.topRows<3>();
  lp.A_eq.block(0, kNumProps, 3, 1) = -dir;
  if (zero_torque) lp.A_eq.block(3, 0, 3, kNumProps) = A.bottomRows<3>();
  lp.b_eq = Eigen::VectorXd::Zero(m);
  lp.c = Eigen::VectorXd::Zero(n);
  lp.c[kNumProps] = 1.0;
  lp.lower = Eigen::VectorXd::Constant(n, -params.u_w_max);
  lp.upper = Eigen::VectorXd::Constant(n, params.u_w_max);
  lp.lower[kNumProps] = 0.0;
  // Total thrust can never exceed the sum of the per-propeller maxima.
  lp.upper[kNumProps] = 8.0 * params.c_f * params.u_w_max;

  const LpResult sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal)
    throw std::logic_error("support_force: LP must be feasible (u = 0 attains lambda = 0)");

  SupportResult out;
  out.value = sol.value;
  out.u_w = sol.x.head<8>();
  return out;
}

// Radius of the largest origin-centered sphere inside the zero-torque force
// set, estimated as the minimum support over a direction sample; converges
// to the true radius from above as n_dirs grows.
inline double inscribed_force_radius(const PlatformParams& params, const PropellerLayout& layout,
                                     double alpha, int n_dirs = 400) {
  if (n_dirs < 50) throw std::invalid_argument("inscribed_force_radius: need at least 50 directions");
  double r = std::numeric_limits<double>::infinity();
  for (const Vec3& dir : fibonacci_directions(n_dirs))
    r = std::min(r, support_force(params, layout, alpha, dir, true).value);
  return r;
}

namespace detail {

// Early-exit variant: false as soon as any sampled support drops below the
// threshold. Same direction set as inscribed_force_radius.
inline bool inscribed_radius_at_least(const PlatformParams& params, const PropellerLayout& layout,
                                      double alpha, int n_dirs, double threshold) {
  for (const Vec3& dir : fibonacci_directions(n_dirs)) {
    if (support_force(params, layout, alpha, dir, true).value < threshold) return false;
  }
  return true;
}

}  // namespace detail

struct OmniInterval {
  double alpha_lo = 0.0;
  double alpha_hi = 0.0;
};

// Tilt angles (on a grid over [0, pi/2], clipped to the configured tilt
// range) where the platform can support its weight in every orientation:
// inscribed zero-torque force radius >= m g and vertical hover margin
// 8 c_f u_w_max cos(alpha) >= m g.
inline std::optional<OmniInterval> omni_alpha_interval(const PlatformParams& params,
                                                       const PropellerLayout& layout,
                                                       double grid_step, int n_dirs = 400) {
  if (!(grid_step > 0.0 && grid_step <= deg2rad(1.0) + 1e-12))
    throw std::invalid_argument("omni_alpha_interval: grid_step must be in (0, 1 deg]");
  const double weight = params.m * params.g;

  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
  for (double alpha = 0.0; alpha <= kPi / 2.0 + 1e-12; alpha += grid_step) {
    const bool vertical_ok = 8.0 * params.c_f * params.u_w_max * std::cos(alpha) >= weight;
    if (!vertical_ok) continue;  // cheap test first
    if (!detail::inscribed_radius_at_least(params, layout, alpha, n_dirs, weight)) continue;
    if (std::isnan(lo)) lo = alpha;
    hi = alpha;
  }
  if (std::isnan(lo)) return std::nullopt;

  OmniInterval out;
  out.alpha_lo = std::max(lo, params.alpha_min);
  out.alpha_hi = std::min(hi, params.alpha_max);
  if (out.alpha_lo > out.alpha_hi + 1e-12) return std::nullopt;
  return out;
}

}  // namespace omnimorph
