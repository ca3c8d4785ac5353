#pragma once

// Hover inputs, motor power model, energy accounting, and the break-even
// mass-fraction curve comparing a tilting design against a fixed-tilt one.

#include "omnimorph/geometry.hpp"
#include "omnimorph/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace omnimorph {

struct HoverResult {
  Vec8 u_w = Vec8::Zero();
  double residual = 0.0;  // || A u - [m g e3; 0] ||
  bool achievable = false;
};

// Minimum-norm squared-speed vector producing the pure weight-supporting
// wrench [m g e3; 0] at the given tilt. Pseudo-inverse with a relative
// singular-value cutoff, so the rank-deficient alpha = 0 case still returns
// the symmetric solution.
inline HoverResult hover_input(const PlatformParams& params, const PropellerLayout& layout,
                               double alpha, double mass, double tol = 1e-9) {
  const Mat68 A = allocation_matrix(params, layout, alpha);
  Vec6 wrench = Vec6::Zero();
  wrench[2] = mass * params.g;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(A),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  HoverResult out;
  out.u_w = svd.solve(wrench);
  out.residual = (A * out.u_w - wrench).norm();
  out.achievable = out.residual < tol * std::max(1.0, wrench.norm());
  return out;
}

// Shaft power drawn by all motors: c_tau * sum |u_w,i|^(3/2).
inline double motor_power(const PlatformParams& params, const Vec8& u_w) {
  double acc = 0.0;
  for (int i = 0; i < kNumProps; ++i) acc += std::pow(std::abs(u_w[i]), 1.5);
  return params.c_tau * acc;
}

// Largest added-mass fraction for which hovering flat (tilt 0) with the
// extra mass costs no more power than hovering tilted at alpha_f with the
// base mass. Dimensionless; independent of c_f, c_tau, and the base mass.
inline double delta_m_bar(const PlatformParams& params, const PropellerLayout& layout,
                          double alpha_f) {
  if (!(alpha_f >= 0.0 && alpha_f < kPi / 2.0))
    throw std::invalid_argument("delta_m_bar: alpha_f must lie in [0, pi/2)");
  const HoverResult tilted = hover_input(params, layout, alpha_f, 1.0);
  const HoverResult flat = hover_input(params, layout, 0.0, 1.0);
  if (!tilted.achievable || !flat.achievable)
    throw std::runtime_error("delta_m_bar: hover wrench not achievable at requested tilt");
  double p_tilted = 0.0, p_flat = 0.0;
  for (int i = 0; i < kNumProps; ++i) {
    p_tilted += std::pow(std::abs(tilted.u_w[i]), 1.5);
    p_flat += std::pow(std::abs(flat.u_w[i]), 1.5);
  }
  // Hover inputs scale linearly with mass and power with |u|^(3/2), so the
  // implicit power-balance equation solves in closed form.
  return std::pow(p_tilted / p_flat, 2.0 / 3.0) - 1.0;
}

struct EnergyAccount {
  double drag_energy = 0.0;       // J, time-integral of motor power
  double prop_accel_energy = 0.0; // J, positive spin-up kinetic-energy increments
  std::vector<double> per_step_power;  // W, one sample per accumulate call
};

// Advance the account across one control period. Spin kinetic energy uses
// w^2 = |u_w|; only positive increments are charged (motors do not
// regenerate when decelerating).
inline void accumulate_energy(EnergyAccount& account, const PlatformParams& params,
                              const Vec8& u_w_prev, const Vec8& u_w_cur, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("accumulate_energy: dt must be positive");
  const double power = motor_power(params, u_w_cur);
  account.drag_energy += power * dt;
  account.per_step_power.push_back(power);
  for (int i = 0; i < kNumProps; ++i) {
    const double dk = 0.5 * params.I_p * (std::abs(u_w_cur[i]) - std::abs(u_w_prev[i]));
    account.prop_accel_energy += std::max(0.0, dk);
  }
}

}  // namespace omnimorph
