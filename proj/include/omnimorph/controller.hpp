#pragma once

// Two-loop tracking controller: PD-plus-feedforward reference acceleration,
// then input selection by solving a box QP at three candidate tilt angles
// (hold, step down, step up by the per-period tilt rate) and keeping the
// cheapest.

#include "omnimorph/geometry.hpp"
#include "omnimorph/optimizer.hpp"
#include "omnimorph/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>

namespace omnimorph {

using Mat6 = Eigen::Matrix<double, 6, 6>;

struct ControlGains {
  Mat3 Kp1 = Mat3::Identity() * 30.0;   // velocity error, 1/s
  Mat3 Kp2 = Mat3::Identity() * 300.0;  // position error, 1/s^2
  Mat3 Kw1 = Mat3::Identity() * 40.0;   // rate error, 1/s
  Mat3 Kw2 = Mat3::Identity() * 100.0;  // attitude error, 1/s^2
};

struct OptWeights {
  Mat8 W1 = Mat8::Identity() * 1e-8;  // input magnitude
  Mat6 W2 = Mat6::Identity();         // acceleration tracking
  Mat8 W3 = Mat8::Identity() * 1e-5;  // input change
};

inline ControlGains default_gains() { return ControlGains{}; }

// Tracking-first preset: stiff acceleration weights, negligible input cost.
inline OptWeights case_a_weights() {
  OptWeights w;
  w.W1 = Mat8::Identity() * 1e-8;
  w.W2 = Vec6(3e6, 3e6, 3e6, 1e3, 1e3, 1e3).asDiagonal();
  w.W3 = Mat8::Identity() * 1e-5;
  return w;
}

// Effort-aware preset: softer tracking, noticeable input cost.
inline OptWeights case_b_weights() {
  OptWeights w;
  w.W1 = Mat8::Identity() * 1e-5;
  w.W2 = Vec6(3e4, 3e4, 3e4, 10, 10, 10).asDiagonal();
  w.W3 = Mat8::Identity() * 1e-5;
  return w;
}

struct ControllerState {
  double alpha_prev = 0.0;
  Vec8 u_w_prev = Vec8::Zero();
  QpActiveSet warm_start{};
};

struct ControlSolution {
  double alpha = 0.0;
  Vec8 u_w = Vec8::Zero();
  double cost = 0.0;          // full objective at the selected candidate
  Vec6 qddot_ref = Vec6::Zero();
  int candidates_solved = 0;
  bool ok = false;            // false when every candidate QP failed
};

// Rotation error e_R = 1/2 vee(R' R_d - R_d' R); zero iff R = R_d for
// rotations within a half turn of each other.
inline Vec3 attitude_error(const Mat3& R, const Mat3& R_d) {
  const Mat3 E = R.transpose() * R_d - R_d.transpose() * R;
  return 0.5 * Vec3(E(2, 1), E(0, 2), E(1, 0));
}

// PD feedback plus feedforward, stacked [translational; rotational].
inline Vec6 reference_accel(const RigidBodyState& state, const FlatReference& ref,
                            const ControlGains& gains) {
  Vec6 q;
  q.head<3>() = ref.a_d + gains.Kp1 * (ref.v_d - state.v) + gains.Kp2 * (ref.p_d - state.p);
  q.tail<3>() = ref.dw_d + gains.Kw1 * (ref.w_d - state.w) +
                gains.Kw2 * attitude_error(state.R, ref.R_d);
  return q;
}

namespace detail {

// q..  = Minv_h + G u_w  with M = diag(mI, J), h = [-m g e3; -w x Jw],
// and the wrench rotated by diag(R, I).
struct ReducedModel {
  Eigen::Matrix<double, 6, 8> G;
  Vec6 Minv_h;
};

inline ReducedModel reduced_model(const PlatformParams& params, const PropellerLayout& layout,
                                  double alpha, const RigidBodyState& state) {
  const Mat68 A = allocation_matrix(params, layout, alpha);
  const Mat3 J_inv = params.J.inverse();
  ReducedModel m;
  m.G.topRows<3>() = (state.R * A.topRows<3>()) / params.m;
  m.G.bottomRows<3>() = J_inv * A.bottomRows<3>();
  m.Minv_h.head<3>() = Vec3(0, 0, -params.g);
  m.Minv_h.tail<3>() = J_inv * (-state.w.cross(params.J * state.w));
  return m;
}

inline BoxQP assemble_qp(const ReducedModel& model, const Vec6& qddot_ref,
                         const OptWeights& weights, const Vec8& u_w_prev, double u_w_max) {
  const Vec6 r = qddot_ref - model.Minv_h;
  BoxQP qp;
  qp.H = 2.0 * (weights.W1 + model.G.transpose() * weights.W2 * model.G + weights.W3);
  qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();  // exact symmetry for Cholesky
  qp.g = -2.0 * (model.G.transpose() * (weights.W2 * r) + weights.W3 * u_w_prev);
  qp.lower = Vec8::Constant(-u_w_max);
  qp.upper = Vec8::Constant(u_w_max);
  return qp;
}

}  // namespace detail

// Quadratic program over the eight inputs after eliminating the
// acceleration through the rigid-body model at tilt alpha_bar.
inline BoxQP build_reduced_qp(const PlatformParams& params, const PropellerLayout& layout,
                              double alpha_bar, const RigidBodyState& state,
                              const Vec6& qddot_ref, const OptWeights& weights,
                              const Vec8& u_w_prev) {
  const detail::ReducedModel model = detail::reduced_model(params, layout, alpha_bar, state);
  return detail::assemble_qp(model, qddot_ref, weights, u_w_prev, params.u_w_max);
}

// One control decision: pick (alpha*, u_w*) minimizing the full objective
// over the admissible tilt candidates. Ties resolve to the smallest tilt.
inline ControlSolution control_step(const PlatformParams& params, const PropellerLayout& layout,
                                    const ControlGains& gains, const OptWeights& weights,
                                    const RigidBodyState& state, const FlatReference& ref,
                                    ControllerState& ctrl, bool freeze_alpha = false) {
  ControlSolution sol;
  sol.qddot_ref = reference_accel(state, ref, gains);

  double cands[3];
  int n_cands = 0;
  if (freeze_alpha) {
    cands[n_cands++] = ctrl.alpha_prev;
  } else {
    for (double a : {ctrl.alpha_prev - params.eps_alpha, ctrl.alpha_prev,
                     ctrl.alpha_prev + params.eps_alpha}) {
      const double clamped = std::min(params.alpha_max, std::max(params.alpha_min, a));
      bool dup = false;
      for (int i = 0; i < n_cands; ++i) dup = dup || (cands[i] == clamped);
      if (!dup) cands[n_cands++] = clamped;
    }
    std::sort(cands, cands + n_cands);
  }

  double best_cost = std::numeric_limits<double>::infinity();
  QpActiveSet best_active{};
  for (int i = 0; i < n_cands; ++i) {
    const detail::ReducedModel model = detail::reduced_model(params, layout, cands[i], state);
    const BoxQP qp = detail::assemble_qp(model, sol.qddot_ref, weights, ctrl.u_w_prev,
                                         params.u_w_max);
    const QpResult res = solve_box_qp(qp, 1e-9, &ctrl.warm_start);
    if (!res.converged) continue;
    ++sol.candidates_solved;
    const Vec6 r = sol.qddot_ref - model.Minv_h;
    const double full_cost =
        res.cost + r.dot(weights.W2 * r) + ctrl.u_w_prev.dot(weights.W3 * ctrl.u_w_prev);
    if (full_cost < best_cost) {  // strict: ascending candidates keep the smallest tilt on ties
      best_cost = full_cost;
      sol.alpha = cands[i];
      sol.u_w = res.x;
      sol.cost = full_cost;
      best_active = res.active;
      sol.ok = true;
    }
  }

  if (sol.ok) {
    ctrl.alpha_prev = sol.alpha;
    ctrl.u_w_prev = sol.u_w;
    ctrl.warm_start = best_active;
  }
  return sol;
}

}  // namespace omnimorph
