#pragma once

// Ground-truth rigid-body plant: Newton-Euler dynamics driven by the
// allocation map, classical RK4 with rotation re-projection, and the
// closed-loop scenario runner producing a fixed-schema trace.

#include "omnimorph/controller.hpp"
#include "omnimorph/energy.hpp"
#include "omnimorph/geometry.hpp"
#include "omnimorph/trajectory.hpp"
#include "omnimorph/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace omnimorph {

struct PlantConfig {
  double cf_scale = 1.0;   // thrust-coefficient degradation applied by the plant only
  double dt_sim = 1e-3;    // s
  int steps_per_ctrl = 4;  // dt_ctrl = dt_sim * steps_per_ctrl
  double divergence_pos_limit = 100.0;  // m of position error treated as divergence

  void validate(double dt_ctrl) const {
    if (!(cf_scale > 0.0 && cf_scale <= 1.0))
      throw std::invalid_argument("PlantConfig: cf_scale must be in (0, 1]");
    if (!(dt_sim > 0.0) || steps_per_ctrl < 1)
      throw std::invalid_argument("PlantConfig: dt_sim must be positive, steps_per_ctrl >= 1");
    if (std::abs(dt_sim * steps_per_ctrl - dt_ctrl) > 1e-12)
      throw std::invalid_argument("PlantConfig: dt_ctrl must equal dt_sim * steps_per_ctrl");
  }
};

struct SimDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Body wrench delivered by the plant; the controller plans with nominal
// coefficients while the plant scales the whole map by cf_scale.
inline Vec6 body_wrench(const PlatformParams& params, const PropellerLayout& layout,
                        const PlantConfig& plant, double alpha, const Vec8& u_w) {
  return plant.cf_scale * (allocation_matrix(params, layout, alpha) * u_w);
}

struct StateDerivative {
  Vec3 dp, dv;
  Mat3 dR;
  Vec3 dw;
};

inline StateDerivative state_derivative(const PlatformParams& params, const RigidBodyState& st,
                                        const Vec6& wrench) {
  StateDerivative d;
  d.dp = st.v;
  d.dv = Vec3(0, 0, -params.g) + st.R * wrench.head<3>() / params.m;
  d.dR = st.R * skew(st.w);
  d.dw = params.J.inverse() * (wrench.tail<3>() - st.w.cross(params.J * st.w));
  return d;
}

namespace detail {

// Nearest rotation matrix (polar projection via SVD).
inline Mat3 reorthonormalize(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 R = svd.matrixU() * svd.matrixV().transpose();
  if (R.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    R = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return R;
}

inline bool finite(const RigidBodyState& st) {
  return st.p.allFinite() && st.v.allFinite() && st.R.allFinite() && st.w.allFinite();
}

}  // namespace detail

// RK4 on a fixed body wrench (used both by the closed loop, which slews the
// tilt between substeps, and by open-loop tests). Throws SimDivergence on a
// non-finite result.
inline RigidBodyState rk4_step_wrench(const PlatformParams& params, const RigidBodyState& st,
                                      const Vec6& wrench, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  auto add = [](const RigidBodyState& s, const StateDerivative& d, double h) {
    RigidBodyState out;
    out.p = s.p + h * d.dp;
    out.v = s.v + h * d.dv;
    out.R = s.R + h * d.dR;
    out.w = s.w + h * d.dw;
    return out;
  };
  const StateDerivative k1 = state_derivative(params, st, wrench);
  const StateDerivative k2 = state_derivative(params, add(st, k1, dt / 2), wrench);
  const StateDerivative k3 = state_derivative(params, add(st, k2, dt / 2), wrench);
  const StateDerivative k4 = state_derivative(params, add(st, k3, dt), wrench);

  RigidBodyState out;
  out.p = st.p + dt / 6.0 * (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp);
  out.v = st.v + dt / 6.0 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
  out.R = detail::reorthonormalize(st.R + dt / 6.0 * (k1.dR + 2 * k2.dR + 2 * k3.dR + k4.dR));
  out.w = st.w + dt / 6.0 * (k1.dw + 2 * k2.dw + 2 * k3.dw + k4.dw);
  if (!detail::finite(out)) throw SimDivergence("rk4_step: non-finite state");
  return out;
}

// One classical RK4 step with the commanded tilt and speeds held constant.
inline RigidBodyState rk4_step(const PlatformParams& params, const PropellerLayout& layout,
                               const PlantConfig& plant, const RigidBodyState& st, double alpha,
                               const Vec8& u_w, double dt) {
  return rk4_step_wrench(params, st, body_wrench(params, layout, plant, alpha, u_w), dt);
}

// Quaternion (w,x,y,z) with canonical sign: first nonzero component positive.
inline Eigen::Vector4d quat_wxyz(const Mat3& R) {
  Eigen::Quaterniond q(R);
  Eigen::Vector4d v(q.w(), q.x(), q.y(), q.z());
  for (int i = 0; i < 4; ++i) {
    if (v[i] > 0.0) break;
    if (v[i] < 0.0) { v = -v; break; }
  }
  return v;
}

struct TraceRow {
  double t = 0.0;
  Vec3 p = Vec3::Zero(), p_d = Vec3::Zero();
  Eigen::Vector4d q = Eigen::Vector4d(1, 0, 0, 0), q_d = Eigen::Vector4d(1, 0, 0, 0);
  double alpha = 0.0;
  Vec8 u_w = Vec8::Zero();
  Vec6 wrench = Vec6::Zero();
  double P_drag = 0.0, E_drag = 0.0, E_accel = 0.0;
};

enum class SimStatus { Completed, Diverged, ControllerFault };

inline const char* to_string(SimStatus s) {
  switch (s) {
    case SimStatus::Completed: return "completed";
    case SimStatus::Diverged: return "diverged";
    case SimStatus::ControllerFault: return "controller-fault";
  }
  return "?";
}

struct SimSummary {
  SimStatus status = SimStatus::Completed;
  double end_time = 0.0;       // s actually simulated
  double mean_pos_err = 0.0;   // m
  double mean_att_err = 0.0;   // ||e_R||, dimensionless
  double drag_energy = 0.0;    // J
  double accel_energy = 0.0;   // J
  double final_alpha = 0.0;    // rad
};

struct SimTrace {
  std::vector<TraceRow> rows;
  SimSummary summary;
};

struct Scenario {
  explicit Scenario(Mission m) : mission(std::move(m)) {}

  PlatformParams params = default_params();
  PropellerLayout layout = make_layout(default_params().L);
  ControlGains gains;
  OptWeights weights;
  PlantConfig plant;
  Mission mission;
  double duration = -1.0;  // s; negative means the mission span
  double initial_alpha = 0.0;
  std::optional<double> fixed_alpha;  // freeze the tilt (no morphing) when set
};

// Closed-loop run: sample the reference, decide inputs once per control
// period, slew the tilt linearly across the period's substeps, integrate,
// and account energy. Deterministic: identical scenarios give identical
// traces.
inline SimTrace simulate(const Scenario& sc) {
  sc.params.validate();
  sc.plant.validate(sc.params.dt_ctrl);

  const double T = sc.duration < 0.0 ? sc.mission.span() : sc.duration;
  const int n_periods = static_cast<int>(std::llround(T / sc.params.dt_ctrl));

  const FlatReference start_ref = sc.mission.sample(0.0);
  RigidBodyState state;
  state.p = start_ref.p_d;
  state.R = start_ref.R_d;

  double alpha0 = sc.fixed_alpha.value_or(sc.initial_alpha);
  alpha0 = std::min(sc.params.alpha_max, std::max(sc.params.alpha_min, alpha0));

  ControllerState ctrl;
  ctrl.alpha_prev = alpha0;
  ctrl.u_w_prev = hover_input(sc.params, sc.layout, alpha0, sc.params.m).u_w;  // spun up for hover

  SimTrace trace;
  trace.rows.reserve(n_periods);
  EnergyAccount acct;
  Vec8 u_energy_prev = ctrl.u_w_prev;
  double plant_alpha = alpha0;
  double sum_pos_err = 0.0, sum_att_err = 0.0;
  SimStatus status = SimStatus::Completed;
  double end_time = 0.0;

  for (int k = 0; k < n_periods; ++k) {
    const double t = k * sc.params.dt_ctrl;
    const FlatReference ref = sc.mission.sample(t);
    const ControlSolution sol = control_step(sc.params, sc.layout, sc.gains, sc.weights, state,
                                             ref, ctrl, sc.fixed_alpha.has_value());
    if (!sol.ok) {
      status = SimStatus::ControllerFault;
      end_time = t;
      break;
    }

    accumulate_energy(acct, sc.params, u_energy_prev, sol.u_w, sc.params.dt_ctrl);
    u_energy_prev = sol.u_w;

    const double alpha_from = plant_alpha;
    const double dalpha = sol.alpha - alpha_from;
    Vec6 applied_wrench = Vec6::Zero();
    bool diverged = false;
    for (int j = 0; j < sc.plant.steps_per_ctrl; ++j) {
      const double a = alpha_from + dalpha * (j + 0.5) / sc.plant.steps_per_ctrl;
      applied_wrench = body_wrench(sc.params, sc.layout, sc.plant, a, sol.u_w);
      try {
        state = rk4_step_wrench(sc.params, state, applied_wrench, sc.plant.dt_sim);
      } catch (const SimDivergence&) {
        diverged = true;
        break;
      }
    }
    plant_alpha = sol.alpha;

    const double t_end = (k + 1) * sc.params.dt_ctrl;
    const FlatReference ref_end = sc.mission.sample(t_end);
    const double pos_err = (state.p - ref_end.p_d).norm();
    if (diverged || pos_err > sc.plant.divergence_pos_limit) {
      status = SimStatus::Diverged;
      end_time = t_end;
      break;
    }

    TraceRow row;
    row.t = t_end;
    row.p = state.p;
    row.p_d = ref_end.p_d;
    row.q = quat_wxyz(state.R);
    row.q_d = quat_wxyz(ref_end.R_d);
    row.alpha = plant_alpha;
    row.u_w = sol.u_w;
    row.wrench = applied_wrench;
    row.P_drag = acct.per_step_power.back();
    row.E_drag = acct.drag_energy;
    row.E_accel = acct.prop_accel_energy;
    trace.rows.push_back(row);

    sum_pos_err += pos_err;
    sum_att_err += attitude_error(state.R, ref_end.R_d).norm();
    end_time = t_end;
  }

  SimSummary& s = trace.summary;
  s.status = status;
  s.end_time = end_time;
  const double n = static_cast<double>(trace.rows.size());
  s.mean_pos_err = n > 0 ? sum_pos_err / n : 0.0;
  s.mean_att_err = n > 0 ? sum_att_err / n : 0.0;
  s.drag_energy = acct.drag_energy;
  s.accel_energy = acct.prop_accel_energy;
  s.final_alpha = plant_alpha;
  return trace;
}

}  // namespace omnimorph
