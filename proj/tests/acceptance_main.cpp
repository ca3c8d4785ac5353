// Acceptance gate: one line per numbered criterion with measured values;
// the exit code is the number of failed criteria.

#include "omnimorph/actuation.hpp"
#include "omnimorph/controller.hpp"
#include "omnimorph/energy.hpp"
#include "omnimorph/optimizer.hpp"
#include "omnimorph/sim.hpp"
#include "omnimorph/trace_io.hpp"
#include "omnimorph/wrench_sets.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <optional>
#include <random>
#include <sstream>
#include <string>

using namespace omnimorph;

namespace {

int g_failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(double x, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

bool within_factor(double x, double ref, double k) {
  return x > 0.0 && ref > 0.0 && x <= k * ref && ref <= k * x;
}

struct RunResult {
  SimTrace trace;
  double wall = 0.0;
};

RunResult run_mission(const OptWeights& weights, double cf_scale = 1.0,
                      std::optional<double> fixed_alpha = std::nullopt, double w3 = -1.0) {
  Scenario sc(full_envelope_mission());
  sc.weights = weights;
  if (w3 >= 0.0) sc.weights.W3 = Mat8::Identity() * w3;
  sc.plant.cf_scale = cf_scale;
  sc.fixed_alpha = fixed_alpha;
  Stopwatch sw;
  RunResult r;
  r.trace = simulate(sc);
  r.wall = sw.seconds();
  return r;
}

double mean_alpha_deg(const SimTrace& t, double lo, double hi) {
  double sum = 0.0;
  int n = 0;
  for (const TraceRow& r : t.rows)
    if (r.t > lo && r.t <= hi + 1e-9) {
      sum += r.alpha;
      ++n;
    }
  return n ? rad2deg(sum / n) : 0.0;
}

double max_alpha_deg(const SimTrace& t, double lo, double hi) {
  double m = 0.0;
  for (const TraceRow& r : t.rows)
    if (r.t > lo && r.t <= hi + 1e-9) m = std::max(m, r.alpha);
  return rad2deg(m);
}

Mat8 random_spd(std::mt19937& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat8 M;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) M(i, j) = nd(rng);
  Mat8 H = M.transpose() * M + Mat8::Identity();
  return 0.5 * (H + H.transpose());
}

Vec8 projected_gradient(const BoxQP& qp, int iters = 100000) {
  const double L = Eigen::SelfAdjointEigenSolver<Mat8>(qp.H).eigenvalues().maxCoeff();
  const double step = 1.0 / L;
  Vec8 x = Vec8::Zero();
  for (int i = 0; i < 8; ++i) x[i] = std::min(qp.upper[i], std::max(qp.lower[i], x[i]));
  for (int k = 0; k < iters; ++k) {
    Vec8 nx = x - step * (qp.H * x + qp.g);
    for (int i = 0; i < 8; ++i) nx[i] = std::min(qp.upper[i], std::max(qp.lower[i], nx[i]));
    if ((nx - x).cwiseAbs().maxCoeff() < 1e-16) {
      x = nx;
      break;
    }
    x = nx;
  }
  return x;
}

bool rows_bitwise_equal(const std::vector<TraceRow>& a, const std::vector<TraceRow>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    const auto va = detail::row_to_values(a[i]);
    const auto vb = detail::row_to_values(b[i]);
    if (std::memcmp(va.data(), vb.data(), sizeof va) != 0) return false;
  }
  return true;
}

}  // namespace

int main() {
  const PlatformParams params = default_params();
  const PropellerLayout layout = make_layout(params.L);

  // 1. Actuation-rank table across the tilt range.
  {
    Stopwatch sw;
    bool ok = classify_actuation(params, layout, 0.0, Vec8::Zero()).rank == 4 &&
              classify_actuation(params, layout, kPi / 2.0, Vec8::Zero()).rank == 5;
    for (int deg = 1; deg <= 89 && ok; ++deg)
      ok = classify_actuation(params, layout, deg2rad(deg), Vec8::Zero()).rank == 6;
    const double dt = sw.seconds();
    report(1, ok && dt < 1.0,
           "rank table: 4 at 0 deg, 6 on the 1..89 deg grid, 5 at 90 deg (" + fmt(dt, "%.2f") +
               " s)");
  }

  // 2. Break-even added-mass fractions (dimensionless secant law).
  {
    Stopwatch sw;
    const double v0 = delta_m_bar(params, layout, 0.0);
    const double v20 = delta_m_bar(params, layout, deg2rad(20.0));
    const double v30 = delta_m_bar(params, layout, deg2rad(30.0));
    const double dt = sw.seconds();
    const bool ok = v0 == 0.0 && std::abs(v20 - 0.07) <= 0.01 && std::abs(v30 - 0.16) <= 0.02 &&
                    dt < 1.0;
    report(2, ok,
           "break-even fractions: 0 deg -> " + fmt(v0) + ", 20 deg -> " + fmt(v20) +
               " (0.07 +/- 0.01), 30 deg -> " + fmt(v30) + " (0.16 +/- 0.02)");
  }

  // 3. Hover inputs reproduce the weight-supporting wrench.
  {
    double worst = 0.0;
    for (int deg = 5; deg <= 60; deg += 5) {
      const double alpha = deg2rad(deg);
      const HoverResult h = hover_input(params, layout, alpha, params.m);
      Vec6 want = Vec6::Zero();
      want[2] = params.m * params.g;
      worst = std::max(worst,
                       (allocation_matrix(params, layout, alpha) * h.u_w - want).norm());
    }
    report(3, worst < 1e-9,
           "hover consistency: worst wrench residual " + fmt(worst, "%.2e") +
               " N over 5..60 deg (limit 1e-9)");
  }

  // 4. Omnidirectional tilt interval under the calibrated defaults.
  {
    Stopwatch sw;
    const auto iv = omni_alpha_interval(params, layout, deg2rad(1.0), 400);
    PlatformParams wide = params;
    wide.alpha_max = kPi / 2.0;
    const auto full = omni_alpha_interval(wide, layout, deg2rad(1.0), 400);
    const double dt = sw.seconds();
    const long lo = iv ? std::lround(rad2deg(iv->alpha_lo)) : -1;
    const bool ok = iv.has_value() && std::labs(lo - 37) <= 2 && dt < 30.0;
    std::string detail = "omnidirectional interval: lower edge " + std::to_string(lo) +
                         " deg (37 +/- 2)";
    if (full)
      detail += ", upper edge " + fmt(rad2deg(full->alpha_hi), "%.0f") +
                " deg with the tilt ceiling lifted (straight-down anchor 72 deg)";
    detail += ", " + fmt(dt, "%.2f") + " s at 400 directions";
    report(4, ok, detail);
  }

  // 5. Box-QP solutions match a projected-gradient reference.
  {
    std::mt19937 rng(2024);
    std::normal_distribution<double> nd(0.0, 2.0);
    double worst_kkt = 0.0, worst_gap = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      BoxQP qp;
      qp.H = random_spd(rng);
      for (int i = 0; i < 8; ++i) qp.g[i] = nd(rng);
      const QpResult res = solve_box_qp(qp, 1e-10);
      ok = ok && res.converged;
      worst_kkt = std::max(worst_kkt, box_qp_kkt_residual(qp, res.x));
      worst_gap = std::max(worst_gap, std::abs(res.cost - box_qp_cost(qp, projected_gradient(qp))));
    }
    ok = ok && worst_kkt < 1e-8 && worst_gap < 1e-6;
    report(5, ok,
           "QP oracle equivalence on 100 seeded problems: worst KKT residual " +
               fmt(worst_kkt, "%.2e") + " (limit 1e-8), worst cost gap " + fmt(worst_gap, "%.2e") +
               " (limit 1e-6)");
  }

  // Closed-loop runs reused by the remaining criteria.
  const RunResult run_a = run_mission(case_a_weights());
  const RunResult run_b = run_mission(case_b_weights());
  const SimSummary& a = run_a.trace.summary;
  const SimSummary& b = run_b.trace.summary;

  // 6. Tracking/energy ordering between the two weight presets.
  {
    const bool order = a.mean_pos_err < b.mean_pos_err && a.drag_energy > b.drag_energy;
    const bool bracket = within_factor(a.mean_pos_err, 0.011, 3.0) &&
                         within_factor(b.mean_pos_err, 0.044, 3.0) &&
                         within_factor(a.drag_energy, 2080.7, 3.0) &&
                         within_factor(b.drag_energy, 1162.3, 3.0);
    const bool fast = run_a.wall < 120.0 && run_b.wall < 120.0;
    report(6, order && bracket && fast,
           "preset ordering: pos err A " + fmt(a.mean_pos_err) + " m < B " + fmt(b.mean_pos_err) +
               " m, drag A " + fmt(a.drag_energy) + " J > B " + fmt(b.drag_energy) +
               " J; within 3x of 0.011/0.044 m and 2080.7/1162.3 J; " + fmt(run_a.wall, "%.2f") +
               "/" + fmt(run_b.wall, "%.2f") + " s");
  }

  // 7. Morphing behavior along the mission.
  {
    const double b_initial = mean_alpha_deg(run_b.trace, 0.0, 3.0);
    const double a_roll_max = max_alpha_deg(run_a.trace, 12.0, 18.0);
    const bool ok = b_initial < 10.0 && a_roll_max >= rad2deg(params.alpha_max) - 1e-9;
    report(7, ok,
           "morphing: case-b mean tilt " + fmt(b_initial) +
               " deg during the vertical climb (< 10), case-a peak tilt " + fmt(a_roll_max) +
               " deg during the full roll (saturation " + fmt(rad2deg(params.alpha_max), "%.0f") +
               ")");
  }

  // 8. Propeller-acceleration energy: preset ratio and W3 sensitivity.
  {
    const RunResult run_b_w3 = run_mission(case_b_weights(), 1.0, std::nullopt, 1e-4);
    const SimSummary& b3 = run_b_w3.trace.summary;
    const double ratio = b.accel_energy / a.accel_energy;
    const double rel_change = (b3.accel_energy - b.accel_energy) / b.accel_energy;
    const double pos_drift = std::abs(b3.mean_pos_err - b.mean_pos_err) / b.mean_pos_err;
    const bool ok = ratio > 2.0 && rel_change <= -0.5 && pos_drift <= 0.10;
    report(8, ok,
           "accel energy: B/A ratio " + fmt(ratio, "%.2f") + " (needs > 2; B " +
               fmt(b.accel_energy) + " J, A " + fmt(a.accel_energy) + " J); W3=1e-4 changes B by " +
               fmt(100.0 * rel_change, "%+.0f") + "% (needs <= -50%); pos err drift " +
               fmt(100.0 * pos_drift, "%.1f") + "% (limit 10%)");
  }

  // 9. Thrust degradation margins.
  {
    const RunResult a65 = run_mission(case_a_weights(), 0.65);
    const RunResult b70 = run_mission(case_b_weights(), 0.70);
    const RunResult b65 = run_mission(case_b_weights(), 0.65);
    const SimSummary& s_a65 = a65.trace.summary;
    const SimSummary& s_b70 = b70.trace.summary;
    const SimSummary& s_b65 = b65.trace.summary;

    const bool a_ok = s_a65.status == SimStatus::Completed &&
                      s_a65.mean_pos_err < 3.0 * a.mean_pos_err;
    const bool b70_ok = s_b70.status == SimStatus::Completed;
    const bool b65_degrades = s_b65.status != SimStatus::Completed ||
                              s_b65.mean_pos_err >= 5.0 * b.mean_pos_err;
    const std::string b65_text =
        s_b65.status == SimStatus::Completed
            ? "completes at " + fmt(s_b65.mean_pos_err / b.mean_pos_err, "%.0f") + "x nominal error"
            : std::string("ends ") + to_string(s_b65.status) + " at t=" + fmt(s_b65.end_time, "%.1f") + " s";
    report(9, a_ok && b70_ok && b65_degrades,
           "thrust degradation: case-a at 0.65 " +
               std::string(s_a65.status == SimStatus::Completed ? "completes" : "fails") +
               " with " + fmt(s_a65.mean_pos_err / a.mean_pos_err, "%.0f") +
               "x nominal error (needs < 3x); case-b at 0.70 " +
               std::string(b70_ok ? "completes" : "fails") + "; case-b at 0.65 " + b65_text);
  }

  // 10. Frozen 45-degree tilt comparison.
  {
    const RunResult f45a = run_mission(case_a_weights(), 1.0, deg2rad(45.0));
    const RunResult f45b = run_mission(case_b_weights(), 1.0, deg2rad(45.0));
    const double da = f45a.trace.summary.drag_energy;
    const double db = f45b.trace.summary.drag_energy;
    const double gap = std::abs(da - db) / std::min(da, db);
    const double lo = std::min(a.drag_energy, b.drag_energy);
    const double hi = std::max(a.drag_energy, b.drag_energy);
    const bool between = da > lo && da < hi && db > lo && db < hi;
    report(10, gap < 0.15 && between,
           "fixed 45 deg tilt: drag " + fmt(da) + " J (case-a weights) vs " + fmt(db) +
               " J (case-b weights), gap " + fmt(100.0 * gap, "%.1f") +
               "% (limit 15%); both between the morphing drags " + fmt(lo) + ".." + fmt(hi) + " J" +
               (between ? "" : " FAILED"));
  }

  // 11. Cross-cutting property spot checks.
  {
    bool rot_ok = true;
    for (int i = 1; i <= kNumProps; ++i)
      for (int deg = 0; deg <= 90; deg += 3) {
        const Mat3 R = propeller_rotation(i, deg2rad(deg));
        rot_ok = rot_ok && (R.transpose() * R - Mat3::Identity()).norm() < 1e-12 &&
                 std::abs(R.determinant() - 1.0) < 1e-12;
      }

    Vec8 u;
    u << 2.1e5, -0.4e5, 1.3e5, 0.9e5, -1.7e5, 3.0e5, 0.2e5, 1.1e5;
    const double alpha = 0.7, h = 1e-6;
    const Vec6 fd = (allocation_matrix(params, layout, alpha + h) * u -
                     allocation_matrix(params, layout, alpha - h) * u) /
                    (2.0 * h);
    const Vec6 an = allocation_alpha_jacobian(params, layout, alpha, u);
    const bool jac_ok = (fd - an).norm() <= 1e-5 * std::max(1.0, an.norm());

    RigidBodyState st;
    st.w = Vec3(0.3, 0.4, -0.2);
    const double w0 = st.w.norm();
    Vec6 lift = Vec6::Zero();
    lift[2] = params.m * params.g;
    for (int k = 0; k < 10000; ++k) st = rk4_step_wrench(params, st, lift, 1e-3);
    const bool rk4_ok = std::abs(st.w.norm() - w0) < 1e-8;

    Scenario short_run(full_envelope_mission());
    short_run.weights = case_b_weights();
    short_run.duration = 2.0;
    const SimTrace t1 = simulate(short_run);
    const SimTrace t2 = simulate(short_run);
    const bool det_ok = rows_bitwise_equal(t1.rows, t2.rows);

    std::stringstream ss;
    write_trace(ss, t1);
    const bool csv_ok = rows_bitwise_equal(read_trace(ss).rows, t1.rows);

    report(11, rot_ok && jac_ok && rk4_ok && det_ok && csv_ok,
           std::string("properties: rotations orthonormal ") + (rot_ok ? "yes" : "NO") +
               ", tilt jacobian matches finite differences " + (jac_ok ? "yes" : "NO") +
               ", torque-free |w| conserved " + (rk4_ok ? "yes" : "NO") +
               ", deterministic reruns " + (det_ok ? "yes" : "NO") + ", CSV round-trip bit-exact " +
               (csv_ok ? "yes" : "NO"));
  }

  std::printf("%d of 11 criteria passed\n", 11 - g_failures);
  return g_failures;
}
