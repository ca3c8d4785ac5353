#include "omnimorph/energy.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace omnimorph;

namespace {
const PlatformParams params = default_params();
const PropellerLayout layout = make_layout(params.L);
}  // namespace

TEST_CASE("hover input at zero tilt splits the weight evenly", "[energy]") {
  const HoverResult h = hover_input(params, layout, 0.0, params.m);
  const double expect = params.m * params.g / (8.0 * params.c_f);
  CHECK(h.achievable);
  for (int i = 0; i < 8; ++i) CHECK(h.u_w[i] == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("hover input reproduces the weight wrench at interior tilts", "[energy]") {
  for (double deg : {5.0, 20.0, 45.0, 60.0, 72.0}) {
    const HoverResult h = hover_input(params, layout, deg2rad(deg), params.m);
    REQUIRE(h.achievable);
    Vec6 target = Vec6::Zero();
    target[2] = params.m * params.g;
    const Vec6 got = allocation_matrix(params, layout, deg2rad(deg)) * h.u_w;
    CHECK((got - target).norm() < 1e-9);
  }
}

TEST_CASE("hover input is linear in mass", "[energy]") {
  const HoverResult h1 = hover_input(params, layout, 0.3, params.m);
  const HoverResult h2 = hover_input(params, layout, 0.3, 2.0 * params.m);
  CHECK((h2.u_w - 2.0 * h1.u_w).cwiseAbs().maxCoeff() < 1e-9 * h1.u_w.cwiseAbs().maxCoeff());
}

TEST_CASE("hover input reports the deficit when vertical force is unreachable", "[energy]") {
  const HoverResult h = hover_input(params, layout, kPi / 2.0, params.m);
  CHECK_FALSE(h.achievable);
  CHECK(h.residual == Catch::Approx(params.m * params.g).epsilon(1e-9));
}

TEST_CASE("motor power follows the three-halves law", "[energy]") {
  CHECK(motor_power(params, Vec8::Zero()) == 0.0);

  PlatformParams p = params;
  p.c_tau = 1.0;
  Vec8 u = Vec8::Zero();
  u[3] = 4.0;
  CHECK(motor_power(p, u) == Catch::Approx(8.0).epsilon(1e-15));
  u[3] = -4.0;  // reversed spin consumes the same power
  CHECK(motor_power(p, u) == Catch::Approx(8.0).epsilon(1e-15));

  const HoverResult h0 = hover_input(params, layout, 0.0, params.m);
  const HoverResult h50 = hover_input(params, layout, deg2rad(50.0), params.m);
  CHECK(motor_power(params, h50.u_w) > motor_power(params, h0.u_w));
}

TEST_CASE("break-even added mass matches the secant law at the pinned angles", "[energy]") {
  CHECK(delta_m_bar(params, layout, 0.0) == 0.0);
  CHECK(delta_m_bar(params, layout, deg2rad(20.0)) == Catch::Approx(0.07).margin(0.01));
  CHECK(delta_m_bar(params, layout, deg2rad(30.0)) == Catch::Approx(0.16).margin(0.02));
  // Equal hover inputs scale with sec(alpha), so the closed form is known.
  for (double deg : {10.0, 25.0, 40.0}) {
    const double expect = 1.0 / std::cos(deg2rad(deg)) - 1.0;
    CHECK(delta_m_bar(params, layout, deg2rad(deg)) == Catch::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("break-even added mass is scale-free", "[energy]") {
  PlatformParams other = params;
  other.m = 5.0;
  other.c_f *= 3.0;
  other.c_tau *= 0.5;
  const PropellerLayout lay = make_layout(other.L);
  CHECK(delta_m_bar(other, lay, deg2rad(30.0)) ==
        Catch::Approx(delta_m_bar(params, layout, deg2rad(30.0))).epsilon(1e-12));
}

TEST_CASE("break-even added mass is monotone over the working range", "[energy][property]") {
  double prev = -1.0;
  for (int deg = 0; deg <= 45; ++deg) {
    const double v = delta_m_bar(params, layout, deg2rad(deg));
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("break-even added mass rejects out-of-range tilts", "[energy]") {
  CHECK_THROWS_AS(delta_m_bar(params, layout, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(delta_m_bar(params, layout, kPi / 2.0), std::invalid_argument);
}

TEST_CASE("energy accumulation integrates drag power and spin-up work", "[energy]") {
  PlatformParams p = params;
  p.I_p = 1e-5;

  EnergyAccount acc;
  Vec8 rest = Vec8::Zero();
  Vec8 spun = Vec8::Zero();
  spun[0] = 100.0 * 100.0;  // one prop from rest to 100 rad/s
  accumulate_energy(acc, p, rest, spun, 0.004);
  CHECK(acc.prop_accel_energy == Catch::Approx(0.05).epsilon(1e-12));
  CHECK(acc.drag_energy == Catch::Approx(motor_power(p, spun) * 0.004).epsilon(1e-12));

  // Constant speeds add no acceleration energy.
  const double before = acc.prop_accel_energy;
  accumulate_energy(acc, p, spun, spun, 0.004);
  CHECK(acc.prop_accel_energy == before);

  // Deceleration is not regenerated.
  accumulate_energy(acc, p, spun, rest, 0.004);
  CHECK(acc.prop_accel_energy == before);

  // Reversal through zero costs only the spin-up on the far side.
  EnergyAccount rev;
  Vec8 neg = -spun;
  accumulate_energy(rev, p, spun, neg, 0.004);
  CHECK(rev.prop_accel_energy == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("energy accumulators are non-negative and non-decreasing", "[energy][property]") {
  EnergyAccount acc;
  Vec8 u_prev = Vec8::Constant(1e5);
  double last_drag = 0.0, last_acc = 0.0;
  for (int k = 0; k < 50; ++k) {
    Vec8 u = Vec8::Constant(1e5 + 1e4 * std::sin(0.3 * k));
    u[k % 8] *= -1.0;
    accumulate_energy(acc, params, u_prev, u, 0.004);
    CHECK(acc.drag_energy >= last_drag);
    CHECK(acc.prop_accel_energy >= last_acc);
    last_drag = acc.drag_energy;
    last_acc = acc.prop_accel_energy;
    u_prev = u;
  }
}
