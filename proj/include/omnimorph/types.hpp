#pragma once

// Core value types shared across the library: fixed-size linear algebra
// aliases, platform parameters, propeller layout, and flat references.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace omnimorph {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat38 = Eigen::Matrix<double, 3, 8>;
using Mat68 = Eigen::Matrix<double, 6, 8>;
using Mat69 = Eigen::Matrix<double, 6, 9>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

inline constexpr int kNumProps = 8;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Physical and control-rate parameters of the platform. Use
// default_params() for the calibrated defaults; a default-constructed
// instance is incomplete (zero coefficients) and fails validate().
struct PlatformParams {
  double m = 1.3150;          // kg
  Mat3 J = Mat3::Zero();      // kg*m^2, diagonal positive
  double L = 0.20;            // m, distance of each propeller from the body origin
  double c_f = 0.0;           // N/(rad/s)^2, thrust per squared speed
  double c_tau = 0.0;         // N*m/(rad/s)^2, drag moment per squared speed
  double u_w_max = 0.0;       // (rad/s)^2, symmetric bound on each input
  double alpha_min = 0.0;     // rad
  double alpha_max = 0.0;     // rad
  double eps_alpha = 0.0;     // rad per control period
  double dt_ctrl = 0.0;       // s
  double I_p = 0.0;           // kg*m^2, propeller spin inertia
  double g = 9.81;            // m/s^2

  void validate() const {
    auto fail = [](const std::string& what) {
      throw std::invalid_argument("PlatformParams: " + what);
    };
    if (!(m > 0.0)) fail("mass must be positive");
    if (!(c_f > 0.0)) fail("c_f must be positive");
    if (!(c_tau > 0.0)) fail("c_tau must be positive");
    if (!(L > 0.0)) fail("L must be positive");
    if (!(u_w_max > 0.0)) fail("u_w_max must be positive");
    if (!(alpha_min >= 0.0 && alpha_min < alpha_max && alpha_max <= kPi / 2.0 + 1e-12))
      fail("alpha bounds must satisfy 0 <= alpha_min < alpha_max <= pi/2");
    if (!(eps_alpha > 0.0)) fail("eps_alpha must be positive");
    if (!(dt_ctrl > 0.0)) fail("dt_ctrl must be positive");
    if (!(I_p > 0.0)) fail("I_p must be positive");
    if (!(g > 0.0)) fail("g must be positive");
    if (!J.isApprox(J.transpose(), 1e-12)) fail("J must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> es(J);
    if (!(es.eigenvalues().minCoeff() > 0.0)) fail("J must be positive definite");
  }
};

// Calibrated defaults. Anchors: take-off mass 1.3150 kg; maximum propeller
// speed 120 Hz (u_w_max = (2*pi*120)^2); c_f chosen so the vertical-thrust
// hover limit sits at a 72 deg tilt (8*c_f*u_w_max*cos 72deg = m*g); drag
// length c_tau/c_f = 0.009 m; propeller spin inertia from a 0.01 kg rod of
// 5-inch radius.
inline PlatformParams default_params() {
  PlatformParams p;
  p.J = Vec3(1.16e-2, 1.13e-2, 1.13e-2).asDiagonal();
  p.u_w_max = std::pow(2.0 * kPi * 120.0, 2);
  p.c_f = p.m * p.g / (8.0 * p.u_w_max * std::cos(deg2rad(72.0)));
  p.c_tau = 0.009 * p.c_f;
  p.alpha_min = 0.0;
  p.alpha_max = deg2rad(60.0);
  p.eps_alpha = deg2rad(0.5);
  p.dt_ctrl = 4e-3;
  p.I_p = 1.34e-5;
  return p;
}

// Fixed geometric layout of the eight tiltable propellers.
struct PropellerLayout {
  Mat38 positions = Mat38::Zero();       // body-frame mount points, one column per propeller
  std::array<double, kNumProps> spin_signs{};  // +1 / -1 handedness
  std::array<Mat3, kNumProps> base_rotations{};  // body-to-mount frames at zero tilt
  static constexpr int count = kNumProps;
};

// Rigid-body state: world-frame position/velocity, world<-body rotation,
// body-frame angular rate.
struct RigidBodyState {
  Vec3 p = Vec3::Zero();   // m
  Vec3 v = Vec3::Zero();   // m/s
  Mat3 R = Mat3::Identity();
  Vec3 w = Vec3::Zero();   // rad/s
};

// Smooth 6-D reference sample: position chain plus attitude chain.
struct FlatReference {
  Vec3 p_d = Vec3::Zero();   // m
  Vec3 v_d = Vec3::Zero();   // m/s
  Vec3 a_d = Vec3::Zero();   // m/s^2
  Mat3 R_d = Mat3::Identity();
  Vec3 w_d = Vec3::Zero();   // rad/s, body frame of R_d
  Vec3 dw_d = Vec3::Zero();  // rad/s^2, body frame of R_d
};

}  // namespace omnimorph
