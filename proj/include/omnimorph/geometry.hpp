#pragma once

// Propeller layout and the tilt-parameterized control allocation map.
//
// The eight propellers sit on the vertices of a cube (side-length parameter
// L along each body diagonal direction) and tilt synchronously by a single
// angle alpha, each about a fixed body-frame axis aligned with a cube edge.
// At alpha = 0 all thrust axes point along body z; as alpha grows the axes
// fan out until, at alpha = arccos(1/sqrt(3)), they coincide (in the frame
// rotated by pi/12 about z) with the optimal fixed omnidirectional design.

#include "omnimorph/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>

namespace omnimorph {

inline Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return R;
}

inline Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return R;
}

inline Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), 0, v.x();
  return S;
}

namespace detail {

// Vertex sign pattern (+-1 per axis) of each propeller position.
inline const std::array<Vec3, kNumProps>& position_signs() {
  static const std::array<Vec3, kNumProps> eps = {
      Vec3(+1, +1, +1), Vec3(-1, +1, +1), Vec3(+1, -1, +1), Vec3(-1, -1, +1),
      Vec3(+1, +1, -1), Vec3(-1, +1, -1), Vec3(+1, -1, -1), Vec3(-1, -1, -1)};
  return eps;
}

// Horizontal unit direction the thrust axis of propeller i leans toward as
// the tilt grows: z_i(alpha) = (d_x sin a, d_y sin a, cos a).
inline const std::array<Vec3, kNumProps>& tilt_lean_dirs() {
  static const std::array<Vec3, kNumProps> d = {
      Vec3(-1, 0, 0), Vec3(0, -1, 0), Vec3(0, +1, 0), Vec3(+1, 0, 0),
      Vec3(+1, 0, 0), Vec3(0, +1, 0), Vec3(0, -1, 0), Vec3(-1, 0, 0)};
  return d;
}

inline const std::array<double, kNumProps>& spin_signs() {
  static const std::array<double, kNumProps> k = {-1, +1, +1, -1, -1, +1, +1, -1};
  return k;
}

}  // namespace detail

// Propeller mount points: cube vertices scaled so each column has norm L.
inline Mat38 propeller_positions(double L) {
  if (!(L > 0.0)) throw std::invalid_argument("propeller_positions: L must be positive");
  Mat38 P;
  const double s = L / std::sqrt(3.0);
  for (int i = 0; i < kNumProps; ++i) P.col(i) = s * detail::position_signs()[i];
  return P;
}

// Thrust axes of the optimal fixed (non-tilting) omnidirectional design.
inline Mat38 brescianini_axes() {
  const double a = 0.5 + 1.0 / std::sqrt(12.0);
  const double b = 0.5 - 1.0 / std::sqrt(12.0);
  const double c = 1.0 / std::sqrt(3.0);
  Mat38 B;
  B.col(0) = Vec3(-a, b, c);
  B.col(1) = Vec3(b, a, -c);
  B.col(2) = Vec3(-b, -a, -c);
  B.col(3) = Vec3(a, -b, c);
  B.col(4) = Vec3(a, -b, c);
  B.col(5) = Vec3(-b, -a, -c);
  B.col(6) = Vec3(b, a, -c);
  B.col(7) = Vec3(-a, b, c);
  return B;
}

// Tilt axes b_i: the horizontal axes normalize(z~_i x e3) of the fixed
// design, rotated by +pi/12 about z so they line up with cube edges.
inline Mat38 tilt_axes() {
  const Mat38 B = brescianini_axes();
  const Mat3 Rz = rot_z(kPi / 12.0);
  Mat38 T;
  for (int i = 0; i < kNumProps; ++i) {
    Vec3 cr = B.col(i).cross(Vec3::UnitZ());
    T.col(i) = Rz * cr.normalized();
  }
  return T;
}

namespace detail {

// Azimuth of the axis each propeller physically pivots about. The pivot
// sense is tied to the spin handedness, so the effective axis is k_i * b_i.
inline const std::array<double, kNumProps>& pivot_azimuths() {
  static const std::array<double, kNumProps> phi = [] {
    const Mat38 T = tilt_axes();
    const auto& k = spin_signs();
    std::array<double, kNumProps> a{};
    for (int i = 0; i < kNumProps; ++i) {
      const Vec3 axis = k[i] * T.col(i);
      a[i] = std::atan2(axis.y(), axis.x());
    }
    return a;
  }();
  return phi;
}

}  // namespace detail

// Body-frame orientation of propeller i at tilt alpha; the third column is
// the thrust direction. index is 1-based.
inline Mat3 propeller_rotation(int index, double alpha) {
  if (index < 1 || index > kNumProps)
    throw std::out_of_range("propeller_rotation: index must be in 1..8");
  return rot_z(detail::pivot_azimuths()[index - 1]) * rot_x(alpha);
}

// Thrust direction of propeller i (0-based) at tilt alpha.
inline Vec3 thrust_axis(int i, double alpha) {
  const Vec3& d = detail::tilt_lean_dirs()[i];
  const double s = std::sin(alpha), c = std::cos(alpha);
  return Vec3(d.x() * s, d.y() * s, c);
}

inline PropellerLayout make_layout(double L) {
  PropellerLayout lay;
  lay.positions = propeller_positions(L);
  lay.spin_signs = detail::spin_signs();
  const Mat3 Rz_back = rot_z(-kPi / 12.0);
  for (int i = 0; i < kNumProps; ++i) {
    // Mount frame at zero tilt; composing with rot_z(pi/12)*rot_x(alpha)
    // reproduces propeller_rotation(i+1, alpha).
    lay.base_rotations[i] = rot_z(detail::pivot_azimuths()[i]) * Rz_back;
  }
  return lay;
}

// 6x8 allocation map from squared propeller speeds to body wrench.
// Force block: c_f * z_i(alpha); moment block: (c_f [p_i]x - k_i c_tau I) z_i.
inline Mat68 allocation_matrix(const PlatformParams& params, const PropellerLayout& layout,
                               double alpha) {
  Mat68 A;
  for (int i = 0; i < kNumProps; ++i) {
    const Vec3 z = thrust_axis(i, alpha);
    const Vec3 p = layout.positions.col(i);
    A.block<3, 1>(0, i) = params.c_f * z;
    A.block<3, 1>(3, i) = params.c_f * p.cross(z) - layout.spin_signs[i] * params.c_tau * z;
  }
  return A;
}

// Analytic d/dalpha of the allocation map (every entry is a sinusoid in alpha).
inline Mat68 allocation_matrix_dalpha(const PlatformParams& params,
                                      const PropellerLayout& layout, double alpha) {
  Mat68 dA;
  const double s = std::sin(alpha), c = std::cos(alpha);
  for (int i = 0; i < kNumProps; ++i) {
    const Vec3& d = detail::tilt_lean_dirs()[i];
    const Vec3 dz(d.x() * c, d.y() * c, -s);
    const Vec3 p = layout.positions.col(i);
    dA.block<3, 1>(0, i) = params.c_f * dz;
    dA.block<3, 1>(3, i) = params.c_f * p.cross(dz) - layout.spin_signs[i] * params.c_tau * dz;
  }
  return dA;
}

// Wrench sensitivity to the tilt angle at the operating point (alpha, u_w).
inline Vec6 allocation_alpha_jacobian(const PlatformParams& params,
                                      const PropellerLayout& layout, double alpha,
                                      const Vec8& u_w) {
  return allocation_matrix_dalpha(params, layout, alpha) * u_w;
}

}  // namespace omnimorph
