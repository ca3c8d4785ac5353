#pragma once

// Smooth 6-D reference generation: piecewise segments with minimum-jerk
// (quintic) position and constant-axis quintic-angle attitude profiles.
// Position, velocity, attitude, and body rates are continuous across
// segment joints by construction.

#include "omnimorph/geometry.hpp"
#include "omnimorph/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace omnimorph {

namespace detail {

// Quintic ease 0 -> 1 with zero boundary velocity and acceleration.
inline void quintic(double tau, double T, double* s, double* ds, double* dds) {
  const double t2 = tau * tau, t3 = t2 * tau, t4 = t3 * tau, t5 = t4 * tau;
  *s = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
  *ds = (30.0 * t2 - 60.0 * t3 + 30.0 * t4) / T;
  *dds = (60.0 * tau - 180.0 * t2 + 120.0 * t3) / (T * T);
}

}  // namespace detail

struct Segment {
  enum class Kind { Hold, LineTo, AttitudeRotate, Combined };
  Kind kind = Kind::Hold;
  double start = 0.0;
  double duration = 0.0;
  Vec3 p0 = Vec3::Zero();
  Vec3 p1 = Vec3::Zero();
  Mat3 R0 = Mat3::Identity();
  Vec3 axis = Vec3::UnitX();  // world frame, unit norm
  double angle = 0.0;         // rad swept over the segment
};

class Mission {
 public:
  explicit Mission(std::vector<Segment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw std::invalid_argument("Mission: needs at least one segment");
    span_ = segments_.back().start + segments_.back().duration;
  }

  double span() const { return span_; }
  const std::vector<Segment>& segments() const { return segments_; }

  // Reference at time t; clamped to the mission endpoints outside the span.
  FlatReference sample(double t) const {
    const double tc = std::min(std::max(t, 0.0), span_);
    const Segment* seg = &segments_.back();
    for (const Segment& s : segments_) {
      if (tc < s.start + s.duration) { seg = &s; break; }
    }
    const double tau = std::min(1.0, std::max(0.0, (tc - seg->start) / seg->duration));
    double s, ds, dds;
    detail::quintic(tau, seg->duration, &s, &ds, &dds);

    FlatReference ref;
    const bool moves = seg->kind == Segment::Kind::LineTo || seg->kind == Segment::Kind::Combined;
    const bool turns =
        seg->kind == Segment::Kind::AttitudeRotate || seg->kind == Segment::Kind::Combined;

    if (moves) {
      const Vec3 dp = seg->p1 - seg->p0;
      ref.p_d = seg->p0 + s * dp;
      ref.v_d = ds * dp;
      ref.a_d = dds * dp;
    } else {
      ref.p_d = seg->p0;
    }

    if (turns) {
      const double theta = seg->angle * s;
      ref.R_d = Eigen::AngleAxisd(theta, seg->axis).toRotationMatrix() * seg->R0;
      // Single fixed world axis: body rate and its derivative are the axis
      // mapped into the reference body frame.
      ref.w_d = ref.R_d.transpose() * (seg->axis * (seg->angle * ds));
      ref.dw_d = ref.R_d.transpose() * (seg->axis * (seg->angle * dds));
    } else {
      ref.R_d = seg->R0;
    }
    return ref;
  }

 private:
  std::vector<Segment> segments_;
  double span_ = 0.0;
};

// Chains segments, carrying the endpoint position/attitude forward so the
// reference is continuous.
class MissionBuilder {
 public:
  MissionBuilder& start_at(const Vec3& p, const Mat3& R) {
    p_ = p;
    R_ = R;
    return *this;
  }

  MissionBuilder& hold(double duration) {
    Segment s = base(duration);
    s.kind = Segment::Kind::Hold;
    push(s);
    return *this;
  }

  MissionBuilder& line_to(const Vec3& target, double duration) {
    Segment s = base(duration);
    s.kind = Segment::Kind::LineTo;
    s.p1 = target;
    push(s);
    p_ = target;
    return *this;
  }

  MissionBuilder& rotate(const Vec3& axis, double angle, double duration) {
    Segment s = base(duration);
    s.kind = Segment::Kind::AttitudeRotate;
    s.axis = unit(axis);
    s.angle = angle;
    push(s);
    R_ = Eigen::AngleAxisd(angle, s.axis).toRotationMatrix() * R_;
    return *this;
  }

  MissionBuilder& line_and_rotate(const Vec3& target, const Vec3& axis, double angle,
                                  double duration) {
    Segment s = base(duration);
    s.kind = Segment::Kind::Combined;
    s.p1 = target;
    s.axis = unit(axis);
    s.angle = angle;
    push(s);
    p_ = target;
    R_ = Eigen::AngleAxisd(angle, s.axis).toRotationMatrix() * R_;
    return *this;
  }

  Mission build() const { return Mission(segments_); }

 private:
  static Vec3 unit(const Vec3& v) {
    const double n = v.norm();
    if (!(n > 1e-12)) throw std::invalid_argument("MissionBuilder: rotation axis must be nonzero");
    return v / n;
  }

  Segment base(double duration) const {
    if (!(duration > 0.0)) throw std::invalid_argument("MissionBuilder: duration must be positive");
    Segment s;
    s.start = t_;
    s.duration = duration;
    s.p0 = p_;
    s.p1 = p_;
    s.R0 = R_;
    return s;
  }

  void push(const Segment& s) {
    segments_.push_back(s);
    t_ += s.duration;
  }

  std::vector<Segment> segments_;
  double t_ = 0.0;
  Vec3 p_ = Vec3::Zero();
  Mat3 R_ = Mat3::Identity();
};

// Built-in demo mission covering the full actuation envelope: climb, hold,
// tilted lateral pass and return, full roll on the spot, descend. 21 s.
inline Mission full_envelope_mission() {
  const Vec3 x_axis = Vec3::UnitX();
  return MissionBuilder()
      .line_to(Vec3(0, 0, 1), 3.0)
      .hold(1.0)
      .line_and_rotate(Vec3(1, 0, 1), x_axis, deg2rad(25.0), 4.0)
      .line_and_rotate(Vec3(0, 0, 1), x_axis, deg2rad(-25.0), 4.0)
      .rotate(x_axis, 2.0 * kPi, 6.0)
      .line_to(Vec3(0, 0, 0), 3.0)
      .build();
}

}  // namespace omnimorph
