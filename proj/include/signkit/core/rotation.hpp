#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace signkit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;

constexpr double kPi = 3.14159265358979323846;

// Axis-angle with the sign absorbed into the axis, angle in [0, pi].
struct AxisAngle {
  Vec3 axis = Vec3::UnitX();
  double angle = 0.0;

  Vec3 exp_coords() const { return angle * axis; }
};

// Normalized, with w >= 0.
inline Quat canonical(Quat q) {
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

inline AxisAngle quat_to_axis_angle(const Quat& q_in) {
  const Quat q = canonical(q_in);
  const double s = q.vec().norm();
  AxisAngle out;
  if (s == 0.0) return out;
  out.axis = q.vec() / s;
  out.angle = 2.0 * std::atan2(s, q.w());
  return out;
}

inline Quat axis_angle_to_quat(const AxisAngle& aa) {
  const double h = 0.5 * aa.angle;
  const Vec3 v = std::sin(h) * aa.axis;
  return Quat(std::cos(h), v.x(), v.y(), v.z());
}

// Exponential coordinates m = angle * axis -> unit quaternion.
inline Quat exp_map(const Vec3& m) {
  const double angle = m.norm();
  if (angle == 0.0) return Quat::Identity();
  return axis_angle_to_quat({m / angle, angle});
}

// Logarithm of the given representative without canonicalizing the sign, so a
// sign-continuous quaternion path gives a continuous result (angle may exceed pi).
inline Vec3 log_map(const Quat& q_in) {
  const Quat q = q_in.normalized();
  const double s = q.vec().norm();
  if (s == 0.0) return Vec3::Zero();
  return (2.0 * std::atan2(s, q.w()) / s) * q.vec();
}

inline Quat rotation_about(const Vec3& axis, double angle) {
  return Quat(Eigen::AngleAxisd(angle, axis.normalized()));
}

// Rotation angle between two orientations, ignoring double cover.
inline double geodesic_angle(const Quat& a, const Quat& b) {
  const Quat d = a.conjugate() * b;
  return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w()));
}

// Roll/pitch/yaw (x-y-z extrinsic, R = Rz(yaw) Ry(pitch) Rx(roll)).
struct Rpy {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

inline Quat from_rpy(const Rpy& e) {
  return Quat(Eigen::AngleAxisd(e.yaw, Vec3::UnitZ()) *
              Eigen::AngleAxisd(e.pitch, Vec3::UnitY()) *
              Eigen::AngleAxisd(e.roll, Vec3::UnitX()));
}

inline Rpy to_rpy(const Quat& q) {
  const Mat3 r = q.normalized().toRotationMatrix();
  Rpy e;
  e.pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  e.roll = std::atan2(r(2, 1), r(2, 2));
  e.yaw = std::atan2(r(1, 0), r(0, 0));
  return e;
}

inline double wrap_angle(double a) {
  return std::remainder(a, 2.0 * kPi);
}

}  // namespace signkit
