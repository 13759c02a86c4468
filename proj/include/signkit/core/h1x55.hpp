#pragma once

#include <array>
#include <cmath>
#include <string>

#include "signkit/core/robot_model.hpp"

namespace signkit {

// Default 55-DoF humanoid: 10 leg, 1 torso, two arms with 3-DoF shoulders,
// 1-DoF elbows and 3-DoF wrists, and two 15-DoF hands. Zero pose stands
// upright with the arms held horizontally (robot T-pose). Left/right axes are
// mirrored so symmetric motions have identical joint values.
namespace h1x55 {

struct Gains {
  double stiffness, damping, torque_limit;
};

// Stiffness [N*m/rad], damping [N*m*s/rad], torque limit [N*m].
inline constexpr Gains kHip{200, 5, 170};
inline constexpr Gains kKnee{300, 6, 255};
inline constexpr Gains kAnkle{40, 2, 34};
inline constexpr Gains kTorso{200, 5, 170};
inline constexpr Gains kShoulder{30, 2, 34};
inline constexpr Gains kElbow{30, 2, 18};
inline constexpr Gains kHand{30, 2, 18};

inline constexpr std::array<const char*, 5> kFingers{"thumb", "index", "middle", "ring", "pinky"};

namespace detail {

inline int add(RobotModel& m, std::string name, std::string joint, int parent, Vec3 offset,
               Vec3 axis, double lo, double hi, Gains g, DofGroup group, double def = 0.0) {
  Dof d;
  d.name = std::move(name);
  d.joint = std::move(joint);
  d.parent = parent;
  d.offset = offset;
  d.axis = axis.normalized();
  d.q_min = lo;
  d.q_max = hi;
  d.stiffness = g.stiffness;
  d.damping = g.damping;
  d.torque_limit = g.torque_limit;
  d.group = group;
  d.default_position = def;
  m.dofs.push_back(std::move(d));
  return static_cast<int>(m.dofs.size()) - 1;
}

inline int site(RobotModel& m, std::string name, int dof, Vec3 offset) {
  m.sites.push_back({std::move(name), dof, offset});
  return static_cast<int>(m.sites.size()) - 1;
}

// Reflection through the sagittal (x-z) plane, applied to a position...
inline Vec3 mirror_point(const Vec3& p, double side) { return {p.x(), side * p.y(), p.z()}; }
// ...and to a rotation axis (axial vector).
inline Vec3 mirror_axis(const Vec3& a, double side) {
  return side > 0 ? a : Vec3(-a.x(), a.y(), -a.z());
}

}  // namespace detail

inline constexpr double kThighLength = 0.4;
inline constexpr double kShinLength = 0.4;
inline constexpr double kUpperArmLength = 0.28;
inline constexpr double kForearmLength = 0.25;

inline RobotModel make_model() {
  using detail::add;
  using detail::mirror_axis;
  using detail::mirror_point;
  using detail::site;
  RobotModel m;
  m.name = "h1x55";
  const Vec3 X = Vec3::UnitX(), Y = Vec3::UnitY(), Z = Vec3::UnitZ();

  std::array<int, 2> ankle{}, hip_yaw{}, knee{};
  for (int s = 0; s < 2; ++s) {
    const double side = s == 0 ? 1.0 : -1.0;
    const std::string p = s == 0 ? "left_" : "right_";
    hip_yaw[s] = add(m, p + "hip_yaw", p + "hip", -1, mirror_point({0, 0.0875, -0.1742}, side),
                     mirror_axis(Z, side), -0.43, 0.43, kHip, DofGroup::Leg);
    const int roll = add(m, p + "hip_roll", p + "hip", hip_yaw[s], Vec3::Zero(),
                         mirror_axis(X, side), -0.43, 0.43, kHip, DofGroup::Leg);
    const int pitch = add(m, p + "hip_pitch", p + "hip", roll, Vec3::Zero(), Y, -1.57, 1.57,
                          kHip, DofGroup::Leg, -0.2);
    knee[s] = add(m, p + "knee", p + "knee", pitch, {0, 0, -kThighLength}, Y, -0.26, 2.05, kKnee,
                  DofGroup::Leg, 0.4);
    ankle[s] = add(m, p + "ankle", p + "ankle", knee[s], {0, 0, -kShinLength}, Y, -0.87, 0.52,
                   kAnkle, DofGroup::Leg, -0.2);
  }
  const int torso =
      add(m, "torso", "torso", -1, Vec3::Zero(), Z, -1.5, 1.5, kTorso, DofGroup::Torso);

  std::array<int, 2> shoulder{}, elbow{}, wrist{};
  for (int s = 0; s < 2; ++s) {
    const double side = s == 0 ? 1.0 : -1.0;
    const std::string p = s == 0 ? "left_" : "right_";
    shoulder[s] = add(m, p + "shoulder_pitch", p + "shoulder", torso,
                      mirror_point({0.0055, 0.15535, 0.43}, side), Y, -2.87, 2.87, kShoulder,
                      DofGroup::Shoulder);
    const int sr = add(m, p + "shoulder_roll", p + "shoulder", shoulder[s], Vec3::Zero(),
                       mirror_axis(X, side), -1.8, 1.8, kShoulder, DofGroup::Shoulder);
    const int sy = add(m, p + "shoulder_yaw", p + "shoulder", sr, Vec3::Zero(),
                       mirror_axis(Z, side), -2.0, 2.0, kShoulder, DofGroup::Shoulder);
    elbow[s] = add(m, p + "elbow", p + "elbow", sy, mirror_point({0, kUpperArmLength, 0}, side),
                   mirror_axis(-Z, side), -0.5, 2.6, kElbow, DofGroup::Elbow);
    const int wx = add(m, p + "wrist_roll", p + "wrist", elbow[s],
                       mirror_point({0, kForearmLength, 0}, side), mirror_axis(X, side), -1.57,
                       1.57, kHand, DofGroup::Wrist);
    const int wy = add(m, p + "wrist_pitch", p + "wrist", wx, Vec3::Zero(), Y, -1.57, 1.57,
                       kHand, DofGroup::Wrist);
    wrist[s] = add(m, p + "wrist_yaw", p + "wrist", wy, Vec3::Zero(), mirror_axis(Z, side),
                   -1.57, 1.57, kHand, DofGroup::Wrist);
  }

  // Hands: fingers extend along the arm (+y on the left), palm faces -z,
  // positive flexion curls toward the palm.
  std::array<std::array<int, 5>, 2> tip_dof{};
  for (int s = 0; s < 2; ++s) {
    const double side = s == 0 ? 1.0 : -1.0;
    const std::string p = s == 0 ? "left_" : "right_";
    const Vec3 thumb_dir = mirror_point(Vec3(1, 1, 0).normalized(), side);
    const int rot = add(m, p + "thumb_rotation", p + "thumb", wrist[s],
                        mirror_point({0.03, 0.03, -0.01}, side), mirror_axis(Y, side), 0.0, 1.3,
                        kHand, DofGroup::Finger);
    const int mcp = add(m, p + "thumb_mcp", p + "thumb", rot, Vec3::Zero(), mirror_axis(Z, side),
                        0.0, 1.2, kHand, DofGroup::Finger);
    tip_dof[s][0] = add(m, p + "thumb_ip", p + "thumb", mcp, 0.045 * thumb_dir,
                        mirror_axis(Z, side), 0.0, 1.4, kHand, DofGroup::Finger);
    const std::array<double, 4> lateral{0.03, 0.01, -0.01, -0.03};
    for (int f = 1; f < 5; ++f) {
      const std::string j = p + kFingers[f];
      const Vec3 flex = mirror_axis(-X, side);
      const int a = add(m, j + "_mcp", j, wrist[s], mirror_point({lateral[f - 1], 0.09, 0}, side),
                        flex, 0.0, 1.6, kHand, DofGroup::Finger);
      const int b = add(m, j + "_pip", j, a, mirror_point({0, 0.05, 0}, side), flex, 0.0, 1.6,
                        kHand, DofGroup::Finger);
      tip_dof[s][f] = add(m, j + "_dip", j, b, mirror_point({0, 0.03, 0}, side), flex, 0.0, 1.6,
                          kHand, DofGroup::Finger);
    }
  }

  for (int s = 0; s < 2; ++s) {
    const std::string p = s == 0 ? "left_" : "right_";
    m.keypoints.push_back(site(m, p + "hip", hip_yaw[s], Vec3::Zero()));
    m.keypoints.push_back(site(m, p + "knee", knee[s], Vec3::Zero()));
    m.keypoints.push_back(site(m, p + "ankle", ankle[s], Vec3::Zero()));
  }
  m.keypoints.push_back(site(m, "chest", torso, {0, 0, 0.3}));
  m.keypoints.push_back(site(m, "head", torso, {0, 0, 0.7}));
  for (int s = 0; s < 2; ++s) {
    const double side = s == 0 ? 1.0 : -1.0;
    const std::string p = s == 0 ? "left_" : "right_";
    m.keypoints.push_back(site(m, p + "shoulder", shoulder[s], Vec3::Zero()));
    m.keypoints.push_back(site(m, p + "elbow", elbow[s], Vec3::Zero()));
    m.keypoints.push_back(site(m, p + "hand", wrist[s], mirror_point({0, 0.1, 0}, side)));
  }
  for (int s = 0; s < 2; ++s) {
    const double side = s == 0 ? 1.0 : -1.0;
    const std::string p = s == 0 ? "left_" : "right_";
    site(m, p + "foot", ankle[s], {0.05, 0, -0.05});
    site(m, p + "thumb_tip", tip_dof[s][0], 0.035 * mirror_point(Vec3(1, 1, 0).normalized(), side));
    for (int f = 1; f < 5; ++f)
      site(m, p + kFingers[f] + "_tip", tip_dof[s][f], mirror_point({0, 0.025, 0}, side));
  }

  for (int i = 0; i < 10; ++i) m.lower.push_back(i);
  for (int i = 10; i < static_cast<int>(m.dofs.size()); ++i) m.upper.push_back(i);
  m.validate();
  return m;
}

}  // namespace h1x55
}  // namespace signkit
