#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signkit/core/motion.hpp"
#include "signkit/core/robot_model.hpp"
#include "signkit/core/rotation.hpp"

namespace signkit::retarget {

enum class MappingKind { OneD, ThreeD };

struct MappingEntry {
  std::string source_joint;
  std::string robot_group;  // robot joint name, e.g. "left_elbow"
  MappingKind kind = MappingKind::ThreeD;
  std::string axis_order = "xyz";
};

using MappingTable = std::vector<MappingEntry>;

struct JointCalibration {
  int source_joint = -1;
  std::string robot_joint;
  MappingKind kind = MappingKind::ThreeD;
  Quat offset = Quat::Identity();  // robot T-pose joint frame -> source T-pose joint frame
  std::string axis_order = "xyz";
  std::vector<int> dofs;              // robot DoFs, in axis-order sequence
  std::array<double, 3> sign{1, 1, 1};  // per-DoF axis sign relative to its letter
  Vec3 axis = Vec3::UnitX();          // 1-D projection axis
};

struct TPoseCalibration {
  SourceSkeleton source;
  std::vector<JointCalibration> joints;
};

struct RetargetResult {
  RobotTrajectory trajectory;
  std::size_t clamped = 0;
  std::size_t mapped_values = 0;
  double clamp_fraction() const {
    return mapped_values == 0 ? 0.0 : static_cast<double>(clamped) / mapped_values;
  }
};

inline Quat to_robot_frame(const Quat& q_local, const Quat& offset) {
  return offset.conjugate() * q_local * offset;
}

// Rotation vector with angle in [0, pi]: joint angles take the short way round.
inline Vec3 joint_rotation_vector(const Quat& q_local, const Quat& offset) {
  Quat q = to_robot_frame(q_local, offset);
  if (q.w() < 0) q.coeffs() *= -1.0;
  return log_map(q);
}

inline int axis_letter(char c) {
  switch (c) {
    case 'x': return 0;
    case 'y': return 1;
    case 'z': return 2;
    default: return -1;
  }
}

inline bool valid_axis_order(const std::string& order) {
  if (order.size() != 3) return false;
  std::array<int, 3> seen{0, 0, 0};
  for (char c : order) {
    const int i = axis_letter(c);
    if (i < 0 || seen[i]++) return false;
  }
  return true;
}

// m = beta * a of the conjugated rotation, components listed in axis order.
inline Vec3 map_3d_joint(const Quat& q_local, const Quat& offset,
                         const std::string& axis_order = "xyz") {
  if (!valid_axis_order(axis_order))
    throw std::invalid_argument("invalid axis order: " + axis_order);
  const Vec3 m = joint_rotation_vector(q_local, offset);
  return {m[axis_letter(axis_order[0])], m[axis_letter(axis_order[1])],
          m[axis_letter(axis_order[2])]};
}

inline Vec3 map_3d_joint(const Quat& q_local, const Quat& offset, const std::string& axis_order,
                         const Vec3& lo, const Vec3& hi) {
  return map_3d_joint(q_local, offset, axis_order).cwiseMax(lo).cwiseMin(hi);
}

// Rotation angle projected onto the joint axis: beta * (a . n).
inline double map_1d_joint(const Quat& q_local, const Quat& offset, const Vec3& axis) {
  return joint_rotation_vector(q_local, offset).dot(axis);
}

inline double map_1d_joint(const Quat& q_local, const Quat& offset, const Vec3& axis, double lo,
                           double hi) {
  return std::clamp(map_1d_joint(q_local, offset, axis), lo, hi);
}

namespace detail {

inline std::optional<Vec3> mean_direction(const std::vector<Vec3>& v) {
  Vec3 sum = Vec3::Zero();
  for (const Vec3& x : v)
    if (x.norm() > 1e-12) sum += x.normalized();
  if (sum.norm() < 1e-9) return std::nullopt;
  return sum.normalized();
}

inline std::optional<Vec3> source_bone_direction(const SourceSkeleton& s, int j) {
  std::vector<Vec3> dirs;
  for (int c : s.children(j)) dirs.push_back(s.joints[c].offset);
  return mean_direction(dirs);
}

inline std::optional<Vec3> robot_bone_direction(const RobotModel& m, const std::vector<int>& dofs) {
  std::vector<Vec3> dirs;
  for (std::size_t i = 0; i < m.dofs.size(); ++i) {
    const int p = m.dofs[i].parent;
    const bool own = std::find(dofs.begin(), dofs.end(), static_cast<int>(i)) != dofs.end();
    if (!own && std::find(dofs.begin(), dofs.end(), p) != dofs.end())
      dirs.push_back(m.dofs[i].offset);
  }
  return mean_direction(dirs);
}

}  // namespace detail

// Aligns each mapped source joint with its robot joint using the bone
// directions of both T-poses. Every non-finger robot joint must be mapped.
inline TPoseCalibration calibrate(const SourceSkeleton& source, const RobotModel& robot,
                                  const MappingTable& table) {
  source.validate();
  for (const std::string& joint : robot.joint_names()) {
    const auto dofs = robot.joint_dofs(joint);
    if (robot.dofs[dofs.front()].group == DofGroup::Finger) continue;
    const bool mapped = std::any_of(table.begin(), table.end(),
                                    [&](const MappingEntry& e) { return e.robot_group == joint; });
    if (!mapped)
      throw std::invalid_argument("unmapped group: " +
                                  std::string(to_string(robot.dofs[dofs.front()].group)) + " (" +
                                  joint + ")");
  }

  TPoseCalibration cal;
  cal.source = source;
  for (const MappingEntry& e : table) {
    JointCalibration jc;
    jc.source_joint = source.index(e.source_joint);
    if (jc.source_joint < 0)
      throw std::invalid_argument("unknown source joint: " + e.source_joint);
    jc.robot_joint = e.robot_group;
    jc.kind = e.kind;
    jc.axis_order = e.axis_order;
    const auto dofs = robot.joint_dofs(e.robot_group);
    if (dofs.empty()) throw std::invalid_argument("unknown robot group: " + e.robot_group);
    const std::string bad = "inconsistent axis definitions: " + e.robot_group;
    if (e.kind == MappingKind::OneD) {
      if (dofs.size() != 1) throw std::invalid_argument(bad + " (1d mapping needs 1 dof)");
      jc.dofs = dofs;
      jc.axis = robot.dofs[dofs[0]].axis;
    } else {
      if (dofs.size() != 3) throw std::invalid_argument(bad + " (3d mapping needs 3 dofs)");
      if (!valid_axis_order(e.axis_order))
        throw std::invalid_argument(bad + " (axis order " + e.axis_order + ")");
      for (int k = 0; k < 3; ++k) {
        const Vec3 unit = Vec3::Unit(axis_letter(e.axis_order[k]));
        const double c = robot.dofs[dofs[k]].axis.dot(unit);
        if (std::abs(std::abs(c) - 1.0) > 1e-9)
          throw std::invalid_argument(bad + " (dof " + robot.dofs[dofs[k]].name +
                                      " is not along " + e.axis_order[k] + ")");
        jc.sign[k] = c > 0 ? 1.0 : -1.0;
      }
      jc.dofs = dofs;
    }
    const auto src_dir = detail::source_bone_direction(source, jc.source_joint);
    const auto rob_dir = detail::robot_bone_direction(robot, dofs);
    if (src_dir && rob_dir) jc.offset = Quat::FromTwoVectors(*rob_dir, *src_dir).normalized();
    cal.joints.push_back(std::move(jc));
  }
  return cal;
}

// Per-frame DoF values for one set of local rotations; unmapped DoFs stay 0.
inline VecX retarget_pose(const std::vector<Quat>& local, const TPoseCalibration& cal,
                          const RobotModel& robot, std::size_t* clamped = nullptr) {
  VecX q = VecX::Zero(static_cast<Eigen::Index>(robot.dof_count()));
  auto put = [&](int dof, double value) {
    const Dof& d = robot.dofs[dof];
    const double c = std::clamp(value, d.q_min, d.q_max);
    if (clamped && c != value) ++*clamped;
    q[dof] = c;
  };
  for (const JointCalibration& jc : cal.joints) {
    const Quat& ql = local.at(jc.source_joint);
    if (jc.kind == MappingKind::OneD) {
      put(jc.dofs[0], map_1d_joint(ql, jc.offset, jc.axis));
    } else {
      const Vec3 m = map_3d_joint(ql, jc.offset, jc.axis_order);
      for (int k = 0; k < 3; ++k) put(jc.dofs[k], jc.sign[k] * m[k]);
    }
  }
  return q;
}

// Flips quaternion signs so consecutive frames have a non-negative dot product.
inline std::vector<std::vector<Quat>> sign_continuous(const MotionClip& clip) {
  std::vector<std::vector<Quat>> out;
  out.reserve(clip.frames.size());
  for (std::size_t k = 0; k < clip.frames.size(); ++k) {
    std::vector<Quat> qs = clip.frames[k].joints;
    for (std::size_t j = 0; j < qs.size(); ++j) {
      if (k == 0) {
        qs[j] = canonical(qs[j]);
      } else {
        qs[j].normalize();
        if (qs[j].coeffs().dot(out.back()[j].coeffs()) < 0.0) qs[j].coeffs() *= -1.0;
      }
    }
    out.push_back(std::move(qs));
  }
  return out;
}

inline std::size_t mapped_dof_count(const TPoseCalibration& cal) {
  std::size_t n = 0;
  for (const auto& jc : cal.joints) n += jc.dofs.size();
  return n;
}

inline RetargetResult retarget_clip(const MotionClip& clip, const TPoseCalibration& cal,
                                    const RobotModel& robot) {
  if (!(clip.skeleton == cal.source))
    throw std::invalid_argument("skeleton mismatch: clip skeleton differs from calibration source");
  clip.validate();
  RetargetResult res;
  res.trajectory.fps = clip.fps;
  const auto local = sign_continuous(clip);
  for (std::size_t k = 0; k < clip.frames.size(); ++k) {
    TrajectoryFrame f;
    f.q = retarget_pose(local[k], cal, robot, &res.clamped);
    f.root.translation = clip.frames[k].root_translation;
    f.root.orientation = clip.frames[k].root_orientation.normalized();
    res.trajectory.frames.push_back(std::move(f));
  }
  res.mapped_values = mapped_dof_count(cal) * clip.frames.size();
  res.trajectory = populate_kinematics(robot, std::move(res.trajectory));
  return res;
}

// ---- mapping table I/O and defaults ----

inline nlohmann::json to_json(const MappingTable& t) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& e : t)
    a.push_back({{"source_joint", e.source_joint},
                 {"robot_group", e.robot_group},
                 {"kind", e.kind == MappingKind::OneD ? "1d" : "3d"},
                 {"axis_order", e.axis_order}});
  return a;
}

inline MappingTable mapping_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("mapping table: expected an array");
  MappingTable t;
  for (const auto& e : j) {
    MappingEntry m;
    m.source_joint = e.at("source_joint").get<std::string>();
    m.robot_group = e.at("robot_group").get<std::string>();
    const std::string kind = e.at("kind").get<std::string>();
    if (kind != "1d" && kind != "3d")
      throw std::invalid_argument("mapping table: kind must be \"1d\" or \"3d\", got " + kind);
    m.kind = kind == "1d" ? MappingKind::OneD : MappingKind::ThreeD;
    m.axis_order = e.value("axis_order", "xyz");
    t.push_back(std::move(m));
  }
  return t;
}

// Body mapping from the 55-joint source skeleton onto the default robot.
inline MappingTable default_body_mapping() {
  MappingTable t;
  for (const std::string side : {"left_", "right_"}) {
    t.push_back({side + "hip", side + "hip", MappingKind::ThreeD, "zxy"});
    t.push_back({side + "knee", side + "knee", MappingKind::OneD, "xyz"});
    t.push_back({side + "ankle", side + "ankle", MappingKind::OneD, "xyz"});
    t.push_back({side + "shoulder", side + "shoulder", MappingKind::ThreeD, "yxz"});
    t.push_back({side + "elbow", side + "elbow", MappingKind::OneD, "xyz"});
    t.push_back({side + "wrist", side + "wrist", MappingKind::ThreeD, "xyz"});
  }
  t.push_back({"spine1", "torso", MappingKind::OneD, "xyz"});
  return t;
}

// A source skeleton with one joint per robot joint and the robot's own
// T-pose offsets, plus the identity mapping onto it.
inline std::pair<SourceSkeleton, MappingTable> mirror_robot_skeleton(const RobotModel& robot) {
  SourceSkeleton s;
  MappingTable t;
  s.joints.push_back({"base", -1, Vec3::Zero()});
  for (const std::string& joint : robot.joint_names()) {
    const auto dofs = robot.joint_dofs(joint);
    const Dof& first = robot.dofs[dofs.front()];
    int parent = 0;
    if (first.parent >= 0) parent = s.index(robot.dofs[first.parent].joint);
    s.joints.push_back({joint, parent, first.offset});
    if (first.group == DofGroup::Finger) continue;
    if (dofs.size() == 1) {
      t.push_back({joint, joint, MappingKind::OneD, "xyz"});
    } else {
      std::string order;
      for (int d : dofs) {
        const Vec3 a = robot.dofs[d].axis.cwiseAbs();
        Eigen::Index idx;
        a.maxCoeff(&idx);
        order += "xyz"[idx];
      }
      t.push_back({joint, joint, MappingKind::ThreeD, order});
    }
  }
  return {s, t};
}

}  // namespace signkit::retarget
