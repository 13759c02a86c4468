#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "signkit/core/kinematics.hpp"

namespace signkit {

struct SkeletonJoint {
  std::string name;
  int parent = -1;
  Vec3 offset = Vec3::Zero();  // T-pose offset from the parent joint, meters
};

struct SourceSkeleton {
  std::vector<SkeletonJoint> joints;

  std::size_t size() const { return joints.size(); }

  int index(std::string_view name) const {
    for (std::size_t i = 0; i < joints.size(); ++i)
      if (joints[i].name == name) return static_cast<int>(i);
    return -1;
  }

  std::vector<int> children(int j) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < joints.size(); ++i)
      if (joints[i].parent == j) out.push_back(static_cast<int>(i));
    return out;
  }

  void validate() const {
    int roots = 0;
    for (std::size_t i = 0; i < joints.size(); ++i) {
      const int p = joints[i].parent;
      if (p >= static_cast<int>(i))
        throw std::invalid_argument("skeleton joint " + joints[i].name +
                                    ": parent must precede child");
      if (p < -1) throw std::invalid_argument("skeleton joint " + joints[i].name + ": bad parent");
      if (p == -1) ++roots;
    }
    if (roots != 1) throw std::invalid_argument("skeleton must have exactly one root");
  }

  bool operator==(const SourceSkeleton& o) const {
    if (joints.size() != o.joints.size()) return false;
    for (std::size_t i = 0; i < joints.size(); ++i)
      if (joints[i].name != o.joints[i].name || joints[i].parent != o.joints[i].parent)
        return false;
    return true;
  }
};

struct MotionFrame {
  Vec3 root_translation = Vec3::Zero();
  Quat root_orientation = Quat::Identity();
  std::vector<Quat> joints;  // local rotations, one per skeleton joint
};

struct MotionClip {
  double fps = 30.0;
  SourceSkeleton skeleton;
  std::vector<MotionFrame> frames;

  void validate() const {
    if (!(fps > 0)) throw std::invalid_argument("motion clip: fps must be > 0");
    skeleton.validate();
    for (std::size_t k = 0; k < frames.size(); ++k) {
      if (frames[k].joints.size() != skeleton.size())
        throw std::invalid_argument("motion clip: frame " + std::to_string(k) + " has " +
                                    std::to_string(frames[k].joints.size()) +
                                    " joints, skeleton has " + std::to_string(skeleton.size()));
      for (const Quat& q : frames[k].joints)
        if (std::abs(q.norm() - 1.0) > 1e-6)
          throw std::invalid_argument("motion clip: frame " + std::to_string(k) +
                                      " has a non-normalized quaternion");
    }
  }
};

struct TrajectoryFrame {
  VecX q;  // target DoF positions, rad
  RootPose root;
  Vec3 root_velocity = Vec3::Zero();
  Points keypoints;        // 14 x 3
  Points joint_positions;  // n_dof x 3
  Points joint_velocities;  // n_dof x 3
};

struct RobotTrajectory {
  double fps = 30.0;
  std::vector<TrajectoryFrame> frames;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  double duration() const { return frames.empty() ? 0.0 : (frames.size() - 1) / fps; }
};

// Backward differences of joint and root positions; frame 0 copies frame 1.
inline RobotTrajectory finite_difference_velocities(RobotTrajectory traj) {
  if (traj.frames.size() < 2)
    throw std::invalid_argument("finite differencing needs at least 2 frames");
  auto& f = traj.frames;
  for (std::size_t k = 1; k < f.size(); ++k) {
    f[k].joint_velocities = (f[k].joint_positions - f[k - 1].joint_positions) * traj.fps;
    f[k].root_velocity = (f[k].root.translation - f[k - 1].root.translation) * traj.fps;
  }
  f[0].joint_velocities = f[1].joint_velocities;
  f[0].root_velocity = f[1].root_velocity;
  return traj;
}

// Fills keypoints and joint positions from q and the root pose, then velocities.
inline RobotTrajectory populate_kinematics(const RobotModel& model, RobotTrajectory traj) {
  for (auto& fr : traj.frames) {
    FkResult fk = forward_kinematics(model, fr.q, fr.root);
    fr.joint_positions = std::move(fk.joint_positions);
    fr.keypoints = std::move(fk.keypoints);
  }
  if (traj.frames.size() >= 2) return finite_difference_velocities(std::move(traj));
  for (auto& fr : traj.frames)
    fr.joint_velocities = Points::Zero(fr.joint_positions.rows(), 3);
  return traj;
}

}  // namespace signkit
