#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "signkit/core/robot_model.hpp"

namespace signkit {

struct RootPose {
  Vec3 translation = Vec3::Zero();
  Quat orientation = Quat::Identity();
};

// World-frame origin and orientation of every DoF frame.
struct DofFrames {
  std::vector<Mat3> rotation;
  Points origin;
};

inline DofFrames dof_frames(std::span<const Dof> dofs, const Eigen::Ref<const VecX>& q,
                            const RootPose& root = {}) {
  if (static_cast<std::size_t>(q.size()) != dofs.size())
    throw std::invalid_argument("forward kinematics: expected " +
                                std::to_string(dofs.size()) + " joint values, got " +
                                std::to_string(q.size()));
  const Mat3 root_r = root.orientation.normalized().toRotationMatrix();
  DofFrames f;
  f.rotation.resize(dofs.size());
  f.origin.resize(static_cast<Eigen::Index>(dofs.size()), 3);
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const Dof& d = dofs[i];
    const Mat3& rp = d.parent < 0 ? root_r : f.rotation[d.parent];
    const Vec3 tp = d.parent < 0 ? root.translation : Vec3(f.origin.row(d.parent).transpose());
    f.origin.row(i) = (tp + rp * d.offset).transpose();
    f.rotation[i] = rp * Eigen::AngleAxisd(q[i], d.axis).toRotationMatrix();
  }
  return f;
}

inline Vec3 site_position(const Site& s, const DofFrames& f, const RootPose& root = {}) {
  if (s.dof < 0) return root.translation + root.orientation.normalized() * s.offset;
  return f.origin.row(s.dof).transpose() + f.rotation[s.dof] * s.offset;
}

struct FkResult {
  Points joint_positions;  // one row per DoF
  Points keypoints;        // one row per model keypoint
};

inline FkResult forward_kinematics(const RobotModel& model, const Eigen::Ref<const VecX>& q,
                                   const RootPose& root = {}) {
  const DofFrames f = dof_frames(model.dofs, q, root);
  FkResult out;
  out.joint_positions = f.origin;
  out.keypoints.resize(static_cast<Eigen::Index>(model.keypoints.size()), 3);
  for (std::size_t k = 0; k < model.keypoints.size(); ++k)
    out.keypoints.row(k) = site_position(model.sites[model.keypoints[k]], f, root).transpose();
  return out;
}

inline Points site_positions(const RobotModel& model, std::span<const int> site_ids,
                             const Eigen::Ref<const VecX>& q, const RootPose& root = {}) {
  const DofFrames f = dof_frames(model.dofs, q, root);
  Points out(static_cast<Eigen::Index>(site_ids.size()), 3);
  for (std::size_t k = 0; k < site_ids.size(); ++k)
    out.row(k) = site_position(model.sites.at(site_ids[k]), f, root).transpose();
  return out;
}

}  // namespace signkit
