#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "signkit/core/rotation.hpp"

namespace signkit {

enum class DofGroup { Leg, Torso, Shoulder, Elbow, Wrist, Finger };

inline std::string_view to_string(DofGroup g) {
  switch (g) {
    case DofGroup::Leg: return "leg";
    case DofGroup::Torso: return "torso";
    case DofGroup::Shoulder: return "shoulder";
    case DofGroup::Elbow: return "elbow";
    case DofGroup::Wrist: return "wrist";
    case DofGroup::Finger: return "finger";
  }
  return "unknown";
}

inline DofGroup dof_group_from_string(std::string_view s) {
  if (s == "leg") return DofGroup::Leg;
  if (s == "torso") return DofGroup::Torso;
  if (s == "shoulder") return DofGroup::Shoulder;
  if (s == "elbow") return DofGroup::Elbow;
  if (s == "wrist") return DofGroup::Wrist;
  if (s == "finger") return DofGroup::Finger;
  throw std::invalid_argument("unknown dof group: " + std::string(s));
}

// One revolute axis. `offset` is the translation from the parent DoF frame
// (or the base when parent < 0) expressed with all joints at zero; `joint`
// names the physical robot joint this axis belongs to (3-DoF joints share it).
struct Dof {
  std::string name;
  std::string joint;
  int parent = -1;
  Vec3 offset = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double q_min = -kPi;
  double q_max = kPi;
  double stiffness = 0.0;     // N*m/rad
  double damping = 0.0;       // N*m*s/rad
  double torque_limit = 0.0;  // N*m
  DofGroup group = DofGroup::Leg;
  double default_position = 0.0;
};

// A point rigidly attached to a DoF frame (keypoints, fingertips, feet).
struct Site {
  std::string name;
  int dof = -1;
  Vec3 offset = Vec3::Zero();
};

struct RobotModel {
  std::string name;
  std::vector<Dof> dofs;
  std::vector<Site> sites;
  std::vector<int> keypoints;  // site indices
  std::vector<int> lower;      // dof indices
  std::vector<int> upper;      // dof indices

  std::size_t dof_count() const { return dofs.size(); }

  int dof_index(std::string_view n) const {
    for (std::size_t i = 0; i < dofs.size(); ++i)
      if (dofs[i].name == n) return static_cast<int>(i);
    return -1;
  }

  int site_index(std::string_view n) const {
    for (std::size_t i = 0; i < sites.size(); ++i)
      if (sites[i].name == n) return static_cast<int>(i);
    return -1;
  }

  // DoF indices of a physical joint, in model order.
  std::vector<int> joint_dofs(std::string_view joint) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < dofs.size(); ++i)
      if (dofs[i].joint == joint) out.push_back(static_cast<int>(i));
    return out;
  }

  std::vector<std::string> joint_names() const {
    std::vector<std::string> out;
    for (const auto& d : dofs)
      if (std::find(out.begin(), out.end(), d.joint) == out.end()) out.push_back(d.joint);
    return out;
  }

  VecX lower_limits() const {
    VecX v(dofs.size());
    for (std::size_t i = 0; i < dofs.size(); ++i) v[i] = dofs[i].q_min;
    return v;
  }

  VecX upper_limits() const {
    VecX v(dofs.size());
    for (std::size_t i = 0; i < dofs.size(); ++i) v[i] = dofs[i].q_max;
    return v;
  }

  VecX default_pose() const {
    VecX v(dofs.size());
    for (std::size_t i = 0; i < dofs.size(); ++i) v[i] = dofs[i].default_position;
    return v;
  }

  void validate() const {
    const int n = static_cast<int>(dofs.size());
    if (n == 0) throw std::invalid_argument("robot model has no dofs");
    for (int i = 0; i < n; ++i) {
      const Dof& d = dofs[i];
      if (d.parent >= i)
        throw std::invalid_argument("dof " + d.name + ": parent must precede child");
      if (!(d.q_min < d.q_max))
        throw std::invalid_argument("dof " + d.name + ": q_min must be < q_max");
      if (std::abs(d.axis.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("dof " + d.name + ": axis is not unit length");
      if (d.default_position < d.q_min || d.default_position > d.q_max)
        throw std::invalid_argument("dof " + d.name + ": default outside limits");
      if (d.stiffness < 0 || d.damping < 0 || d.torque_limit < 0)
        throw std::invalid_argument("dof " + d.name + ": negative gain or limit");
    }
    for (const auto& s : sites)
      if (s.dof < -1 || s.dof >= n)
        throw std::invalid_argument("site " + s.name + ": bad dof index");
    for (int k : keypoints)
      if (k < 0 || k >= static_cast<int>(sites.size()))
        throw std::invalid_argument("keypoint refers to missing site");
    std::vector<int> seen(n, 0);
    for (int i : lower) {
      if (i < 0 || i >= n) throw std::invalid_argument("partition index out of range");
      ++seen[i];
    }
    for (int i : upper) {
      if (i < 0 || i >= n) throw std::invalid_argument("partition index out of range");
      ++seen[i];
    }
    for (int i = 0; i < n; ++i)
      if (seen[i] != 1)
        throw std::invalid_argument("upper/lower partition must cover dof " +
                                    dofs[i].name + " exactly once");
  }
};

}  // namespace signkit
