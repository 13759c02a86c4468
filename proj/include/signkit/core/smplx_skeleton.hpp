#pragma once

#include <array>
#include <string>

#include "signkit/core/motion.hpp"

namespace signkit::smplx {

inline constexpr int kJointCount = 55;

// 55-joint body+hands+face skeleton in the common parametric-body-model
// ordering, T-pose offsets in a z-up, x-forward, y-left frame.
inline SourceSkeleton make_skeleton() {
  SourceSkeleton s;
  auto add = [&](std::string name, std::string parent, Vec3 off) {
    s.joints.push_back({std::move(name), parent.empty() ? -1 : s.index(parent), off});
  };
  add("pelvis", "", {0, 0, 0});
  add("left_hip", "pelvis", {0, 0.06, -0.09});
  add("right_hip", "pelvis", {0, -0.06, -0.09});
  add("spine1", "pelvis", {0, 0, 0.11});
  add("left_knee", "left_hip", {0, 0.0, -0.38});
  add("right_knee", "right_hip", {0, 0.0, -0.38});
  add("spine2", "spine1", {0, 0, 0.13});
  add("left_ankle", "left_knee", {0, 0, -0.40});
  add("right_ankle", "right_knee", {0, 0, -0.40});
  add("spine3", "spine2", {0, 0, 0.05});
  add("left_foot", "left_ankle", {0.12, 0, -0.06});
  add("right_foot", "right_ankle", {0.12, 0, -0.06});
  add("neck", "spine3", {0, 0, 0.21});
  add("left_collar", "spine3", {0, 0.07, 0.12});
  add("right_collar", "spine3", {0, -0.07, 0.12});
  add("head", "neck", {0, 0, 0.09});
  add("left_shoulder", "left_collar", {0, 0.11, 0.03});
  add("right_shoulder", "right_collar", {0, -0.11, 0.03});
  add("left_elbow", "left_shoulder", {0, 0.26, 0});
  add("right_elbow", "right_shoulder", {0, -0.26, 0});
  add("left_wrist", "left_elbow", {0, 0.25, 0});
  add("right_wrist", "right_elbow", {0, -0.25, 0});
  add("jaw", "head", {0.02, 0, -0.02});
  add("left_eye_smplhf", "head", {0.08, 0.03, 0.04});
  add("right_eye_smplhf", "head", {0.08, -0.03, 0.04});
  const std::array<const char*, 5> fingers{"index", "middle", "pinky", "ring", "thumb"};
  const std::array<double, 5> lateral{0.025, 0.005, -0.035, -0.015, 0.03};
  for (int side = 0; side < 2; ++side) {
    const std::string p = side == 0 ? "left_" : "right_";
    const double sy = side == 0 ? 1.0 : -1.0;
    for (int f = 0; f < 5; ++f) {
      const std::string base = p + fingers[f];
      const bool thumb = f == 4;
      const Vec3 first = thumb ? Vec3(lateral[f], sy * 0.03, -0.01) : Vec3(lateral[f], sy * 0.09, 0);
      const Vec3 seg = thumb ? Vec3(0.025, sy * 0.025, 0) : Vec3(0, sy * 0.035, 0);
      add(base + "1", p + "wrist", first);
      add(base + "2", base + "1", seg);
      add(base + "3", base + "2", 0.8 * seg);
    }
  }
  return s;
}

}  // namespace signkit::smplx
