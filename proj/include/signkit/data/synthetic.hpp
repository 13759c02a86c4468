#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "signkit/core/kinematics.hpp"
#include "signkit/core/motion.hpp"
#include "signkit/core/smplx_skeleton.hpp"

namespace signkit::synthetic {

struct SignClipOptions {
  double duration = 6.0;  // s
  double fps = 30.0;
  double amplitude = 1.0;  // scales every oscillation
  double root_height = 1.0;
};

namespace detail {

struct Wave {
  double amp, freq, phase;
  double operator()(double t) const { return amp * std::sin(2.0 * kPi * freq * t + phase); }
};

inline Wave wave(std::mt19937_64& rng, double amp_lo, double amp_hi, double f_lo, double f_hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {amp_lo + (amp_hi - amp_lo) * u(rng), f_lo + (f_hi - f_lo) * u(rng), 2.0 * kPi * u(rng)};
}

}  // namespace detail

// Signing-like robot motion: upper arms lowered, forearms forward, smooth
// oscillations of shoulders, elbows, wrists and fingers; legs at the default pose.
inline RobotTrajectory sign_clip(const RobotModel& m, std::uint64_t seed, const SignClipOptions& o = {}) {
  std::mt19937_64 rng(seed);
  const int n = static_cast<int>(m.dof_count());
  const VecX base = m.default_pose();
  VecX center = base;
  std::vector<detail::Wave> waves(n, {0, 0, 0});
  for (int i : m.upper) {
    const Dof& d = m.dofs[i];
    const std::string& nm = d.name;
    switch (d.group) {
      case DofGroup::Torso: waves[i] = detail::wave(rng, 0.02, 0.08, 0.1, 0.4); break;
      case DofGroup::Shoulder:
        if (nm.find("roll") != std::string::npos) center[i] = -1.0;
        waves[i] = detail::wave(rng, 0.1, 0.35, 0.2, 0.8);
        break;
      case DofGroup::Elbow:
        center[i] = 1.2;
        waves[i] = detail::wave(rng, 0.1, 0.4, 0.2, 0.9);
        break;
      case DofGroup::Wrist: waves[i] = detail::wave(rng, 0.05, 0.3, 0.3, 1.2); break;
      case DofGroup::Finger:
        center[i] = 0.5 * (d.q_min + d.q_max);
        waves[i] = detail::wave(rng, 0.1, 0.45 * (d.q_max - d.q_min), 0.3, 1.5);
        break;
      default: break;
    }
  }
  RobotTrajectory t;
  t.fps = o.fps;
  const int frames = std::max(2, static_cast<int>(std::lround(o.duration * o.fps)) + 1);
  for (int k = 0; k < frames; ++k) {
    const double time = k / o.fps;
    TrajectoryFrame f;
    f.q = center;
    for (int i : m.upper) {
      const Dof& d = m.dofs[i];
      const double margin = 0.02 * (d.q_max - d.q_min);
      f.q[i] = std::clamp(center[i] + o.amplitude * waves[i](time), d.q_min + margin, d.q_max - margin);
    }
    f.root.translation = {0, 0, o.root_height};
    t.frames.push_back(std::move(f));
  }
  return populate_kinematics(m, std::move(t));
}

inline std::vector<RobotTrajectory> sign_corpus(const RobotModel& m, int clips, std::uint64_t seed,
                                                const SignClipOptions& o = {}) {
  std::vector<RobotTrajectory> out;
  for (int c = 0; c < clips; ++c) out.push_back(sign_clip(m, seed * 1000003ULL + c, o));
  return out;
}

// Source-skeleton clip: T-pose plus smooth rotations of the arm and finger joints.
inline MotionClip source_clip(std::uint64_t seed, double duration = 3.0, double fps = 30.0,
                              double amplitude = 0.4) {
  std::mt19937_64 rng(seed);
  MotionClip c;
  c.fps = fps;
  c.skeleton = smplx::make_skeleton();
  const int nj = static_cast<int>(c.skeleton.size());
  std::vector<std::array<detail::Wave, 3>> waves(nj);
  std::vector<bool> moving(nj, false);
  for (int j = 0; j < nj; ++j) {
    const std::string& nm = c.skeleton.joints[j].name;
    const bool arm = nm.find("shoulder") != std::string::npos || nm.find("elbow") != std::string::npos ||
                     nm.find("wrist") != std::string::npos;
    const bool finger = j >= 25;
    if (!arm && !finger) continue;
    moving[j] = true;
    for (auto& w : waves[j]) w = detail::wave(rng, 0.2 * amplitude, amplitude, 0.2, 1.0);
  }
  const int frames = std::max(2, static_cast<int>(std::lround(duration * fps)) + 1);
  for (int k = 0; k < frames; ++k) {
    const double t = k / fps;
    MotionFrame f;
    f.root_translation = {0, 0, 0.95};
    f.joints.assign(nj, Quat::Identity());
    for (int j = 0; j < nj; ++j)
      if (moving[j]) f.joints[j] = exp_map({waves[j][0](t), waves[j][1](t), waves[j][2](t)});
    c.frames.push_back(std::move(f));
  }
  return c;
}

}  // namespace signkit::synthetic
