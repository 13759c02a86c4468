#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signkit/core/robot_model.hpp"

namespace signkit::sim {

enum class RewardGroup { Task, Penalty, Regularization };

enum RewardTerm : int {
  kDofPos,
  kKeypointPos,
  kLinVel,
  kRoll,
  kPitch,
  kYaw,
  kDofPosLimit,
  kAlive,
  kAirTime,
  kDrag,
  kContactForce,
  kStumble,
  kDofAcc,
  kActionRate,
  kEnergy,
  kDofLimitViolation,
  kDofDeviation,
  kLinVelZ,
  kAngVelXy,
  kProjectedGravity,
  kTermCount
};

inline constexpr std::array<const char*, kTermCount> kTermNames{
    "dof_pos",     "keypoint_pos", "lin_vel",      "roll",
    "pitch",       "yaw",          "dof_pos_limit", "alive",
    "air_time",    "drag",         "contact_force", "stumble",
    "dof_acc",     "action_rate",  "energy",        "dof_limit_violation",
    "dof_deviation", "lin_vel_z",  "ang_vel_xy",    "projected_gravity"};

inline RewardGroup group_of(int term) {
  if (term <= kYaw) return RewardGroup::Task;
  if (term <= kAlive) return RewardGroup::Penalty;
  return RewardGroup::Regularization;
}

struct RewardWeights {
  std::array<double, kTermCount> w{6.0,  5.0,  6.0,   1.0,  1.0,  1.0,   -1e-2,
                                   1.0,  10.0, -0.1,  -3e-3, -2.0, -3e-7, -1e-1,
                                   -1e-3, -10.0, -1e-1, -1.0, -0.4, -2.0};
  double task_scale = 1.0, penalty_scale = 1.0, regularization_scale = 1.0;
  double contact_force_threshold = 500.0;  // N

  double group_scale(RewardGroup g) const {
    switch (g) {
      case RewardGroup::Task: return task_scale;
      case RewardGroup::Penalty: return penalty_scale;
      case RewardGroup::Regularization: return regularization_scale;
    }
    return 1.0;
  }

  double& operator[](RewardTerm t) { return w[t]; }
  double operator[](RewardTerm t) const { return w[t]; }
};

// Everything the reward terms read from the simulated robot at one policy step.
struct RewardState {
  VecX q, qd, qdd, action, prev_action;
  Vec3 lin_vel = Vec3::Zero();  // heading frame, m/s
  Vec3 ang_vel = Vec3::Zero();  // body frame, rad/s
  Vec3 gravity{0, 0, -1};       // projected, body frame
  Vec3 rpy = Vec3::Zero();
  Points keypoints;  // relative to the base, heading frame
  std::array<bool, 2> new_contact{false, false};
  std::array<double, 2> air_time{0, 0};     // s airborne before the current touchdown
  std::array<double, 2> foot_speed{0, 0};   // horizontal, m/s
  std::array<Vec3, 2> foot_force{Vec3::Zero(), Vec3::Zero()};  // N
  bool fallen = false;
};

struct RewardReference {
  VecX q;
  Points keypoints;  // relative to the reference root, reference heading frame
  Vec3 lin_vel = Vec3::Zero();
  Vec3 rpy = Vec3::Zero();
};

struct RewardLimits {
  VecX q_min, q_max;
  std::vector<int> lower;  // DoF indices of the lower body
  VecX lower_default;      // default positions of those DoFs

  static RewardLimits from_model(const RobotModel& m) {
    RewardLimits l{m.lower_limits(), m.upper_limits(), m.lower, VecX(m.lower.size())};
    const VecX d = m.default_pose();
    for (std::size_t i = 0; i < m.lower.size(); ++i) l.lower_default[i] = d[m.lower[i]];
    return l;
  }
};

struct RewardBreakdown {
  std::array<double, kTermCount> raw{};
  std::array<double, kTermCount> weighted{};
  double task = 0, penalty = 0, regularization = 0, total = 0;
};

inline double wrap_pi(double a) { return std::remainder(a, 2.0 * kPi); }

inline int count_outside(const VecX& q, const VecX& lo, const VecX& hi) {
  int n = 0;
  for (Eigen::Index i = 0; i < q.size(); ++i) n += (q[i] < lo[i] || q[i] > hi[i]);
  return n;
}

inline void task_terms(const RewardState& s, const RewardReference& ref,
                       std::array<double, kTermCount>& raw) {
  raw[kDofPos] = std::exp(-0.7 * (ref.q - s.q).cwiseAbs().mean());
  raw[kKeypointPos] =
      s.keypoints.rows() == 0 ? 1.0
                              : std::exp(-(ref.keypoints - s.keypoints).rowwise().norm().mean());
  raw[kLinVel] = std::exp(-4.0 * (ref.lin_vel - s.lin_vel).norm());
  raw[kRoll] = std::exp(-std::abs(ref.rpy[0] - s.rpy[0]));
  raw[kPitch] = std::exp(-std::abs(ref.rpy[1] - s.rpy[1]));
  raw[kYaw] = std::exp(-std::abs(wrap_pi(ref.rpy[2] - s.rpy[2])));
}

inline void penalty_terms(const RewardState& s, const RewardLimits& lim,
                          std::array<double, kTermCount>& raw) {
  raw[kDofPosLimit] = count_outside(s.q, lim.q_min, lim.q_max);
  raw[kAlive] = s.fallen ? 0.0 : 1.0;
}

inline void regularization_terms(const RewardState& s, const RewardLimits& lim,
                                 double force_threshold, std::array<double, kTermCount>& raw) {
  double air = 0, drag = 0, force = 0;
  bool stumble = false;
  for (int i = 0; i < 2; ++i) {
    if (s.new_contact[i]) {
      air += s.air_time[i];
      drag += s.foot_speed[i];
    }
    const double f = s.foot_force[i].norm();
    if (f >= force_threshold) force += f - force_threshold;
    stumble = stumble || s.foot_force[i].head<2>().norm() > 4.0 * std::abs(s.foot_force[i].z());
  }
  raw[kAirTime] = air;
  raw[kDrag] = drag;
  raw[kContactForce] = force;
  raw[kStumble] = stumble ? 1.0 : 0.0;
  raw[kDofAcc] = s.qdd.squaredNorm() / s.qdd.size();
  raw[kActionRate] = (s.action - s.prev_action).cwiseAbs().mean();
  raw[kEnergy] = s.qd.squaredNorm() / s.qd.size();
  raw[kDofLimitViolation] = count_outside(s.q, lim.q_min, lim.q_max);
  double dev = 0;
  for (std::size_t k = 0; k < lim.lower.size(); ++k) {
    const double d = lim.lower_default[k] - s.q[lim.lower[k]];
    dev += d * d;
  }
  raw[kDofDeviation] = dev;
  raw[kLinVelZ] = s.lin_vel.z() * s.lin_vel.z();
  raw[kAngVelXy] = s.ang_vel.head<2>().squaredNorm();
  raw[kProjectedGravity] = s.gravity.head<2>().squaredNorm();
}

// r = bT * task + bP * penalty + bR * regularization with per-term weights.
inline RewardBreakdown total_reward(const RewardState& s, const RewardReference& ref,
                                    const RewardLimits& lim, const RewardWeights& w) {
  RewardBreakdown b;
  task_terms(s, ref, b.raw);
  penalty_terms(s, lim, b.raw);
  regularization_terms(s, lim, w.contact_force_threshold, b.raw);
  for (int t = 0; t < kTermCount; ++t) {
    const RewardGroup g = group_of(t);
    b.weighted[t] = w.group_scale(g) * w.w[t] * b.raw[t];
    (g == RewardGroup::Task ? b.task : g == RewardGroup::Penalty ? b.penalty : b.regularization) +=
        b.weighted[t];
  }
  b.total = b.task + b.penalty + b.regularization;
  return b;
}

inline nlohmann::json to_json(const RewardWeights& w) {
  nlohmann::json j;
  for (int t = 0; t < kTermCount; ++t) j[kTermNames[t]] = w.w[t];
  j["task_scale"] = w.task_scale;
  j["penalty_scale"] = w.penalty_scale;
  j["regularization_scale"] = w.regularization_scale;
  j["contact_force_threshold"] = w.contact_force_threshold;
  return j;
}

inline RewardWeights reward_weights_from_json(const nlohmann::json& j) {
  RewardWeights w;
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (int t = 0; t < kTermCount && !found; ++t)
      if (key == kTermNames[t]) {
        w.w[t] = value.get<double>();
        found = true;
      }
    if (found) continue;
    if (key == "task_scale") w.task_scale = value.get<double>();
    else if (key == "penalty_scale") w.penalty_scale = value.get<double>();
    else if (key == "regularization_scale") w.regularization_scale = value.get<double>();
    else if (key == "contact_force_threshold") w.contact_force_threshold = value.get<double>();
    else throw std::invalid_argument("reward weights: unknown key " + key);
  }
  return w;
}

}  // namespace signkit::sim
