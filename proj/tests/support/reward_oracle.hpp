#pragma once

// Term-by-term reward recomputation written with plain loops, shared by the
// unit and acceptance tests.

#include <cmath>
#include <map>
#include <random>
#include <string>

#include "signkit/core/h1x55.hpp"
#include "signkit/sim/rewards.hpp"

namespace signkit::testing {

inline std::map<std::string, double> reward_oracle(const sim::RewardState& s,
                                                   const sim::RewardReference& r,
                                                   const RobotModel& m, double f_th) {
  std::map<std::string, double> o;
  const int n = static_cast<int>(s.q.size());
  double e = 0;
  for (int i = 0; i < n; ++i) e += std::fabs(r.q[i] - s.q[i]);
  o["dof_pos"] = std::exp(-0.7 * e / n);
  double kp = 0;
  for (int k = 0; k < s.keypoints.rows(); ++k) {
    double d2 = 0;
    for (int c = 0; c < 3; ++c) d2 += std::pow(r.keypoints(k, c) - s.keypoints(k, c), 2);
    kp += std::sqrt(d2);
  }
  o["keypoint_pos"] = std::exp(-kp / s.keypoints.rows());
  double dv = 0;
  for (int c = 0; c < 3; ++c) dv += std::pow(r.lin_vel[c] - s.lin_vel[c], 2);
  o["lin_vel"] = std::exp(-4.0 * std::sqrt(dv));
  o["roll"] = std::exp(-std::fabs(r.rpy[0] - s.rpy[0]));
  o["pitch"] = std::exp(-std::fabs(r.rpy[1] - s.rpy[1]));
  double dy = std::fmod(r.rpy[2] - s.rpy[2], 2 * kPi);
  if (dy > kPi) dy -= 2 * kPi;
  if (dy < -kPi) dy += 2 * kPi;
  o["yaw"] = std::exp(-std::fabs(dy));
  int outside = 0;
  for (int i = 0; i < n; ++i) outside += (s.q[i] > m.dofs[i].q_max) || (s.q[i] < m.dofs[i].q_min);
  o["dof_pos_limit"] = outside;
  o["alive"] = s.fallen ? 0 : 1;
  double air = 0, drag = 0, force = 0, stumble = 0;
  for (int f = 0; f < 2; ++f) {
    if (s.new_contact[f]) {
      air += s.air_time[f];
      drag += s.foot_speed[f];
    }
    const Vec3& F = s.foot_force[f];
    const double mag = std::sqrt(F.x() * F.x() + F.y() * F.y() + F.z() * F.z());
    if (mag >= f_th) force += mag - f_th;
    if (std::sqrt(F.x() * F.x() + F.y() * F.y()) > 4 * std::fabs(F.z())) stumble = 1;
  }
  o["air_time"] = air;
  o["drag"] = drag;
  o["contact_force"] = force;
  o["stumble"] = stumble;
  double acc = 0, rate = 0, energy = 0;
  for (int i = 0; i < n; ++i) {
    acc += s.qdd[i] * s.qdd[i];
    rate += std::fabs(s.action[i] - s.prev_action[i]);
    energy += s.qd[i] * s.qd[i];
  }
  o["dof_acc"] = acc / n;
  o["action_rate"] = rate / n;
  o["energy"] = energy / n;
  o["dof_limit_violation"] = outside;
  double dev = 0;
  for (int i : m.lower) dev += std::pow(m.dofs[i].default_position - s.q[i], 2);
  o["dof_deviation"] = dev;
  o["lin_vel_z"] = s.lin_vel[2] * s.lin_vel[2];
  o["ang_vel_xy"] = s.ang_vel[0] * s.ang_vel[0] + s.ang_vel[1] * s.ang_vel[1];
  o["projected_gravity"] = s.gravity[0] * s.gravity[0] + s.gravity[1] * s.gravity[1];
  return o;
}

// Synthetic but physically plausible reward inputs.
inline std::pair<sim::RewardState, sim::RewardReference> random_reward_inputs(
    const RobotModel& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::bernoulli_distribution coin(0.5);
  const int n = static_cast<int>(m.dof_count());
  sim::RewardState s;
  s.q = m.default_pose();
  for (int i = 0; i < n; ++i) s.q[i] += 0.3 * u(rng) * (m.dofs[i].q_max - m.dofs[i].q_min);
  s.qd = VecX::NullaryExpr(n, [&] { return 2 * u(rng); });
  s.qdd = VecX::NullaryExpr(n, [&] { return 50 * u(rng); });
  s.action = VecX::NullaryExpr(n, [&] { return u(rng); });
  s.prev_action = VecX::NullaryExpr(n, [&] { return u(rng); });
  s.lin_vel = Vec3(u(rng), u(rng), 0.2 * u(rng));
  s.ang_vel = Vec3(u(rng), u(rng), u(rng));
  s.rpy = Vec3(0.2 * u(rng), 0.2 * u(rng), 3 * u(rng));
  s.gravity = Vec3(0.1 * u(rng), 0.1 * u(rng), -1).normalized();
  s.keypoints = Points::NullaryExpr(14, 3, [&] { return u(rng); });
  for (int f = 0; f < 2; ++f) {
    s.new_contact[f] = coin(rng);
    s.air_time[f] = 0.5 * (u(rng) + 1);
    s.foot_speed[f] = 0.5 * (u(rng) + 1);
    s.foot_force[f] = Vec3(300 * u(rng), 300 * u(rng), 400 * (u(rng) + 1));
  }
  s.fallen = coin(rng);
  sim::RewardReference r;
  r.q = m.default_pose() + VecX::NullaryExpr(n, [&] { return 0.2 * u(rng); });
  r.keypoints = Points::NullaryExpr(14, 3, [&] { return u(rng); });
  r.lin_vel = Vec3(u(rng), u(rng), 0);
  r.rpy = Vec3(0.1 * u(rng), 0.1 * u(rng), 3 * u(rng));
  return {s, r};
}

// Nominal standing state that tracks its reference perfectly.
inline std::pair<sim::RewardState, sim::RewardReference> nominal_reward_inputs(const RobotModel& m) {
  const int n = static_cast<int>(m.dof_count());
  sim::RewardState s;
  s.q = m.default_pose();
  s.qd = s.qdd = s.action = s.prev_action = VecX::Zero(n);
  s.keypoints = Points::Zero(14, 3);
  s.foot_force = {Vec3(0, 0, 270), Vec3(0, 0, 270)};
  sim::RewardReference r;
  r.q = s.q;
  r.keypoints = s.keypoints;
  return {s, r};
}

}  // namespace signkit::testing
