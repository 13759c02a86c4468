#pragma once

#include <cstdint>
#include <random>

#include "signkit/eval/metrics.hpp"
#include "signkit/learn/trainer.hpp"

namespace signkit::eval {

// One episode of an env-backed task, logged for the metric suite. The task
// must already be reset; `obs` is its first observation. Policy needs
// act(obs, deterministic, rng), as learn::Agent has.
template <class Policy, class Task>
EpisodeLog log_episode(const Policy& agent, Task& task, VecX obs, bool deterministic,
                       std::mt19937_64& rng, double action_clip = 5.0, int max_steps = 100000) {
  EpisodeLog log;
  const sim::SignEnv& env = task.env();
  log.clip = env.clip_index();
  for (int t = 0; t < max_steps; ++t) {
    const VecX a = agent.act(obs, deterministic, rng).cwiseMax(-action_clip).cwiseMin(action_clip);
    const learn::TaskStep s = task.step(a);
    const sim::SimState& st = env.state();
    const sim::RewardReference& ref = env.target();
    log.q.push_back(st.q);
    log.q_ref.push_back(ref.q);
    log.yaw.push_back(st.rpy[2]), log.yaw_ref.push_back(ref.rpy[2]);
    log.roll.push_back(st.rpy[0]), log.roll_ref.push_back(ref.rpy[0]);
    log.pitch.push_back(st.rpy[1]), log.pitch_ref.push_back(ref.rpy[1]);
    log.lin_vel.push_back(sim::yaw_rotation(-st.rpy[2]) * st.lin_vel);
    log.lin_vel_ref.push_back(ref.lin_vel);
    log.reward.push_back(s.reward);
    obs = s.obs;
    if (s.done) {
      log.fallen = s.fallen;
      break;
    }
  }
  return log;
}

}  // namespace signkit::eval
