#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signkit/io/json_io.hpp"
#include "signkit/learn/gaussian.hpp"
#include "signkit/learn/normalizer.hpp"
#include "signkit/learn/ppo.hpp"
#include "signkit/learn/tasks.hpp"

namespace signkit::learn {

struct Agent {
  GaussianPolicy policy;
  Mlp value;
  RunningMeanStd obs_rms;
  bool normalize_obs = true;

  Agent() = default;
  Agent(int obs_dim, int act_dim, const PpoConfig& cfg, std::mt19937_64& rng) {
    std::vector<int> ps{obs_dim}, vs{obs_dim};
    for (int h : cfg.hidden) ps.push_back(h), vs.push_back(h);
    ps.push_back(act_dim);
    vs.push_back(1);
    policy = GaussianPolicy(ps, cfg.init_log_std);
    policy.mean.init(rng, 0.01);
    value = Mlp(vs);
    value.init(rng, 1.0);
    obs_rms = RunningMeanStd(obs_dim);
    normalize_obs = cfg.normalize_observations;
  }

  MatX prepare(const MatX& obs) const { return normalize_obs ? obs_rms.normalize(obs) : obs; }

  VecX act(const VecX& obs, bool deterministic, std::mt19937_64& rng) const {
    const MatX mu = policy.mean.forward(prepare(MatX(obs)));
    return deterministic ? VecX(mu.col(0)) : VecX(policy.sample(mu, rng).col(0));
  }
};

struct TrainConfig {
  PpoConfig ppo;
  int num_envs = 8;
  int iterations = 100;
  std::uint64_t seed = 123;
  double action_clip = 5.0;  // actions sent to the task; the buffer keeps the raw sample
};

struct IterationStats {
  int iteration = 0;
  int episodes = 0;           // completed during this iteration
  double mean_return = 0;     // raw reward, completed episodes
  double mean_reward = 0;     // raw reward per step
  double dof_mse = 0;         // per step
  double fall_rate = 0;       // falls / completed episodes
  UpdateStats update;
  double seconds = 0;
};

// Collect-then-update PPO over a set of task instances. Task needs obs_dim(),
// act_dim(), reset(seed), reset() and step(action) -> TaskStep.
template <class Task>
class Trainer {
 public:
  Trainer(std::vector<Task> tasks, TrainConfig cfg)
      : tasks_(std::move(tasks)), cfg_(std::move(cfg)), rng_(cfg_.seed),
        opt_(cfg_.ppo.learning_rate) {
    cfg_.ppo.validate();
    if (tasks_.empty()) throw std::invalid_argument("trainer needs at least one environment");
    agent_ = Agent(tasks_[0].obs_dim(), tasks_[0].act_dim(), cfg_.ppo, rng_);
    scaler_ = RewardScaler(static_cast<int>(tasks_.size()), cfg_.ppo.gamma);
    obs_.resize(tasks_[0].obs_dim(), static_cast<Eigen::Index>(tasks_.size()));
    for (std::size_t e = 0; e < tasks_.size(); ++e) obs_.col(e) = tasks_[e].reset(rng_());
    ep_return_.assign(tasks_.size(), 0.0);
  }

  IterationStats iterate() {
    const auto t0 = std::chrono::steady_clock::now();
    const PpoConfig& p = cfg_.ppo;
    const int E = static_cast<int>(tasks_.size()), T = p.rollout_length;
    const int A = tasks_[0].act_dim();
    RolloutBuffer b;
    b.obs.resize(obs_.rows(), T * E);
    b.actions.resize(A, T * E);
    b.means.resize(A, T * E);
    b.log_probs.resize(T * E), b.values.resize(T * E), b.rewards.resize(T * E), b.dones.resize(T * E);
    b.log_std = agent_.policy.log_std;

    IterationStats st;
    st.iteration = ++iteration_;
    double fell = 0, reward_sum = 0, mse_sum = 0, return_sum = 0;
    for (int t = 0; t < T; ++t) {
      if (agent_.normalize_obs) agent_.obs_rms.update(obs_);
      const MatX x = agent_.prepare(obs_);
      const MatX mu = agent_.policy.mean.forward(x);
      const MatX a = agent_.policy.sample(mu, rng_);
      const VecX lp = gaussian_log_prob(mu, agent_.policy.log_std, a);
      const MatX v = agent_.value.forward(x);
      VecX r(E);
      std::vector<bool> done(E, false);
      VecX bootstrap = VecX::Zero(E);
      for (int e = 0; e < E; ++e) {
        const VecX ae = a.col(e).cwiseMax(-cfg_.action_clip).cwiseMin(cfg_.action_clip);
        TaskStep s = tasks_[e].step(ae);
        r[e] = s.reward;
        done[e] = s.done;
        reward_sum += s.reward;
        mse_sum += s.dof_sq_error;
        ep_return_[e] += s.reward;
        if (s.truncated) bootstrap[e] = agent_.value.forward(agent_.prepare(MatX(s.obs)))(0, 0);
        if (s.done) {
          return_sum += ep_return_[e];
          fell += s.fallen;
          ++st.episodes;
          ep_return_[e] = 0;
          s.obs = tasks_[e].reset();
        }
        obs_.col(e) = s.obs;
      }
      const VecX rs = p.normalize_rewards ? scaler_.scale(r, done) : r;
      for (int e = 0; e < E; ++e) {
        const int i = t * E + e;
        b.obs.col(i) = x.col(e);
        b.actions.col(i) = a.col(e);
        b.means.col(i) = mu.col(e);
        b.log_probs[i] = lp[e];
        b.values[i] = v(0, e);
        b.rewards[i] = rs[e] + p.gamma * bootstrap[e];
        b.dones[i] = done[e] ? 1.0 : 0.0;
      }
    }
    const MatX last = agent_.value.forward(agent_.prepare(obs_));
    b.advantages.resize(T * E);
    b.returns.resize(T * E);
    for (int e = 0; e < E; ++e) {
      VecX r(T), v(T), d(T);
      for (int t = 0; t < T; ++t) r[t] = b.rewards[t * E + e], v[t] = b.values[t * E + e], d[t] = b.dones[t * E + e];
      const auto [adv, ret] = gae(r, v, d, last(0, e), p.gamma, p.lambda);
      for (int t = 0; t < T; ++t) b.advantages[t * E + e] = adv[t], b.returns[t * E + e] = ret[t];
    }
    st.update = ppo_update(b, agent_.policy, agent_.value, opt_, p, rng_);
    st.mean_reward = reward_sum / (T * E);
    st.dof_mse = mse_sum / (T * E);
    st.mean_return = st.episodes ? return_sum / st.episodes : 0.0;
    st.fall_rate = st.episodes ? fell / st.episodes : 0.0;
    st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return st;
  }

  // Runs cfg.iterations (or until the wall-clock budget is spent); callback sees every iteration.
  std::vector<IterationStats> train(double budget_seconds = 0,
                                    const std::function<void(const IterationStats&)>& cb = {}) {
    std::vector<IterationStats> out;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < cfg_.iterations; ++i) {
      out.push_back(iterate());
      if (cb) cb(out.back());
      const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (budget_seconds > 0 && el >= budget_seconds) break;
    }
    return out;
  }

  const Agent& agent() const { return agent_; }
  Agent& agent() { return agent_; }
  const TrainConfig& config() const { return cfg_; }
  std::vector<Task>& tasks() { return tasks_; }
  int iteration() const { return iteration_; }

 private:
  std::vector<Task> tasks_;
  TrainConfig cfg_;
  std::mt19937_64 rng_;
  Agent agent_;
  PpoOptimizer opt_;
  RewardScaler scaler_;
  MatX obs_;
  std::vector<double> ep_return_;
  int iteration_ = 0;
};

struct EvalStats {
  int episodes = 0;
  double mean_return = 0, std_return = 0, mean_length = 0, fall_rate = 0, dof_mse = 0;
  std::vector<double> returns;
};

// Runs full episodes; reset(seed + k) for episode k. MSE is averaged over every step.
template <class Task, class ResetFn>
EvalStats evaluate(const Agent& agent, Task& task, int episodes, bool deterministic,
                   std::uint64_t seed, ResetFn reset, int max_steps = 100000,
                   double action_clip = 5.0) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  EvalStats st;
  double steps = 0, mse = 0, falls = 0;
  for (int k = 0; k < episodes; ++k) {
    VecX obs = reset(task, seed + k);
    double ret = 0;
    for (int t = 0; t < max_steps; ++t) {
      const VecX a = agent.act(obs, deterministic, rng).cwiseMax(-action_clip).cwiseMin(action_clip);
      const TaskStep s = task.step(a);
      ret += s.reward;
      mse += s.dof_sq_error;
      ++steps;
      obs = s.obs;
      if (s.done) {
        falls += s.fallen;
        break;
      }
    }
    st.returns.push_back(ret);
  }
  st.episodes = episodes;
  for (double r : st.returns) st.mean_return += r / episodes;
  for (double r : st.returns) st.std_return += (r - st.mean_return) * (r - st.mean_return) / episodes;
  st.std_return = std::sqrt(st.std_return);
  st.mean_length = steps / episodes;
  st.fall_rate = falls / episodes;
  st.dof_mse = steps > 0 ? mse / steps : 0.0;
  return st;
}

template <class Task>
EvalStats evaluate(const Agent& agent, Task& task, int episodes, bool deterministic,
                   std::uint64_t seed) {
  return evaluate(agent, task, episodes, deterministic, seed,
                  [](Task& t, std::uint64_t s) { return t.reset(s); });
}

inline nlohmann::json vec_json(const VecX& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}
inline VecX vec_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline nlohmann::json to_json(const Agent& a) {
  return {{"format", "signkit-agent"},
          {"version", 1},
          {"policy_sizes", a.policy.mean.sizes()},
          {"policy_params", vec_json(a.policy.mean.params())},
          {"log_std", vec_json(a.policy.log_std)},
          {"value_sizes", a.value.sizes()},
          {"value_params", vec_json(a.value.params())},
          {"normalize_obs", a.normalize_obs},
          {"obs_rms", to_json(a.obs_rms)}};
}

inline Agent agent_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "signkit-agent" || j.value("version", 0) != 1)
    throw std::invalid_argument("not a version-1 agent checkpoint");
  Agent a;
  a.policy.mean = Mlp(j.at("policy_sizes").get<std::vector<int>>());
  a.value = Mlp(j.at("value_sizes").get<std::vector<int>>());
  const VecX pp = vec_from(j.at("policy_params")), vp = vec_from(j.at("value_params"));
  if (pp.size() != a.policy.mean.param_count() || vp.size() != a.value.param_count())
    throw std::invalid_argument("checkpoint parameter count does not match its architecture");
  a.policy.mean.params() = pp;
  a.value.params() = vp;
  a.policy.log_std = vec_from(j.at("log_std"));
  if (a.policy.log_std.size() != a.policy.mean.output_dim())
    throw std::invalid_argument("checkpoint log_std has wrong size");
  a.normalize_obs = j.at("normalize_obs").get<bool>();
  a.obs_rms = rms_from_json(j.at("obs_rms"));
  return a;
}

inline void save_checkpoint(const std::filesystem::path& p, const Agent& a,
                            const nlohmann::json& meta = nlohmann::json::object()) {
  nlohmann::json j = to_json(a);
  j["meta"] = meta;
  io::write_text_atomic(p, j.dump());
}

inline Agent load_checkpoint(const std::filesystem::path& p) {
  return agent_from_json(io::read_json_file(p));
}

// Learning curve: one CSV row per iteration. Wall time is left out so equal
// seeds give byte-identical files.
class CurveWriter {
 public:
  explicit CurveWriter(const std::filesystem::path& p) : out_(p) {
    if (!out_) throw std::runtime_error("cannot write " + p.string());
    out_ << "iteration,episodes,mean_return,mean_reward,dof_mse,fall_rate,policy_loss,value_loss,"
            "entropy,kl,clip_fraction\n";
  }
  void write(const IterationStats& s) {
    out_ << s.iteration << ',' << s.episodes << ',' << s.mean_return << ',' << s.mean_reward << ','
         << s.dof_mse << ',' << s.fall_rate << ',' << s.update.policy_loss << ','
         << s.update.value_loss << ',' << s.update.entropy << ',' << s.update.kl << ','
         << s.update.clip_fraction << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

}  // namespace signkit::learn
