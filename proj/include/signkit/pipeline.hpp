#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "signkit/core/h1x55.hpp"
#include "signkit/data/synthetic.hpp"
#include "signkit/eval/episode.hpp"
#include "signkit/eval/metrics.hpp"
#include "signkit/io/json_io.hpp"
#include "signkit/io/run_config.hpp"
#include "signkit/learn/trainer.hpp"

// Glue from a resolved run config to the library: what the CLI and the
// acceptance run share.
namespace signkit::pipeline {

using nlohmann::json;

inline RobotModel robot_from_config(const json& cfg) {
  if (cfg.at("robot").is_null()) return h1x55::make_model();
  return io::load_robot_model(cfg["robot"].get<std::string>());
}

inline synthetic::SignClipOptions corpus_options(const json& cfg) {
  const json& c = cfg.at("corpus");
  synthetic::SignClipOptions o;
  o.duration = c.at("duration").get<double>();
  o.fps = c.at("fps").get<double>();
  o.amplitude = c.at("amplitude").get<double>();
  if (!(o.duration > 0) || !(o.fps > 0)) throw std::invalid_argument("corpus: duration and fps must be > 0");
  if (c.at("clips").get<int>() < 1) throw std::invalid_argument("corpus: clips must be >= 1");
  return o;
}

inline std::vector<RobotTrajectory> synthetic_corpus(const json& cfg, const RobotModel& m) {
  const json& c = cfg.at("corpus");
  return synthetic::sign_corpus(m, c.at("clips").get<int>(), c.at("seed").get<std::uint64_t>(), corpus_options(cfg));
}

// Listed trajectory files, or the synthetic corpus when none are listed.
inline std::vector<RobotTrajectory> references_from_config(const json& cfg, const RobotModel& m) {
  const json& paths = cfg.at("references");
  if (paths.empty()) return synthetic_corpus(cfg, m);
  std::vector<RobotTrajectory> out;
  for (const auto& p : paths) {
    RobotTrajectory t = io::trajectory_from_json(io::read_json_file(p.get<std::string>()));
    for (const auto& f : t.frames)
      if (f.q.size() != static_cast<Eigen::Index>(m.dof_count()))
        throw std::invalid_argument(p.get<std::string>() + ": DoF count does not match the robot");
    out.push_back(populate_kinematics(m, std::move(t)));
  }
  return out;
}

enum class Mode { Decoupled, WholeBody };

inline Mode mode_from_string(const std::string& s) {
  if (s == "decoupled") return Mode::Decoupled;
  if (s == "whole_body") return Mode::WholeBody;
  throw std::invalid_argument("train.mode must be \"decoupled\" or \"whole_body\", got \"" + s + "\"");
}

inline const char* mode_name(Mode m) { return m == Mode::Decoupled ? "decoupled" : "whole_body"; }

// Everything an environment needs, resolved once.
struct World {
  std::shared_ptr<const RobotModel> model;
  std::shared_ptr<const sim::ReferenceSet> refs;
  std::vector<int> clip_frames;
  sim::EnvConfig env;
  sim::RewardWeights rewards;
  Mode mode = Mode::Decoupled;
  double upper_smoothing = 0.0;
};

inline World make_world(const json& cfg, RobotModel model, std::vector<RobotTrajectory> clips) {
  if (clips.empty()) throw std::invalid_argument("no reference clips");
  World w;
  w.env = sim::env_config_from_json(cfg.at("env"));
  w.rewards = sim::reward_weights_from_json(cfg.at("rewards"));
  w.mode = mode_from_string(cfg.at("train").at("mode").get<std::string>());
  w.upper_smoothing = cfg.at("train").at("upper_smoothing").get<double>();
  auto refs = std::make_shared<sim::ReferenceSet>();
  for (auto& c : clips) {
    w.clip_frames.push_back(static_cast<int>(c.size()));
    refs->push_back(sim::prepare_reference(model, std::move(c), w.env.lower_reference_default));
  }
  w.model = std::make_shared<const RobotModel>(std::move(model));
  w.refs = std::move(refs);
  return w;
}

inline World make_world(const json& cfg) {
  RobotModel m = robot_from_config(cfg);
  auto clips = references_from_config(cfg, m);
  return make_world(cfg, std::move(m), std::move(clips));
}

template <class Task>
Task make_task(const World& w, const sim::EnvConfig& env) {
  sim::SignEnv e(w.model, w.refs, env, w.rewards);
  if constexpr (std::is_same_v<Task, learn::LowerBodyTask>) return Task(std::move(e), w.upper_smoothing);
  else return Task(std::move(e));
}

// Calls f with a value-initialized tag of the task type for the world's mode.
template <class F>
decltype(auto) with_task_type(Mode m, F&& f) {
  if (m == Mode::Decoupled) return f(std::type_identity<learn::LowerBodyTask>{});
  return f(std::type_identity<learn::WholeBodyTask>{});
}

inline learn::TrainConfig train_config(const json& cfg) {
  const json& t = cfg.at("train");
  learn::TrainConfig c;
  c.ppo = learn::ppo_config_from_json(cfg.at("ppo"));
  c.num_envs = t.at("num_envs").get<int>();
  c.iterations = t.at("iterations").get<int>();
  c.seed = cfg.at("seed").get<std::uint64_t>();
  c.action_clip = t.at("action_clip").get<double>();
  if (c.num_envs < 1 || c.iterations < 0) throw std::invalid_argument("train: num_envs >= 1 and iterations >= 0");
  if (!(c.action_clip > 0)) throw std::invalid_argument("train: action_clip must be > 0");
  return c;
}

struct TrainOutcome {
  learn::Agent initial;  // the policy before any update
  learn::Agent agent;
  std::vector<learn::IterationStats> curve;
};

inline TrainOutcome train(const json& cfg, const World& w,
                          const std::function<void(const learn::IterationStats&)>& cb = {}) {
  const learn::TrainConfig tc = train_config(cfg);
  const double budget = cfg.at("train").at("budget_seconds").get<double>();
  return with_task_type(w.mode, [&](auto tag) {
    using Task = typename decltype(tag)::type;
    std::vector<Task> tasks;
    for (int e = 0; e < tc.num_envs; ++e) tasks.push_back(make_task<Task>(w, w.env));
    learn::Trainer<Task> tr(std::move(tasks), tc);
    TrainOutcome out;
    out.initial = tr.agent();
    out.curve = tr.train(budget, cb);
    out.agent = tr.agent();
    return out;
  });
}

struct EvalOptions {
  int episodes = 20;
  bool deterministic = true;
  bool random_start = false;
  std::uint64_t seed = 123;
  double action_clip = 5.0;
};

inline EvalOptions eval_options(const json& cfg) {
  EvalOptions o;
  o.episodes = cfg.at("eval").at("episodes").get<int>();
  o.deterministic = cfg.at("eval").at("deterministic").get<bool>();
  o.random_start = cfg.at("eval").at("random_start").get<bool>();
  o.seed = cfg.at("seed").get<std::uint64_t>();
  o.action_clip = cfg.at("train").at("action_clip").get<double>();
  if (o.episodes < 1) throw std::invalid_argument("eval.episodes must be >= 1");
  return o;
}

// Episode k runs clip k mod N with env seed (seed + k).
inline std::vector<eval::EpisodeLog> evaluate(const learn::Agent& agent, const World& w, const EvalOptions& o) {
  sim::EnvConfig env = w.env;
  env.random_start = o.random_start;
  return with_task_type(w.mode, [&](auto tag) {
    using Task = typename decltype(tag)::type;
    Task task = make_task<Task>(w, env);
    if (agent.policy.mean.output_dim() != task.act_dim() || agent.policy.mean.input_dim() != task.obs_dim())
      throw std::invalid_argument("checkpoint does not fit the configured task (mode, robot or history)");
    std::mt19937_64 rng(o.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<eval::EpisodeLog> logs;
    const int nclips = static_cast<int>(w.refs->size());
    for (int k = 0; k < o.episodes; ++k) {
      const std::uint64_t s = o.seed + static_cast<std::uint64_t>(k);
      VecX obs = task.reset(s, k % nclips, o.random_start ? -1 : 0);
      eval::EpisodeLog log = eval::log_episode(agent, task, std::move(obs), o.deterministic, rng, o.action_clip);
      log.seed = s;
      logs.push_back(std::move(log));
    }
    return logs;
  });
}

struct EvalSummary {
  eval::MetricValues overall{};
  std::array<std::optional<eval::MetricValues>, eval::kDifficultyCount> by_difficulty;
  double fall_rate = 0, mean_length = 0;
};

inline EvalSummary summarize(const std::vector<eval::EpisodeLog>& logs, const std::vector<int>& clip_frames,
                             const eval::DifficultyThresholds& th) {
  if (logs.empty()) throw std::invalid_argument("no episodes to summarize");
  EvalSummary s;
  std::vector<eval::MetricValues> all;
  std::array<std::vector<eval::MetricValues>, eval::kDifficultyCount> buckets;
  for (const auto& l : logs) {
    const eval::MetricValues m = eval::compute_metrics(l);
    all.push_back(m);
    buckets[eval::classify(clip_frames.at(l.clip), th)].push_back(m);
    s.fall_rate += l.fallen;
    s.mean_length += static_cast<double>(l.size());
  }
  s.overall = eval::mean_metrics(all);
  for (int d = 0; d < eval::kDifficultyCount; ++d)
    if (!buckets[d].empty()) s.by_difficulty[d] = eval::mean_metrics(buckets[d]);
  s.fall_rate /= static_cast<double>(logs.size());
  s.mean_length /= static_cast<double>(logs.size());
  return s;
}

inline eval::DifficultyThresholds thresholds(const json& cfg) {
  const json& t = cfg.at("eval").at("thresholds");
  return {t.at("medium_from").get<int>(), t.at("hard_above").get<int>()};
}

}  // namespace signkit::pipeline
