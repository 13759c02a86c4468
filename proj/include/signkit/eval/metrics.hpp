#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "signkit/core/rotation.hpp"

namespace signkit::eval {

// Per-step tracking signals of one evaluation episode.
struct EpisodeLog {
  int clip = 0;
  std::uint64_t seed = 0;
  bool fallen = false;
  std::vector<VecX> q, q_ref;
  std::vector<double> yaw, yaw_ref;
  std::vector<double> roll, roll_ref, pitch, pitch_ref;
  std::vector<Vec3> lin_vel, lin_vel_ref;
  std::vector<double> reward;

  std::size_t size() const { return q.size(); }

  void validate() const {
    const std::size_t n = q.size();
    if (n == 0) throw std::invalid_argument("episode log is empty");
    const std::array<std::size_t, 10> lens{q_ref.size(), yaw.size(), yaw_ref.size(), roll.size(), roll_ref.size(),
                                           pitch.size(), pitch_ref.size(), lin_vel.size(), lin_vel_ref.size(),
                                           reward.size()};
    for (std::size_t l : lens)
      if (l != n) throw std::invalid_argument("episode log: per-step series differ in length");
    for (std::size_t t = 0; t < n; ++t) {
      if (q[t].size() != q_ref[t].size() || q[t].size() == 0)
        throw std::invalid_argument("episode log: DoF vectors disagree at step " + std::to_string(t));
      const bool finite = q[t].allFinite() && q_ref[t].allFinite() && lin_vel[t].allFinite() &&
                          lin_vel_ref[t].allFinite() && std::isfinite(yaw[t]) && std::isfinite(yaw_ref[t]) &&
                          std::isfinite(roll[t]) && std::isfinite(roll_ref[t]) && std::isfinite(pitch[t]) &&
                          std::isfinite(pitch_ref[t]) && std::isfinite(reward[t]);
      if (!finite) throw std::invalid_argument("episode log: non-finite value at step " + std::to_string(t));
    }
  }
};

enum Metric { kDofPos = 0, kYaw, kLinVel, kRollPitch, kCumReward, kMetricCount };
inline constexpr std::array<const char*, kMetricCount> kMetricNames{"dof_pos", "yaw", "linvel", "rollpitch",
                                                                    "cum_reward"};

using MetricValues = std::array<double, kMetricCount>;

// Mean over steps of the squared error; the DoF term is also averaged over DoFs,
// vector errors use the squared norm, yaw is wrapped to [-pi, pi]. Reward is summed.
inline MetricValues compute_metrics(const EpisodeLog& log) {
  log.validate();
  MetricValues m{};
  const double n = static_cast<double>(log.size());
  for (std::size_t t = 0; t < log.size(); ++t) {
    m[kDofPos] += (log.q[t] - log.q_ref[t]).squaredNorm() / static_cast<double>(log.q[t].size());
    const double dy = std::remainder(log.yaw[t] - log.yaw_ref[t], 2.0 * kPi);
    m[kYaw] += dy * dy;
    m[kLinVel] += (log.lin_vel[t] - log.lin_vel_ref[t]).squaredNorm();
    const double dr = log.roll[t] - log.roll_ref[t], dp = log.pitch[t] - log.pitch_ref[t];
    m[kRollPitch] += dr * dr + dp * dp;
    m[kCumReward] += log.reward[t];
  }
  for (int k = 0; k < kCumReward; ++k) m[k] /= n;
  return m;
}

// Per-metric mean over episodes (one run).
inline MetricValues mean_metrics(const std::vector<MetricValues>& episodes) {
  if (episodes.empty()) throw std::invalid_argument("no episodes to average");
  MetricValues m{};
  for (const auto& e : episodes)
    for (int k = 0; k < kMetricCount; ++k) m[k] += e[k];
  for (double& v : m) v /= static_cast<double>(episodes.size());
  return m;
}

enum Difficulty { kEasy = 0, kMedium, kHard, kDifficultyCount };
inline constexpr std::array<const char*, kDifficultyCount> kDifficultyNames{"easy", "medium", "hard"};

// Frame-count proxies for sentence length: [0, medium_from) easy,
// [medium_from, hard_above] medium, above hard_above hard.
struct DifficultyThresholds {
  int medium_from = 80;
  int hard_above = 200;
};

inline Difficulty classify(int frames, const DifficultyThresholds& th = {}) {
  if (frames <= 0) throw std::invalid_argument("clip length must be positive");
  if (frames < th.medium_from) return kEasy;
  return frames <= th.hard_above ? kMedium : kHard;
}

// Indices of the clips in each bucket.
inline std::array<std::vector<std::size_t>, kDifficultyCount> difficulty_split(const std::vector<int>& lengths,
                                                                               const DifficultyThresholds& th = {}) {
  if (th.medium_from < 1 || th.hard_above < th.medium_from)
    throw std::invalid_argument("difficulty thresholds must satisfy 1 <= medium_from <= hard_above");
  std::array<std::vector<std::size_t>, kDifficultyCount> out;
  for (std::size_t i = 0; i < lengths.size(); ++i) out[classify(lengths[i], th)].push_back(i);
  return out;
}

struct Stat {
  double mean = 0, std = 0;
  int n = 0;
  bool has_std() const { return n >= 2; }
};

// Population std; a single value is reported without std.
inline Stat aggregate(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("aggregate needs at least one value");
  Stat s;
  s.n = static_cast<int>(v.size());
  for (double x : v) s.mean += x;
  s.mean /= s.n;
  if (s.n >= 2) {
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / s.n);
  }
  return s;
}

inline std::array<Stat, kMetricCount> aggregate(const std::vector<MetricValues>& per_seed) {
  std::array<Stat, kMetricCount> out;
  for (int k = 0; k < kMetricCount; ++k) {
    std::vector<double> v;
    for (const auto& r : per_seed) v.push_back(r[k]);
    out[k] = aggregate(v);
  }
  return out;
}

// Rows keyed by (baseline, difficulty); each holds one MetricValues per seed.
struct MetricTable {
  std::map<std::pair<std::string, std::string>, std::vector<MetricValues>> rows;

  void add(const std::string& baseline, const std::string& difficulty, const MetricValues& seed_report) {
    rows[{baseline, difficulty}].push_back(seed_report);
  }

  // Long form: baseline,difficulty,metric,mean,std (std empty for one seed).
  std::string csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "baseline,difficulty,metric,mean,std\n";
    for (const auto& [key, reports] : rows) {
      const auto stats = aggregate(reports);
      for (int k = 0; k < kMetricCount; ++k) {
        os << key.first << ',' << key.second << ',' << kMetricNames[k] << ',' << stats[k].mean << ',';
        if (stats[k].has_std()) os << stats[k].std;
        os << '\n';
      }
    }
    return os.str();
  }
};

}  // namespace signkit::eval
