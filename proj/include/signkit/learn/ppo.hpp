#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "signkit/learn/gaussian.hpp"
#include "signkit/learn/mlp.hpp"

namespace signkit::learn {

struct PpoConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  int rollout_length = 21;
  int epochs = 5;
  int minibatches = 4;
  double entropy_coef = 0.01;
  double value_coef = 1.0;
  double clip_range = 0.2;
  bool use_clip = true;   // false: pure KL-penalty surrogate
  double kl_coef = 0.0;   // eta
  double learning_rate = 1e-3;
  bool normalize_rewards = true;
  bool normalize_observations = true;
  double max_grad_norm = 1.0;  // <= 0 disables
  std::vector<int> hidden{512, 256, 128};
  double init_log_std = 0.0;

  void validate() const {
    if (!(gamma >= 0 && gamma <= 1) || !(lambda >= 0 && lambda <= 1))
      throw std::invalid_argument("ppo: gamma and lambda must be in [0, 1]");
    if (rollout_length < 1 || epochs < 1 || minibatches < 1)
      throw std::invalid_argument("ppo: rollout_length, epochs, minibatches must be >= 1");
    if (!(learning_rate > 0)) throw std::invalid_argument("ppo: learning_rate must be > 0");
    if (!(clip_range > 0)) throw std::invalid_argument("ppo: clip_range must be > 0");
    if (kl_coef < 0) throw std::invalid_argument("ppo: kl_coef must be >= 0");
  }
};

// Reverse recursion A_t = delta_t + gamma*lambda*(1 - done_t)*A_{t+1} over one sequence.
// done_t marks that the transition out of step t ended the episode.
inline std::pair<VecX, VecX> gae(const VecX& rewards, const VecX& values, const VecX& dones,
                                 double bootstrap, double gamma, double lambda) {
  const Eigen::Index n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw std::invalid_argument("gae: rewards, values and dones must have equal length");
  VecX adv(n);
  double next_adv = 0, next_value = bootstrap;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double keep = 1.0 - dones[t];
    const double delta = rewards[t] + gamma * keep * next_value - values[t];
    next_adv = delta + gamma * lambda * keep * next_adv;
    adv[t] = next_adv;
    next_value = values[t];
  }
  return {adv, adv + values};
}

inline void normalize_advantages(VecX& a) {
  if (a.size() < 2) {
    a.setZero();
    return;
  }
  const double m = a.mean();
  const double sd = std::sqrt((a.array() - m).square().mean());
  a = (a.array() - m) / (sd + 1e-8);
}

struct RolloutBuffer {
  MatX obs, actions, means;  // columns are samples
  VecX log_probs, values, rewards, dones, advantages, returns;
  VecX log_std;  // behaviour policy log-std

  Eigen::Index size() const { return obs.cols(); }
  void check() const {
    const Eigen::Index n = size();
    if (actions.cols() != n || means.cols() != n || log_probs.size() != n || values.size() != n ||
        rewards.size() != n || dones.size() != n)
      throw std::invalid_argument("rollout buffer columns have different lengths");
    if (advantages.size() != n || returns.size() != n)
      throw std::invalid_argument("rollout buffer advantages not computed");
  }
};

struct Minibatch {
  MatX obs, actions, old_means;
  VecX old_log_probs, advantages, returns, old_log_std;
};

inline Minibatch gather(const RolloutBuffer& b, const std::vector<Eigen::Index>& idx) {
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  Minibatch mb;
  mb.obs.resize(b.obs.rows(), m);
  mb.actions.resize(b.actions.rows(), m);
  mb.old_means.resize(b.means.rows(), m);
  mb.old_log_probs.resize(m), mb.advantages.resize(m), mb.returns.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index i = idx[k];
    mb.obs.col(k) = b.obs.col(i);
    mb.actions.col(k) = b.actions.col(i);
    mb.old_means.col(k) = b.means.col(i);
    mb.old_log_probs[k] = b.log_probs[i];
    mb.advantages[k] = b.advantages[i];
    mb.returns[k] = b.returns[i];
  }
  mb.old_log_std = b.log_std;
  return mb;
}

struct PolicyLossStats {
  double loss = 0, surrogate = 0, entropy = 0, kl = 0, clip_fraction = 0;
};

// Loss = -mean(surrogate) - alpha*H + eta*mean(KL(old || new)); gradients w.r.t. the
// mean-network parameters and the log-std are written to g_mean and g_log_std.
inline PolicyLossStats policy_loss(const GaussianPolicy& pi, const Minibatch& mb,
                                   const PpoConfig& cfg, VecX* g_mean = nullptr,
                                   VecX* g_log_std = nullptr) {
  const Eigen::Index n = mb.obs.cols();
  Mlp::Cache cache;
  const MatX mu = pi.mean.forward(mb.obs, g_mean ? &cache : nullptr);
  const VecX lp = gaussian_log_prob(mu, pi.log_std, mb.actions);
  const VecX kl = gaussian_kl(mb.old_means, mb.old_log_std, mu, pi.log_std);
  PolicyLossStats s;
  s.entropy = gaussian_entropy(pi.log_std);
  s.kl = kl.mean();
  VecX d_lp(n);  // dLoss/dlog_prob
  const double lo = 1.0 - cfg.clip_range, hi = 1.0 + cfg.clip_range;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ratio = std::exp(lp[i] - mb.old_log_probs[i]);
    const double a = mb.advantages[i];
    double surr = ratio * a;
    bool flat = false;
    if (cfg.use_clip) {
      const double clipped = std::clamp(ratio, lo, hi) * a;
      if (clipped < surr) surr = clipped, flat = true;
      s.clip_fraction += (ratio < lo || ratio > hi);
    }
    s.surrogate += surr;
    d_lp[i] = flat ? 0.0 : -ratio * a / static_cast<double>(n);
  }
  s.surrogate /= static_cast<double>(n);
  s.clip_fraction /= static_cast<double>(n);
  s.loss = -s.surrogate - cfg.entropy_coef * s.entropy + cfg.kl_coef * s.kl;
  if (!g_mean) return s;

  const VecX inv_var = (-2 * pi.log_std).array().exp();
  const VecX var_old = (2 * mb.old_log_std).array().exp();
  const MatX diff = mb.actions - mu;
  MatX d_mu = diff.array().colwise() * inv_var.array();
  d_mu = d_mu.array().rowwise() * d_lp.transpose().array();
  d_mu += (cfg.kl_coef / static_cast<double>(n)) *
          ((mu - mb.old_means).array().colwise() * inv_var.array()).matrix();
  *g_mean = VecX::Zero(pi.mean.param_count());
  pi.mean.backward(cache, d_mu, *g_mean);

  VecX g_ls = VecX::Constant(pi.log_std.size(), -cfg.entropy_coef);
  const MatX z2 = diff.cwiseAbs2().array().colwise() * inv_var.array();
  g_ls += (z2.array() - 1.0).matrix() * d_lp;
  const MatX dm2 = (mb.old_means - mu).cwiseAbs2();
  for (Eigen::Index j = 0; j < g_ls.size(); ++j)
    g_ls[j] += cfg.kl_coef / static_cast<double>(n) *
               (static_cast<double>(n) - (var_old[j] * n + dm2.row(j).sum()) * inv_var[j]);
  *g_log_std = g_ls;
  return s;
}

// value_coef * mean((V - R)^2)
inline double value_loss(const Mlp& v, const Minibatch& mb, const PpoConfig& cfg,
                         VecX* grad = nullptr) {
  Mlp::Cache cache;
  const MatX pred = v.forward(mb.obs, grad ? &cache : nullptr);
  const VecX err = pred.row(0).transpose() - mb.returns;
  const double n = static_cast<double>(err.size());
  if (grad) {
    *grad = VecX::Zero(v.param_count());
    v.backward(cache, (2.0 * cfg.value_coef / n) * err.transpose(), *grad);
  }
  return cfg.value_coef * err.squaredNorm() / n;
}

struct UpdateStats {
  double policy_loss = 0, value_loss = 0, entropy = 0, kl = 0, clip_fraction = 0, grad_norm = 0;
};

struct PpoOptimizer {
  Adam mean, log_std, value;
  explicit PpoOptimizer(double lr = 1e-3) { mean.lr = log_std.lr = value.lr = lr; }
};

inline UpdateStats ppo_update(const RolloutBuffer& buf, GaussianPolicy& pi, Mlp& value,
                              PpoOptimizer& opt, const PpoConfig& cfg, std::mt19937_64& rng) {
  buf.check();
  const Eigen::Index n = buf.size();
  if (n == 0) throw std::invalid_argument("ppo_update: empty buffer");
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const int nmb = static_cast<int>(std::min<Eigen::Index>(cfg.minibatches, n));
  UpdateStats st;
  int count = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int b = 0; b < nmb; ++b) {
      const Eigen::Index lo = n * b / nmb, hi = n * (b + 1) / nmb;
      Minibatch mb = gather(buf, {idx.begin() + lo, idx.begin() + hi});
      normalize_advantages(mb.advantages);
      VecX gm, gs, gv;
      const PolicyLossStats ps = policy_loss(pi, mb, cfg, &gm, &gs);
      const double vl = value_loss(value, mb, cfg, &gv);
      if (!std::isfinite(ps.loss) || !std::isfinite(vl) || !gm.allFinite() || !gv.allFinite())
        throw std::runtime_error("ppo: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", minibatch " + std::to_string(b) + " (policy " +
                                 std::to_string(ps.loss) + ", value " + std::to_string(vl) +
                                 ", kl " + std::to_string(ps.kl) + ")");
      const double norm = std::sqrt(gm.squaredNorm() + gs.squaredNorm() + gv.squaredNorm());
      if (cfg.max_grad_norm > 0 && norm > cfg.max_grad_norm) {
        const double k = cfg.max_grad_norm / norm;
        gm *= k, gs *= k, gv *= k;
      }
      opt.mean.step(pi.mean.params(), gm);
      opt.log_std.step(pi.log_std, gs);
      opt.value.step(value.params(), gv);
      st.policy_loss += ps.loss, st.value_loss += vl, st.entropy += ps.entropy;
      st.kl += ps.kl, st.clip_fraction += ps.clip_fraction, st.grad_norm += norm;
      ++count;
    }
  }
  const double c = count;
  st.policy_loss /= c, st.value_loss /= c, st.entropy /= c, st.kl /= c;
  st.clip_fraction /= c, st.grad_norm /= c;
  return st;
}

inline nlohmann::json to_json(const PpoConfig& c) {
  return {{"gamma", c.gamma},
          {"lambda", c.lambda},
          {"rollout_length", c.rollout_length},
          {"epochs", c.epochs},
          {"minibatches", c.minibatches},
          {"entropy_coef", c.entropy_coef},
          {"value_coef", c.value_coef},
          {"clip_range", c.clip_range},
          {"use_clip", c.use_clip},
          {"kl_coef", c.kl_coef},
          {"learning_rate", c.learning_rate},
          {"normalize_rewards", c.normalize_rewards},
          {"normalize_observations", c.normalize_observations},
          {"max_grad_norm", c.max_grad_norm},
          {"hidden", c.hidden},
          {"init_log_std", c.init_log_std}};
}

inline PpoConfig ppo_config_from_json(const nlohmann::json& j) {
  PpoConfig c;
  for (const auto& [k, v] : j.items()) {
    if (k == "gamma") c.gamma = v.get<double>();
    else if (k == "lambda") c.lambda = v.get<double>();
    else if (k == "rollout_length") c.rollout_length = v.get<int>();
    else if (k == "epochs") c.epochs = v.get<int>();
    else if (k == "minibatches") c.minibatches = v.get<int>();
    else if (k == "entropy_coef") c.entropy_coef = v.get<double>();
    else if (k == "value_coef") c.value_coef = v.get<double>();
    else if (k == "clip_range") c.clip_range = v.get<double>();
    else if (k == "use_clip") c.use_clip = v.get<bool>();
    else if (k == "kl_coef") c.kl_coef = v.get<double>();
    else if (k == "learning_rate") c.learning_rate = v.get<double>();
    else if (k == "normalize_rewards") c.normalize_rewards = v.get<bool>();
    else if (k == "normalize_observations") c.normalize_observations = v.get<bool>();
    else if (k == "max_grad_norm") c.max_grad_norm = v.get<double>();
    else if (k == "hidden") c.hidden = v.get<std::vector<int>>();
    else if (k == "init_log_std") c.init_log_std = v.get<double>();
    else throw std::invalid_argument("ppo: unknown key " + k);
  }
  c.validate();
  return c;
}

}  // namespace signkit::learn
