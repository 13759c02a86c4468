#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>

#include "signkit/core/h1x55.hpp"
#include "signkit/data/synthetic.hpp"
#include "signkit/learn/trainer.hpp"

using namespace signkit;
using namespace signkit::learn;

namespace {

MatX random_matrix(int r, int c, std::mt19937_64& rng, double s = 1.0) {
  std::normal_distribution<double> n(0, s);
  return MatX::NullaryExpr(r, c, [&] { return n(rng); });
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-8, std::max(std::abs(a), std::abs(b))); }

// Composite Simpson over [lo, hi].
double simpson(const std::function<double(double)>& f, double lo, double hi, int n = 20000) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

double normal_pdf(double x, double m, double sd) {
  const double z = (x - m) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2 * kPi));
}

Minibatch random_minibatch(const GaussianPolicy& pi, int n, std::mt19937_64& rng) {
  Minibatch mb;
  mb.obs = random_matrix(pi.obs_dim(), n, rng);
  // Behaviour policy: the current one with perturbed means and log-std.
  mb.old_log_std = pi.log_std + VecX::NullaryExpr(pi.action_dim(), [&] {
                     return std::uniform_real_distribution<double>(-0.1, 0.1)(rng);
                   });
  mb.old_means = pi.mean.forward(mb.obs) + random_matrix(pi.action_dim(), n, rng, 0.05);
  mb.actions = mb.old_means + random_matrix(pi.action_dim(), n, rng, 0.8);
  mb.old_log_probs = gaussian_log_prob(mb.old_means, mb.old_log_std, mb.actions);
  mb.advantages = random_matrix(n, 1, rng).col(0);
  mb.returns = random_matrix(n, 1, rng).col(0);
  return mb;
}

}  // namespace

TEST(Mlp, ParameterCountMatchesArchitecture) {
  Mlp m({546, 512, 256, 128, 10});
  EXPECT_EQ(m.param_count(), 546 * 512 + 512 + 512 * 256 + 256 + 256 * 128 + 128 + 128 * 10 + 10);
  EXPECT_EQ(m.layers(), 4);
  EXPECT_THROW(Mlp({3}), std::invalid_argument);
  EXPECT_THROW(m.forward(MatX(MatX::Zero(5, 1))), std::invalid_argument);
}

TEST(Mlp, ForwardMatchesScalarLoops) {
  std::mt19937_64 rng(1);
  Mlp m({3, 4, 2});
  m.init(rng);
  m.bias(0) = VecX::LinSpaced(4, -0.5, 0.5);
  const VecX x = (VecX(3) << 0.3, -1.2, 0.7).finished();
  std::vector<double> h(4);
  for (int i = 0; i < 4; ++i) {
    double z = m.bias(0)[i];
    for (int j = 0; j < 3; ++j) z += m.weight(0)(i, j) * x[j];
    h[i] = z > 0 ? z : std::exp(z) - 1;
  }
  const VecX y = m.forward(x);
  for (int o = 0; o < 2; ++o) {
    double z = m.bias(1)[o];
    for (int i = 0; i < 4; ++i) z += m.weight(1)(o, i) * h[i];
    EXPECT_NEAR(y[o], z, 1e-14);
  }
}

TEST(Mlp, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    Mlp m({5, 7, 6, 3});
    m.init(rng);
    m.params() += random_matrix(static_cast<int>(m.param_count()), 1, rng, 0.1).col(0);
    const MatX x = random_matrix(5, 4, rng);
    const MatX c = random_matrix(3, 4, rng);
    auto loss = [&](const Mlp& net, const MatX& in) { return (net.forward(in).cwiseProduct(c)).sum(); };
    Mlp::Cache cache;
    m.forward(x, &cache);
    VecX g;
    const MatX dx = m.backward(cache, c, g);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < m.param_count(); ++i) {
      Mlp p = m, q = m;
      p.params()[i] += h;
      q.params()[i] -= h;
      const double fd = (loss(p, x) - loss(q, x)) / (2 * h);
      ASSERT_TRUE(rel_err(g[i], fd) < 1e-4 || std::abs(g[i] - fd) < 1e-9) << i << ' ' << g[i] << ' ' << fd;
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      MatX xp = x, xq = x;
      xp.data()[i] += h;
      xq.data()[i] -= h;
      const double fd = (loss(m, xp) - loss(m, xq)) / (2 * h);
      ASSERT_TRUE(rel_err(dx.data()[i], fd) < 1e-4 || std::abs(dx.data()[i] - fd) < 1e-9);
    }
  }
}

TEST(Gaussian, LogProbMatchesProductOfDensities) {
  std::mt19937_64 rng(3);
  const MatX mu = random_matrix(3, 5, rng), a = random_matrix(3, 5, rng);
  const VecX ls = (VecX(3) << -0.5, 0.0, 0.4).finished();
  const VecX lp = gaussian_log_prob(mu, ls, a);
  for (int c = 0; c < 5; ++c) {
    double p = 1;
    for (int r = 0; r < 3; ++r) p *= normal_pdf(a(r, c), mu(r, c), std::exp(ls[r]));
    EXPECT_NEAR(lp[c], std::log(p), 1e-12);
  }
}

TEST(Gaussian, EntropyMatchesClosedForm) {
  const VecX ls = (VecX(4) << -1.0, -0.2, 0.0, 0.7).finished();
  double closed = 0;
  for (int i = 0; i < 4; ++i) closed += ls[i] + 0.5 * std::log(2 * kPi * std::exp(1.0));
  EXPECT_NEAR(gaussian_entropy(ls), closed, 1e-10);
  // Numerical differential entropy, one dimension at a time.
  double numeric = 0;
  for (int i = 0; i < 4; ++i) {
    const double sd = std::exp(ls[i]);
    numeric += simpson([&](double x) {
      const double p = normal_pdf(x, 0, sd);
      return p > 0 ? -p * std::log(p) : 0.0;
    }, -14 * sd, 14 * sd);
  }
  EXPECT_NEAR(gaussian_entropy(ls), numeric, 1e-9);
}

TEST(Gaussian, KlZeroWhenEqualPositiveOtherwise) {
  std::mt19937_64 rng(4);
  const MatX mu = random_matrix(3, 6, rng);
  const VecX ls = random_matrix(3, 1, rng, 0.3).col(0);
  const VecX kl0 = gaussian_kl(mu, ls, mu, ls);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(kl0[i], 0.0);
  for (int trial = 0; trial < 20; ++trial) {
    const MatX mu2 = mu + random_matrix(3, 6, rng, 0.1);
    const VecX ls2 = ls + random_matrix(3, 1, rng, 0.1).col(0);
    EXPECT_GT(gaussian_kl(mu, ls, mu2, ls2).minCoeff(), 0.0);
  }
  // Against numerical integration of E_old[log p_old - log p_new].
  const double m1 = 0.3, s1 = 0.8, m2 = -0.1, s2 = 1.3;
  const double numeric = simpson([&](double x) {
    const double p = normal_pdf(x, m1, s1);
    return p > 0 ? p * (std::log(p) - std::log(normal_pdf(x, m2, s2))) : 0.0;
  }, -15, 15);
  const VecX kl = gaussian_kl(MatX::Constant(1, 1, m1), VecX::Constant(1, std::log(s1)),
                              MatX::Constant(1, 1, m2), VecX::Constant(1, std::log(s2)));
  EXPECT_NEAR(kl[0], numeric, 1e-9);
}

TEST(Gae, DegenerateCases) {
  std::mt19937_64 rng(5);
  const VecX r = random_matrix(30, 1, rng).col(0), v = random_matrix(30, 1, rng).col(0);
  VecX d = VecX::Zero(30);
  d[10] = 1;
  const double boot = 0.7;
  // gamma = 0: one-step residual r - v.
  const auto [a0, ret0] = gae(r, v, d, boot, 0.0, 0.95);
  for (int t = 0; t < 30; ++t) EXPECT_DOUBLE_EQ(a0[t], r[t] - v[t]);
  // lambda = 0: TD residual.
  const auto [a1, ret1] = gae(r, v, d, boot, 0.9, 0.0);
  for (int t = 0; t < 30; ++t) {
    const double next = t + 1 < 30 ? v[t + 1] : boot;
    EXPECT_DOUBLE_EQ(a1[t], r[t] + 0.9 * (1 - d[t]) * next - v[t]);
    EXPECT_DOUBLE_EQ(ret1[t], a1[t] + v[t]);
  }
  EXPECT_THROW(gae(r, v.head(29), d, boot, 0.9, 0.9), std::invalid_argument);
}

TEST(Gae, MatchesBruteForceSum) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 50;
    const VecX r = random_matrix(n, 1, rng).col(0), v = random_matrix(n, 1, rng).col(0);
    VecX d = VecX::Zero(n);
    for (int t = 0; t < n; ++t) d[t] = std::uniform_real_distribution<double>()(rng) < 0.08;
    const double boot = 0.4, g = 0.99, l = 0.95;
    auto delta = [&](int t) {
      const double next = t + 1 < n ? v[t + 1] : boot;
      return r[t] + g * (1 - d[t]) * next - v[t];
    };
    const auto [adv, ret] = gae(r, v, d, boot, g, l);
    for (int t = 0; t < n; ++t) {
      double sum = 0, w = 1;
      for (int k = t; k < n; ++k) {
        sum += w * delta(k);
        if (d[k]) break;
        w *= g * l;
      }
      ASSERT_NEAR(adv[t], sum, 1e-10);
      ASSERT_NEAR(ret[t], sum + v[t], 1e-10);
    }
  }
}

TEST(Ppo, AdvantageNormalization) {
  std::mt19937_64 rng(7);
  VecX a = random_matrix(84, 1, rng, 5.0).col(0).array() + 3.0;
  normalize_advantages(a);
  EXPECT_NEAR(a.mean(), 0.0, 1e-6);
  EXPECT_NEAR(std::sqrt((a.array() - a.mean()).square().mean()), 1.0, 1e-6);
}

TEST(Ppo, DefaultsMatchHyperparameterTable) {
  const PpoConfig c;
  EXPECT_EQ(c.gamma, 0.99);
  EXPECT_EQ(c.lambda, 0.95);
  EXPECT_EQ(c.rollout_length, 21);
  EXPECT_EQ(c.epochs, 5);
  EXPECT_EQ(c.minibatches, 4);
  EXPECT_EQ(c.entropy_coef, 0.01);
  EXPECT_EQ(c.value_coef, 1.0);
  EXPECT_EQ(c.clip_range, 0.2);
  EXPECT_TRUE(c.normalize_rewards);
  EXPECT_EQ(c.learning_rate, 1e-3);
  EXPECT_EQ(c.kl_coef, 0.0);
  EXPECT_EQ(c.hidden, (std::vector<int>{512, 256, 128}));
  const PpoConfig back = ppo_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(ppo_config_from_json({{"gama", 0.9}}), std::invalid_argument);
}

TEST(Ppo, PolicyGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  for (bool clip : {true, false}) {
    PpoConfig cfg;
    cfg.use_clip = clip;
    cfg.kl_coef = 0.3;
    GaussianPolicy pi({4, 6, 5, 2}, -0.3);
    pi.mean.init(rng, 1.0);
    const Minibatch mb = random_minibatch(pi, 12, rng);
    VecX gm, gs;
    policy_loss(pi, mb, cfg, &gm, &gs);
    const double h = 1e-5;
    int checked = 0;
    for (Eigen::Index i = 0; i < pi.mean.param_count(); ++i) {
      GaussianPolicy p = pi, q = pi;
      p.mean.params()[i] += h;
      q.mean.params()[i] -= h;
      const double fd = (policy_loss(p, mb, cfg).loss - policy_loss(q, mb, cfg).loss) / (2 * h);
      ASSERT_TRUE(rel_err(gm[i], fd) < 1e-4 || std::abs(gm[i] - fd) < 1e-9)
          << "clip " << clip << " param " << i << ": " << gm[i] << " vs " << fd;
      ++checked;
    }
    for (Eigen::Index j = 0; j < pi.log_std.size(); ++j) {
      GaussianPolicy p = pi, q = pi;
      p.log_std[j] += h;
      q.log_std[j] -= h;
      const double fd = (policy_loss(p, mb, cfg).loss - policy_loss(q, mb, cfg).loss) / (2 * h);
      ASSERT_LT(rel_err(gs[j], fd), 1e-4);
    }
    EXPECT_GT(checked, 50);
  }
}

TEST(Ppo, ValueGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  PpoConfig cfg;
  Mlp v({4, 5, 1});
  v.init(rng);
  GaussianPolicy pi({4, 3, 2});
  const Minibatch mb = random_minibatch(pi, 10, rng);
  VecX g;
  value_loss(v, mb, cfg, &g);
  for (Eigen::Index i = 0; i < v.param_count(); ++i) {
    Mlp p = v, q = v;
    p.params()[i] += 1e-5;
    q.params()[i] -= 1e-5;
    const double fd = (value_loss(p, mb, cfg) - value_loss(q, mb, cfg)) / 2e-5;
    ASSERT_TRUE(rel_err(g[i], fd) < 1e-4 || std::abs(g[i] - fd) < 1e-9);
  }
}

TEST(Ppo, BanditGradientIsAnalytic) {
  // One action dimension, constant observation: the mean is the output bias.
  PpoConfig cfg;
  cfg.entropy_coef = 0;
  GaussianPolicy pi({1, 1}, std::log(0.5));
  pi.mean.weight(0).setZero();
  pi.mean.bias(0)[0] = 0.2;
  Minibatch mb;
  mb.obs = MatX::Ones(1, 3);
  mb.actions = (MatX(1, 3) << 0.5, -0.1, 0.9).finished();
  mb.old_means = MatX::Constant(1, 3, 0.2);
  mb.old_log_std = pi.log_std;
  mb.old_log_probs = gaussian_log_prob(mb.old_means, pi.log_std, mb.actions);
  mb.advantages = (VecX(3) << 1.0, -2.0, 0.5).finished();
  mb.returns = VecX::Zero(3);
  VecX gm, gs;
  policy_loss(pi, mb, cfg, &gm, &gs);
  double expected = 0;
  for (int i = 0; i < 3; ++i) expected -= mb.advantages[i] * (mb.actions(0, i) - 0.2) / 0.25 / 3;
  EXPECT_NEAR(gm[1], expected, 1e-12);  // bias follows the single weight
  const double h = 1e-5;
  GaussianPolicy p = pi, q = pi;
  p.mean.bias(0)[0] += h;
  q.mean.bias(0)[0] -= h;
  EXPECT_LT(rel_err((policy_loss(p, mb, cfg).loss - policy_loss(q, mb, cfg).loss) / (2 * h), expected), 1e-4);
}

TEST(Ppo, ZeroAdvantagesLeaveOnlyEntropyGradient) {
  std::mt19937_64 rng(10);
  PpoConfig cfg;
  GaussianPolicy pi({3, 4, 2});
  pi.mean.init(rng);
  Minibatch mb = random_minibatch(pi, 8, rng);
  mb.advantages.setZero();
  VecX gm, gs;
  policy_loss(pi, mb, cfg, &gm, &gs);
  EXPECT_EQ(gm.cwiseAbs().maxCoeff(), 0.0);
  for (Eigen::Index j = 0; j < gs.size(); ++j) EXPECT_DOUBLE_EQ(gs[j], -cfg.entropy_coef);
}

TEST(Ppo, FreshPolicyHasUnitRatio) {
  std::mt19937_64 rng(11);
  PpoConfig cfg;
  GaussianPolicy pi({3, 4, 2});
  pi.mean.init(rng);
  Minibatch mb;
  mb.obs = random_matrix(3, 1, rng);
  mb.old_means = pi.mean.forward(mb.obs);
  mb.old_log_std = pi.log_std;
  mb.actions = pi.sample(mb.old_means, rng);
  mb.old_log_probs = gaussian_log_prob(mb.old_means, pi.log_std, mb.actions);
  mb.advantages = VecX::Constant(1, 1.5);
  mb.returns = VecX::Zero(1);
  const PolicyLossStats s = policy_loss(pi, mb, cfg);
  EXPECT_EQ(s.kl, 0.0);
  EXPECT_EQ(s.clip_fraction, 0.0);
  EXPECT_NEAR(s.surrogate, 1.5, 1e-15);
}

TEST(Ppo, KlModeAtOldPolicyIsPlainPolicyGradient) {
  std::mt19937_64 rng(12);
  PpoConfig plain, kl;
  plain.use_clip = false;
  plain.kl_coef = 0;
  kl.use_clip = false;
  kl.kl_coef = 0.5;
  GaussianPolicy pi({3, 5, 2});
  pi.mean.init(rng);
  Minibatch mb = random_minibatch(pi, 16, rng);
  mb.old_means = pi.mean.forward(mb.obs);
  mb.old_log_std = pi.log_std;
  mb.old_log_probs = gaussian_log_prob(mb.old_means, pi.log_std, mb.actions);
  VecX g1, s1, g2, s2;
  policy_loss(pi, mb, plain, &g1, &s1);
  policy_loss(pi, mb, kl, &g2, &s2);
  EXPECT_LT((g1 - g2).norm(), 1e-12 * (1 + g1.norm()));
  EXPECT_LT((s1 - s2).norm(), 1e-12 * (1 + s1.norm()));
}

TEST(Ppo, NonFiniteLossAborts) {
  std::mt19937_64 rng(13);
  PpoConfig cfg;
  GaussianPolicy pi({3, 4, 2});
  pi.mean.init(rng);
  Mlp v({3, 4, 1});
  v.init(rng);
  RolloutBuffer b;
  b.obs = random_matrix(3, 8, rng);
  b.means = pi.mean.forward(b.obs);
  b.log_std = pi.log_std;
  b.actions = pi.sample(b.means, rng);
  b.log_probs = gaussian_log_prob(b.means, b.log_std, b.actions);
  b.values = b.rewards = b.dones = VecX::Zero(8);
  b.advantages = VecX::Ones(8);
  b.returns = VecX::Zero(8);
  b.returns[3] = std::nan("");
  PpoOptimizer opt;
  try {
    ppo_update(b, pi, v, opt, cfg, rng);
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos);
  }
  RolloutBuffer short_b = b;
  short_b.rewards = VecX::Zero(3);
  EXPECT_THROW(ppo_update(short_b, pi, v, opt, cfg, rng), std::invalid_argument);
}

TEST(Normalizer, BatchMergeMatchesTwoPass) {
  std::mt19937_64 rng(14);
  RunningMeanStd r(3);
  r.count = 0;
  MatX all(3, 0);
  for (int k = 0; k < 5; ++k) {
    const MatX b = random_matrix(3, 7 + k, rng, 2.0).array() + 1.0;
    r.update(b);
    MatX joined(3, all.cols() + b.cols());
    joined << all, b;
    all = joined;
  }
  const VecX mean = all.rowwise().mean();
  const VecX var = (all.colwise() - mean).cwiseAbs2().rowwise().mean();
  EXPECT_LT((r.mean - mean).norm(), 1e-12);
  EXPECT_LT((r.var - var).norm(), 1e-12);
  const MatX z = r.normalize(MatX::Constant(3, 1, 1e9));
  EXPECT_EQ(z.maxCoeff(), 10.0);
}

TEST(UpperPolicy, PassesReferenceThrough) {
  UpperPolicy off;
  VecX ref = VecX::Zero(45);
  ref[0] = 0.5;
  const VecX out = off(ref);
  EXPECT_EQ(out[0], 0.5);
  EXPECT_EQ(out, ref);
  EXPECT_THROW(off(VecX()), std::invalid_argument);
}

TEST(UpperPolicy, SmoothingFollowsExponentialResponse) {
  UpperPolicy p(0.5);
  EXPECT_EQ(p(VecX::Zero(1))[0], 0.0);
  for (int k = 1; k <= 20; ++k) EXPECT_NEAR(p(VecX::Ones(1))[0], 1.0 - std::pow(0.5, k), 1e-15);
  p.reset();
  EXPECT_EQ(p(VecX::Constant(1, 3.0))[0], 3.0);
  EXPECT_THROW(UpperPolicy(1.0), std::invalid_argument);
}

TEST(Trainer, PendulumLearnsBeyondRandom) {
  TrainConfig cfg;
  cfg.num_envs = 4;
  cfg.iterations = 200;
  cfg.seed = 123;
  cfg.ppo.hidden = {32, 32};
  std::vector<PendulumTask> tasks(cfg.num_envs);
  Trainer<PendulumTask> tr(tasks, cfg);
  PendulumTask eval_task;
  const EvalStats random = evaluate(tr.agent(), eval_task, 30, false, 1000);
  tr.train();
  const EvalStats trained = evaluate(tr.agent(), eval_task, 30, true, 1000);
  EXPECT_GT(trained.mean_return, random.mean_return + 3 * random.std_return)
      << trained.mean_return << " vs " << random.mean_return << " +- " << random.std_return;
}

TEST(Trainer, ZeroIterationsEqualsFreshAgent) {
  TrainConfig cfg;
  cfg.ppo.hidden = {8};
  Trainer<PendulumTask> tr(std::vector<PendulumTask>(2), cfg);
  std::mt19937_64 rng(cfg.seed);
  const Agent fresh(2, 1, cfg.ppo, rng);
  EXPECT_EQ(fresh.policy.mean.params(), tr.agent().policy.mean.params());
  PendulumTask a, b;
  EXPECT_EQ(evaluate(fresh, a, 5, false, 9).returns, evaluate(tr.agent(), b, 5, false, 9).returns);
}

TEST(Trainer, SameSeedBitIdenticalCurve) {
  auto model = std::make_shared<const RobotModel>(h1x55::make_model());
  auto refs = std::make_shared<sim::ReferenceSet>();
  synthetic::SignClipOptions o;
  o.duration = 2.0;
  for (auto& t : synthetic::sign_corpus(*model, 2, 3, o))
    refs->push_back(sim::prepare_reference(*model, std::move(t), true));
  auto run = [&] {
    sim::EnvConfig ec;
    ec.history = 0;
    TrainConfig cfg;
    cfg.num_envs = 2;
    cfg.iterations = 3;
    cfg.ppo.hidden = {16};
    std::vector<LowerBodyTask> tasks;
    for (int e = 0; e < cfg.num_envs; ++e) tasks.emplace_back(sim::SignEnv(model, refs, ec));
    Trainer<LowerBodyTask> tr(std::move(tasks), cfg);
    std::vector<double> curve;
    for (const auto& s : tr.train()) {
      curve.push_back(s.mean_reward);
      curve.push_back(s.update.policy_loss);
      curve.push_back(s.update.value_loss);
    }
    curve.push_back(tr.agent().policy.mean.params().sum());
    return curve;
  };
  EXPECT_EQ(run(), run());
}

TEST(Trainer, CheckpointRoundTrip) {
  TrainConfig cfg;
  cfg.ppo.hidden = {8, 8};
  cfg.iterations = 2;
  Trainer<PendulumTask> tr(std::vector<PendulumTask>(2), cfg);
  tr.train();
  const auto dir = std::filesystem::temp_directory_path() / "signkit_ckpt_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "agent.json";
  save_checkpoint(path, tr.agent(), {{"iteration", tr.iteration()}});
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  const Agent back = load_checkpoint(path);
  EXPECT_EQ(back.policy.mean.params(), tr.agent().policy.mean.params());
  EXPECT_EQ(back.value.params(), tr.agent().value.params());
  EXPECT_EQ(back.obs_rms.mean, tr.agent().obs_rms.mean);
  std::mt19937_64 rng(1);
  const VecX obs = (VecX(2) << 0.1, -0.2).finished();
  EXPECT_EQ(back.act(obs, true, rng), tr.agent().act(obs, true, rng));
  nlohmann::json bad = io::read_json_file(path);
  bad["log_std"] = {1.0, 2.0};
  EXPECT_THROW(agent_from_json(bad), std::invalid_argument);
  std::filesystem::remove_all(dir);
}

TEST(Trainer, LowerBodyTaskPassesUpperReference) {
  auto model = std::make_shared<const RobotModel>(h1x55::make_model());
  auto refs = std::make_shared<sim::ReferenceSet>();
  refs->push_back(sim::prepare_reference(*model, synthetic::sign_clip(*model, 4), true));
  sim::EnvConfig ec;
  ec.randomization.enabled = false;
  ec.randomization.push = false;
  ec.init_tilt = 0;
  LowerBodyTask task(sim::SignEnv(model, refs, ec));
  EXPECT_EQ(task.act_dim(), 10);
  task.reset(1, 0, 0);
  // The upper slots of the applied action encode the reference frame the step is scored against.
  const VecX def = model->default_pose();
  for (int t = 0; t < 60; ++t) {
    const VecX a_low = VecX::Constant(10, 0.01 * t);
    task.step(a_low);
    const VecX& applied = task.env().state().last_action;
    const VecX& ref = task.env().target().q;
    for (int i : model->upper) ASSERT_NEAR(applied[i], (ref[i] - def[i]) / 0.25, 1e-12);
    for (int k = 0; k < 10; ++k) ASSERT_EQ(applied[model->lower[k]], a_low[k]);
  }
  EXPECT_THROW(task.step(VecX::Zero(55)), std::invalid_argument);
}
