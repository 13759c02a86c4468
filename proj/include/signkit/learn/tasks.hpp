#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "signkit/learn/mlp.hpp"
#include "signkit/sim/env.hpp"

namespace signkit::learn {

struct TaskStep {
  VecX obs;
  double reward = 0;
  bool done = false, truncated = false, fallen = false;
  double dof_sq_error = 0;  // mean over DoFs of (q - q_ref)^2 after the step
  double keypoint_error = 0;  // mean keypoint distance, m
};

// Upper-body targets taken straight from the reference (the atom of the Dirac the
// upper policy imitates), optionally through y_t = s*y_{t-1} + (1-s)*x_t.
class UpperPolicy {
 public:
  explicit UpperPolicy(double smoothing = 0.0) : s_(smoothing) {
    if (!(smoothing >= 0 && smoothing < 1))
      throw std::invalid_argument("upper policy smoothing must be in [0, 1)");
  }
  void reset() { started_ = false; }
  VecX operator()(const VecX& reference_upper) {
    if (reference_upper.size() == 0) throw std::invalid_argument("upper policy: missing reference");
    if (s_ == 0.0) return reference_upper;
    if (!started_ || y_.size() != reference_upper.size()) y_ = reference_upper;
    else y_ = s_ * y_ + (1.0 - s_) * reference_upper;
    started_ = true;
    return y_;
  }
  double smoothing() const { return s_; }

 private:
  double s_;
  bool started_ = false;
  VecX y_;
};

namespace detail {
inline TaskStep wrap(const sim::SignEnv& env, sim::StepResult r) {
  TaskStep t;
  t.obs = std::move(r.obs);
  t.reward = r.reward;
  t.done = r.done;
  t.truncated = r.truncated && !r.fallen;
  t.fallen = r.fallen || r.aborted;
  const sim::RewardReference& ref = env.target();
  t.dof_sq_error = (env.state().q - ref.q).squaredNorm() / static_cast<double>(ref.q.size());
  return t;
}
}  // namespace detail

// Policy drives the lower-body DoFs; the upper body follows the reference.
class LowerBodyTask {
 public:
  LowerBodyTask(sim::SignEnv env, double upper_smoothing = 0.0)
      : env_(std::move(env)), upper_(upper_smoothing) {
    const RobotModel& m = env_.model();
    default_ = m.default_pose();
    lower_ = m.lower;
    upper_idx_ = m.upper;
  }
  int obs_dim() const { return env_.obs_dim(); }
  int act_dim() const { return static_cast<int>(lower_.size()); }

  VecX reset(std::uint64_t seed) {
    upper_.reset();
    return env_.reset(seed);
  }
  VecX reset(std::uint64_t seed, int clip, int start) {
    upper_.reset();
    return env_.reset(seed, clip, start);
  }
  VecX reset() {
    upper_.reset();
    return env_.reset();
  }

  TaskStep step(const VecX& a_low) {
    if (a_low.size() != act_dim()) throw std::invalid_argument("lower-body task: wrong action size");
    const VecX& q_ref = env_.reference().frames[env_.next_reference_frame()].q;
    VecX ref_upper(upper_idx_.size());
    for (std::size_t k = 0; k < upper_idx_.size(); ++k) ref_upper[k] = q_ref[upper_idx_[k]];
    const VecX up = upper_(ref_upper);
    VecX a(env_.dof_count());
    const double scale = env_.config().action_scale;
    for (std::size_t k = 0; k < upper_idx_.size(); ++k)
      a[upper_idx_[k]] = (up[k] - default_[upper_idx_[k]]) / scale;
    for (std::size_t k = 0; k < lower_.size(); ++k) a[lower_[k]] = a_low[k];
    return detail::wrap(env_, env_.step(a));
  }

  const sim::SignEnv& env() const { return env_; }
  sim::SignEnv& env() { return env_; }

 private:
  sim::SignEnv env_;
  UpperPolicy upper_;
  VecX default_;
  std::vector<int> lower_, upper_idx_;
};

// Policy drives every DoF.
class WholeBodyTask {
 public:
  explicit WholeBodyTask(sim::SignEnv env) : env_(std::move(env)) {}
  int obs_dim() const { return env_.obs_dim(); }
  int act_dim() const { return env_.dof_count(); }
  VecX reset(std::uint64_t seed) { return env_.reset(seed); }
  VecX reset(std::uint64_t seed, int clip, int start) { return env_.reset(seed, clip, start); }
  VecX reset() { return env_.reset(); }
  TaskStep step(const VecX& a) { return detail::wrap(env_, env_.step(a)); }
  const sim::SignEnv& env() const { return env_; }

 private:
  sim::SignEnv env_;
};

// Single inverted pendulum: theta'' = (g/l) sin(theta) - b*theta' + u_max*clamp(a).
class PendulumTask {
 public:
  int obs_dim() const { return 2; }
  int act_dim() const { return 1; }
  VecX reset(std::uint64_t seed) {
    rng_.seed(seed);
    return reset();
  }
  VecX reset() {
    theta_ = std::uniform_real_distribution<double>(-0.1, 0.1)(rng_);
    omega_ = 0;
    steps_ = 0;
    return obs();
  }
  TaskStep step(const VecX& a) {
    const double u = 10.0 * std::clamp(a[0], -1.0, 1.0);
    omega_ += dt_ * (9.81 * std::sin(theta_) - 0.1 * omega_ + u);
    theta_ += dt_ * omega_;
    ++steps_;
    TaskStep t;
    t.fallen = std::abs(theta_) > 0.8;
    t.truncated = !t.fallen && steps_ >= 200;
    t.done = t.fallen || t.truncated;
    t.reward = t.fallen ? 0.0 : 1.0 - theta_ * theta_;
    t.dof_sq_error = theta_ * theta_;
    t.obs = obs();
    return t;
  }

 private:
  VecX obs() const { return (VecX(2) << theta_, omega_).finished(); }
  std::mt19937_64 rng_{0};
  double theta_ = 0, omega_ = 0, dt_ = 0.05;
  int steps_ = 0;
};

}  // namespace signkit::learn
