#pragma once

#include <array>
#include <cmath>
#include <deque>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signkit/core/kinematics.hpp"
#include "signkit/core/motion.hpp"
#include "signkit/sim/randomization.hpp"
#include "signkit/sim/rewards.hpp"

namespace signkit::sim {

struct EnvConfig {
  double dt = 0.005;
  int decimation = 4;
  double action_scale = 0.25;
  int history = 5;  // past observations stacked after the current one

  // per-DoF actuator surrogate
  double inertia_leg = 2.0, inertia_torso = 1.5, inertia_arm = 0.5, inertia_finger = 0.01;
  double joint_friction = 0.5;  // viscous coefficient per unit inertia, times sampled friction

  // reduced balance model
  double nominal_mass = 55.0;     // kg
  double pendulum_height = 1.0;   // m
  double upper_coupling = 0.02;   // tilt response to upper-body reaction torque
  double lower_coupling = 0.05;   // tilt response to lower-body corrective torque
  double support_stiffness = 0.8; // fraction of g/h cancelled by the feet while in stance
  double support_damping = 1.0;   // 1/s, in stance
  double tilt_damping = 0.2;      // 1/s, always
  double yaw_damping = 2.0;       // 1/s, times friction while in stance
  double velocity_gain = 1.0;     // m/s of base velocity per rad of tilt
  double velocity_lag = 0.2;      // s
  double push_tilt_gain = 1.0;    // tilt-rate kick per (push speed / h)
  double init_tilt = 0.02;        // rad, uniform initial roll and pitch

  // contact surrogate
  double contact_band = 0.06;      // m around nominal base height
  double contact_tilt = 0.3;       // rad
  double foot_clearance = 0.02;    // m, a foot closer than this to the ground is in contact
  double impact_damping = 50.0;    // N per m/s of vertical base speed

  double fall_threshold = 0.7;  // |g_xy|
  bool random_start = true;
  bool lower_reference_default = true;
  int max_episode_steps = 0;  // 0: until the reference ends

  RandomizationConfig randomization;

  void validate() const {
    if (!(dt > 0) || decimation < 1) throw std::invalid_argument("env: dt > 0 and decimation >= 1");
    if (history < 0) throw std::invalid_argument("env: history must be >= 0");
    if (!(pendulum_height > 0) || !(velocity_lag > 0))
      throw std::invalid_argument("env: pendulum_height and velocity_lag must be > 0");
    if (!(fall_threshold > 0 && fall_threshold < 1))
      throw std::invalid_argument("env: fall_threshold must be in (0, 1)");
  }
};

struct SimState {
  VecX q, qd, qdd, tau, last_action;
  Vec3 base = Vec3::Zero();          // world position
  Vec3 rpy = Vec3::Zero();           // roll, pitch, yaw
  Vec3 lin_vel = Vec3::Zero();       // world frame
  Vec3 ang_vel = Vec3::Zero();       // roll, pitch, yaw rates
  Vec3 gravity{0, 0, -1};            // body frame
  std::array<bool, 2> contact{true, true};
  std::array<bool, 2> new_contact{false, false};
  std::array<Vec3, 2> foot_force{Vec3::Zero(), Vec3::Zero()};
  std::array<double, 2> air_time{0, 0};        // current flight, 0 while in contact
  std::array<double, 2> touchdown_air{0, 0};   // flight that ended during the last policy step
  std::array<double, 2> foot_speed{0, 0};
  std::array<Vec3, 2> foot_world{Vec3::Zero(), Vec3::Zero()};
  double time = 0;
  long substeps = 0;
  bool fallen = false;

  Mat3 base_rotation() const { return from_rpy({rpy[0], rpy[1], rpy[2]}).toRotationMatrix(); }
};

inline Mat3 yaw_rotation(double yaw) { return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix(); }

inline int proprio_dim(int n_dof) { return 3 * n_dof + 9; }
inline int goal_dim(int n_dof, int n_keypoints) { return 3 * n_keypoints + 6 * n_dof; }

// [q, qd, v_body, w, g, a_prev | keypoints, joint positions, joint velocities], goal
// quantities relative to the reference root and rotated by the robot's -yaw.
inline VecX build_observation(const SimState& s, const TrajectoryFrame& ref) {
  const Eigen::Index n = s.q.size();
  if (s.qd.size() != n || s.last_action.size() != n)
    throw std::invalid_argument("observation: state vectors disagree in size");
  if (ref.keypoints.rows() == 0) throw std::invalid_argument("observation: reference has no keypoints");
  if (ref.joint_positions.rows() != n || ref.joint_velocities.rows() != n)
    throw std::invalid_argument("observation: reference joint positions/velocities missing");
  const Eigen::Index k = ref.keypoints.rows();
  VecX o(proprio_dim(n) + goal_dim(n, k));
  const Mat3 rb = s.base_rotation();
  const Mat3 rh = yaw_rotation(-s.rpy[2]);
  const Vec3 root = ref.root.translation;
  Eigen::Index i = 0;
  o.segment(i, n) = s.q, i += n;
  o.segment(i, n) = s.qd, i += n;
  o.segment<3>(i) = rb.transpose() * s.lin_vel, i += 3;
  o.segment<3>(i) = s.ang_vel, i += 3;
  o.segment<3>(i) = s.gravity, i += 3;
  o.segment(i, n) = s.last_action, i += n;
  for (Eigen::Index r = 0; r < k; ++r, i += 3)
    o.segment<3>(i) = rh * (ref.keypoints.row(r).transpose() - root);
  for (Eigen::Index r = 0; r < n; ++r, i += 3)
    o.segment<3>(i) = rh * (ref.joint_positions.row(r).transpose() - root);
  for (Eigen::Index r = 0; r < n; ++r, i += 3)
    o.segment<3>(i) = rh * ref.joint_velocities.row(r).transpose();
  return o;
}

// Reference frames plus the per-frame quantities the rewards compare against.
struct PreparedReference {
  double fps = 30;
  std::vector<TrajectoryFrame> frames;
  std::vector<RewardReference> targets;
};

inline PreparedReference prepare_reference(const RobotModel& m, RobotTrajectory traj,
                                           bool lower_default) {
  if (traj.empty()) throw std::invalid_argument("reference trajectory is empty");
  const VecX d = m.default_pose();
  for (auto& f : traj.frames) {
    if (f.q.size() != static_cast<Eigen::Index>(m.dof_count()))
      throw std::invalid_argument("reference frame has wrong DoF count");
    if (lower_default)
      for (int i : m.lower) f.q[i] = d[i];
  }
  traj = populate_kinematics(m, std::move(traj));
  PreparedReference p;
  p.fps = traj.fps;
  for (const auto& f : traj.frames) {
    const Rpy e = to_rpy(f.root.orientation);
    const Mat3 rh = yaw_rotation(-e.yaw);
    RewardReference t;
    t.q = f.q;
    t.keypoints = ((f.keypoints.rowwise() - f.root.translation.transpose()) * rh.transpose()).eval();
    t.lin_vel = rh * f.root_velocity;
    t.rpy = {e.roll, e.pitch, e.yaw};
    p.targets.push_back(std::move(t));
  }
  p.frames = std::move(traj.frames);
  return p;
}

using ReferenceSet = std::vector<PreparedReference>;

struct PushEvent {
  double time;
  Vec3 dv;
};

struct StepResult {
  VecX obs;
  double reward = 0;
  bool done = false;
  bool fallen = false;
  bool truncated = false;  // reference or step budget exhausted
  bool aborted = false;
  std::string message;
  RewardBreakdown breakdown;
};

class SignEnv {
 public:
  SignEnv(std::shared_ptr<const RobotModel> model, std::shared_ptr<const ReferenceSet> refs,
          EnvConfig cfg = {}, RewardWeights weights = {})
      : model_(std::move(model)), refs_(std::move(refs)), cfg_(std::move(cfg)),
        weights_(weights) {
    if (!model_ || !refs_ || refs_->empty())
      throw std::invalid_argument("env needs a model and at least one reference");
    cfg_.validate();
    const int n = static_cast<int>(model_->dof_count());
    limits_ = RewardLimits::from_model(*model_);
    default_ = model_->default_pose();
    inertia_.resize(n);
    kp_.resize(n), kd_.resize(n), tau_max_.resize(n);
    for (int i = 0; i < n; ++i) {
      const Dof& d = model_->dofs[i];
      switch (d.group) {
        case DofGroup::Leg: inertia_[i] = cfg_.inertia_leg; break;
        case DofGroup::Torso: inertia_[i] = cfg_.inertia_torso; break;
        case DofGroup::Finger: inertia_[i] = cfg_.inertia_finger; break;
        default: inertia_[i] = cfg_.inertia_arm;
      }
      kp_[i] = d.stiffness, kd_[i] = d.damping, tau_max_[i] = d.torque_limit;
    }
    // Joint axes in the base frame at the default pose.
    const DofFrames f = dof_frames(model_->dofs, default_);
    axes_.resize(n, 3);
    for (int i = 0; i < n; ++i) axes_.row(i) = (f.rotation[i] * model_->dofs[i].axis).transpose();
    for (int s = 0; s < 2; ++s) {
      const int id = model_->site_index(s == 0 ? "left_foot" : "right_foot");
      if (id < 0) throw std::invalid_argument("env: model needs left_foot and right_foot sites");
      feet_[s] = id;
      for (int d = model_->sites[id].dof; d >= 0; d = model_->dofs[d].parent)
        leg_prefix_ = std::max(leg_prefix_, d + 1);
    }
    for (const auto& r : *refs_)
      for (const auto& fr : r.frames)
        if (fr.q.size() != n || fr.keypoints.rows() != static_cast<Eigen::Index>(model_->keypoints.size()))
          throw std::invalid_argument("env: reference does not match the robot model");
    nominal_height_ = stance_height(default_, Vec3::Zero());
  }

  int dof_count() const { return static_cast<int>(model_->dof_count()); }
  int frame_dim() const {
    return proprio_dim(dof_count()) + goal_dim(dof_count(), static_cast<int>(model_->keypoints.size()));
  }
  int obs_dim() const { return frame_dim() * (cfg_.history + 1); }
  double policy_dt() const { return cfg_.dt * cfg_.decimation; }

  const EnvConfig& config() const { return cfg_; }
  const RobotModel& model() const { return *model_; }
  const SimState& state() const { return s_; }
  SimState& mutable_state() { return s_; }
  const DomainParams& domain() const { return dom_; }
  const std::vector<PushEvent>& pushes() const { return pushes_; }
  int clip_index() const { return clip_; }
  int steps() const { return steps_; }
  int reference_frame() const { return ref_frame_; }
  const PreparedReference& reference() const { return (*refs_)[clip_]; }
  const RewardReference& target() const { return reference().targets[ref_frame_]; }
  const RewardLimits& limits() const { return limits_; }
  // Reference frame the next step is scored against.
  int next_reference_frame() const { return frame_at(steps_ + 1); }
  double nominal_height() const { return nominal_height_; }

  VecX reset(std::uint64_t seed) {
    rng_.seed(seed);
    return reset_episode(-1, -1);
  }
  // Fixed clip and start frame; negative values are sampled.
  VecX reset(std::uint64_t seed, int clip, int start) {
    rng_.seed(seed);
    return reset_episode(clip, start);
  }
  // Continues the instance's own random stream.
  VecX reset() { return reset_episode(-1, -1); }

  StepResult step(const VecX& action) {
    const int n = dof_count();
    if (action.size() != n)
      throw std::invalid_argument("env.step: expected " + std::to_string(n) + " actions, got " +
                                  std::to_string(action.size()));
    StepResult r;
    for (int i = 0; i < n; ++i)
      if (!std::isfinite(action[i])) {
        r.done = r.aborted = true;
        r.message = "non-finite action at dof " + model_->dofs[i].name;
        r.obs = stacked();
        return r;
      }
    const VecX target = default_ + cfg_.action_scale * action;
    s_.new_contact = {false, false};
    s_.touchdown_air = {0, 0};
    for (int k = 0; k < cfg_.decimation; ++k) substep(target);
    ++steps_;

    const PreparedReference& ref = reference();
    ref_frame_ = frame_at(steps_);
    const Vec3 g = s_.gravity;
    s_.fallen = g.head<2>().norm() > cfg_.fall_threshold;

    RewardState rs = reward_state(action);
    r.breakdown = total_reward(rs, ref.targets[ref_frame_], limits_, weights_);
    r.reward = r.breakdown.total;
    s_.last_action = action;

    r.fallen = s_.fallen;
    r.truncated = ref_frame_ >= static_cast<int>(ref.frames.size()) - 1 ||
                  (cfg_.max_episode_steps > 0 && steps_ >= cfg_.max_episode_steps);
    r.done = r.fallen || r.truncated;
    push_history(build_observation(s_, ref.frames[ref_frame_]));
    r.obs = stacked();
    return r;
  }

  VecX observation() const { return stacked(); }

  // Reward inputs for the current state; keypoints relative to the base in the heading frame.
  RewardState reward_state(const VecX& action) const {
    RewardState rs;
    rs.q = s_.q, rs.qd = s_.qd, rs.qdd = s_.qdd;
    rs.action = action, rs.prev_action = s_.last_action;
    const Mat3 rh = yaw_rotation(-s_.rpy[2]);
    rs.lin_vel = rh * s_.lin_vel;
    rs.ang_vel = s_.ang_vel;
    rs.gravity = s_.gravity;
    rs.rpy = s_.rpy;
    RootPose tilt;
    tilt.orientation = from_rpy({s_.rpy[0], s_.rpy[1], 0.0});
    rs.keypoints = forward_kinematics(*model_, s_.q, tilt).keypoints;
    rs.new_contact = s_.new_contact;
    rs.air_time = s_.touchdown_air;
    rs.foot_speed = s_.foot_speed;
    rs.foot_force = s_.foot_force;
    rs.fallen = s_.fallen;
    return rs;
  }

 private:
  int frame_at(int step) const {
    const PreparedReference& ref = reference();
    const int k = start_frame_ + static_cast<int>(std::floor(step * policy_dt() * ref.fps + 1e-9));
    return std::min<int>(static_cast<int>(ref.frames.size()) - 1, k);
  }

  VecX reset_episode(int clip, int start) {
    dom_ = sample_domain(cfg_.randomization, rng_);
    const int nclips = static_cast<int>(refs_->size());
    clip_ = clip >= 0 ? clip : std::uniform_int_distribution<int>(0, nclips - 1)(rng_);
    if (clip_ >= nclips) throw std::invalid_argument("env.reset: clip index out of range");
    const int nf = static_cast<int>((*refs_)[clip_].frames.size());
    if (start >= 0) start_frame_ = std::min(start, nf - 1);
    else start_frame_ = cfg_.random_start && nf > 1
                            ? std::uniform_int_distribution<int>(0, nf - 2)(rng_)
                            : 0;
    ref_frame_ = start_frame_;
    steps_ = 0;
    pushes_.clear();

    const int n = dof_count();
    s_ = SimState{};
    s_.q = default_;
    s_.qd = VecX::Zero(n), s_.qdd = VecX::Zero(n), s_.tau = VecX::Zero(n);
    s_.last_action = VecX::Zero(n);
    std::uniform_real_distribution<double> tilt(-cfg_.init_tilt, cfg_.init_tilt);
    if (cfg_.init_tilt > 0) s_.rpy = {tilt(rng_), tilt(rng_), 0.0};
    const Rpy root = to_rpy((*refs_)[clip_].frames[start_frame_].root.orientation);
    s_.rpy[2] = root.yaw;
    update_gravity();
    s_.base = {0, 0, stance_height(s_.q, s_.rpy)};
    update_feet(0.0);

    history_.clear();
    const VecX o = build_observation(s_, reference().frames[ref_frame_]);
    for (int h = 0; h <= cfg_.history; ++h) history_.push_back(o);
    return stacked();
  }

  void substep(const VecX& target) {
    const int n = dof_count();
    const double dt = cfg_.dt;
    const double mass = cfg_.nominal_mass + dom_.base_mass;
    const double g = 9.81 + dom_.gravity;
    const double h = cfg_.pendulum_height;
    const double reaction = cfg_.nominal_mass / mass;

    Vec3 upper = Vec3::Zero(), lower = Vec3::Zero();
    for (int i = 0; i < n; ++i) {
      const double inertia = inertia_[i] * dom_.link_mass;
      const double kp = kp_[i] * dom_.pd_gain, kd = kd_[i] * dom_.pd_gain;
      const double demand = dom_.motor_strength * (kp * (target[i] - s_.q[i]) - kd * s_.qd[i]);
      const double tau = std::clamp(demand, -tau_max_[i], tau_max_[i]);
      const double friction = cfg_.joint_friction * dom_.friction * inertia;
      const double qdd = (tau - friction * s_.qd[i]) / inertia;
      s_.tau[i] = tau;
      s_.qdd[i] = qdd;
      s_.qd[i] += dt * qdd;
      s_.q[i] += dt * s_.qd[i];
    }
    for (int i : model_->upper) upper += inertia_[i] * dom_.link_mass * s_.qdd[i] * axes_.row(i).transpose();
    for (std::size_t k = 0; k < limits_.lower.size(); ++k) {
      const int i = limits_.lower[k];
      lower += kp_[i] * dom_.pd_gain * (s_.q[i] - default_[i]) * axes_.row(i).transpose();
    }

    const bool stance = s_.contact[0] || s_.contact[1];
    Vec3 alpha;
    for (int a = 0; a < 2; ++a) {
      const double com = a == 0 ? -dom_.com_y : dom_.com_x;
      double acc = (g / h) * (s_.rpy[a] + com / h) - cfg_.tilt_damping * s_.ang_vel[a];
      if (stance)
        acc -= cfg_.support_stiffness * (g / h) * s_.rpy[a] + cfg_.support_damping * s_.ang_vel[a];
      alpha[a] = acc;
    }
    alpha[2] = -(stance ? cfg_.yaw_damping * dom_.friction : cfg_.tilt_damping) * s_.ang_vel[2];
    alpha -= reaction * cfg_.upper_coupling * upper;
    if (stance) alpha -= reaction * cfg_.lower_coupling * lower;
    s_.ang_vel += dt * alpha;
    s_.rpy += dt * s_.ang_vel;
    s_.rpy[2] = wrap_angle(s_.rpy[2]);
    update_gravity();

    const Vec3 v_prev = s_.lin_vel;
    const Vec3 v_target{cfg_.velocity_gain * s_.rpy[1], -cfg_.velocity_gain * s_.rpy[0], 0.0};
    s_.lin_vel.head<2>() += dt * (v_target.head<2>() - s_.lin_vel.head<2>()) / cfg_.velocity_lag;

    s_.time += dt;
    ++s_.substeps;
    const auto& rc = cfg_.randomization;
    if (rc.push && rc.push_interval > 0) {
      const long every = std::lround(rc.push_interval / dt);
      if (every > 0 && s_.substeps % every == 0) {
        const Vec3 dv = push_impulse(rc.push_speed, rng_);
        s_.lin_vel += dv;
        s_.ang_vel[0] -= cfg_.push_tilt_gain * dv.y() / h;
        s_.ang_vel[1] += cfg_.push_tilt_gain * dv.x() / h;
        pushes_.push_back({s_.time, dv});
      }
    }

    const double z = stance_height(s_.q, s_.rpy);
    s_.lin_vel.z() = (z - s_.base.z()) / dt;
    s_.base.head<2>() += dt * s_.lin_vel.head<2>();
    s_.base.z() = z;
    update_feet(dt);

    int n_contact = s_.contact[0] + s_.contact[1];
    const Vec3 acc = (s_.lin_vel - v_prev) / dt;
    for (int f = 0; f < 2; ++f) {
      s_.foot_force[f] = Vec3::Zero();
      if (!s_.contact[f]) continue;
      s_.foot_force[f] = {mass * acc.x() / n_contact, mass * acc.y() / n_contact,
                          mass * g / n_contact + cfg_.impact_damping * std::abs(s_.lin_vel.z())};
    }
  }

  void update_gravity() {
    s_.gravity = s_.base_rotation().transpose() * Vec3(0, 0, -1);
  }

  // Leg-configuration depth of the lowest foot, shortened by the tilt.
  double stance_height(const VecX& q, const Vec3& rpy) const {
    const Points p = feet_in_heading(q, 0.0);
    return std::max(-p(0, 2), -p(1, 2)) * std::cos(rpy[0]) * std::cos(rpy[1]);
  }

  // Foot sites relative to the base with the legs' own configuration and the base yaw.
  Points feet_in_heading(const VecX& q, double yaw) const {
    RootPose root;
    root.orientation = Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
    const auto dofs = std::span<const Dof>(model_->dofs).first(leg_prefix_);
    const DofFrames f = dof_frames(dofs, q.head(leg_prefix_), root);
    Points p(2, 3);
    for (int s = 0; s < 2; ++s) p.row(s) = site_position(model_->sites[feet_[s]], f, root).transpose();
    return p;
  }

  void update_feet(double dt) {
    const Points p = feet_in_heading(s_.q, s_.rpy[2]);
    const double lowest = std::max(-p(0, 2), -p(1, 2));
    const bool in_band = std::abs(s_.base.z() - nominal_height_) <= cfg_.contact_band &&
                         std::max(std::abs(s_.rpy[0]), std::abs(s_.rpy[1])) < cfg_.contact_tilt;
    for (int f = 0; f < 2; ++f) {
      Vec3 world = s_.base + p.row(f).transpose();
      world.z() = lowest + p(f, 2);  // height above the ground
      if (dt > 0) s_.foot_speed[f] = (world - s_.foot_world[f]).head<2>().norm() / dt;
      s_.foot_world[f] = world;
      const bool touching = in_band && world.z() < cfg_.foot_clearance;
      if (touching && !s_.contact[f]) {
        s_.new_contact[f] = true;
        s_.touchdown_air[f] = s_.air_time[f];
      }
      if (touching) s_.air_time[f] = 0;
      else s_.air_time[f] += dt;
      s_.contact[f] = touching;
    }
  }

  void push_history(VecX o) {
    history_.push_front(std::move(o));
    while (static_cast<int>(history_.size()) > cfg_.history + 1) history_.pop_back();
  }

  VecX stacked() const {
    VecX out(obs_dim());
    const int d = frame_dim();
    for (std::size_t h = 0; h < history_.size(); ++h) out.segment(h * d, d) = history_[h];
    return out;
  }

  std::shared_ptr<const RobotModel> model_;
  std::shared_ptr<const ReferenceSet> refs_;
  EnvConfig cfg_;
  RewardWeights weights_;
  RewardLimits limits_;
  VecX default_, inertia_, kp_, kd_, tau_max_;
  Points axes_;
  std::array<int, 2> feet_{};
  int leg_prefix_ = 0;
  double nominal_height_ = 0;

  std::mt19937_64 rng_{0};
  DomainParams dom_;
  SimState s_;
  std::deque<VecX> history_;
  std::vector<PushEvent> pushes_;
  int clip_ = 0, start_frame_ = 0, ref_frame_ = 0, steps_ = 0;
};

inline nlohmann::json to_json(const EnvConfig& c) {
  return {{"dt", c.dt},
          {"decimation", c.decimation},
          {"action_scale", c.action_scale},
          {"history", c.history},
          {"inertia_leg", c.inertia_leg},
          {"inertia_torso", c.inertia_torso},
          {"inertia_arm", c.inertia_arm},
          {"inertia_finger", c.inertia_finger},
          {"joint_friction", c.joint_friction},
          {"nominal_mass", c.nominal_mass},
          {"pendulum_height", c.pendulum_height},
          {"upper_coupling", c.upper_coupling},
          {"lower_coupling", c.lower_coupling},
          {"support_stiffness", c.support_stiffness},
          {"support_damping", c.support_damping},
          {"tilt_damping", c.tilt_damping},
          {"yaw_damping", c.yaw_damping},
          {"velocity_gain", c.velocity_gain},
          {"velocity_lag", c.velocity_lag},
          {"push_tilt_gain", c.push_tilt_gain},
          {"init_tilt", c.init_tilt},
          {"contact_band", c.contact_band},
          {"contact_tilt", c.contact_tilt},
          {"foot_clearance", c.foot_clearance},
          {"impact_damping", c.impact_damping},
          {"fall_threshold", c.fall_threshold},
          {"random_start", c.random_start},
          {"lower_reference_default", c.lower_reference_default},
          {"max_episode_steps", c.max_episode_steps},
          {"randomization", to_json(c.randomization)}};
}

inline EnvConfig env_config_from_json(const nlohmann::json& j) {
  EnvConfig c;
  const std::vector<std::pair<const char*, double*>> reals{
      {"dt", &c.dt},
      {"action_scale", &c.action_scale},
      {"inertia_leg", &c.inertia_leg},
      {"inertia_torso", &c.inertia_torso},
      {"inertia_arm", &c.inertia_arm},
      {"inertia_finger", &c.inertia_finger},
      {"joint_friction", &c.joint_friction},
      {"nominal_mass", &c.nominal_mass},
      {"pendulum_height", &c.pendulum_height},
      {"upper_coupling", &c.upper_coupling},
      {"lower_coupling", &c.lower_coupling},
      {"support_stiffness", &c.support_stiffness},
      {"support_damping", &c.support_damping},
      {"tilt_damping", &c.tilt_damping},
      {"yaw_damping", &c.yaw_damping},
      {"velocity_gain", &c.velocity_gain},
      {"velocity_lag", &c.velocity_lag},
      {"push_tilt_gain", &c.push_tilt_gain},
      {"init_tilt", &c.init_tilt},
      {"contact_band", &c.contact_band},
      {"contact_tilt", &c.contact_tilt},
      {"foot_clearance", &c.foot_clearance},
      {"impact_damping", &c.impact_damping},
      {"fall_threshold", &c.fall_threshold}};
  for (const auto& [k, v] : j.items()) {
    bool done = false;
    for (const auto& [name, ptr] : reals)
      if (k == name) *ptr = v.get<double>(), done = true;
    if (done) continue;
    if (k == "decimation") c.decimation = v.get<int>();
    else if (k == "history") c.history = v.get<int>();
    else if (k == "random_start") c.random_start = v.get<bool>();
    else if (k == "lower_reference_default") c.lower_reference_default = v.get<bool>();
    else if (k == "max_episode_steps") c.max_episode_steps = v.get<int>();
    else if (k == "randomization") c.randomization = randomization_from_json(v);
    else throw std::invalid_argument("env: unknown key " + k);
  }
  c.validate();
  return c;
}

}  // namespace signkit::sim
