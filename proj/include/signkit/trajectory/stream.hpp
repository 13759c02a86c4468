#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "signkit/trajectory/jerk.hpp"

namespace signkit::traj {

// Replans every axis towards each new waypoint from the current
// (p, v, a) and samples the plan at the control period.
class StreamingInterpolator {
 public:
  StreamingInterpolator(std::vector<KinematicLimits> limits, double dt, bool synchronized = true)
      : limits_(std::move(limits)), dt_(dt), sync_(synchronized) {
    if (limits_.empty()) throw std::invalid_argument("streaming: need at least one axis");
    if (!(dt_ > 0)) throw std::invalid_argument("streaming: control period must be > 0");
    for (const auto& l : limits_) l.validate();
    state_.assign(limits_.size(), State{});
  }

  std::size_t axes() const { return limits_.size(); }
  const std::vector<State>& state() const { return state_; }
  bool settled() const { return t_ >= duration_ - 1e-12; }
  std::size_t sync_failures() const { return sync_failures_; }

  void reset(const VecX& q) {
    check(q);
    for (std::size_t i = 0; i < state_.size(); ++i) state_[i] = {q[i], 0, 0};
    plans_.clear();
    t_ = duration_ = 0;
  }

  void set_target(const VecX& q) {
    check(q);
    std::vector<JerkProfile> p;
    p.reserve(state_.size());
    for (std::size_t i = 0; i < state_.size(); ++i) p.push_back(plan_axis(state_[i], q[i], limits_[i]));
    if (sync_) {
      try {
        p = synchronize(p, limits_);
      } catch (const std::exception&) {
        ++sync_failures_;
      }
    }
    plans_ = std::move(p);
    duration_ = 0;
    for (const auto& pl : plans_) duration_ = std::max(duration_, pl.duration());
    t_ = 0;
  }

  // Advances one control period and returns the commanded positions.
  VecX step() {
    t_ += dt_;
    VecX q(static_cast<Eigen::Index>(state_.size()));
    for (std::size_t i = 0; i < state_.size(); ++i) {
      if (!plans_.empty()) {
        const JerkProfile& pl = plans_[i];
        state_[i] = t_ >= pl.duration() ? State{pl.end().p, 0, 0} : pl.sample(t_);
      }
      q[i] = state_[i].p;
    }
    return q;
  }

 private:
  void check(const VecX& q) const {
    if (static_cast<std::size_t>(q.size()) != state_.size())
      throw std::invalid_argument("streaming: expected " + std::to_string(state_.size()) +
                                  " axes, got " + std::to_string(q.size()));
    if (!q.allFinite()) throw std::invalid_argument("streaming: non-finite target");
  }

  std::vector<KinematicLimits> limits_;
  double dt_;
  bool sync_;
  std::vector<State> state_;
  std::vector<JerkProfile> plans_;
  double t_ = 0, duration_ = 0;
  std::size_t sync_failures_ = 0;
};

struct DenseCommands {
  std::vector<double> time;
  std::vector<VecX> q;
  std::size_t sync_failures = 0;
};

// Dense commands at `rate` Hz through waypoints given at `fps`, starting at
// rest on the first waypoint and running until the last one is reached.
inline DenseCommands interpolate_waypoints(const std::vector<VecX>& waypoints, double fps,
                                           const std::vector<KinematicLimits>& limits,
                                           double rate = 500.0, bool synchronized = true) {
  if (waypoints.empty()) throw std::invalid_argument("interpolate: no waypoints");
  if (!(fps > 0) || !(rate > 0)) throw std::invalid_argument("interpolate: rates must be > 0");
  StreamingInterpolator s(limits, 1.0 / rate, synchronized);
  s.reset(waypoints.front());
  DenseCommands out;
  out.time.push_back(0);
  out.q.push_back(waypoints.front());
  const int per = std::max(1, static_cast<int>(std::lround(rate / fps)));
  std::size_t n = 0;
  for (std::size_t k = 1; k < waypoints.size(); ++k) {
    s.set_target(waypoints[k]);
    for (int i = 0; i < per; ++i) {
      out.q.push_back(s.step());
      out.time.push_back(static_cast<double>(++n) / rate);
    }
  }
  // settle on the final waypoint (bounded so a bad plan cannot spin forever)
  for (int guard = 0; !s.settled() && guard < 100 * static_cast<int>(rate); ++guard) {
    out.q.push_back(s.step());
    out.time.push_back(static_cast<double>(++n) / rate);
  }
  out.sync_failures = s.sync_failures();
  return out;
}

}  // namespace signkit::traj
