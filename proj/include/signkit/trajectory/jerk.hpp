#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "signkit/core/rotation.hpp"

namespace signkit::traj {

struct KinematicLimits {
  double v_max = 3.0;   // rad/s
  double a_max = 20.0;  // rad/s^2
  double j_max = 200.0; // rad/s^3

  void validate() const {
    if (!(v_max > 0 && a_max > 0 && j_max > 0))
      throw std::invalid_argument("kinematic limits must be strictly positive");
  }
};

struct State {
  double p = 0, v = 0, a = 0;
};

struct Segment {
  double duration = 0;
  double jerk = 0;
};

// Constant-jerk integration over time t.
inline State integrate(const State& s, double jerk, double t) {
  return {s.p + t * (s.v + t * (s.a / 2 + t * jerk / 6)), s.v + t * (s.a + t * jerk / 2),
          s.a + t * jerk};
}

struct JerkProfile {
  State start;
  double target = 0;
  std::vector<Segment> segments;
  std::vector<State> knots;  // state at the start of each segment, plus the end state

  double duration() const {
    double t = 0;
    for (const auto& s : segments) t += s.duration;
    return t;
  }
  State end() const { return knots.empty() ? start : knots.back(); }

  void finalize() {
    knots.clear();
    knots.push_back(start);
    for (const auto& s : segments) knots.push_back(integrate(knots.back(), s.jerk, s.duration));
  }

  State sample(double t) const {
    const double T = duration();
    if (t < 0 || t > T + 1e-12)
      throw std::out_of_range("sample time " + std::to_string(t) + " outside [0, " +
                              std::to_string(T) + "]");
    double t0 = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const double d = segments[i].duration;
      if (t <= t0 + d || i + 1 == segments.size())
        return integrate(knots[i], segments[i].jerk, std::clamp(t - t0, 0.0, d));
      t0 += d;
    }
    return start;
  }
};

namespace detail {

// Shortest jerk-limited change from (v0, a0) to (v1, 0) without the velocity
// limit: ramp the acceleration towards +/-a_peak, optionally hold it, ramp to 0.
inline void velocity_change(double v0, double a0, double v1, double A, double J,
                            std::vector<Segment>& out) {
  const double v_end = v0 + a0 * std::abs(a0) / (2 * J);
  const double gap = v1 - v_end;
  if (std::abs(gap) <= 1e-15 * std::max(1.0, std::abs(v1))) {
    if (a0 != 0) out.push_back({std::abs(a0) / J, a0 > 0 ? -J : J});
    return;
  }
  const double s = gap > 0 ? 1.0 : -1.0;
  const double as = s * a0;
  const double dv = s * (v1 - v0);
  double ap = std::sqrt(std::max(0.0, (2 * J * dv + as * as) / 2));
  double hold = 0;
  if (ap > A) {
    ap = A;
    hold = (dv - (2 * A * A - as * as) / (2 * J)) / A;
    hold = std::max(hold, 0.0);
  }
  const double up = std::max((ap - as) / J, 0.0);
  if (up > 0) out.push_back({up, s * J});
  if (hold > 0) out.push_back({hold, 0});
  if (ap > 0) out.push_back({ap / J, -s * J});
}

struct Shape {
  std::vector<Segment> accel, decel;
  double disp = 0;  // displacement of accel + decel phases
  double time = 0;
};

inline Shape shape(const State& s0, double vc, double A, double J) {
  Shape sh;
  velocity_change(s0.v, s0.a, vc, A, J, sh.accel);
  velocity_change(vc, 0, 0, A, J, sh.decel);
  State s = s0;
  for (const auto& seg : sh.accel) {
    s = integrate(s, seg.jerk, seg.duration);
    sh.time += seg.duration;
  }
  s.v = vc;  // remove roundoff before the cruise
  s.a = 0;
  for (const auto& seg : sh.decel) {
    s = integrate(s, seg.jerk, seg.duration);
    sh.time += seg.duration;
  }
  sh.disp = s.p - s0.p;
  return sh;
}

inline JerkProfile assemble(const State& s0, double target, const Shape& sh, double cruise) {
  JerkProfile p;
  p.start = s0;
  p.target = target;
  p.segments = sh.accel;
  if (cruise > 1e-12) p.segments.push_back({cruise, 0});
  p.segments.insert(p.segments.end(), sh.decel.begin(), sh.decel.end());
  p.finalize();
  return p;
}

}  // namespace detail

inline bool initial_state_feasible(const State& s, const KinematicLimits& lim) {
  const double v_end = s.v + s.a * std::abs(s.a) / (2 * lim.j_max);
  const double eps = 1e-9;
  return std::abs(s.v) <= lim.v_max + eps && std::abs(s.a) <= lim.a_max + eps &&
         std::abs(v_end) <= lim.v_max + eps;
}

// Minimum-time profile from s0 to rest at `target` within the family
// accelerate-to-vc, cruise, stop. Candidates are the cruise-free roots of
// displacement(vc) = distance and cruising at +/-v_max.
inline JerkProfile plan_axis(const State& s0, double target, const KinematicLimits& lim) {
  lim.validate();
  if (!std::isfinite(s0.p) || !std::isfinite(s0.v) || !std::isfinite(s0.a) ||
      !std::isfinite(target))
    throw std::invalid_argument("plan_axis: non-finite state or target");
  if (!initial_state_feasible(s0, lim))
    throw std::invalid_argument("plan_axis: infeasible initial state (v0 = " +
                                std::to_string(s0.v) + ", a0 = " + std::to_string(s0.a) + ")");
  const double A = lim.a_max, J = lim.j_max;
  const double d = target - s0.p;
  if (d == 0 && s0.v == 0 && s0.a == 0) {
    JerkProfile p;
    p.start = s0;
    p.target = target;
    p.finalize();
    return p;
  }
  auto gap = [&](double vc) { return d - detail::shape(s0, vc, A, J).disp; };

  const double v_end = s0.v + s0.a * std::abs(s0.a) / (2 * J);
  double V = std::max({std::abs(s0.v), std::abs(v_end), std::cbrt(J * d * d),
                       std::sqrt(A * std::abs(d)), 1e-12});
  V = std::min(V, lim.v_max);
  while (V < lim.v_max && !(gap(V) < 0 && gap(-V) > 0)) V = std::min(2 * V, lim.v_max);

  std::vector<double> grid;
  const int n = 256;
  for (int i = 0; i <= n; ++i) grid.push_back(-V + 2 * V * i / n);
  const double lo = std::min({0.0, s0.v, v_end}), hi = std::max({0.0, s0.v, v_end});
  for (int i = 0; i <= 64 && hi > lo; ++i) grid.push_back(lo + (hi - lo) * i / 64);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  struct Candidate {
    double vc, cruise, time;
  };
  std::optional<Candidate> best;
  auto consider = [&](double vc, double cruise) {
    const double t = detail::shape(s0, vc, A, J).time + cruise;
    if (!best || t < best->time) best = Candidate{vc, cruise, t};
  };

  std::vector<double> g(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) g[i] = gap(grid[i]);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (g[i] == 0) consider(grid[i], 0);
    if (i + 1 < grid.size() && (g[i] < 0) != (g[i + 1] < 0) && g[i] != 0 && g[i + 1] != 0) {
      double a = grid[i], b = grid[i + 1], ga = g[i];
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        const double gm = gap(m);
        if ((gm < 0) == (ga < 0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
      // keep the root on the side whose leftover distance can be cruised
      const double ra = gap(a), rb = gap(b);
      const double vc = (ra * a >= 0 && a != 0) ? a : b;
      const double rest = vc == a ? ra : rb;
      consider(vc, vc != 0 ? std::max(rest / vc, 0.0) : 0.0);
    }
  }
  for (double vc : {lim.v_max, -lim.v_max}) {
    if (std::abs(vc) > V + 1e-12) continue;
    const double r = gap(vc);
    if (r * vc >= 0) consider(vc, r / vc);
  }
  if (!best) throw std::runtime_error("plan_axis: no feasible profile found");
  return detail::assemble(s0, target, detail::shape(s0, best->vc, A, J), best->cruise);
}

// Pads a profile with a zero-jerk hold so it lasts exactly T.
inline JerkProfile pad_to(JerkProfile p, double T) {
  const double extra = T - p.duration();
  if (extra < -1e-9)
    throw std::invalid_argument("cannot shorten a profile from " + std::to_string(p.duration()) +
                                " s to " + std::to_string(T) + " s");
  if (extra > 0) {
    p.segments.push_back({extra, 0});
    p.finalize();
  }
  return p;
}

// Stretches each faster axis to T by lowering its velocity limit (bisection),
// then pads with a hold. All axes end up with duration exactly T.
inline std::vector<JerkProfile> synchronize(const std::vector<JerkProfile>& profiles,
                                            const std::vector<KinematicLimits>& limits,
                                            std::optional<double> T_in = std::nullopt) {
  if (profiles.empty()) throw std::invalid_argument("synchronize: need at least 1 profile");
  if (limits.size() != profiles.size())
    throw std::invalid_argument("synchronize: one limit set per profile required");
  double T = 0;
  for (const auto& p : profiles) T = std::max(T, p.duration());
  if (T_in) {
    if (*T_in < T - 1e-9)
      throw std::invalid_argument("synchronize: requested duration shorter than slowest axis");
    T = std::max(T, *T_in);
  }
  std::vector<JerkProfile> out;
  out.reserve(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const JerkProfile& p = profiles[i];
    const double moving = std::abs(p.target - p.start.p) + std::abs(p.start.v) + std::abs(p.start.a);
    if (T <= 0 && moving > 0)
      throw std::invalid_argument("synchronize: axis cannot be stretched to T = 0");
    if (p.duration() >= T - 1e-6 || moving == 0) {
      out.push_back(pad_to(p, T));
      continue;
    }
    const State& s = p.start;
    KinematicLimits lim = limits[i];
    const double v_end = s.v + s.a * std::abs(s.a) / (2 * lim.j_max);
    double lo = std::max({std::abs(s.v), std::abs(v_end), 1e-9});
    double hi = lim.v_max;
    lim.v_max = lo;
    JerkProfile slow = plan_axis(s, p.target, lim);
    if (slow.duration() <= T) {
      out.push_back(pad_to(slow, T));
      continue;
    }
    JerkProfile fit = p;
    for (int it = 0; it < 60 && hi - lo > 1e-12 * hi; ++it) {
      lim.v_max = 0.5 * (lo + hi);
      JerkProfile c = plan_axis(s, p.target, lim);
      if (c.duration() > T) {
        lo = lim.v_max;
      } else {
        hi = lim.v_max;
        fit = std::move(c);
        if (T - fit.duration() < 1e-6) break;
      }
    }
    out.push_back(pad_to(fit, T));
  }
  return out;
}

// Keeps targets a margin (fraction of range) inside the joint limits.
inline VecX clamp_safety(VecX q, const VecX& q_min, const VecX& q_max, double margin = 0.02,
                         std::size_t* clamped = nullptr) {
  if (q.size() != q_min.size() || q.size() != q_max.size())
    throw std::invalid_argument("clamp_safety: dimension mismatch");
  if (!(margin >= 0 && margin < 0.5))
    throw std::invalid_argument("safety margin must be in [0, 0.5)");
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double m = margin * (q_max[i] - q_min[i]);
    const double c = std::clamp(q[i], q_min[i] + m, q_max[i] - m);
    if (c != q[i]) ++n;
    q[i] = c;
  }
  if (clamped) *clamped += n;
  return q;
}

}  // namespace signkit::traj
