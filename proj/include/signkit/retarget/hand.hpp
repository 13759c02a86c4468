#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signkit/core/kinematics.hpp"

namespace signkit::retarget {

// Human hand keypoints follow the common 21-point layout: 0 wrist, then four
// points per finger (thumb 1-4, index 5-8, middle 9-12, ring 13-16, pinky
// 17-20), expressed in a wrist frame matching the robot hand's zero pose.
inline constexpr int kHumanHandKeypoints = 21;

struct HandKeypointSpec {
  std::vector<std::array<int, 2>> human_pairs{{0, 4}, {0, 8}, {0, 12}, {0, 16}, {0, 20}};
  // Robot site names without the side prefix; "wrist" is the hand root.
  std::vector<std::array<std::string, 2>> robot_pairs{{"wrist", "thumb_tip"},
                                                      {"wrist", "index_tip"},
                                                      {"wrist", "middle_tip"},
                                                      {"wrist", "ring_tip"},
                                                      {"wrist", "pinky_tip"}};
  // DoF names without the side prefix, held at the given value.
  std::map<std::string, double> frozen{{"thumb_ip", 0.0},
                                       {"index_dip", 0.0},
                                       {"middle_dip", 0.0},
                                       {"ring_dip", 0.0},
                                       {"pinky_dip", 0.0}};
  double alpha = 1.1;
  double lambda = 0.05;

  void validate() const {
    if (!(alpha > 0)) throw std::invalid_argument("hand spec: alpha must be > 0");
    if (!(lambda >= 0)) throw std::invalid_argument("hand spec: lambda must be >= 0");
    if (human_pairs.size() != robot_pairs.size() || human_pairs.empty())
      throw std::invalid_argument("hand spec: human and robot vector lists differ in length");
    for (const auto& p : human_pairs)
      for (int i : p)
        if (i < 0 || i >= kHumanHandKeypoints)
          throw std::invalid_argument("hand spec: human keypoint index out of range");
  }
};

struct HandSolverConfig {
  int max_iters = 100;
  double tol = 1e-8;
  double fd_step = 1e-5;
};

// One hand as a standalone chain rooted at the wrist frame.
struct HandModel {
  std::vector<Dof> dofs;  // 15, parents re-indexed, root DoFs hang off the wrist
  std::vector<std::string> names;  // without side prefix
  std::vector<std::array<Site, 2>> vectors;  // (origin, tip) per spec pair
  std::vector<int> free;  // optimized DoF indices
  VecX fixed_values;      // value for every DoF; only frozen entries are used
  std::vector<bool> frozen;

  int size() const { return static_cast<int>(dofs.size()); }
  VecX lower() const {
    VecX v(size());
    for (int i = 0; i < size(); ++i) v[i] = dofs[i].q_min;
    return v;
  }
  VecX upper() const {
    VecX v(size());
    for (int i = 0; i < size(); ++i) v[i] = dofs[i].q_max;
    return v;
  }
};

inline HandModel make_hand_model(const RobotModel& robot, const std::string& side,
                                 const HandKeypointSpec& spec) {
  spec.validate();
  const std::string prefix = side + "_";
  HandModel h;
  std::vector<int> robot_index;
  for (std::size_t i = 0; i < robot.dofs.size(); ++i) {
    const Dof& d = robot.dofs[i];
    if (d.group != DofGroup::Finger || d.name.rfind(prefix, 0) != 0) continue;
    robot_index.push_back(static_cast<int>(i));
  }
  if (robot_index.empty()) throw std::invalid_argument("robot has no " + side + " hand");
  auto local = [&](int robot_dof) -> int {
    const auto it = std::find(robot_index.begin(), robot_index.end(), robot_dof);
    return it == robot_index.end() ? -1 : static_cast<int>(it - robot_index.begin());
  };
  for (int ri : robot_index) {
    Dof d = robot.dofs[ri];
    d.parent = local(d.parent);
    h.names.push_back(d.name.substr(prefix.size()));
    h.dofs.push_back(std::move(d));
  }
  auto site_for = [&](const std::string& name) -> Site {
    if (name == "wrist") return {"wrist", -1, Vec3::Zero()};
    const int s = robot.site_index(prefix + name);
    if (s < 0) throw std::invalid_argument("hand spec: unknown robot site " + prefix + name);
    Site site = robot.sites[s];
    site.dof = local(site.dof);
    if (site.dof < 0) throw std::invalid_argument("hand spec: site " + site.name + " is not on the hand");
    return site;
  };
  for (const auto& p : spec.robot_pairs) h.vectors.push_back({site_for(p[0]), site_for(p[1])});
  h.fixed_values = VecX::Zero(h.size());
  h.frozen.assign(h.size(), false);
  for (const auto& [name, value] : spec.frozen) {
    const auto it = std::find(h.names.begin(), h.names.end(), name);
    if (it == h.names.end()) throw std::invalid_argument("hand spec: unknown frozen dof " + name);
    const int i = static_cast<int>(it - h.names.begin());
    if (value < h.dofs[i].q_min || value > h.dofs[i].q_max)
      throw std::invalid_argument("hand spec: frozen value for " + name + " is outside limits");
    h.frozen[i] = true;
    h.fixed_values[i] = value;
  }
  for (int i = 0; i < h.size(); ++i)
    if (!h.frozen[i]) h.free.push_back(i);
  return h;
}

// Robot keypoint vectors in the wrist frame, one row per spec pair.
inline Points robot_hand_vectors(const HandModel& h, const VecX& q) {
  const DofFrames f = dof_frames(h.dofs, q);
  Points v(static_cast<Eigen::Index>(h.vectors.size()), 3);
  for (std::size_t i = 0; i < h.vectors.size(); ++i)
    v.row(i) = (site_position(h.vectors[i][1], f) - site_position(h.vectors[i][0], f)).transpose();
  return v;
}

inline Points human_hand_vectors(const Points& keypoints, const HandKeypointSpec& spec) {
  if (keypoints.rows() != kHumanHandKeypoints)
    throw std::invalid_argument("human hand: expected 21 keypoints, got " +
                                std::to_string(keypoints.rows()));
  if (!keypoints.allFinite()) throw std::invalid_argument("human hand: non-finite keypoints");
  Points v(static_cast<Eigen::Index>(spec.human_pairs.size()), 3);
  for (std::size_t i = 0; i < spec.human_pairs.size(); ++i)
    v.row(i) = keypoints.row(spec.human_pairs[i][1]) - keypoints.row(spec.human_pairs[i][0]);
  return v;
}

inline double hand_data_term(const HandModel& h, const VecX& q, const Points& human, double alpha) {
  return (alpha * human - robot_hand_vectors(h, q)).squaredNorm();
}

inline double hand_objective(const HandModel& h, const VecX& q, const VecX& q_prev,
                             const Points& human, const HandKeypointSpec& spec) {
  if (q.size() != h.size() || q_prev.size() != h.size())
    throw std::invalid_argument("hand objective: expected " + std::to_string(h.size()) +
                                " dofs");
  if (human.rows() != static_cast<Eigen::Index>(h.vectors.size()))
    throw std::invalid_argument("hand objective: expected " + std::to_string(h.vectors.size()) +
                                " human vectors");
  return hand_data_term(h, q, human, spec.alpha) + spec.lambda * (q - q_prev).squaredNorm();
}

struct HandSolveReport {
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> history;  // objective of every accepted iterate, starting point first
  std::vector<int> at_limit;    // free DoFs that ended on a bound
  double max_vector_error = 0.0;  // max_i ||alpha V_i - v_i||, m
};

namespace detail {

inline VecX with_frozen(const HandModel& h, VecX q) {
  for (int i = 0; i < h.size(); ++i)
    if (h.frozen[i]) q[i] = h.fixed_values[i];
  return q;
}

}  // namespace detail

// Projected damped Gauss-Newton on the free DoFs with a projected-gradient
// fallback; every accepted step strictly lowers the objective.
inline VecX solve_hand_frame(const HandModel& h, const VecX& q_prev, const Points& human,
                             const HandKeypointSpec& spec, const HandSolverConfig& cfg = {},
                             HandSolveReport* report = nullptr) {
  if (!human.allFinite()) throw std::invalid_argument("hand solve: non-finite input vectors");
  if (!q_prev.allFinite()) throw std::invalid_argument("hand solve: non-finite warm start");
  const VecX lo = h.lower(), hi = h.upper();
  const VecX prev = detail::with_frozen(h, q_prev.cwiseMax(lo).cwiseMin(hi));
  const int nf = static_cast<int>(h.free.size());
  const int nv = static_cast<int>(h.vectors.size()) * 3;
  const double sl = std::sqrt(spec.lambda);

  auto residual = [&](const VecX& q) {
    VecX r(nv + nf);
    const Points d = spec.alpha * human - robot_hand_vectors(h, q);
    for (int i = 0; i < nv; ++i) r[i] = d(i / 3, i % 3);
    for (int k = 0; k < nf; ++k) r[nv + k] = sl * (q[h.free[k]] - prev[h.free[k]]);
    return r;
  };
  auto objective = [&](const VecX& q) { return hand_objective(h, q, prev, human, spec); };

  VecX q = prev;
  double f = objective(q);
  HandSolveReport rep;
  rep.history.push_back(f);
  double mu = 1e-3;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const VecX r = residual(q);
    MatX J(nv + nf, nf);
    for (int k = 0; k < nf; ++k) {
      const int i = h.free[k];
      VecX qp = q, qm = q;
      qp[i] += cfg.fd_step;
      qm[i] -= cfg.fd_step;
      J.col(k) = (residual(qp) - residual(qm)) / (2 * cfg.fd_step);
    }
    const VecX g = J.transpose() * r;

    // Bounds that the gradient pushes against stay fixed for this step.
    std::vector<int> act;
    for (int k = 0; k < nf; ++k) {
      const int i = h.free[k];
      const bool blocked = (q[i] <= lo[i] && g[k] > 0) || (q[i] >= hi[i] && g[k] < 0);
      if (!blocked) act.push_back(k);
    }
    if (act.empty()) break;

    auto try_direction = [&](const VecX& step) -> bool {
      double t = 1.0;
      for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
        VecX cand = q;
        for (int k = 0; k < nf; ++k) cand[h.free[k]] += t * step[k];
        cand = cand.cwiseMax(lo).cwiseMin(hi);
        const double fc = objective(cand);
        if (fc < f) {
          const double decrease = f - fc;
          q = cand;
          f = fc;
          rep.history.push_back(f);
          return decrease >= cfg.tol;
        }
      }
      return false;
    };

    const int na = static_cast<int>(act.size());
    MatX Ja(nv + nf, na);
    VecX ga(na);
    for (int a = 0; a < na; ++a) {
      Ja.col(a) = J.col(act[a]);
      ga[a] = g[act[a]];
    }
    MatX H = Ja.transpose() * Ja;
    H.diagonal().array() += mu * (1.0 + H.diagonal().array());
    const VecX da = H.ldlt().solve(-ga);
    VecX step = VecX::Zero(nf);
    for (int a = 0; a < na; ++a) step[act[a]] = da[a];

    const double before = f;
    bool progressed = step.allFinite() && try_direction(step);
    if (f < before) {
      mu = std::max(mu * 0.3, 1e-9);
    } else {
      mu = std::min(mu * 10.0, 1e6);
      VecX pg = VecX::Zero(nf);
      for (int a = 0; a < na; ++a) pg[act[a]] = -ga[a];
      const double scale = pg.norm() > 0 ? 0.5 / pg.norm() : 0.0;
      progressed = try_direction(pg * scale);
    }
    if (!progressed) {
      ++it;
      break;
    }
  }

  rep.objective = f;
  rep.iterations = it;
  for (int i : h.free)
    if (q[i] <= lo[i] + 1e-9 || q[i] >= hi[i] - 1e-9) rep.at_limit.push_back(i);
  const Points d = spec.alpha * human - robot_hand_vectors(h, q);
  rep.max_vector_error = d.rowwise().norm().maxCoeff();
  if (report) *report = std::move(rep);
  return q;
}

struct HandClipResult {
  MatX q;  // frames x 15
  std::vector<HandSolveReport> reports;
};

// Sequential solve with warm starts. The first frame starts from the zero
// pose without the temporal term, since there is no previous frame to pull
// towards.
inline HandClipResult retarget_hand_clip(const HandModel& h, const std::vector<Points>& keypoints,
                                         const HandKeypointSpec& spec,
                                         const HandSolverConfig& cfg = {}) {
  if (keypoints.empty()) throw std::invalid_argument("hand clip: need at least 1 frame");
  HandClipResult out;
  out.q.resize(static_cast<Eigen::Index>(keypoints.size()), h.size());
  VecX prev = detail::with_frozen(h, VecX::Zero(h.size()).cwiseMax(h.lower()).cwiseMin(h.upper()));
  for (std::size_t k = 0; k < keypoints.size(); ++k) {
    HandKeypointSpec s = spec;
    if (k == 0) s.lambda = 0.0;
    HandSolveReport rep;
    prev = solve_hand_frame(h, prev, human_hand_vectors(keypoints[k], spec), s, cfg, &rep);
    out.q.row(k) = prev.transpose();
    out.reports.push_back(std::move(rep));
  }
  return out;
}

// 21 human-layout keypoints traced on the robot hand at q, scaled by 1/alpha.
// Used to synthesize hand data with a known answer.
inline Points hand_keypoints_from_robot(const RobotModel& robot, const std::string& side,
                                        const VecX& q_hand, double alpha = 1.0) {
  const HandKeypointSpec spec;
  const HandModel h = make_hand_model(robot, side, spec);
  const DofFrames f = dof_frames(h.dofs, q_hand);
  Points kp = Points::Zero(kHumanHandKeypoints, 3);
  static const std::array<const char*, 5> fingers{"thumb", "index", "middle", "ring", "pinky"};
  static const std::array<std::array<const char*, 3>, 2> joints{
      {{"rotation", "mcp", "ip"}, {"mcp", "pip", "dip"}}};
  for (int fi = 0; fi < 5; ++fi) {
    const auto& names = joints[fi == 0 ? 0 : 1];
    for (int j = 0; j < 3; ++j) {
      const std::string n = std::string(fingers[fi]) + "_" + names[j];
      const int i = static_cast<int>(std::find(h.names.begin(), h.names.end(), n) - h.names.begin());
      kp.row(1 + 4 * fi + j) = f.origin.row(i);
    }
    const int s = robot.site_index(side + "_" + fingers[fi] + "_tip");
    Site tip = robot.sites[s];
    tip.dof = static_cast<int>(
        std::find(h.names.begin(), h.names.end(), robot.dofs[tip.dof].name.substr(side.size() + 1)) -
        h.names.begin());
    kp.row(4 + 4 * fi) = site_position(tip, f).transpose();
  }
  return kp / alpha;
}

// ---- hand spec I/O ----

inline nlohmann::json to_json(const HandKeypointSpec& s) {
  nlohmann::json hp = nlohmann::json::array(), rp = nlohmann::json::array();
  for (const auto& p : s.human_pairs) hp.push_back({p[0], p[1]});
  for (const auto& p : s.robot_pairs) rp.push_back({p[0], p[1]});
  return {{"human_pairs", hp}, {"robot_pairs", rp}, {"frozen", s.frozen},
          {"alpha", s.alpha},  {"lambda", s.lambda}};
}

inline HandKeypointSpec hand_spec_from_json(const nlohmann::json& j) {
  HandKeypointSpec s;
  for (const auto& [key, _] : j.items())
    if (key != "human_pairs" && key != "robot_pairs" && key != "frozen" && key != "alpha" &&
        key != "lambda")
      throw std::invalid_argument("hand spec: unknown key " + key);
  if (j.contains("human_pairs")) {
    s.human_pairs.clear();
    for (const auto& p : j["human_pairs"]) s.human_pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
  }
  if (j.contains("robot_pairs")) {
    s.robot_pairs.clear();
    for (const auto& p : j["robot_pairs"])
      s.robot_pairs.push_back({p.at(0).get<std::string>(), p.at(1).get<std::string>()});
  }
  if (j.contains("frozen")) s.frozen = j["frozen"].get<std::map<std::string, double>>();
  s.alpha = j.value("alpha", s.alpha);
  s.lambda = j.value("lambda", s.lambda);
  s.validate();
  return s;
}

}  // namespace signkit::retarget
