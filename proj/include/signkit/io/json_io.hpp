#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "signkit/core/motion.hpp"
#include "signkit/core/robot_model.hpp"

namespace signkit::io {

using nlohmann::json;

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

// Writes to a sibling temp file and renames it into place.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json_file(const std::filesystem::path& path, const json& j, int indent = 1) {
  write_text_atomic(path, j.dump(indent) + "\n");
}

inline json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument(what + ": expected [x,y,z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json to_json(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

inline Quat quat_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument(what + ": expected [w,x,y,z]");
  return Quat(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
}

inline json to_json(const VecX& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline VecX vecx_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + ": expected an array");
  VecX v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

inline json to_json(const Points& p) {
  json a = json::array();
  for (Eigen::Index r = 0; r < p.rows(); ++r) a.push_back({p(r, 0), p(r, 1), p(r, 2)});
  return a;
}

inline Points points_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + ": expected an array of [x,y,z]");
  Points p(static_cast<Eigen::Index>(j.size()), 3);
  for (std::size_t r = 0; r < j.size(); ++r)
    p.row(static_cast<Eigen::Index>(r)) =
        vec3_from_json(j[r], what + "[" + std::to_string(r) + "]").transpose();
  return p;
}

inline const json& field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(where + ": missing field \"" + key + "\"");
  return *it;
}

// ---- robot model ----

inline json to_json(const RobotModel& m) {
  json dofs = json::array();
  for (const Dof& d : m.dofs) {
    dofs.push_back({{"name", d.name},
                    {"joint", d.joint},
                    {"parent", d.parent < 0 ? json(nullptr) : json(m.dofs[d.parent].name)},
                    {"offset", to_json(d.offset)},
                    {"axis", to_json(d.axis)},
                    {"limits", {d.q_min, d.q_max}},
                    {"stiffness", d.stiffness},
                    {"damping", d.damping},
                    {"torque_limit", d.torque_limit},
                    {"group", std::string(to_string(d.group))},
                    {"default", d.default_position}});
  }
  json sites = json::array();
  for (const Site& s : m.sites)
    sites.push_back({{"name", s.name},
                     {"dof", s.dof < 0 ? json(nullptr) : json(m.dofs[s.dof].name)},
                     {"offset", to_json(s.offset)}});
  json kp = json::array(), lower = json::array(), upper = json::array();
  for (int k : m.keypoints) kp.push_back(m.sites[k].name);
  for (int i : m.lower) lower.push_back(m.dofs[i].name);
  for (int i : m.upper) upper.push_back(m.dofs[i].name);
  return {{"name", m.name}, {"dofs", dofs},   {"sites", sites},
          {"keypoints", kp}, {"lower", lower}, {"upper", upper}};
}

inline RobotModel robot_model_from_json(const json& j) {
  RobotModel m;
  m.name = j.value("name", "");
  auto lookup_dof = [&](const json& v, const std::string& where) -> int {
    if (v.is_null()) return -1;
    const int i = m.dof_index(v.get<std::string>());
    if (i < 0) throw std::invalid_argument(where + ": unknown dof " + v.get<std::string>());
    return i;
  };
  for (const json& d : field(j, "dofs", "robot model")) {
    Dof dof;
    const std::string where = "dof " + d.value("name", "?");
    dof.name = field(d, "name", where).get<std::string>();
    dof.joint = d.value("joint", dof.name);
    dof.parent = lookup_dof(d.value("parent", json(nullptr)), where);
    dof.offset = vec3_from_json(field(d, "offset", where), where + ".offset");
    dof.axis = vec3_from_json(field(d, "axis", where), where + ".axis");
    const json& lim = field(d, "limits", where);
    dof.q_min = lim.at(0).get<double>();
    dof.q_max = lim.at(1).get<double>();
    dof.stiffness = field(d, "stiffness", where).get<double>();
    dof.damping = field(d, "damping", where).get<double>();
    dof.torque_limit = field(d, "torque_limit", where).get<double>();
    dof.group = dof_group_from_string(field(d, "group", where).get<std::string>());
    dof.default_position = d.value("default", 0.0);
    m.dofs.push_back(std::move(dof));
  }
  for (const json& s : j.value("sites", json::array())) {
    const std::string where = "site " + s.value("name", "?");
    m.sites.push_back({field(s, "name", where).get<std::string>(),
                       lookup_dof(s.value("dof", json(nullptr)), where),
                       vec3_from_json(field(s, "offset", where), where + ".offset")});
  }
  for (const json& k : j.value("keypoints", json::array())) {
    const int i = m.site_index(k.get<std::string>());
    if (i < 0) throw std::invalid_argument("keypoint: unknown site " + k.get<std::string>());
    m.keypoints.push_back(i);
  }
  for (const char* part : {"lower", "upper"}) {
    auto& dst = std::string(part) == "lower" ? m.lower : m.upper;
    for (const json& n : field(j, part, "robot model")) dst.push_back(lookup_dof(n, part));
  }
  m.validate();
  return m;
}

inline RobotModel load_robot_model(const std::filesystem::path& p) {
  return robot_model_from_json(read_json_file(p));
}

// ---- motion clip ----

inline json to_json(const SourceSkeleton& s) {
  json a = json::array();
  for (const auto& j : s.joints)
    a.push_back({{"name", j.name}, {"parent", j.parent}, {"offset", to_json(j.offset)}});
  return a;
}

inline SourceSkeleton skeleton_from_json(const json& j) {
  SourceSkeleton s;
  for (const json& e : j) {
    const std::string where = "skeleton joint " + e.value("name", "?");
    s.joints.push_back({field(e, "name", where).get<std::string>(),
                        field(e, "parent", where).get<int>(),
                        vec3_from_json(field(e, "offset", where), where + ".offset")});
  }
  s.validate();
  return s;
}

inline json to_json(const MotionClip& c) {
  json frames = json::array();
  for (const auto& f : c.frames) {
    json joints = json::array();
    for (const Quat& q : f.joints) joints.push_back(to_json(q));
    frames.push_back({{"root_t", to_json(f.root_translation)},
                      {"root_q", to_json(f.root_orientation)},
                      {"joints", joints}});
  }
  return {{"fps", c.fps}, {"skeleton", to_json(c.skeleton)}, {"frames", frames}};
}

inline MotionClip motion_clip_from_json(const json& j) {
  MotionClip c;
  c.fps = field(j, "fps", "motion clip").get<double>();
  c.skeleton = skeleton_from_json(field(j, "skeleton", "motion clip"));
  const json& frames = field(j, "frames", "motion clip");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const std::string where = "frames[" + std::to_string(k) + "]";
    MotionFrame f;
    f.root_translation = vec3_from_json(field(frames[k], "root_t", where), where + ".root_t");
    f.root_orientation = quat_from_json(field(frames[k], "root_q", where), where + ".root_q");
    for (const json& q : field(frames[k], "joints", where))
      f.joints.push_back(quat_from_json(q, where + ".joints"));
    c.frames.push_back(std::move(f));
  }
  c.validate();
  return c;
}

// ---- robot trajectory ----

inline json to_json(const RobotTrajectory& t, const RobotModel* model = nullptr) {
  json frames = json::array();
  for (const auto& f : t.frames)
    frames.push_back({{"q", to_json(f.q)},
                      {"root_t", to_json(f.root.translation)},
                      {"root_q", to_json(f.root.orientation)},
                      {"root_v", to_json(f.root_velocity)},
                      {"keypoints", to_json(f.keypoints)},
                      {"joint_pos", to_json(f.joint_positions)},
                      {"joint_vel", to_json(f.joint_velocities)}});
  json out = {{"fps", t.fps}, {"frames", frames}};
  if (model) {
    json names = json::array();
    for (const auto& d : model->dofs) names.push_back(d.name);
    out["dof_names"] = names;
  }
  return out;
}

inline RobotTrajectory trajectory_from_json(const json& j) {
  RobotTrajectory t;
  t.fps = field(j, "fps", "trajectory").get<double>();
  if (!(t.fps > 0)) throw std::invalid_argument("trajectory: fps must be > 0");
  const json& frames = field(j, "frames", "trajectory");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const std::string where = "trajectory frames[" + std::to_string(k) + "]";
    const json& fj = frames[k];
    TrajectoryFrame f;
    f.q = vecx_from_json(field(fj, "q", where), where + ".q");
    if (fj.contains("root_t")) f.root.translation = vec3_from_json(fj["root_t"], where);
    if (fj.contains("root_q")) f.root.orientation = quat_from_json(fj["root_q"], where);
    if (fj.contains("root_v")) f.root_velocity = vec3_from_json(fj["root_v"], where);
    if (fj.contains("keypoints")) f.keypoints = points_from_json(fj["keypoints"], where);
    if (fj.contains("joint_pos")) f.joint_positions = points_from_json(fj["joint_pos"], where);
    if (fj.contains("joint_vel")) f.joint_velocities = points_from_json(fj["joint_vel"], where);
    t.frames.push_back(std::move(f));
  }
  return t;
}

}  // namespace signkit::io
