#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "signkit/pipeline.hpp"
#include "signkit/retarget/body.hpp"
#include "signkit/retarget/hand.hpp"
#include "signkit/tokenizer/vq.hpp"
#include "signkit/trajectory/jerk.hpp"
#include "signkit/trajectory/stream.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace signkit;

namespace {

// SIGNKIT_LOG: quiet, info (default) or debug.
int log_level() {
  static const int level = [] {
    const char* v = std::getenv("SIGNKIT_LOG");
    const std::string s = v ? v : "info";
    if (s == "quiet" || s == "0") return 0;
    if (s == "debug" || s == "2") return 2;
    return 1;
  }();
  return level;
}

void info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << msg << '\n';
}
void debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << msg << '\n';
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string out = "signkit_out";
  std::vector<std::string> sets;
  std::vector<CLI::Option*> seed_opts;  // one per subcommand

  bool seed_given() const {
    for (const auto* o : seed_opts)
      if (o->count()) return true;
    return false;
  }
};

void add_common(CLI::App* sc, Common& c) {
  sc->add_option("--config", c.config, "Run config JSON; omitted keys take their defaults")->check(CLI::ExistingFile);
  c.seed_opts.push_back(sc->add_option("--seed", c.seed, "Seed; overrides the config's seed"));
  sc->add_option("--out", c.out, "Output directory")->capture_default_str();
  sc->add_option("--set", c.sets, "Config override key=value, dotted key, JSON value (repeatable)")
      ->expected(1)
      ->allow_extra_args(false)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
}

json versions() {
  return {{"signkit", SIGNKIT_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"cli11", CLI11_VERSION},
          {"compiler", __VERSION__}};
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// One subcommand invocation: resolved config, recorded inputs and outputs, manifest.
class Run {
 public:
  Run(std::string command, const Common& c) : command_(std::move(command)), out_(c.out) {
    std::optional<fs::path> file;
    if (!c.config.empty()) file = c.config, input(c.config);
    std::optional<std::uint64_t> seed;
    if (c.seed_given()) seed = c.seed;
    cfg = io::load_run_config(file, c.sets, seed);
    fs::create_directories(out_);
    debug("config hash " + io::config_hash(cfg));
  }

  json cfg;
  json summary = json::object();

  std::uint64_t seed() const { return cfg.at("seed").get<std::uint64_t>(); }
  fs::path path(const std::string& name) const { return out_ / name; }

  void input(const fs::path& p) {
    inputs_.push_back({{"path", p.string()}, {"fnv1a64", io::hex64(io::fnv1a64(read_bytes(p)))}});
  }
  void write(const std::string& name, const std::string& text) {
    io::write_text_atomic(out_ / name, text);
    outputs_.push_back(name);
  }
  void write(const std::string& name, const json& j) { write(name, j.dump(1) + "\n"); }
  void produced(const std::string& name) { outputs_.push_back(name); }

  void finish() {
    const json m = {{"command", command_},         {"inputs", inputs_},   {"seed", seed()},
                    {"config_hash", io::config_hash(cfg)}, {"config", cfg}, {"versions", versions()},
                    {"outputs", outputs_},         {"summary", summary}};
    io::write_json_file(out_ / "manifest.json", m);
    info(command_ + ": wrote " + std::to_string(outputs_.size()) + " artifact(s) to " + out_.string());
  }

 private:
  std::string command_;
  fs::path out_;
  json inputs_ = json::array(), outputs_ = json::array();
};

// ---- retarget-body ----

int retarget_body(const Common& c, const std::string& clip_path) {
  Run run("retarget-body", c);
  run.input(clip_path);
  const RobotModel robot = pipeline::robot_from_config(run.cfg);
  retarget::MappingTable mapping = retarget::default_body_mapping();
  if (!run.cfg["retarget"]["mapping"].is_null()) {
    const std::string mp = run.cfg["retarget"]["mapping"];
    run.input(mp);
    mapping = retarget::mapping_from_json(io::read_json_file(mp));
  }
  const MotionClip clip = io::motion_clip_from_json(io::read_json_file(clip_path));
  const retarget::TPoseCalibration cal = retarget::calibrate(clip.skeleton, robot, mapping);
  const retarget::RetargetResult res = retarget::retarget_clip(clip, cal, robot);
  double max_abs = 0;
  for (const auto& f : res.trajectory.frames) max_abs = std::max(max_abs, f.q.cwiseAbs().maxCoeff());
  run.write("trajectory.json", io::to_json(res.trajectory, &robot));
  run.summary = {{"frames", res.trajectory.size()},
                 {"clamped", res.clamped},
                 {"mapped_values", res.mapped_values},
                 {"clamp_fraction", res.clamp_fraction()},
                 {"max_abs_q", max_abs}};
  info("retarget-body: " + std::to_string(res.trajectory.size()) + " frames, clamp fraction " +
       num(res.clamp_fraction()));
  run.finish();
  return 0;
}

// ---- retarget-hand ----

std::vector<Points> keypoint_frames(const json& frames, const std::string& side) {
  if (!frames.is_array() || frames.empty()) throw std::invalid_argument(side + ": expected a non-empty frame list");
  std::vector<Points> out;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const std::string where = side + "[" + std::to_string(k) + "]";
    Points p = io::points_from_json(frames[k], where);
    if (p.rows() != retarget::kHumanHandKeypoints)
      throw std::invalid_argument(where + ": expected " + std::to_string(retarget::kHumanHandKeypoints) +
                                  " keypoints, got " + std::to_string(p.rows()));
    out.push_back(std::move(p));
  }
  return out;
}

int retarget_hand(const Common& c, const std::string& kp_path, const std::string& body_path) {
  Run run("retarget-hand", c);
  run.input(kp_path);
  const RobotModel robot = pipeline::robot_from_config(run.cfg);
  const retarget::HandKeypointSpec spec = retarget::hand_spec_from_json(run.cfg["hand"]["spec"]);
  const json& sj = run.cfg["hand"]["solver"];
  retarget::HandSolverConfig solver{sj["max_iters"].get<int>(), sj["tol"].get<double>(), sj["fd_step"].get<double>()};
  if (solver.max_iters < 1 || !(solver.tol > 0) || !(solver.fd_step > 0))
    throw std::invalid_argument("hand.solver: max_iters >= 1, tol > 0 and fd_step > 0");

  const json kp = io::read_json_file(kp_path);
  for (const auto& [k, _] : kp.items())
    if (k != "fps" && k != "left" && k != "right") throw std::invalid_argument(kp_path + ": unknown key " + k);
  const double fps = io::field(kp, "fps", kp_path).get<double>();
  if (!(fps > 0)) throw std::invalid_argument(kp_path + ": fps must be > 0");
  if (!kp.contains("left") && !kp.contains("right")) throw std::invalid_argument(kp_path + ": needs left and/or right");

  std::optional<RobotTrajectory> body;
  if (!body_path.empty()) {
    run.input(body_path);
    body = io::trajectory_from_json(io::read_json_file(body_path));
  }
  json out = {{"fps", fps}};
  for (const std::string side : {"left", "right"}) {
    if (!kp.contains(side)) continue;
    const auto frames = keypoint_frames(kp[side], side);
    const retarget::HandModel h = retarget::make_hand_model(robot, side, spec);
    const retarget::HandClipResult res = retarget::retarget_hand_clip(h, frames, spec, solver);
    json names = json::array(), rows = json::array(), err = json::array(), iters = json::array();
    for (const auto& n : h.names) names.push_back(side + "_" + n);
    double worst = 0;
    for (Eigen::Index k = 0; k < res.q.rows(); ++k) {
      rows.push_back(io::to_json(VecX(res.q.row(k).transpose())));
      err.push_back(res.reports[k].max_vector_error);
      iters.push_back(res.reports[k].iterations);
      worst = std::max(worst, res.reports[k].max_vector_error);
    }
    out[side] = {{"dofs", names}, {"q", rows}, {"max_vector_error", err}, {"iterations", iters}};
    run.summary[side] = {{"frames", frames.size()}, {"worst_vector_error", worst}};
    info("retarget-hand: " + side + " " + std::to_string(frames.size()) + " frames, worst vector error " + num(worst) +
         " m");
    if (body) {
      if (body->size() != frames.size())
        throw std::invalid_argument("body trajectory has " + std::to_string(body->size()) + " frames, " + side +
                                    " hand has " + std::to_string(frames.size()));
      for (int i = 0; i < h.size(); ++i) {
        const int r = robot.dof_index(side + "_" + h.names[i]);
        for (std::size_t k = 0; k < body->size(); ++k) body->frames[k].q[r] = res.q(static_cast<Eigen::Index>(k), i);
      }
    }
  }
  run.write("hand.json", out);
  if (body) run.write("trajectory.json", io::to_json(populate_kinematics(robot, std::move(*body)), &robot));
  run.finish();
  return 0;
}

// ---- train ----

int train(const Common& c) {
  Run run("train", c);
  for (const auto& p : run.cfg["references"]) run.input(p.get<std::string>());
  if (!run.cfg["robot"].is_null()) run.input(run.cfg["robot"].get<std::string>());
  const pipeline::World w = pipeline::make_world(run.cfg);
  learn::CurveWriter curve(run.path("curve.csv"));
  run.produced("curve.csv");
  info("train: " + std::string(pipeline::mode_name(w.mode)) + ", " + std::to_string(w.refs->size()) + " clips, seed " +
       std::to_string(run.seed()));
  const pipeline::TrainOutcome res = pipeline::train(run.cfg, w, [&](const learn::IterationStats& s) {
    curve.write(s);
    if (log_level() >= 2 || s.iteration % 10 == 0)
      info("  it " + std::to_string(s.iteration) + " return " + num(s.mean_return) + " reward/step " +
           num(s.mean_reward) + " fall " + num(s.fall_rate) + " mse " + num(s.dof_mse));
  });
  const json meta = {{"seed", run.seed()}, {"mode", pipeline::mode_name(w.mode)}, {"config_hash", io::config_hash(run.cfg)}};
  learn::save_checkpoint(run.path("agent.json"), res.agent, meta);
  run.produced("agent.json");
  run.summary = {{"iterations", res.curve.size()}};
  if (!res.curve.empty()) {
    const auto& l = res.curve.back();
    run.summary["last"] = {{"mean_return", l.mean_return}, {"mean_reward", l.mean_reward},
                           {"dof_mse", l.dof_mse}, {"fall_rate", l.fall_rate}};
  }
  run.finish();
  return 0;
}

// ---- eval ----

json metric_json(const eval::MetricValues& m) {
  json j;
  for (int k = 0; k < eval::kMetricCount; ++k) j[eval::kMetricNames[k]] = m[k];
  return j;
}

int evaluate(const Common& c, const std::vector<std::string>& checkpoints) {
  Run run("eval", c);
  for (const auto& p : checkpoints) run.input(p);
  for (const auto& p : run.cfg["references"]) run.input(p.get<std::string>());
  const pipeline::World w = pipeline::make_world(run.cfg);
  const pipeline::EvalOptions opt = pipeline::eval_options(run.cfg);
  const eval::DifficultyThresholds th = pipeline::thresholds(run.cfg);
  const std::string baseline = run.cfg["eval"]["baseline"].is_null() ? pipeline::mode_name(w.mode)
                                                                      : run.cfg["eval"]["baseline"].get<std::string>();
  eval::MetricTable table;
  std::ostringstream episodes;
  episodes.precision(17);
  episodes << "checkpoint,episode,clip,clip_frames,difficulty,steps,fallen";
  for (const char* n : eval::kMetricNames) episodes << ',' << n;
  episodes << '\n';
  run.summary["checkpoints"] = json::array();
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const learn::Agent agent = learn::load_checkpoint(checkpoints[i]);
    const auto logs = pipeline::evaluate(agent, w, opt);
    const pipeline::EvalSummary s = pipeline::summarize(logs, w.clip_frames, th);
    table.add(baseline, "all", s.overall);
    for (int d = 0; d < eval::kDifficultyCount; ++d)
      if (s.by_difficulty[d]) table.add(baseline, eval::kDifficultyNames[d], *s.by_difficulty[d]);
    for (std::size_t k = 0; k < logs.size(); ++k) {
      const int frames = w.clip_frames[logs[k].clip];
      const eval::MetricValues m = eval::compute_metrics(logs[k]);
      episodes << i << ',' << k << ',' << logs[k].clip << ',' << frames << ','
               << eval::kDifficultyNames[eval::classify(frames, th)] << ',' << logs[k].size() << ','
               << logs[k].fallen;
      for (double v : m) episodes << ',' << v;
      episodes << '\n';
    }
    run.summary["checkpoints"].push_back({{"path", checkpoints[i]},
                                          {"fall_rate", s.fall_rate},
                                          {"mean_length", s.mean_length},
                                          {"metrics", metric_json(s.overall)}});
    info("eval: " + checkpoints[i] + " cum_reward " + num(s.overall[eval::kCumReward]) + " dof_pos " +
         num(s.overall[eval::kDofPos]) + " fall " + num(s.fall_rate));
  }
  run.write("metrics.csv", table.csv());
  run.write("episodes.csv", episodes.str());
  run.finish();
  return 0;
}

// ---- tokenize ----

int tokenize(const Common& c, const std::vector<std::string>& inputs) {
  Run run("tokenize", c);
  const RobotModel robot = pipeline::robot_from_config(run.cfg);
  std::vector<RobotTrajectory> corpus;
  if (inputs.empty()) {
    for (const auto& p : run.cfg["references"]) run.input(p.get<std::string>());
    corpus = pipeline::references_from_config(run.cfg, robot);
  } else {
    for (const auto& p : inputs) {
      run.input(p);
      corpus.push_back(io::trajectory_from_json(io::read_json_file(p)));
    }
  }
  const vq::PartSplit split = vq::default_split(robot);
  const json& tj = run.cfg["tokenizer"];
  vq::Codebooks cbs;
  if (!tj["codebooks"].is_null()) {
    run.input(tj["codebooks"].get<std::string>());
    cbs = vq::codebooks_from_json(io::read_json_file(tj["codebooks"].get<std::string>()));
  } else {
    vq::TokenizerConfig tc;
    for (int p = 0; p < vq::kPartCount; ++p) tc.codebook_size[p] = tj["codebook_size"][vq::kPartNames[p]].get<int>();
    tc.fit = {tj["max_iterations"].get<int>(), tj["tolerance"].get<double>()};
    tc.seed = run.seed();
    cbs = vq::fit_codebooks(corpus, split, tc);
    run.write("codebooks.json", vq::to_json(cbs));
  }
  std::array<std::vector<int>, vq::kPartCount> pooled;
  std::array<double, vq::kPartCount> err{};
  std::size_t frames = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const vq::PartTokens tok = vq::tokenize_clip(corpus[i], split, cbs);
    const auto e = vq::reconstruction_error(corpus[i], split, cbs, tok);
    for (int p = 0; p < vq::kPartCount; ++p) {
      pooled[p].insert(pooled[p].end(), tok[p].begin(), tok[p].end());
      err[p] += e[p] * static_cast<double>(corpus[i].size());
    }
    frames += corpus[i].size();
    char name[32];
    std::snprintf(name, sizeof name, "tokens_%03zu.csv", i);
    run.write(name, vq::tokens_csv(tok));
  }
  json stats = json::object();
  for (int p = 0; p < vq::kPartCount; ++p) {
    const vq::CodebookStats st = vq::codebook_stats(pooled[p], cbs[p].size());
    stats[vq::kPartNames[p]] = {{"codebook_size", cbs[p].size()},
                                {"utilization", st.utilization},
                                {"perplexity", st.perplexity},
                                {"reconstruction_mse", err[p] / static_cast<double>(frames)}};
    info(std::string("tokenize: ") + vq::kPartNames[p] + " perplexity " + num(st.perplexity) + " utilization " +
         num(st.utilization));
  }
  run.write("stats.json", stats);
  run.summary = {{"clips", corpus.size()}, {"frames", frames}, {"parts", stats}};
  run.finish();
  return 0;
}

// ---- trajgen ----

traj::KinematicLimits limits_from(const json& j, traj::KinematicLimits base, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (k == "v_max") base.v_max = v.get<double>();
    else if (k == "a_max") base.a_max = v.get<double>();
    else if (k == "j_max") base.j_max = v.get<double>();
    else throw std::invalid_argument(where + ": unknown key " + k);
  }
  base.validate();
  return base;
}

// Limits file: optional v_max/a_max/j_max for every DoF, plus "dofs": {name: {...}} overrides.
std::vector<traj::KinematicLimits> limits_for(const RobotModel& robot, const json& base_json, const json* file,
                                              const std::string& file_name) {
  traj::KinematicLimits base = limits_from(base_json, {}, "trajgen.limits");
  json per_dof = json::object();
  if (file) {
    json top = *file;
    if (!top.is_object()) throw std::invalid_argument(file_name + ": expected an object");
    if (top.contains("dofs")) per_dof = top["dofs"], top.erase("dofs");
    base = limits_from(top, base, file_name);
  }
  std::vector<traj::KinematicLimits> out(robot.dof_count(), base);
  for (const auto& [name, v] : per_dof.items()) {
    const int i = robot.dof_index(name);
    if (i < 0) throw std::invalid_argument(file_name + ": unknown DoF " + name);
    out[i] = limits_from(v, base, file_name + " dofs." + name);
  }
  return out;
}

int trajgen(const Common& c, const std::string& traj_path) {
  Run run("trajgen", c);
  run.input(traj_path);
  const RobotModel robot = pipeline::robot_from_config(run.cfg);
  const json& g = run.cfg["trajgen"];
  json file;
  if (!g["limits_file"].is_null()) {
    run.input(g["limits_file"].get<std::string>());
    file = io::read_json_file(g["limits_file"].get<std::string>());
  }
  const auto limits = limits_for(robot, g["limits"], g["limits_file"].is_null() ? nullptr : &file,
                                 g["limits_file"].is_null() ? "" : g["limits_file"].get<std::string>());
  const RobotTrajectory t = io::trajectory_from_json(io::read_json_file(traj_path));
  if (t.empty()) throw std::invalid_argument(traj_path + ": no frames");
  VecX lo(robot.dof_count()), hi(robot.dof_count());
  for (std::size_t i = 0; i < robot.dof_count(); ++i) lo[i] = robot.dofs[i].q_min, hi[i] = robot.dofs[i].q_max;
  std::size_t clamped = 0;
  std::vector<VecX> waypoints;
  for (const auto& f : t.frames) {
    if (f.q.size() != lo.size()) throw std::invalid_argument(traj_path + ": DoF count does not match the robot");
    waypoints.push_back(traj::clamp_safety(f.q, lo, hi, g["safety_margin"].get<double>(), &clamped));
  }
  const traj::DenseCommands cmd = traj::interpolate_waypoints(waypoints, t.fps, limits, g["rate"].get<double>(),
                                                              g["synchronized"].get<bool>());
  std::string csv = "t";
  for (const auto& d : robot.dofs) csv += "," + d.name;
  csv += '\n';
  for (std::size_t k = 0; k < cmd.q.size(); ++k) {
    csv += num(cmd.time[k]);
    for (Eigen::Index i = 0; i < cmd.q[k].size(); ++i) csv += "," + num(cmd.q[k][i]);
    csv += '\n';
  }
  run.write("commands.csv", csv);
  run.summary = {{"samples", cmd.q.size()},
                 {"duration", cmd.time.back()},
                 {"sync_failures", cmd.sync_failures},
                 {"clamped_waypoint_values", clamped}};
  info("trajgen: " + std::to_string(cmd.q.size()) + " commands over " + num(cmd.time.back()) + " s");
  run.finish();
  return 0;
}

// ---- simulate ----

// Open-loop replay: every DoF is sent the reference of the frame it is scored against.
struct ReplayPolicy {
  const learn::WholeBodyTask* task;
  VecX act(const VecX&, bool, std::mt19937_64&) const {
    const sim::SignEnv& env = task->env();
    const VecX& q = env.reference().frames[env.next_reference_frame()].q;
    return (q - env.model().default_pose()) / env.config().action_scale;
  }
};

int simulate(const Common& c, const std::string& traj_path, const std::string& policy_path) {
  Run run("simulate", c);
  run.input(traj_path);
  RobotModel robot = pipeline::robot_from_config(run.cfg);
  std::vector<RobotTrajectory> clip;
  clip.push_back(populate_kinematics(robot, io::trajectory_from_json(io::read_json_file(traj_path))));
  pipeline::World w = pipeline::make_world(run.cfg, std::move(robot), std::move(clip));
  eval::EpisodeLog log;
  if (policy_path.empty()) {
    sim::EnvConfig env = w.env;
    env.random_start = false;
    learn::WholeBodyTask task = pipeline::make_task<learn::WholeBodyTask>(w, env);
    std::mt19937_64 rng(run.seed());
    VecX obs = task.reset(run.seed(), 0, 0);
    log = eval::log_episode(ReplayPolicy{&task}, task, std::move(obs), true, rng, 1e9);
    log.seed = run.seed();
  } else {
    run.input(policy_path);
    pipeline::EvalOptions opt = pipeline::eval_options(run.cfg);
    opt.episodes = 1;
    log = pipeline::evaluate(learn::load_checkpoint(policy_path), w, opt).front();
  }
  std::ostringstream os;
  os.precision(12);
  os << "step,t,reward,dof_sq_error,roll,pitch,yaw,roll_ref,pitch_ref,yaw_ref\n";
  const double dt = w.env.dt * w.env.decimation;
  for (std::size_t k = 0; k < log.size(); ++k)
    os << k + 1 << ',' << (k + 1) * dt << ',' << log.reward[k] << ','
       << (log.q[k] - log.q_ref[k]).squaredNorm() / static_cast<double>(log.q[k].size()) << ',' << log.roll[k] << ','
       << log.pitch[k] << ',' << log.yaw[k] << ',' << log.roll_ref[k] << ',' << log.pitch_ref[k] << ','
       << log.yaw_ref[k] << '\n';
  run.write("steps.csv", os.str());
  const eval::MetricValues m = eval::compute_metrics(log);
  run.summary = {{"steps", log.size()}, {"fallen", log.fallen}, {"metrics", metric_json(m)},
                 {"policy", policy_path.empty() ? "replay" : policy_path}};
  run.write("metrics.json", run.summary);
  info("simulate: " + std::to_string(log.size()) + " steps, " + (log.fallen ? "fell" : "stayed up") + ", dof_pos " +
       num(m[eval::kDofPos]));
  run.finish();
  return 0;
}

// ---- make-synthetic ----

int make_synthetic(const Common& c) {
  Run run("make-synthetic", c);
  const RobotModel robot = pipeline::robot_from_config(run.cfg);
  const auto corpus = pipeline::synthetic_corpus(run.cfg, robot);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    char name[40];
    std::snprintf(name, sizeof name, "corpus/clip_%03zu.json", i);
    run.write(name, io::to_json(corpus[i], &robot).dump() + "\n");
  }
  const synthetic::SignClipOptions o = pipeline::corpus_options(run.cfg);
  run.write("source_clip.json", io::to_json(synthetic::source_clip(run.seed(), o.duration, o.fps)).dump() + "\n");

  // Hand keypoints traced on the robot along the first clip, with the finger angles that made them.
  // Frozen DoFs are held at their frozen values so the keypoints stay reachable.
  const retarget::HandKeypointSpec spec = retarget::hand_spec_from_json(run.cfg["hand"]["spec"]);
  json kp = {{"fps", corpus[0].fps}}, truth = {{"fps", corpus[0].fps}};
  for (const std::string side : {"left", "right"}) {
    const retarget::HandModel h = retarget::make_hand_model(robot, side, spec);
    std::vector<int> idx;
    for (const auto& n : h.names) idx.push_back(robot.dof_index(side + "_" + n));
    json frames = json::array(), qs = json::array();
    for (const auto& f : corpus[0].frames) {
      VecX qh(h.size());
      for (int i = 0; i < h.size(); ++i) qh[i] = h.frozen[i] ? h.fixed_values[i] : f.q[idx[i]];
      frames.push_back(io::to_json(retarget::hand_keypoints_from_robot(robot, side, qh, spec.alpha)));
      qs.push_back(io::to_json(qh));
    }
    kp[side] = frames;
    json names = json::array();
    for (const auto& n : h.names) names.push_back(side + "_" + n);
    truth[side] = {{"dofs", names}, {"q", qs}};
  }
  run.write("hand_keypoints.json", kp.dump() + "\n");
  run.write("hand_truth.json", truth.dump() + "\n");
  run.summary = {{"clips", corpus.size()}, {"frames_per_clip", corpus[0].size()}};
  run.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"signkit: retargeting, tracking-policy training and tokenization pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SIGNKIT_VERSION);

  Common common;
  std::string clip, keypoints, body, trajectory, policy;
  std::vector<std::string> checkpoints, trajectories;

  auto* rb = app.add_subcommand("retarget-body", "Retarget a motion clip JSON onto the robot");
  add_common(rb, common);
  rb->add_option("clip", clip, "Motion clip JSON")->required()->check(CLI::ExistingFile);

  auto* rh = app.add_subcommand("retarget-hand", "Solve robot finger angles from 21-point hand keypoints");
  add_common(rh, common);
  rh->add_option("keypoints", keypoints, "Hand keypoint JSON {fps, left, right}")->required()->check(CLI::ExistingFile);
  rh->add_option("--body", body, "Robot trajectory to receive the finger angles")->check(CLI::ExistingFile);

  auto* tr = app.add_subcommand("train", "Train a tracking policy with PPO");
  add_common(tr, common);

  auto* ev = app.add_subcommand("eval", "Evaluate checkpoints and write the metric table");
  add_common(ev, common);
  ev->add_option("checkpoints", checkpoints, "Agent checkpoints, one per training seed")
      ->required()
      ->check(CLI::ExistingFile);

  auto* tk = app.add_subcommand("tokenize", "Fit per-part codebooks and tokenize trajectories");
  add_common(tk, common);
  tk->add_option("trajectories", trajectories, "Robot trajectory JSONs (default: the configured references)")
      ->check(CLI::ExistingFile);

  auto* tg = app.add_subcommand("trajgen", "Dense jerk-limited commands through a trajectory's frames");
  add_common(tg, common);
  tg->add_option("trajectory", trajectory, "Robot trajectory JSON")->required()->check(CLI::ExistingFile);

  auto* sm = app.add_subcommand("simulate", "Replay a trajectory in the surrogate and log tracking metrics");
  add_common(sm, common);
  sm->add_option("trajectory", trajectory, "Robot trajectory JSON")->required()->check(CLI::ExistingFile);
  sm->add_option("--policy", policy, "Agent checkpoint to run instead of open-loop replay")->check(CLI::ExistingFile);

  auto* ms = app.add_subcommand("make-synthetic", "Write the synthetic corpus, a source clip and hand keypoints");
  add_common(ms, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (rb->parsed()) return retarget_body(common, clip);
    if (rh->parsed()) return retarget_hand(common, keypoints, body);
    if (tr->parsed()) return train(common);
    if (ev->parsed()) return evaluate(common, checkpoints);
    if (tk->parsed()) return tokenize(common, trajectories);
    if (tg->parsed()) return trajgen(common, trajectory);
    if (sm->parsed()) return simulate(common, trajectory, policy);
    if (ms->parsed()) return make_synthetic(common);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
