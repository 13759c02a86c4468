#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signkit/io/json_io.hpp"
#include "signkit/learn/ppo.hpp"
#include "signkit/retarget/hand.hpp"
#include "signkit/sim/env.hpp"
#include "signkit/sim/rewards.hpp"

namespace signkit::io {

// Every key the pipeline understands, at its default. Paths default to null.
inline json default_run_config() {
  const retarget::HandSolverConfig hs;
  return {
      {"seed", 123},
      {"robot", nullptr},
      {"references", json::array()},
      {"corpus", {{"clips", 5}, {"duration", 6.0}, {"fps", 30.0}, {"amplitude", 1.0}, {"seed", 2024}}},
      {"retarget", {{"mapping", nullptr}}},
      {"hand",
       {{"spec", retarget::to_json(retarget::HandKeypointSpec{})},
        {"solver", {{"max_iters", hs.max_iters}, {"tol", hs.tol}, {"fd_step", hs.fd_step}}}}},
      {"env", sim::to_json(sim::EnvConfig{})},
      {"rewards", sim::to_json(sim::RewardWeights{})},
      {"ppo", learn::to_json(learn::PpoConfig{})},
      {"train",
       {{"mode", "decoupled"},
        {"num_envs", 8},
        {"iterations", 100},
        {"budget_seconds", 0.0},
        {"action_clip", 5.0},
        {"upper_smoothing", 0.0}}},
      {"eval",
       {{"episodes", 20},
        {"deterministic", true},
        {"random_start", false},
        {"baseline", nullptr},
        {"thresholds", {{"medium_from", 80}, {"hard_above", 200}}}}},
      {"tokenizer",
       {{"codebook_size", {{"ub", 256}, {"lh", 128}, {"rh", 128}}},
        {"max_iterations", 100},
        {"tolerance", 1e-6},
        {"codebooks", nullptr}}},
      {"trajgen",
       {{"rate", 500.0},
        {"synchronized", true},
        {"safety_margin", 0.02},
        {"limits", {{"v_max", 3.0}, {"a_max", 20.0}, {"j_max", 200.0}}},
        {"limits_file", nullptr}}},
  };
}

namespace detail {

// Maps whose keys are data, not schema.
inline bool open_map(const std::string& path) { return path == "hand.spec.frozen"; }

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline const char* kind(const json& j) {
  if (j.is_null()) return "null";
  if (j.is_boolean()) return "boolean";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  return "object";
}

inline void check_value(const json& value, const json& schema, const std::string& path) {
  if (schema.is_object()) {
    if (!value.is_object()) throw std::invalid_argument(path + ": expected an object, got " + kind(value));
    if (open_map(path)) return;
    for (const auto& [k, v] : value.items()) {
      const std::string p = join(path, k);
      if (!schema.contains(k)) throw std::invalid_argument("unknown key " + p);
      check_value(v, schema[k], p);
    }
    return;
  }
  if (schema.is_null()) {
    if (!value.is_null() && !value.is_string())
      throw std::invalid_argument(path + ": expected a path string or null, got " + kind(value));
    return;
  }
  const bool ok = (schema.is_number() && value.is_number()) || (schema.is_boolean() && value.is_boolean()) ||
                  (schema.is_string() && value.is_string()) || (schema.is_array() && value.is_array());
  if (!ok) throw std::invalid_argument(path + ": expected " + kind(schema) + ", got " + kind(value));
  if (schema.is_number_integer() && !value.is_number_integer())
    throw std::invalid_argument(path + ": expected an integer");
}

inline void merge_into(json& base, const json& patch, const std::string& path = "") {
  for (const auto& [k, v] : patch.items()) {
    const std::string p = join(path, k);
    if (v.is_object() && base.contains(k) && base[k].is_object() && !open_map(p)) merge_into(base[k], v, p);
    else base[k] = v;
  }
}

}  // namespace detail

// Rejects unknown keys and type changes relative to the defaults.
inline void check_run_config(const json& user) { detail::check_value(user, default_run_config(), ""); }

inline json merge_run_config(const json& user) {
  check_run_config(user);
  json cfg = default_run_config();
  detail::merge_into(cfg, user);
  return cfg;
}

// "a.b.c=value"; value is parsed as JSON and taken as a plain string if that fails.
inline json set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json patch = value;
  std::size_t end = key.size();
  while (true) {
    const auto dot = key.rfind('.', end - 1);
    const std::string part = key.substr(dot == std::string::npos ? 0 : dot + 1,
                                        end - (dot == std::string::npos ? 0 : dot + 1));
    if (part.empty()) throw std::invalid_argument("--set: empty key segment in '" + key + "'");
    patch = json{{part, patch}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  return patch;
}

// File (optional), then --set overrides in order, then an explicit seed.
inline json load_run_config(const std::optional<std::filesystem::path>& file,
                            const std::vector<std::string>& sets = {},
                            std::optional<std::uint64_t> seed = std::nullopt) {
  json user = file ? read_json_file(*file) : json::object();
  if (!user.is_object()) throw std::invalid_argument("config: top level must be an object");
  check_run_config(user);
  for (const auto& s : sets) {
    const json patch = set_override(s);
    check_run_config(patch);
    detail::merge_into(user, patch);
  }
  if (seed) user["seed"] = *seed;
  json cfg = merge_run_config(user);
  // Section parsers carry the value-level validation.
  sim::env_config_from_json(cfg["env"]);
  sim::reward_weights_from_json(cfg["rewards"]);
  learn::ppo_config_from_json(cfg["ppo"]);
  retarget::hand_spec_from_json(cfg["hand"]["spec"]);
  return cfg;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Hash of the canonical form: keys sorted, compact.
inline std::string config_hash(const json& cfg) { return hex64(fnv1a64(cfg.dump())); }

}  // namespace signkit::io
