#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "signkit/core/rotation.hpp"

namespace signkit::sim {

struct Range {
  double lo = 0, hi = 0;
  double sample(std::mt19937_64& rng) const {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct RandomizationConfig {
  bool enabled = true;
  Range friction{0.6, 2.0};
  Range com_offset{-0.07, 0.07};   // m, base CoM x and y
  Range base_mass{-1.0, 5.0};      // kg added to the base
  Range motor_strength{0.8, 1.2};  // torque scale
  Range gravity{-0.1, 0.1};        // m/s^2 added to g
  Range link_mass{0.7, 1.3};       // inertia scale for every link
  Range pd_gain{0.75, 1.25};       // stiffness and damping scale
  bool push = true;
  double push_interval = 8.0;  // s
  double push_speed = 0.3;     // m/s, horizontal
};

// One episode's physical parameters.
struct DomainParams {
  double friction = 1.0;
  double com_x = 0, com_y = 0;
  double base_mass = 0;
  double motor_strength = 1.0;
  double gravity = 0;
  double link_mass = 1.0;
  double pd_gain = 1.0;
};

inline DomainParams sample_domain(const RandomizationConfig& c, std::mt19937_64& rng) {
  if (!c.enabled) return {};
  DomainParams p;
  p.friction = c.friction.sample(rng);
  p.com_x = c.com_offset.sample(rng);
  p.com_y = c.com_offset.sample(rng);
  p.base_mass = c.base_mass.sample(rng);
  p.motor_strength = c.motor_strength.sample(rng);
  p.gravity = c.gravity.sample(rng);
  p.link_mass = c.link_mass.sample(rng);
  p.pd_gain = c.pd_gain.sample(rng);
  return p;
}

// Horizontal velocity kick of fixed magnitude in a uniformly random direction.
inline Vec3 push_impulse(double speed, std::mt19937_64& rng) {
  const double phi = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
  return {speed * std::cos(phi), speed * std::sin(phi), 0.0};
}

inline void from_json(const nlohmann::json& j, Range& r) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("range must be [lo, hi]");
  r = {j[0].get<double>(), j[1].get<double>()};
  if (r.lo > r.hi) throw std::invalid_argument("range has lo > hi");
}

inline nlohmann::json to_json(const Range& r) { return nlohmann::json::array({r.lo, r.hi}); }

inline nlohmann::json to_json(const RandomizationConfig& c) {
  return {{"enabled", c.enabled},
          {"friction", to_json(c.friction)},
          {"com_offset", to_json(c.com_offset)},
          {"base_mass", to_json(c.base_mass)},
          {"motor_strength", to_json(c.motor_strength)},
          {"gravity", to_json(c.gravity)},
          {"link_mass", to_json(c.link_mass)},
          {"pd_gain", to_json(c.pd_gain)},
          {"push", c.push},
          {"push_interval", c.push_interval},
          {"push_speed", c.push_speed}};
}

inline RandomizationConfig randomization_from_json(const nlohmann::json& j) {
  RandomizationConfig c;
  for (const auto& [k, v] : j.items()) {
    if (k == "enabled") c.enabled = v.get<bool>();
    else if (k == "friction") from_json(v, c.friction);
    else if (k == "com_offset") from_json(v, c.com_offset);
    else if (k == "base_mass") from_json(v, c.base_mass);
    else if (k == "motor_strength") from_json(v, c.motor_strength);
    else if (k == "gravity") from_json(v, c.gravity);
    else if (k == "link_mass") from_json(v, c.link_mass);
    else if (k == "pd_gain") from_json(v, c.pd_gain);
    else if (k == "push") c.push = v.get<bool>();
    else if (k == "push_interval") c.push_interval = v.get<double>();
    else if (k == "push_speed") c.push_speed = v.get<double>();
    else throw std::invalid_argument("env.randomization: unknown key " + k);
  }
  return c;
}

}  // namespace signkit::sim
