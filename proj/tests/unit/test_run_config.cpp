#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "signkit/io/run_config.hpp"

using namespace signkit::io;
using nlohmann::json;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(RunConfig, DefaultsValidateAgainstThemselves) {
  EXPECT_NO_THROW(check_run_config(default_run_config()));
  EXPECT_EQ(load_run_config(std::nullopt), default_run_config());
}

TEST(RunConfig, ShippedDefaultFileMatchesDefaults) {
  EXPECT_EQ(load_run_config(SIGNKIT_DATA_DIR "/default_config.json"), default_run_config());
}

TEST(RunConfig, UnknownKeysAreRejectedWithPath) {
  try {
    check_run_config({{"ppo", {{"learning_rte", 1e-3}}}});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("ppo.learning_rte"), std::string::npos) << e.what();
  }
  EXPECT_THROW(check_run_config({{"nope", 1}}), std::invalid_argument);
}

TEST(RunConfig, TypeMismatchesAreRejected) {
  EXPECT_THROW(check_run_config({{"seed", "abc"}}), std::invalid_argument);
  EXPECT_THROW(check_run_config({{"train", {{"num_envs", 2.5}}}}), std::invalid_argument);
  EXPECT_THROW(check_run_config({{"corpus", 3}}), std::invalid_argument);
  EXPECT_THROW(check_run_config({{"robot", 3}}), std::invalid_argument);
  EXPECT_NO_THROW(check_run_config({{"robot", "model.json"}}));
  // integers are acceptable where a float is expected
  EXPECT_NO_THROW(check_run_config({{"corpus", {{"duration", 12}}}}));
}

TEST(RunConfig, SetOverridesBuildNestedPatches) {
  EXPECT_EQ(set_override("ppo.hidden=[64,64]"), json::parse(R"({"ppo":{"hidden":[64,64]}})"));
  EXPECT_EQ(set_override("train.mode=whole_body"), json::parse(R"({"train":{"mode":"whole_body"}})"));
  EXPECT_EQ(set_override("seed=7"), json::parse(R"({"seed":7})"));
  EXPECT_THROW(set_override("seed"), std::invalid_argument);
  EXPECT_THROW(set_override("=3"), std::invalid_argument);
  EXPECT_THROW(set_override("a..b=3"), std::invalid_argument);
}

TEST(RunConfig, PrecedenceIsFileThenSetThenSeed) {
  const auto p = write_temp("signkit_cfg_prec.json", R"({"seed": 5, "train": {"num_envs": 4, "iterations": 9}})");
  const json cfg = load_run_config(p, {"train.num_envs=16", "train.num_envs=32"}, 77);
  EXPECT_EQ(cfg["seed"], 77);
  EXPECT_EQ(cfg["train"]["num_envs"], 32);
  EXPECT_EQ(cfg["train"]["iterations"], 9);
  EXPECT_EQ(cfg["train"]["mode"], "decoupled");
  EXPECT_THROW(load_run_config(p, {"train.num_env=3"}), std::invalid_argument);
}

TEST(RunConfig, SectionParsersValidateValues) {
  EXPECT_THROW(load_run_config(std::nullopt, {"ppo.learning_rate=-1"}), std::invalid_argument);
}

TEST(RunConfig, HashIsStableAndSensitive) {
  const json a = default_run_config();
  json b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b["seed"] = 124;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(RunConfig, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}
