#include <gtest/gtest.h>

#include <map>

#include "occpred/config_io.hpp"

namespace occpred {
namespace {

auto env_from(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
    const auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(ConfigIo, EmptyDocumentGivesDefaults) {
  const ExperimentConfig cfg = parse_config("");
  const ExperimentConfig def;
  EXPECT_EQ(config_to_json(cfg), config_to_json(def));
}

TEST(ConfigIo, ParsesSectionsAndNestedKeys) {
  const ExperimentConfig cfg = parse_config(R"(
pipeline:
  max_ray: 2.5
  clear_tracks: false
  q_base: [0.1, 0.02, 0.02, 0.02, 0.02, 0.08, 0.08]
sim:
  n_rays: 180
  robot:
    heading: 0.5
eval:
  error_mode: boundary
run:
  workers: 3
)");
  EXPECT_DOUBLE_EQ(cfg.pipeline.max_ray, 2.5);
  EXPECT_FALSE(cfg.pipeline.clear_tracks);
  EXPECT_DOUBLE_EQ(cfg.pipeline.q_base[5], 0.08);
  EXPECT_EQ(cfg.sim.n_rays, 180);
  EXPECT_DOUBLE_EQ(cfg.sim.robot.heading, 0.5);
  EXPECT_EQ(cfg.eval.error_mode, ErrorMode::Boundary);
  EXPECT_EQ(cfg.workers, 3);
  EXPECT_DOUBLE_EQ(cfg.pipeline.c1, PipelineConfig{}.c1);
}

TEST(ConfigIo, UnknownKeyIsNamed) {
  const std::string msg = message_of([] { parse_config("pipeline:\n  max_rayy: 2\n"); });
  EXPECT_NE(msg.find("pipeline.max_rayy"), std::string::npos) << msg;
  EXPECT_NE(message_of([] { parse_config("nonsense:\n  a: 1\n"); }).find("nonsense"), std::string::npos);
}

TEST(ConfigIo, BadValuesAreNamed) {
  EXPECT_NE(message_of([] { parse_config("pipeline:\n  max_ray: fast\n"); }).find("pipeline.max_ray"),
            std::string::npos);
  EXPECT_NE(message_of([] { parse_config("pipeline:\n  max_ray: -1\n"); }).find("max_ray"), std::string::npos);
  EXPECT_NE(message_of([] { parse_config("pipeline:\n  q_base: [1, 2]\n"); }).find("q_base"), std::string::npos);
  EXPECT_NE(message_of([] { parse_config("eval:\n  error_mode: edge\n"); }).find("eval.error_mode"),
            std::string::npos);
  EXPECT_THROW(parse_config("pipeline: [1, 2"), ConfigError);
}

TEST(ConfigIo, EnvVarNames) {
  EXPECT_EQ(env_var_name("pipeline.max_ray"), "OCCPRED_PIPELINE__MAX_RAY");
  EXPECT_EQ(env_var_name("sim.bounds.min_x"), "OCCPRED_SIM__BOUNDS__MIN_X");
  EXPECT_EQ(env_var_name("run.workers"), "OCCPRED_RUN__WORKERS");
}

TEST(ConfigIo, EveryKeyAcceptsItsOwnValue) {
  const ExperimentConfig def;
  const nlohmann::json j = config_to_json(def);
  for (const auto& key : config_keys()) {
    std::string pointer = "/" + key;
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    ExperimentConfig cfg;
    ASSERT_NO_THROW(apply_override(cfg, key, j.at(nlohmann::json::json_pointer(pointer)).dump())) << key;
  }
}

TEST(ConfigIo, PrecedenceFileThenEnvThenOverride) {
  ExperimentConfig cfg = parse_config("pipeline:\n  max_ray: 2.0\n  c1: 1.3\n");
  apply_env_overrides(cfg, env_from({{"OCCPRED_PIPELINE__MAX_RAY", "2.2"}, {"OCCPRED_SIM__N_RAYS", "90"}}));
  EXPECT_DOUBLE_EQ(cfg.pipeline.max_ray, 2.2);
  EXPECT_DOUBLE_EQ(cfg.pipeline.c1, 1.3);
  EXPECT_EQ(cfg.sim.n_rays, 90);
  apply_override(cfg, "pipeline.max_ray", "2.4");
  validate_config(cfg);
  EXPECT_DOUBLE_EQ(cfg.pipeline.max_ray, 2.4);
}

TEST(ConfigIo, InvalidEnvValueThrows) {
  ExperimentConfig cfg;
  EXPECT_THROW(apply_env_overrides(cfg, env_from({{"OCCPRED_SIM__N_RAYS", "many"}})), ConfigError);
  ExperimentConfig other;
  EXPECT_THROW(apply_env_overrides(other, env_from({{"OCCPRED_SIM__N_RAYS", "0"}})), ConfigError);
}

TEST(ConfigIo, OverridesDeferValidation) {
  // Raising the minimum past the current maximum is fine once the maximum follows.
  ExperimentConfig cfg;
  apply_override(cfg, "sim.min_agents", "12");
  apply_override(cfg, "sim.max_agents", "14");
  EXPECT_NO_THROW(validate_config(cfg));
  apply_override(cfg, "sim.max_agents", "2");
  EXPECT_THROW(validate_config(cfg), ConfigError);
  EXPECT_THROW(apply_override(cfg, "sim.unknown", "1"), ConfigError);
}

TEST(ConfigIo, YamlRoundTripIsExact) {
  ExperimentConfig cfg;
  cfg.pipeline.max_ray = 0.1 + 0.2;
  cfg.pipeline.q_base[2] = 1.0 / 3.0;
  cfg.sim.robot.heading = -2.5;
  cfg.eval.error_mode = ErrorMode::Boundary;
  cfg.workers = 5;
  const ExperimentConfig back = parse_config(config_to_yaml(cfg));
  EXPECT_EQ(config_to_json(back), config_to_json(cfg));
  EXPECT_EQ(back.pipeline.max_ray, cfg.pipeline.max_ray);
  EXPECT_EQ(back.pipeline.q_base[2], cfg.pipeline.q_base[2]);
}

TEST(ConfigIo, MissingFileThrows) { EXPECT_THROW(load_config("/nonexistent/occpred.yaml"), ConfigError); }

}  // namespace
}  // namespace occpred
