#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "occpred/eval.hpp"

namespace occpred {

/// Unknown keys, unparsable values and failed validation. The message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses YAML text with sections `pipeline`, `sim`, `eval` and `run`. Omitted keys keep their defaults.
ExperimentConfig parse_config(const std::string& yaml_text);

/// Reads and parses a config file.
ExperimentConfig load_config(const std::string& path);

/// Applies one override. `dotted_key` is "section.key" (nested keys use further dots) and `value`
/// is a YAML scalar or flow sequence, e.g. "[0.1, 0.2]". Cross-field validation is deferred so several
/// overrides can be applied in any order; call validate_config afterwards.
void apply_override(ExperimentConfig& cfg, const std::string& dotted_key, const std::string& value);

/// ExperimentConfig::validate with failures reported as ConfigError.
void validate_config(const ExperimentConfig& cfg);

/// Looks up OCCPRED_<SECTION>__<KEY> for every known key (dots become "__", letters uppercase) and
/// applies the ones that are set, then validates. `getenv` is injectable for tests.
void apply_env_overrides(ExperimentConfig& cfg,
                         const std::function<std::optional<std::string>(const std::string&)>& getenv);

/// Environment variable name for a dotted key.
std::string env_var_name(const std::string& dotted_key);

/// Every dotted key the loader accepts, in schema order.
std::vector<std::string> config_keys();

nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Full config as YAML, suitable as a starting point for a config file.
std::string config_to_yaml(const ExperimentConfig& cfg);

}  // namespace occpred
