#include "occpred/config_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <type_traits>

#include <yaml-cpp/yaml.h>

namespace occpred {

namespace {

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const YAML::Node&)> set;
  std::function<nlohmann::json(const ExperimentConfig&)> get;
};

template <class T>
struct is_std_array : std::false_type {};
template <class U, std::size_t N>
struct is_std_array<std::array<U, N>> : std::true_type {};

template <class T>
T decode(const YAML::Node& node, const std::string& key) {
  auto bad = [&](const std::string& why) {
    return ConfigError("invalid value for config key '" + key + "': " + why);
  };
  if constexpr (std::is_same_v<T, ErrorMode>) {
    const auto s = node.IsScalar() ? node.Scalar() : std::string{};
    if (s == "center") return ErrorMode::Center;
    if (s == "boundary") return ErrorMode::Boundary;
    throw bad("expected 'center' or 'boundary'");
  } else if constexpr (is_std_array<T>::value) {
    T out{};
    if (!node.IsSequence() || node.size() != out.size()) {
      throw bad("expected a list of " + std::to_string(out.size()) + " numbers");
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = decode<typename T::value_type>(node[i], key);
    return out;
  } else {
    if (!node.IsScalar()) throw bad("expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      throw bad("cannot read '" + node.Scalar() + "'");
    }
  }
}

template <class T>
nlohmann::json encode(const T& v) {
  if constexpr (std::is_same_v<T, ErrorMode>) {
    return v == ErrorMode::Center ? "center" : "boundary";
  } else {
    return v;
  }
}

template <class Ref>
Field field(std::string key, Ref ref) {
  using T = std::remove_reference_t<decltype(ref(std::declval<ExperimentConfig&>()))>;
  Field f;
  f.key = key;
  f.set = [ref, key](ExperimentConfig& c, const YAML::Node& n) { ref(c) = decode<T>(n, key); };
  f.get = [ref](const ExperimentConfig& c) { return encode(ref(const_cast<ExperimentConfig&>(c))); };
  return f;
}

const std::vector<Field>& registry() {
  static const std::vector<Field> fields = [] {
    using C = ExperimentConfig;
    std::vector<Field> v;
    v.push_back(field("pipeline.epsilon", [](C& c) -> auto& { return c.pipeline.epsilon; }));
    v.push_back(field("pipeline.obstacle_clearance", [](C& c) -> auto& { return c.pipeline.obstacle_clearance; }));
    v.push_back(field("pipeline.window_duration", [](C& c) -> auto& { return c.pipeline.window_duration; }));
    v.push_back(field("pipeline.max_sample_gap", [](C& c) -> auto& { return c.pipeline.max_sample_gap; }));
    v.push_back(field("pipeline.avg_turn_trigger", [](C& c) -> auto& { return c.pipeline.avg_turn_trigger; }));
    v.push_back(field("pipeline.max_turn_trigger", [](C& c) -> auto& { return c.pipeline.max_turn_trigger; }));
    v.push_back(field("pipeline.min_motion_speed", [](C& c) -> auto& { return c.pipeline.min_motion_speed; }));
    v.push_back(field("pipeline.self_reaction_radius", [](C& c) -> auto& { return c.pipeline.self_reaction_radius; }));
    v.push_back(field("pipeline.clear_tracks", [](C& c) -> auto& { return c.pipeline.clear_tracks; }));
    v.push_back(field("pipeline.max_ray", [](C& c) -> auto& { return c.pipeline.max_ray; }));
    v.push_back(field("pipeline.n_sectors", [](C& c) -> auto& { return c.pipeline.n_sectors; }));
    v.push_back(field("pipeline.assoc_radius", [](C& c) -> auto& { return c.pipeline.assoc_radius; }));
    v.push_back(field("pipeline.c1", [](C& c) -> auto& { return c.pipeline.c1; }));
    v.push_back(field("pipeline.c2", [](C& c) -> auto& { return c.pipeline.c2; }));
    v.push_back(field("pipeline.cost_floor", [](C& c) -> auto& { return c.pipeline.cost_floor; }));
    v.push_back(field("pipeline.cost_ceiling", [](C& c) -> auto& { return c.pipeline.cost_ceiling; }));
    v.push_back(field("pipeline.decay_rate", [](C& c) -> auto& { return c.pipeline.decay_rate; }));
    v.push_back(field("pipeline.retention", [](C& c) -> auto& { return c.pipeline.retention; }));
    v.push_back(field("pipeline.q_base", [](C& c) -> auto& { return c.pipeline.q_base; }));
    v.push_back(field("pipeline.r_base", [](C& c) -> auto& { return c.pipeline.r_base; }));
    v.push_back(field("pipeline.p_init", [](C& c) -> auto& { return c.pipeline.p_init; }));

    v.push_back(field("sim.dt", [](C& c) -> auto& { return c.sim.dt; }));
    v.push_back(field("sim.max_ray", [](C& c) -> auto& { return c.sim.max_ray; }));
    v.push_back(field("sim.n_rays", [](C& c) -> auto& { return c.sim.n_rays; }));
    v.push_back(field("sim.horizon_ticks", [](C& c) -> auto& { return c.sim.horizon_ticks; }));
    v.push_back(field("sim.bounds.min_x", [](C& c) -> auto& { return c.sim.bounds.min_x; }));
    v.push_back(field("sim.bounds.min_y", [](C& c) -> auto& { return c.sim.bounds.min_y; }));
    v.push_back(field("sim.bounds.max_x", [](C& c) -> auto& { return c.sim.bounds.max_x; }));
    v.push_back(field("sim.bounds.max_y", [](C& c) -> auto& { return c.sim.bounds.max_y; }));
    v.push_back(field("sim.robot.x", [](C& c) -> auto& { return c.sim.robot.position.x; }));
    v.push_back(field("sim.robot.y", [](C& c) -> auto& { return c.sim.robot.position.y; }));
    v.push_back(field("sim.robot.heading", [](C& c) -> auto& { return c.sim.robot.heading; }));
    v.push_back(field("sim.robot_radius", [](C& c) -> auto& { return c.sim.robot_radius; }));
    v.push_back(field("sim.obstacle_radius", [](C& c) -> auto& { return c.sim.obstacle_radius; }));
    v.push_back(field("sim.agent_radius", [](C& c) -> auto& { return c.sim.agent_radius; }));
    v.push_back(field("sim.min_agents", [](C& c) -> auto& { return c.sim.min_agents; }));
    v.push_back(field("sim.max_agents", [](C& c) -> auto& { return c.sim.max_agents; }));
    v.push_back(field("sim.min_obstacles", [](C& c) -> auto& { return c.sim.min_obstacles; }));
    v.push_back(field("sim.max_obstacles", [](C& c) -> auto& { return c.sim.max_obstacles; }));
    v.push_back(field("sim.min_speed", [](C& c) -> auto& { return c.sim.min_speed; }));
    v.push_back(field("sim.max_speed", [](C& c) -> auto& { return c.sim.max_speed; }));
    v.push_back(field("sim.min_goal_distance", [](C& c) -> auto& { return c.sim.min_goal_distance; }));
    v.push_back(field("sim.placement_gap", [](C& c) -> auto& { return c.sim.placement_gap; }));
    v.push_back(field("sim.max_placement_attempts", [](C& c) -> auto& { return c.sim.max_placement_attempts; }));
    v.push_back(field("sim.lookahead", [](C& c) -> auto& { return c.sim.lookahead; }));
    v.push_back(field("sim.clearance_margin", [](C& c) -> auto& { return c.sim.clearance_margin; }));
    v.push_back(field("sim.heading_resolution", [](C& c) -> auto& { return c.sim.heading_resolution; }));
    v.push_back(field("sim.avoid_turn_rate", [](C& c) -> auto& { return c.sim.avoid_turn_rate; }));
    v.push_back(field("sim.goal_turn_rate", [](C& c) -> auto& { return c.sim.goal_turn_rate; }));
    v.push_back(field("sim.reaction_speed_factor", [](C& c) -> auto& { return c.sim.reaction_speed_factor; }));
    v.push_back(field("sim.acceleration", [](C& c) -> auto& { return c.sim.acceleration; }));
    v.push_back(field("sim.goal_tolerance", [](C& c) -> auto& { return c.sim.goal_tolerance; }));

    v.push_back(field("eval.incorrect_threshold", [](C& c) -> auto& { return c.eval.incorrect_threshold; }));
    v.push_back(field("eval.score_every", [](C& c) -> auto& { return c.eval.score_every; }));
    v.push_back(field("eval.exclude_source_agents", [](C& c) -> auto& { return c.eval.exclude_source_agents; }));
    v.push_back(field("eval.error_mode", [](C& c) -> auto& { return c.eval.error_mode; }));
    v.push_back(field("eval.bin_width", [](C& c) -> auto& { return c.eval.bin_width; }));
    v.push_back(field("eval.n_bins", [](C& c) -> auto& { return c.eval.n_bins; }));

    v.push_back(field("run.workers", [](C& c) -> auto& { return c.workers; }));
    return v;
  }();
  return fields;
}

const Field* find_field(const std::string& key) {
  const auto& r = registry();
  auto it = std::find_if(r.begin(), r.end(), [&](const Field& f) { return f.key == key; });
  return it == r.end() ? nullptr : &*it;
}

bool is_section_prefix(const std::string& path) {
  const std::string prefix = path + ".";
  return std::any_of(registry().begin(), registry().end(),
                     [&](const Field& f) { return f.key.compare(0, prefix.size(), prefix) == 0; });
}

void apply_node(ExperimentConfig& cfg, const YAML::Node& node, const std::string& path) {
  if (const Field* f = find_field(path)) {
    f->set(cfg, node);
    return;
  }
  if (!is_section_prefix(path)) throw ConfigError("unknown config key '" + path + "'");
  if (node.IsNull()) return;
  if (!node.IsMap()) throw ConfigError("config key '" + path + "' must be a mapping");
  for (const auto& kv : node) apply_node(cfg, kv.second, path + "." + kv.first.as<std::string>());
}

void validate_or_throw(const ExperimentConfig& cfg) {
  try {
    cfg.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& ex) {
    throw ConfigError(std::string("config is not valid YAML: ") + ex.what());
  }
  ExperimentConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError("config root must be a mapping of sections");
  for (const auto& kv : root) apply_node(cfg, kv.second, kv.first.as<std::string>());
  validate_or_throw(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& dotted_key, const std::string& value) {
  const Field* f = find_field(dotted_key);
  if (!f) throw ConfigError("unknown config key '" + dotted_key + "'");
  YAML::Node node;
  try {
    node = YAML::Load(value);
  } catch (const YAML::Exception&) {
    throw ConfigError("invalid value for config key '" + dotted_key + "': cannot read '" + value + "'");
  }
  f->set(cfg, node);
}

void validate_config(const ExperimentConfig& cfg) { validate_or_throw(cfg); }

std::string env_var_name(const std::string& dotted_key) {
  std::string out = "OCCPRED_";
  for (const char ch : dotted_key) {
    if (ch == '.') {
      out += "__";
    } else {
      out += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    }
  }
  return out;
}

void apply_env_overrides(ExperimentConfig& cfg,
                         const std::function<std::optional<std::string>(const std::string&)>& getenv) {
  for (const auto& f : registry()) {
    if (auto value = getenv(env_var_name(f.key))) apply_override(cfg, f.key, *value);
  }
  validate_or_throw(cfg);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : registry()) keys.push_back(f.key);
  return keys;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json root = nlohmann::json::object();
  for (const auto& f : registry()) {
    std::string pointer = "/" + f.key;
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    root[nlohmann::json::json_pointer(pointer)] = f.get(cfg);
  }
  return root;
}

namespace {

YAML::Node to_yaml_node(const nlohmann::json& j) {
  YAML::Node n;
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) n[k] = to_yaml_node(v);
  } else if (j.is_array()) {
    n.SetStyle(YAML::EmitterStyle::Flow);
    for (const auto& v : j) n.push_back(to_yaml_node(v));
  } else if (j.is_boolean()) {
    n = j.get<bool>();
  } else if (j.is_number_integer()) {
    n = j.get<long long>();
  } else if (j.is_number()) {
    // Shortest text that reads back to the same double, so 0.1 stays "0.1".
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), j.get<double>());
    n = std::string(buf, res.ptr);
  } else {
    n = j.get<std::string>();
  }
  return n;
}

}  // namespace

std::string config_to_yaml(const ExperimentConfig& cfg) {
  // Emit sections in schema order rather than the JSON object's sorted order.
  const nlohmann::json j = config_to_json(cfg);
  YAML::Emitter out;
  out << YAML::BeginMap;
  for (const char* section : {"pipeline", "sim", "eval", "run"}) {
    out << YAML::Key << section << YAML::Value << to_yaml_node(j.at(section));
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace occpred
