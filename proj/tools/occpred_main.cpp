#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "occpred/config_io.hpp"
#include "occpred/episode_io.hpp"
#include "occpred/pipeline.hpp"
#include "occpred/reports.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace occpred;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigOptions {
  std::string path;
  std::vector<std::string> overrides;
  std::optional<int> workers;
};

void add_config_options(CLI::App* cmd, ConfigOptions& opts, bool with_workers) {
  cmd->add_option("--config", opts.path, "YAML config file; omitted keys take their defaults");
  cmd->add_option("--set", opts.overrides, "Override one key, e.g. --set pipeline.max_ray=2.5 (repeatable)");
  if (with_workers) cmd->add_option("--workers", opts.workers, "Worker threads (0 = hardware parallelism)");
}

// defaults < file < environment < --set < dedicated flags
ExperimentConfig resolve_config(const ConfigOptions& opts) {
  ExperimentConfig cfg = opts.path.empty() ? ExperimentConfig{} : load_config(opts.path);
  apply_env_overrides(cfg, [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  });
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + kv + "' must have the form key=value");
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.workers) apply_override(cfg, "run.workers", std::to_string(*opts.workers));
  validate_config(cfg);
  return cfg;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

// Writes to a sibling temporary file and renames it so a failed run never leaves a partial artifact.
template <class Fn>
void write_file(const fs::path& path, Fn&& body) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    body(out);
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, [&](std::ostream& out) { out << text; });
}

class Manifest {
 public:
  Manifest(fs::path path, std::string command, const ExperimentConfig& cfg, std::vector<std::uint64_t> seeds)
      : path_(std::move(path)) {
    doc_["tool"] = "occpred";
    doc_["version"] = OCCPRED_VERSION;
    doc_["command"] = std::move(command);
    doc_["status"] = "running";
    doc_["config"] = config_to_json(cfg);
    doc_["seeds"] = std::move(seeds);
    doc_["artifacts"] = json::object();
    doc_["timings"] = {{"started_at", utc_now()}};
  }

  void artifact(const std::string& name, const fs::path& p) { doc_["artifacts"][name] = p.filename().string(); }
  void timing(const std::string& name, double seconds) { doc_["timings"][name + "_s"] = seconds; }
  void set(const std::string& key, json value) { doc_[key] = std::move(value); }

  void finish() {
    doc_["status"] = "complete";
    doc_["timings"]["finished_at"] = utc_now();
    write();
  }

  void write() const { write_text(path_, doc_.dump(2) + "\n"); }

 private:
  fs::path path_;
  json doc_;
};

// Runs the pipeline over a recorded episode and streams every published snapshot.
void write_published_stream(std::ostream& out, const EpisodeLog& log, const PipelineConfig& pipeline) {
  json header{{"type", "header"},
              {"schema", kPublishedSchema},
              {"seed", log.initial.seed},
              {"n_ticks", log.ticks.size()}};
  out << header.dump() << '\n';
  OcclusionPipeline p(pipeline);
  for (const auto& tick : log.ticks) {
    const TickOutput result = p.tick(tick.scan, tick.observations, tick.time);
    json rec = published_record(tick.tick, tick.time, result.published);
    rec["type"] = "tick";
    rec["raw_predictions"] = result.raw_predictions;
    rec["cleared_predictions"] = result.cleared_predictions;
    out << rec.dump() << '\n';
  }
}

void write_reports(const fs::path& dir, const AggregateReport& report, Manifest& manifest) {
  const fs::path bins = dir / "bins.csv";
  const fs::path scatter = dir / "scatter.csv";
  const fs::path summary = dir / "summary.json";
  manifest.artifact("bins", bins);
  manifest.artifact("scatter", scatter);
  manifest.artifact("summary", summary);
  write_text(bins, bins_csv(report.bins));
  write_text(scatter, scatter_csv(report.scatter));
  write_text(summary, summary_json(report).dump(2) + "\n");
}

void log_failures(const AggregateReport& report) {
  for (const auto& t : report.trials) {
    if (!t.ok) spdlog::warn("seed {} failed: {}", t.seed, t.error);
  }
}

int cmd_simulate(const ConfigOptions& copts, std::uint64_t seed, const fs::path& out_dir) {
  const ExperimentConfig cfg = resolve_config(copts);
  ensure_dir(out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  Manifest manifest(out_dir / "manifest.json", "simulate", cfg, {seed});
  const fs::path episode_path = out_dir / "episode.ndjson";
  const fs::path published_path = out_dir / "published.ndjson";
  manifest.artifact("episode_log", episode_path);
  manifest.artifact("published", published_path);
  manifest.write();

  auto t = std::chrono::steady_clock::now();
  const Scenario scenario = generate_scenario(seed, cfg.sim);
  const EpisodeLog log = run_episode(scenario, cfg.sim, cfg.sim.horizon_ticks);
  manifest.timing("simulate", seconds_since(t));
  spdlog::info("seed {}: {} agents, {} obstacles, {} ticks", seed, scenario.agents.size(),
               scenario.static_obstacles.size(), log.ticks.size());

  t = std::chrono::steady_clock::now();
  write_file(episode_path, [&](std::ostream& out) { write_episode_log(out, log); });
  manifest.timing("write_episode", seconds_since(t));

  t = std::chrono::steady_clock::now();
  write_file(published_path, [&](std::ostream& out) { write_published_stream(out, log, cfg.pipeline); });
  manifest.timing("pipeline", seconds_since(t));

  manifest.timing("total", seconds_since(t0));
  manifest.finish();
  spdlog::info("wrote {}", out_dir.string());
  return kExitOk;
}

int cmd_evaluate(const ConfigOptions& copts, int n_seeds, std::uint64_t first_seed, const fs::path& out_dir) {
  if (n_seeds < 1) throw ConfigError("--seeds must be at least 1");
  const ExperimentConfig cfg = resolve_config(copts);
  ensure_dir(out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < n_seeds; ++i) seeds.push_back(first_seed + static_cast<std::uint64_t>(i));
  Manifest manifest(out_dir / "manifest.json", "evaluate", cfg, seeds);
  manifest.write();

  const AggregateReport report = run_trials(n_seeds, cfg, first_seed);
  manifest.timing("trials", seconds_since(t0));
  log_failures(report);

  const auto t = std::chrono::steady_clock::now();
  write_reports(out_dir, report, manifest);
  manifest.timing("write_reports", seconds_since(t));
  manifest.timing("total", seconds_since(t0));
  manifest.finish();

  const auto& s = report.summary;
  spdlog::info("{} seeds ({} failed), {} scored predictions, mean unseen error {}", s.seeds, s.failed_seeds,
               s.total_predictions, format_number(s.mean_unseen_error));
  return kExitOk;
}

int cmd_replay(const ConfigOptions& copts, const fs::path& log_path, const std::optional<fs::path>& out_dir) {
  const ExperimentConfig cfg = resolve_config(copts);
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw IoError("cannot read episode log '" + log_path.string() + "'");
  const auto t0 = std::chrono::steady_clock::now();
  const EpisodeLog log = read_episode_log(in);

  std::vector<TrialResult> trials;
  trials.push_back(evaluate_episode(log, cfg.pipeline, cfg.eval));
  const AggregateReport report = aggregate(std::move(trials), cfg.eval);

  if (out_dir) {
    ensure_dir(*out_dir);
    Manifest manifest(*out_dir / "manifest.json", "replay", cfg, {log.initial.seed});
    manifest.set("source_log", fs::absolute(log_path).string());
    manifest.write();
    const fs::path published_path = *out_dir / "published.ndjson";
    manifest.artifact("published", published_path);
    write_file(published_path, [&](std::ostream& out) { write_published_stream(out, log, cfg.pipeline); });
    write_reports(*out_dir, report, manifest);
    manifest.timing("total", seconds_since(t0));
    manifest.finish();
  }
  std::cout << summary_json(report).dump(2) << '\n';
  return kExitOk;
}

int cmd_config(const ConfigOptions& copts, bool as_json, bool list_keys) {
  if (list_keys) {
    for (const auto& k : config_keys()) std::cout << k << ' ' << env_var_name(k) << '\n';
    return kExitOk;
  }
  const ExperimentConfig cfg = resolve_config(copts);
  std::cout << (as_json ? config_to_json(cfg).dump(2) + "\n" : config_to_yaml(cfg));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("occpred"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Occlusion-aware obstacle prediction from pedestrian reactions"};
  app.set_version_flag("--version", OCCPRED_VERSION);
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  ConfigOptions sim_cfg;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "Run one seeded episode and write its logs");
  add_config_options(sim, sim_cfg, false);
  sim->add_option("--seed", sim_seed, "Scenario seed")->required();
  sim->add_option("--out", sim_out, "Output directory")->required();

  ConfigOptions eval_cfg;
  int eval_seeds = 80;
  std::uint64_t eval_first = 0;
  std::string eval_out;
  auto* ev = app.add_subcommand("evaluate", "Run seeded trials and write the aggregate reports");
  add_config_options(ev, eval_cfg, true);
  ev->add_option("--seeds", eval_seeds, "Number of seeds")->capture_default_str();
  ev->add_option("--first-seed", eval_first, "First seed of the batch")->capture_default_str();
  ev->add_option("--out", eval_out, "Output directory")->required();

  ConfigOptions replay_cfg;
  std::string replay_log;
  std::string replay_out;
  auto* rp = app.add_subcommand("replay", "Re-run prediction and scoring offline from an episode log");
  add_config_options(rp, replay_cfg, false);
  rp->add_option("--log", replay_log, "Episode log written by simulate")->required();
  rp->add_option("--out", replay_out, "Optional directory for the published stream and reports");

  ConfigOptions show_cfg;
  bool show_json = false;
  bool show_keys = false;
  auto* show = app.add_subcommand("config", "Print the resolved config");
  add_config_options(show, show_cfg, true);
  show->add_flag("--json", show_json, "Print JSON instead of YAML");
  show->add_flag("--keys", show_keys, "List every key with its environment variable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (quiet) spdlog::set_level(spdlog::level::warn);

  try {
    if (*sim) return cmd_simulate(sim_cfg, sim_seed, sim_out);
    if (*ev) return cmd_evaluate(eval_cfg, eval_seeds, eval_first, eval_out);
    if (*rp) {
      return cmd_replay(replay_cfg, replay_log,
                        replay_out.empty() ? std::nullopt : std::optional<fs::path>(replay_out));
    }
    if (*show) return cmd_config(show_cfg, show_json, show_keys);
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const SchemaMismatch& e) {
    spdlog::error("schema mismatch: {}", e.what());
    return kExitFailure;
  } catch (const LogFormatError& e) {
    spdlog::error("malformed log: {}", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
