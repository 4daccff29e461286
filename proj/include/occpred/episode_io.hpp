#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "occpred/crowd_sim.hpp"
#include "occpred/occlusion_map.hpp"

namespace occpred {

inline constexpr const char* kEpisodeSchema = "occpred.episode/1";
inline constexpr const char* kPublishedSchema = "occpred.published/1";

/// Malformed or truncated log. `record()` is the zero-based line index of the offending record.
class LogFormatError : public std::runtime_error {
 public:
  LogFormatError(std::size_t record, const std::string& what)
      : std::runtime_error("record " + std::to_string(record) + ": " + what), record_(record) {}
  std::size_t record() const { return record_; }

 private:
  std::size_t record_;
};

class SchemaMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json sim_config_to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const nlohmann::json& j);

/// Newline-delimited JSON: a header record (schema, seed, scenario, sim config, tick count)
/// followed by one record per tick. Scan angles are not stored; they follow the simulator's
/// evenly spaced layout and are rebuilt on read. Doubles round-trip exactly.
void write_episode_log(std::ostream& out, const EpisodeLog& log);

/// Throws SchemaMismatch for a different schema, LogFormatError for anything malformed,
/// including a log with fewer tick records than its header announces.
EpisodeLog read_episode_log(std::istream& in);

/// One NDJSON record with the map published at a tick.
nlohmann::json published_record(int tick, double time, const std::vector<CostedObstacle>& published);

}  // namespace occpred
