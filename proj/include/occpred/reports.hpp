#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "occpred/eval.hpp"

namespace occpred {

/// Shortest decimal text that parses back to the same double. Non-finite values become "NA".
std::string format_number(double v);

/// Columns: range, agent_pct, obstacle_pct, incorrect_pct, unseen_pct, n. Empty rows print "NA" percentages.
std::string bins_csv(const DistanceBinReport& bins);

/// Columns: cost, error, category, robot_distance. One line per scored prediction.
std::string scatter_csv(const ScatterData& scatter);

/// Headline numbers, per-category means, per-bin incorrect rates, cost deciles and per-seed failures.
nlohmann::json summary_json(const AggregateReport& report);

}  // namespace occpred
