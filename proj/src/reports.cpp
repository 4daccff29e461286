#include "occpred/reports.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace occpred {

namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

constexpr std::array<Category, kCategoryCount> kCategories = {Category::Agent, Category::Obstacle,
                                                              Category::Incorrect, Category::Unseen};

}  // namespace

std::string format_number(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

// Bin edges always carry a decimal point so "0.0-0.5" reads as a range, not a date or a subtraction.
std::string edge_label(double v) {
  std::string s = format_number(v);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::string bins_csv(const DistanceBinReport& bins) {
  std::ostringstream out;
  out << "range,agent_pct,obstacle_pct,incorrect_pct,unseen_pct,n\n";
  for (const auto& row : bins.rows) {
    out << edge_label(row.lo) << '-' << edge_label(row.hi);
    for (Category c : kCategories) out << ',' << format_number(row.percent(c));
    out << ',' << row.n << '\n';
  }
  return out.str();
}

std::string scatter_csv(const ScatterData& scatter) {
  std::ostringstream out;
  out << "cost,error,category,robot_distance\n";
  for (const auto& r : scatter.records) {
    out << format_number(r.cost) << ',' << format_number(r.error) << ',' << to_string(r.category) << ','
        << format_number(r.robot_distance) << '\n';
  }
  return out.str();
}

json summary_json(const AggregateReport& report) {
  const AggregateSummary& s = report.summary;
  json j;
  j["counting"] = "each published prediction is scored once per tick snapshot";
  j["seeds"] = s.seeds;
  j["failed_seeds"] = s.failed_seeds;
  j["total_predictions"] = s.total_predictions;
  j["raw_predictions"] = s.raw_predictions;
  j["cleared_predictions"] = s.cleared_predictions;
  j["out_of_range_predictions"] = report.bins.out_of_range;
  j["mean_unseen_error"] = number_or_null(s.mean_unseen_error);
  json counts = json::object();
  json means = json::object();
  for (Category c : kCategories) {
    counts[to_string(c)] = s.category_counts[static_cast<std::size_t>(c)];
    means[to_string(c)] = number_or_null(s.mean_error[static_cast<std::size_t>(c)]);
  }
  j["category_counts"] = counts;
  j["mean_error"] = means;
  j["incorrect_pct_by_bin"] = json::array();
  for (std::size_t i = 0; i < report.bins.rows.size(); ++i) {
    const auto& row = report.bins.rows[i];
    j["incorrect_pct_by_bin"].push_back(
        {{"lo", row.lo}, {"hi", row.hi}, {"pct", number_or_null(row.percent(Category::Incorrect))}, {"n", row.n}});
  }
  j["cost_deciles"] = json::array();
  for (const auto& d : report.scatter.deciles) {
    json dj{{"lo", d.lo}, {"hi", d.hi}};
    for (Category c : kCategories) {
      const auto k = static_cast<std::size_t>(c);
      dj[to_string(c)] = {{"n", d.counts[k]}, {"mean_error", number_or_null(d.mean_error[k])}};
    }
    j["cost_deciles"].push_back(dj);
  }
  j["failures"] = json::array();
  for (const auto& t : report.trials) {
    if (!t.ok) j["failures"].push_back({{"seed", t.seed}, {"error", t.error}});
  }
  return j;
}

}  // namespace occpred
