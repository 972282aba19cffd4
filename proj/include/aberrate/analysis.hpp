#pragma once

#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace aberrate::analysis {

// One evaluated (model, corruption, severity or field, metric) cell; value in percent.
struct ResultRow {
  std::string model;
  std::string corruption;
  std::string severity;
  std::string metric;
  double value = 0.0;
};

struct CleanRow {
  std::string model;
  std::string metric;
  double clean_value = 0.0;
};

// Header "model,corruption,severity,metric,value". Rejects duplicate keys and non-finite values.
std::vector<ResultRow> read_results_csv(std::istream& in);
// Header "model,metric,clean_value".
std::vector<CleanRow> read_clean_csv(std::istream& in);

struct RankCorrelation {
  double tau_b = 0.0;
  double p_value = 1.0;
  int n = 0;
};

// Tie-corrected Kendall tau-b in O(n log n); two-sided p-value from the normal approximation with
// the tie-corrected variance of the S statistic. Error{"undefined_correlation"} if either side is
// constant.
RankCorrelation kendall_tau_b(std::span<const double> x, std::span<const double> y);

struct DeltaRow {
  std::string model;
  std::string corruption;
  std::string severity;
  std::string metric;
  double corrupted = 0.0;
  double clean = 0.0;
  double delta = 0.0;  // corrupted - clean; negative means degradation
};

struct DeltaReport {
  std::vector<DeltaRow> rows;     // sorted by key
  std::vector<DeltaRow> summary;  // per (model, metric), averaged over corruptions and severities
};

// Error{"missing_clean"} names the first model without a clean value for the metric.
DeltaReport robustness_delta(const std::vector<ResultRow>& results, const std::vector<CleanRow>& clean);

struct AggregateRow {
  std::map<std::string, std::string> keys;
  double mean = 0.0;
  std::size_t count = 0;
};

// Groups by any of model, corruption, severity (alias field), metric; no keys or "overall" gives
// one row. Groups are ordered by their key values.
std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& results, const std::vector<std::string>& keys);
// Treats each delta as a row value, so deltas aggregate the same way.
std::vector<ResultRow> delta_rows(const DeltaReport& report);

struct PairCorrelation {
  std::string a;
  std::string b;
  RankCorrelation correlation;
};

// Kendall tau-b between the model rankings of every pair of corruptions at one severity, over the
// models present in both.
std::vector<PairCorrelation> corruption_rank_correlations(const std::vector<ResultRow>& results,
                                                          const std::string& metric, const std::string& severity);

std::string to_csv(const DeltaReport& report);
std::string to_csv(const std::vector<AggregateRow>& rows, const std::vector<std::string>& keys);
std::string to_csv(const std::vector<PairCorrelation>& rows);
nlohmann::json to_json(const DeltaReport& report);
nlohmann::json to_json(const std::vector<AggregateRow>& rows);
nlohmann::json to_json(const std::vector<PairCorrelation>& rows);

}  // namespace aberrate::analysis
