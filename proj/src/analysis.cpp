#include "aberrate/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "aberrate/error.hpp"

namespace aberrate::analysis {
namespace {

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

// Reads a CSV with a header containing `columns` (any order, extra columns ignored).
std::vector<std::vector<std::string>> read_table(std::istream& in, const std::vector<std::string>& columns) {
  std::string line;
  if (!std::getline(in, line)) throw Error("format", "CSV input is empty");
  const auto header = parse_csv_line(line);
  std::vector<std::size_t> index;
  for (const auto& col : columns) {
    auto it = std::find(header.begin(), header.end(), col);
    if (it == header.end()) throw Error("format", "CSV header lacks column '" + col + "'");
    index.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  std::vector<std::vector<std::string>> rows;
  for (int line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty() || line == "\r") continue;
    const auto fields = parse_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error("format", "CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                " fields, expected " + std::to_string(header.size()));
    }
    std::vector<std::string> row;
    for (auto i : index) row.push_back(fields[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

double parse_value(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::logic_error&) {
    throw Error("format", "not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw Error("format", "not a finite number: '" + s + "'");
  return v;
}

// Counts pairs tied within runs of equal values of a sorted sequence:
// sum t(t-1)/2, sum t(t-1)(t-2), sum t(t-1)(2t+5) over run lengths t.
struct TieCounts {
  std::int64_t pairs = 0;
  double v0 = 0.0;
  double v1 = 0.0;
};

template <typename Eq>
TieCounts count_ties(std::size_t n, Eq equal) {
  TieCounts tc;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && equal(i, j)) ++j;
    const double t = static_cast<double>(j - i);
    tc.pairs += static_cast<std::int64_t>((j - i) * (j - i - 1) / 2);
    tc.v0 += t * (t - 1) * (t - 2);
    tc.v1 += t * (t - 1) * (2 * t + 5);
    i = j;
  }
  return tc;
}

// Merge sort counting inversions.
std::int64_t sort_count_swaps(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = sort_count_swaps(v, buf, lo, mid) + sort_count_swaps(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

std::string key_value(const ResultRow& r, const std::string& key) {
  if (key == "model") return r.model;
  if (key == "corruption") return r.corruption;
  if (key == "severity" || key == "field") return r.severity;
  if (key == "metric") return r.metric;
  throw Error("usage", "unknown grouping key '" + key + "' (expected model|corruption|severity|field|metric|overall)");
}

}  // namespace

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::vector<ResultRow> out;
  std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;
  for (auto& f : read_table(in, {"model", "corruption", "severity", "metric", "value"})) {
    ResultRow r{f[0], f[1], f[2], f[3], parse_value(f[4])};
    if (!seen.emplace(r.model, r.corruption, r.severity, r.metric).second) {
      throw Error("duplicate_key", "duplicate result for " + r.model + "/" + r.corruption + "/" + r.severity + "/" +
                                       r.metric);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CleanRow> read_clean_csv(std::istream& in) {
  std::vector<CleanRow> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& f : read_table(in, {"model", "metric", "clean_value"})) {
    CleanRow r{f[0], f[1], parse_value(f[2])};
    if (!seen.emplace(r.model, r.metric).second) throw Error("duplicate_key", "duplicate clean value for " + r.model);
    out.push_back(std::move(r));
  }
  return out;
}

RankCorrelation kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("range", "rankings must have equal length");
  const std::size_t n = x.size();
  if (n < 2) throw Error("range", "need at least two ranked items");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error("range", "rankings must be finite");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  const auto tx = count_ties(n, [&](std::size_t i, std::size_t j) { return x[order[i]] == x[order[j]]; });
  const auto txy = count_ties(n, [&](std::size_t i, std::size_t j) {
    return x[order[i]] == x[order[j]] && y[order[i]] == y[order[j]];
  });
  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::int64_t swaps = sort_count_swaps(ys, buf, 0, n);
  const auto ty = count_ties(n, [&](std::size_t i, std::size_t j) { return ys[i] == ys[j]; });

  const std::int64_t n0 = static_cast<std::int64_t>(n * (n - 1) / 2);
  if (tx.pairs == n0 || ty.pairs == n0) throw Error("undefined_correlation", "a ranking is constant");
  const std::int64_t s = n0 - tx.pairs - ty.pairs + txy.pairs - 2 * swaps;

  RankCorrelation r;
  r.n = static_cast<int>(n);
  r.tau_b = static_cast<double>(s) /
            std::sqrt(static_cast<double>(n0 - tx.pairs) * static_cast<double>(n0 - ty.pairs));
  r.tau_b = std::clamp(r.tau_b, -1.0, 1.0);

  const double nd = static_cast<double>(n);
  const double m = nd * (nd - 1.0);
  double var = (m * (2.0 * nd + 5.0) - tx.v1 - ty.v1) / 18.0 +
               2.0 * static_cast<double>(tx.pairs) * static_cast<double>(ty.pairs) / m;
  if (n > 2) var += tx.v0 * ty.v0 / (9.0 * m * (nd - 2.0));
  r.p_value = var > 0.0 ? std::min(1.0, std::erfc(std::abs(static_cast<double>(s)) / std::sqrt(var) / std::sqrt(2.0))) : 1.0;
  return r;
}

DeltaReport robustness_delta(const std::vector<ResultRow>& results, const std::vector<CleanRow>& clean) {
  std::map<std::pair<std::string, std::string>, double> clean_by_key;
  for (const auto& c : clean) clean_by_key[{c.model, c.metric}] = c.clean_value;

  DeltaReport report;
  std::map<std::pair<std::string, std::string>, std::tuple<double, double, std::size_t>> sums;
  for (const auto& r : results) {
    auto it = clean_by_key.find({r.model, r.metric});
    if (it == clean_by_key.end()) throw Error("missing_clean", "no clean " + r.metric + " value for model " + r.model);
    report.rows.push_back({r.model, r.corruption, r.severity, r.metric, r.value, it->second, r.value - it->second});
    auto& [sum_corrupted, sum_delta, count] = sums[{r.model, r.metric}];
    sum_corrupted += r.value;
    sum_delta += r.value - it->second;
    ++count;
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const DeltaRow& a, const DeltaRow& b) {
    return std::tie(a.model, a.corruption, a.severity, a.metric) < std::tie(b.model, b.corruption, b.severity, b.metric);
  });
  for (const auto& [key, v] : sums) {
    const auto& [sum_corrupted, sum_delta, count] = v;
    const double n = static_cast<double>(count);
    report.summary.push_back({key.first, "all", "all", key.second, sum_corrupted / n, clean_by_key[key], sum_delta / n});
  }
  return report;
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& results, const std::vector<std::string>& keys) {
  if (results.empty()) throw Error("range", "cannot aggregate an empty table");
  std::vector<std::string> effective;
  for (const auto& k : keys) {
    if (k == "overall") continue;
    key_value(results.front(), k);  // validates the name
    effective.push_back(k);
  }
  std::map<std::vector<std::string>, std::pair<double, std::size_t>> groups;
  for (const auto& r : results) {
    std::vector<std::string> values;
    for (const auto& k : effective) values.push_back(key_value(r, k));
    auto& [sum, count] = groups[values];
    sum += r.value;
    ++count;
  }
  std::vector<AggregateRow> out;
  for (const auto& [values, acc] : groups) {
    AggregateRow row;
    for (std::size_t i = 0; i < effective.size(); ++i) row.keys[effective[i]] = values[i];
    row.mean = acc.first / static_cast<double>(acc.second);
    row.count = acc.second;
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<ResultRow> delta_rows(const DeltaReport& report) {
  std::vector<ResultRow> out;
  for (const auto& d : report.rows) out.push_back({d.model, d.corruption, d.severity, d.metric, d.delta});
  return out;
}

std::vector<PairCorrelation> corruption_rank_correlations(const std::vector<ResultRow>& results,
                                                          const std::string& metric, const std::string& severity) {
  std::map<std::string, std::map<std::string, double>> by_corruption;  // corruption -> model -> value
  for (const auto& r : results)
    if (r.metric == metric && r.severity == severity) by_corruption[r.corruption][r.model] = r.value;
  std::vector<PairCorrelation> out;
  for (auto a = by_corruption.begin(); a != by_corruption.end(); ++a)
    for (auto b = std::next(a); b != by_corruption.end(); ++b) {
      std::vector<double> x, y;
      for (const auto& [model, value] : a->second) {
        auto it = b->second.find(model);
        if (it == b->second.end()) continue;
        x.push_back(value);
        y.push_back(it->second);
      }
      if (x.size() < 2) continue;
      out.push_back({a->first, b->first, kendall_tau_b(x, y)});
    }
  return out;
}

std::string to_csv(const DeltaReport& report) {
  std::ostringstream out;
  out << "model,corruption,severity,metric,corrupted,clean,delta\n" << std::setprecision(10);
  for (const auto* rows : {&report.rows, &report.summary})
    for (const auto& d : *rows)
      out << csv_field(d.model) << ',' << csv_field(d.corruption) << ',' << csv_field(d.severity) << ','
          << csv_field(d.metric) << ',' << d.corrupted << ',' << d.clean << ',' << d.delta << '\n';
  return out.str();
}

std::string to_csv(const std::vector<AggregateRow>& rows, const std::vector<std::string>& keys) {
  std::vector<std::string> effective;
  for (const auto& k : keys)
    if (k != "overall") effective.push_back(k);
  std::ostringstream out;
  for (const auto& k : effective) out << k << ',';
  out << "mean,count\n" << std::setprecision(10);
  for (const auto& r : rows) {
    for (const auto& k : effective) out << csv_field(r.keys.at(k)) << ',';
    out << r.mean << ',' << r.count << '\n';
  }
  return out.str();
}

std::string to_csv(const std::vector<PairCorrelation>& rows) {
  std::ostringstream out;
  out << "corruption_a,corruption_b,tau_b,p_value,n\n" << std::setprecision(10);
  for (const auto& r : rows)
    out << csv_field(r.a) << ',' << csv_field(r.b) << ',' << r.correlation.tau_b << ',' << r.correlation.p_value
        << ',' << r.correlation.n << '\n';
  return out.str();
}

nlohmann::json to_json(const DeltaReport& report) {
  const auto rows = [](const std::vector<DeltaRow>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& d : v)
      a.push_back({{"model", d.model}, {"corruption", d.corruption}, {"severity", d.severity}, {"metric", d.metric},
                   {"corrupted", d.corrupted}, {"clean", d.clean}, {"delta", d.delta}});
    return a;
  };
  return {{"rows", rows(report.rows)}, {"summary", rows(report.summary)}};
}

nlohmann::json to_json(const std::vector<AggregateRow>& rows) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rows) a.push_back({{"keys", r.keys}, {"mean", r.mean}, {"count", r.count}});
  return a;
}

nlohmann::json to_json(const std::vector<PairCorrelation>& rows) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rows)
    a.push_back({{"corruption_a", r.a}, {"corruption_b", r.b}, {"tau_b", r.correlation.tau_b},
                 {"p_value", r.correlation.p_value}, {"n", r.correlation.n}});
  return a;
}

}  // namespace aberrate::analysis
