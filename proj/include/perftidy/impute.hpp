#pragma once

// Metric-aware repair of MISSING cells.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "perftidy/text.hpp"
#include "perftidy/timealign.hpp"
#include "perftidy/types.hpp"

namespace perftidy {

enum class MetricKind { EventBased, SampleBased };

struct MetricClass {
  MetricKind kind = MetricKind::SampleBased;
  bool steady_state = false;
};

/// GC-derived metrics are event-based; everything else is sampled.
inline MetricClass classify_metric(std::string_view metric_name, bool steady_state = false) {
  const bool gc = metric_name.starts_with("gc.");
  return {gc ? MetricKind::EventBased : MetricKind::SampleBased, steady_state};
}

enum class ImputeMethod { Zero, LinearInterpolation, Mean, Median, Max, Min, None };
enum class Boundary { LeaveMissing, Nearest };

inline std::string_view to_string(ImputeMethod m) {
  switch (m) {
    case ImputeMethod::Zero: return "zero";
    case ImputeMethod::LinearInterpolation: return "linear-interpolation";
    case ImputeMethod::Mean: return "mean";
    case ImputeMethod::Median: return "median";
    case ImputeMethod::Max: return "max";
    case ImputeMethod::Min: return "min";
    case ImputeMethod::None: return "none";
  }
  return "none";
}

inline ImputeMethod impute_method_from_string(std::string_view s) {
  if (s == "zero") return ImputeMethod::Zero;
  if (s == "linear-interpolation" || s == "linear") return ImputeMethod::LinearInterpolation;
  if (s == "mean") return ImputeMethod::Mean;
  if (s == "median") return ImputeMethod::Median;
  if (s == "max") return ImputeMethod::Max;
  if (s == "min") return ImputeMethod::Min;
  if (s == "none") return ImputeMethod::None;
  throw Error(ErrorCode::BadPolicy, "unknown imputation method '" + std::string(s) + "'");
}

inline std::string_view to_string(Boundary b) {
  return b == Boundary::LeaveMissing ? "leave-missing" : "nearest";
}

inline Boundary boundary_from_string(std::string_view s) {
  if (s == "leave-missing") return Boundary::LeaveMissing;
  if (s == "nearest") return Boundary::Nearest;
  throw Error(ErrorCode::BadPolicy, "unknown boundary rule '" + std::string(s) + "'");
}

struct ImputationPolicy {
  ImputeMethod method = ImputeMethod::LinearInterpolation;
  Boundary boundary = Boundary::LeaveMissing;
  /// Permits zero-fill on sample-based metrics.
  bool allow_zero_for_sampled = false;

  friend bool operator==(const ImputationPolicy&, const ImputationPolicy&) = default;
};

inline ImputationPolicy default_policy(const MetricClass& cls) {
  if (cls.kind == MetricKind::EventBased) return {ImputeMethod::Zero, Boundary::LeaveMissing};
  if (cls.steady_state) return {ImputeMethod::Median, Boundary::LeaveMissing};
  return {ImputeMethod::LinearInterpolation, Boundary::LeaveMissing};
}

struct ImputedSeries {
  Series values;
  /// true where the cell was MISSING on input and filled on output.
  std::vector<bool> imputed;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline double mean_of(const std::vector<double>& v) {
  // Two-pass mean: the correction term removes most of the summation error.
  double sum = 0.0;
  for (double x : v) sum += x;
  const double m = sum / static_cast<double>(v.size());
  double corr = 0.0;
  for (double x : v) corr += x - m;
  return m + corr / static_cast<double>(v.size());
}

}  // namespace detail

/// Fills MISSING cells per `policy`. Zero and the summary statistics
/// (mean/median/max/min) are position-free and fill every MISSING cell; the
/// boundary rule governs linear interpolation, which has no two-sided support
/// before the first or after the last present cell. Present cells are never
/// touched.
inline ImputedSeries impute_series(const Series& series, const ImputationPolicy& policy) {
  ImputedSeries out{series, std::vector<bool>(series.size(), false)};
  if (policy.method == ImputeMethod::None) return out;

  auto fill = [&](std::size_t i, double v) {
    out.values[i] = v;
    out.imputed[i] = true;
  };

  if (policy.method == ImputeMethod::Zero) {
    for (std::size_t i = 0; i < series.size(); ++i)
      if (!series[i]) fill(i, 0.0);
    return out;
  }

  std::vector<std::size_t> present;
  std::vector<double> values;
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i]) {
      present.push_back(i);
      values.push_back(*series[i]);
    }
  if (present.empty())
    throw Error(ErrorCode::AllMissing, std::string(to_string(policy.method)) + " needs at least one present cell");
  if (present.size() == series.size()) return out;

  if (policy.method == ImputeMethod::LinearInterpolation) {
    for (std::size_t k = 1; k < present.size(); ++k) {
      const std::size_t a = present[k - 1], b = present[k];
      const double va = *series[a], vb = *series[b];
      const double span = static_cast<double>(b - a);
      for (std::size_t i = a + 1; i < b; ++i) {
        const double w = static_cast<double>(i - a) / span;
        fill(i, va + (vb - va) * w);
      }
    }
    if (policy.boundary == Boundary::Nearest) {
      for (std::size_t i = 0; i < present.front(); ++i) fill(i, values.front());
      for (std::size_t i = present.back() + 1; i < series.size(); ++i) fill(i, values.back());
    }
    return out;
  }

  double stat = 0.0;
  switch (policy.method) {
    case ImputeMethod::Mean: stat = detail::mean_of(values); break;
    case ImputeMethod::Median: stat = detail::median_of(values); break;
    case ImputeMethod::Max: stat = *std::max_element(values.begin(), values.end()); break;
    case ImputeMethod::Min: stat = *std::min_element(values.begin(), values.end()); break;
    default: break;
  }
  for (std::size_t i = 0; i < series.size(); ++i)
    if (!series[i]) fill(i, stat);
  return out;
}

/// Ordered glob rules; the first rule whose glob matches the metric name wins,
/// otherwise default_policy(classify_metric(name, steady_state)).
struct PolicyMap {
  std::vector<std::pair<std::string, ImputationPolicy>> rules;
  bool steady_state = false;

  ImputationPolicy resolve(const std::string& metric_name) const {
    for (const auto& [glob, policy] : rules)
      if (text::glob_match(glob, metric_name)) return policy;
    return default_policy(classify_metric(metric_name, steady_state));
  }
};

struct ImputedTable {
  TidyTable table;
  std::vector<std::vector<bool>> masks;  // per column
  std::vector<double> imputed_fraction;  // per column
  std::vector<ImputationPolicy> policies;  // per column, as applied
};

inline ImputedTable impute_table(const TidyTable& table, const PolicyMap& policies = {}) {
  ImputedTable out;
  std::vector<Series> cells;
  for (std::size_t c = 0; c < table.n_columns(); ++c) {
    const auto& col = table.columns()[c];
    const ImputationPolicy policy = policies.resolve(col.metric_name);
    try {
      if (policy.method == ImputeMethod::Zero && !policy.allow_zero_for_sampled &&
          classify_metric(col.metric_name).kind == MetricKind::SampleBased)
        throw Error(ErrorCode::BadPolicy, "zero-fill on a sample-based metric needs an explicit override");
      auto filled = impute_series(table.column(c), policy);
      const auto n_imputed = std::count(filled.imputed.begin(), filled.imputed.end(), true);
      out.imputed_fraction.push_back(table.n_rows() ? static_cast<double>(n_imputed) / static_cast<double>(table.n_rows()) : 0.0);
      out.masks.push_back(std::move(filled.imputed));
      cells.push_back(std::move(filled.values));
      out.policies.push_back(policy);
    } catch (const Error& e) {
      throw Error(e.code(), "column " + col.id() + ": " + e.detail(), e.line());
    }
  }
  out.table = TidyTable(table.grid(), table.columns(), std::move(cells));
  return out;
}

/// Provenance file: `ts;host;metric;imputed` with one row per cell.
inline std::string to_mask_text(const ImputedTable& t) {
  std::string out = "ts;host;metric;imputed\n";
  const auto& table = t.table;
  for (std::size_t i = 0; i < table.n_rows(); ++i)
    for (std::size_t c = 0; c < table.n_columns(); ++c)
      out += std::to_string(table.grid().at(i)) + ";" + table.columns()[c].host_id + ";" +
             table.columns()[c].metric_name + ";" + (t.masks[c][i] ? "1" : "0") + "\n";
  return out;
}

}  // namespace perftidy
