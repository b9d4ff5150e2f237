#pragma once

// Scale transforms (center, zscore, minmax, log, inverse) with fitted
// parameters for exact inversion.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "perftidy/text.hpp"
#include "perftidy/timealign.hpp"
#include "perftidy/types.hpp"

namespace perftidy {

enum class TransformMethod { Center, ZScore, MinMax, Log, Inverse };

inline std::string_view to_string(TransformMethod m) {
  switch (m) {
    case TransformMethod::Center: return "center";
    case TransformMethod::ZScore: return "zscore";
    case TransformMethod::MinMax: return "minmax";
    case TransformMethod::Log: return "log";
    case TransformMethod::Inverse: return "inverse";
  }
  return "center";
}

inline TransformMethod transform_method_from_string(std::string_view s) {
  if (s == "center") return TransformMethod::Center;
  if (s == "zscore") return TransformMethod::ZScore;
  if (s == "minmax") return TransformMethod::MinMax;
  if (s == "log") return TransformMethod::Log;
  if (s == "inverse") return TransformMethod::Inverse;
  throw Error(ErrorCode::BadSpec, "unknown transform '" + std::string(s) + "'");
}

struct TransformSpec {
  TransformMethod method = TransformMethod::ZScore;
  double log_offset = 0.0;  // natural log of (x + log_offset)
};

/// Parameters estimated from the present cells of the input.
struct FittedParams {
  TransformMethod method = TransformMethod::ZScore;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  double min = 0.0;
  double max = 0.0;
  double log_offset = 0.0;
};

struct TransformedSeries {
  Series values;
  FittedParams fitted;
};

inline TransformedSeries transform_series(const Series& series, const TransformSpec& spec) {
  if (!(spec.log_offset >= 0.0) || !std::isfinite(spec.log_offset))
    throw Error(ErrorCode::BadSpec, "log_offset must be a finite non-negative number");
  std::vector<double> xs;
  for (const auto& c : series)
    if (c) xs.push_back(*c);
  if (xs.size() < 2) throw Error(ErrorCode::BadArgument, "transform needs at least 2 present values");

  FittedParams f;
  f.method = spec.method;
  f.log_offset = spec.log_offset;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  f.mean = sum / n;
  double ss = 0.0, corr = 0.0;
  for (double x : xs) {
    ss += (x - f.mean) * (x - f.mean);
    corr += x - f.mean;
  }
  f.mean += corr / n;
  f.sd = std::sqrt((ss - corr * corr / n) / (n - 1.0));
  auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  f.min = *lo;
  f.max = *hi;

  // Exactly-constant input has ss == 0 up to rounding of the mean.
  const bool constant = f.min == f.max;
  if (spec.method == TransformMethod::ZScore && (constant || f.sd == 0.0))
    throw Error(ErrorCode::ZeroVariance, "zscore of a constant series");
  if (spec.method == TransformMethod::MinMax && constant)
    throw Error(ErrorCode::DegenerateRange, "minmax with max == min");

  TransformedSeries out{Series(series.size()), f};
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!series[i]) continue;
    const double x = *series[i];
    switch (spec.method) {
      case TransformMethod::Center: out.values[i] = x - f.mean; break;
      case TransformMethod::ZScore: out.values[i] = (x - f.mean) / f.sd; break;
      case TransformMethod::MinMax: out.values[i] = (x - f.min) / (f.max - f.min); break;
      case TransformMethod::Log:
        if (!(x + spec.log_offset > 0.0))
          throw Error(ErrorCode::NonPositive, "log argument " + text::format_double(x + spec.log_offset) +
                                                  " at index " + std::to_string(i));
        out.values[i] = std::log(x + spec.log_offset);
        break;
      case TransformMethod::Inverse:
        if (x == 0.0) throw Error(ErrorCode::DivZero, "inverse of 0 at index " + std::to_string(i));
        out.values[i] = 1.0 / x;
        break;
    }
  }
  return out;
}

/// Undoes transform_series. center/zscore/minmax need the fitted parameters;
/// they are not checked for plausibility, so wrong parameters give wrong values.
inline Series inverse_transform(const Series& series, const TransformSpec& spec,
                                const std::optional<FittedParams>& fitted) {
  const bool needs_fit = spec.method == TransformMethod::Center || spec.method == TransformMethod::ZScore ||
                         spec.method == TransformMethod::MinMax;
  if (needs_fit && !fitted)
    throw Error(ErrorCode::MissingFitted, std::string(to_string(spec.method)) + " inversion needs fitted parameters");
  if (fitted && fitted->method != spec.method)
    throw Error(ErrorCode::MissingFitted, "fitted parameters belong to " + std::string(to_string(fitted->method)));
  Series out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!series[i]) continue;
    const double y = *series[i];
    switch (spec.method) {
      case TransformMethod::Center: out[i] = y + fitted->mean; break;
      case TransformMethod::ZScore: out[i] = y * fitted->sd + fitted->mean; break;
      case TransformMethod::MinMax: out[i] = y * (fitted->max - fitted->min) + fitted->min; break;
      case TransformMethod::Log: out[i] = std::exp(y) - spec.log_offset; break;
      case TransformMethod::Inverse: out[i] = 1.0 / y; break;
    }
  }
  return out;
}

inline nlohmann::json to_json(const FittedParams& f) {
  return {{"method", to_string(f.method)}, {"mean", f.mean}, {"sd", f.sd}, {"min", f.min},
          {"max", f.max}, {"log_offset", f.log_offset}};
}

inline FittedParams fitted_from_json(const nlohmann::json& j) {
  FittedParams f;
  f.method = transform_method_from_string(j.at("method").get<std::string>());
  f.mean = j.at("mean").get<double>();
  f.sd = j.at("sd").get<double>();
  f.min = j.at("min").get<double>();
  f.max = j.at("max").get<double>();
  f.log_offset = j.value("log_offset", 0.0);
  return f;
}

/// Glob → spec rules; first match wins, unmatched columns pass through unchanged.
struct TransformMap {
  std::vector<std::pair<std::string, TransformSpec>> rules;

  std::optional<TransformSpec> resolve(const std::string& metric_name) const {
    for (const auto& [glob, spec] : rules)
      if (text::glob_match(glob, metric_name)) return spec;
    return std::nullopt;
  }
};

struct TransformedTable {
  TidyTable table;
  /// Per column; nullopt where the column was left untransformed.
  std::vector<std::optional<FittedParams>> fitted;
  std::vector<std::string> diagnostics;
};

/// Applies the map columnwise. A column the transform rejects (constant under
/// zscore, zero under inverse, ...) is left as-is and reported in diagnostics.
inline TransformedTable transform_table(const TidyTable& table, const TransformMap& map) {
  TransformedTable out;
  std::vector<Series> cells;
  for (std::size_t c = 0; c < table.n_columns(); ++c) {
    const auto& col = table.columns()[c];
    auto spec = map.resolve(col.metric_name);
    if (!spec) {
      cells.push_back(table.column(c));
      out.fitted.push_back(std::nullopt);
      continue;
    }
    try {
      auto t = transform_series(table.column(c), *spec);
      cells.push_back(std::move(t.values));
      out.fitted.push_back(t.fitted);
    } catch (const Error& e) {
      out.diagnostics.push_back(col.id() + " left untransformed: " + e.what());
      cells.push_back(table.column(c));
      out.fitted.push_back(std::nullopt);
    }
  }
  out.table = TidyTable(table.grid(), table.columns(), std::move(cells));
  return out;
}

inline nlohmann::json fitted_table_json(const TransformedTable& t) {
  nlohmann::json cols = nlohmann::json::array();
  for (std::size_t c = 0; c < t.table.n_columns(); ++c) {
    nlohmann::json entry = {{"column", t.table.columns()[c].id()}};
    entry["fitted"] = t.fitted[c] ? to_json(*t.fitted[c]) : nlohmann::json(nullptr);
    cols.push_back(std::move(entry));
  }
  return {{"columns", cols}, {"diagnostics", t.diagnostics}};
}

}  // namespace perftidy
