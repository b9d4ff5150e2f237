#pragma once

// Two-layer data-quality model. The first layer runs correctness queries over
// the raw samples and the merged table; the second runs an ensemble of
// cross-metric performance models. Problems are reported as findings, never
// thrown.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "perftidy/text.hpp"
#include "perftidy/timealign.hpp"
#include "perftidy/types.hpp"

namespace perftidy {

enum class Severity { Info, Warn, Fail };

inline std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Info: return "info";
    case Severity::Warn: return "warn";
    case Severity::Fail: return "fail";
  }
  return "info";
}

struct QualityFinding {
  std::string check_id;
  Severity severity = Severity::Info;
  std::string subject;
  std::string detail;
  std::optional<double> measured;
  std::optional<double> threshold;

  friend bool operator==(const QualityFinding&, const QualityFinding&) = default;
};

namespace checks {
inline constexpr const char* kNoData = "correctness.no_data";
inline constexpr const char* kMonotonic = "correctness.monotonic_ts";
inline constexpr const char* kDuplicate = "correctness.duplicate_key";
inline constexpr const char* kRange = "correctness.range";
inline constexpr const char* kUnits = "correctness.unit_consistency";
inline constexpr const char* kRegularity = "correctness.sampling_regularity";
inline constexpr const char* kCompleteness = "correctness.completeness";
inline constexpr const char* kUndeclared = "correctness.undeclared_semantics";
inline constexpr const char* kLittlesLaw = "model.littles_law";
inline constexpr const char* kCpuDecomposition = "model.cpu_decomposition";
inline constexpr const char* kActivity = "model.activity_consistency";
}  // namespace checks

struct RangeBound {
  std::string glob;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

struct QualityConfig {
  std::vector<RangeBound> ranges{{"*_pct", 0.0, 100.0}};
  double completeness_warn = 0.5;    // MISSING fraction above which a column warns
  double regularity_cv = 0.1;        // gap coefficient of variation above which a stream warns
  double littles_law_tolerance = 0.1;
  double cpu_decomposition_tolerance = 2.0;  // percentage points
  double idle_busy_threshold = 20.0;         // busy % allowed while throughput is zero
  std::size_t activity_window = 3;           // grid points of zero throughput that make a window
  bool model_layer = true;
  std::set<std::string> models{checks::kLittlesLaw, checks::kCpuDecomposition, checks::kActivity};
  std::vector<std::string> undeclared_sources;
};

struct QualityReport {
  std::vector<QualityFinding> findings;
  std::size_t n_info = 0, n_warn = 0, n_fail = 0;
  bool pass = true;
};

namespace detail {

inline void sort_findings(std::vector<QualityFinding>& f) {
  std::stable_sort(f.begin(), f.end(), [](const auto& a, const auto& b) {
    return std::tie(a.check_id, a.subject, a.detail) < std::tie(b.check_id, b.subject, b.detail);
  });
}

inline const RangeBound* bound_for(const QualityConfig& cfg, const std::string& metric) {
  for (const auto& b : cfg.ranges)
    if (text::glob_match(b.glob, metric)) return &b;
  return nullptr;
}

struct RangeTally {
  std::size_t violations = 0;
  double worst_excess = -1.0;
  double worst_value = 0.0;
  double worst_bound = 0.0;

  void add(double v, const RangeBound& b) {
    double excess = 0.0, bound = 0.0;
    if (v < b.lo) {
      excess = b.lo - v;
      bound = b.lo;
    } else if (v > b.hi) {
      excess = v - b.hi;
      bound = b.hi;
    } else {
      return;
    }
    ++violations;
    if (excess > worst_excess) {
      worst_excess = excess;
      worst_value = v;
      worst_bound = bound;
    }
  }
};

inline std::string key_id(const std::pair<std::string, std::string>& k) { return k.first + "/" + k.second; }

inline std::vector<std::size_t> cpu_components(const TidyTable& table, const std::string& host) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < table.n_columns(); ++c) {
    const auto& col = table.columns()[c];
    if (col.host_id == host && text::glob_match("sar.cpu.*_pct", col.metric_name)) out.push_back(c);
  }
  return out;
}

inline std::set<std::string> hosts(const TidyTable& table) {
  std::set<std::string> out;
  for (const auto& col : table.columns()) out.insert(col.host_id);
  return out;
}

/// Busy CPU percentage per grid point: 100 - idle when idle is reported,
/// otherwise the sum of the remaining components.
inline std::vector<std::optional<double>> busy_series(const TidyTable& table, const std::string& host) {
  std::vector<std::optional<double>> out(table.n_rows());
  if (auto idle = table.find(host, "sar.cpu.idle_pct")) {
    for (std::size_t i = 0; i < table.n_rows(); ++i)
      if (const auto& v = table.column(*idle)[i]) out[i] = 100.0 - *v;
    return out;
  }
  auto comps = cpu_components(table, host);
  if (comps.empty()) return out;
  for (std::size_t i = 0; i < table.n_rows(); ++i) {
    double sum = 0.0;
    bool all = true;
    for (auto c : comps) {
      if (!table.column(c)[i]) {
        all = false;
        break;
      }
      sum += *table.column(c)[i];
    }
    if (all) out[i] = sum;
  }
  return out;
}

inline QualityFinding model_finding(const char* id, std::string subject, std::string detail, double measured,
                                    double threshold) {
  const bool fail = measured > threshold;
  return {id, fail ? Severity::Fail : Severity::Info, std::move(subject),
          (fail ? "violated: " : "ok: ") + detail, measured, threshold};
}

inline QualityFinding skipped(const char* id, const std::string& why) {
  return {id, Severity::Info, "table", "skipped: " + why, std::nullopt, std::nullopt};
}

}  // namespace detail

/// Correctness layer: monotonic timestamps per source, duplicate keys, value
/// ranges, one unit per metric, sampling regularity, completeness, and
/// sources whose reporting semantics were not declared.
inline std::vector<QualityFinding> check_correctness(const TidyTable& table, std::span<const MetricSample> samples,
                                                     const QualityConfig& cfg = {}) {
  std::vector<QualityFinding> out;
  if (table.n_columns() == 0 && samples.empty()) {
    out.push_back({checks::kNoData, Severity::Info, "table", "no data", std::nullopt, std::nullopt});
    return out;
  }

  // Monotonic timestamps in input order, per (source, host).
  {
    std::map<std::pair<std::string, std::string>, std::pair<TimestampNs, std::size_t>> last;
    for (const auto& s : samples) {
      auto [it, fresh] = last.try_emplace({s.source_id, s.host_id}, s.ts, 0);
      if (!fresh) {
        if (s.ts < it->second.first) ++it->second.second;
        it->second.first = s.ts;
      }
    }
    for (const auto& [key, state] : last)
      if (state.second > 0)
        out.push_back({checks::kMonotonic, Severity::Fail, key.first + "@" + key.second,
                       std::to_string(state.second) + " timestamp regression(s)", static_cast<double>(state.second), 0.0});
  }

  // Duplicate (host, metric, ts) keys.
  {
    std::map<std::pair<std::string, std::string>, std::map<TimestampNs, std::size_t>> seen;
    for (const auto& s : samples) ++seen[{s.host_id, s.metric_name}][s.ts];
    for (const auto& [key, counts] : seen) {
      std::size_t dups = 0;
      for (const auto& [ts, n] : counts) dups += n - 1;
      if (dups > 0)
        out.push_back({checks::kDuplicate, Severity::Fail, detail::key_id(key),
                       std::to_string(dups) + " duplicate sample(s)", static_cast<double>(dups), 0.0});
    }
  }

  // Ranges, from raw samples when available, otherwise from table cells.
  {
    std::map<std::pair<std::string, std::string>, std::pair<const RangeBound*, detail::RangeTally>> tallies;
    auto add = [&](const std::string& host, const std::string& metric, double v) {
      const RangeBound* b = detail::bound_for(cfg, metric);
      if (!b) return;
      auto& entry = tallies[{host, metric}];
      entry.first = b;
      entry.second.add(v, *b);
    };
    if (!samples.empty()) {
      for (const auto& s : samples) add(s.host_id, s.metric_name, s.value);
    } else {
      for (std::size_t c = 0; c < table.n_columns(); ++c)
        for (const auto& v : table.column(c))
          if (v) add(table.columns()[c].host_id, table.columns()[c].metric_name, *v);
    }
    for (const auto& [key, entry] : tallies) {
      const auto& t = entry.second;
      if (t.violations == 0) continue;
      out.push_back({checks::kRange, Severity::Fail, detail::key_id(key),
                     std::to_string(t.violations) + " value(s) outside [" + text::format_double(entry.first->lo) + ", " +
                         text::format_double(entry.first->hi) + "] (glob " + entry.first->glob + ")",
                     t.worst_value, t.worst_bound});
    }
  }

  // One unit per metric name.
  {
    std::map<std::string, std::set<std::string>> units;
    if (!samples.empty())
      for (const auto& s : samples) units[s.metric_name].insert(s.unit);
    else
      for (const auto& col : table.columns()) units[col.metric_name].insert(col.unit);
    for (const auto& [metric, us] : units) {
      if (us.size() <= 1) continue;
      std::string list;
      for (const auto& u : us) list += (list.empty() ? "" : ", ") + u;
      out.push_back({checks::kUnits, Severity::Fail, metric, "units: " + list, static_cast<double>(us.size()), 1.0});
    }
  }

  // Sampling regularity of non-event streams.
  {
    std::map<std::pair<std::string, std::string>, std::vector<TimestampNs>> stamps;
    for (const auto& s : samples)
      if (s.semantics != Semantics::Event) stamps[{s.host_id, s.metric_name}].push_back(s.ts);
    for (auto& [key, ts] : stamps) {
      std::sort(ts.begin(), ts.end());
      ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
      if (ts.size() < 3) continue;
      std::vector<double> gaps;
      for (std::size_t i = 1; i < ts.size(); ++i) gaps.push_back(static_cast<double>(ts[i] - ts[i - 1]));
      double mean = 0.0;
      for (double g : gaps) mean += g;
      mean /= static_cast<double>(gaps.size());
      double ss = 0.0;
      for (double g : gaps) ss += (g - mean) * (g - mean);
      const double cv = std::sqrt(ss / static_cast<double>(gaps.size() - 1)) / mean;
      if (cv > cfg.regularity_cv)
        out.push_back({checks::kRegularity, Severity::Warn, detail::key_id(key),
                       "gap coefficient of variation exceeds threshold", cv, cfg.regularity_cv});
    }
  }

  // Completeness per table column.
  for (std::size_t c = 0; c < table.n_columns(); ++c) {
    const auto& s = table.column(c);
    const auto missing = std::count_if(s.begin(), s.end(), [](const auto& v) { return !v.has_value(); });
    const double frac = s.empty() ? 0.0 : static_cast<double>(missing) / static_cast<double>(s.size());
    if (frac > cfg.completeness_warn)
      out.push_back({checks::kCompleteness, Severity::Warn, table.columns()[c].id(),
                     std::to_string(missing) + " of " + std::to_string(s.size()) + " cells MISSING", frac,
                     cfg.completeness_warn});
  }

  for (const auto& src : cfg.undeclared_sources)
    out.push_back({checks::kUndeclared, Severity::Warn, src,
                   "reporting semantics not declared; ingested as instant-at-end", std::nullopt, std::nullopt});

  detail::sort_findings(out);
  return out;
}

/// Little's law: worst per-point |N - X*R| / max(X*R, 1) over hosts reporting all three.
inline QualityFinding littles_law_check(const TidyTable& table, const QualityConfig& cfg) {
  double worst = -1.0;
  std::string subject;
  TimestampNs worst_ts = 0;
  std::size_t points = 0;
  for (const auto& host : detail::hosts(table)) {
    auto x = table.find(host, "ux.throughput_ops_s");
    auto r = table.find(host, "ux.resp_time_s");
    auto n = table.find(host, "ux.concurrency");
    if (!x || !r || !n) continue;
    for (std::size_t i = 0; i < table.n_rows(); ++i) {
      const auto &xv = table.column(*x)[i], &rv = table.column(*r)[i], &nv = table.column(*n)[i];
      if (!xv || !rv || !nv) continue;
      ++points;
      const double predicted = *xv * *rv;
      const double err = std::abs(*nv - predicted) / std::max(predicted, 1.0);
      if (err > worst) {
        worst = err;
        subject = host + "/ux.concurrency";
        worst_ts = table.grid().at(i);
      }
    }
  }
  if (points == 0) return detail::skipped(checks::kLittlesLaw, "needs ux.throughput_ops_s, ux.resp_time_s, ux.concurrency");
  return detail::model_finding(checks::kLittlesLaw, subject,
                               "max relative error of N = X*R over " + std::to_string(points) + " point(s), worst at ts=" +
                                   std::to_string(worst_ts),
                               worst, cfg.littles_law_tolerance);
}

/// CPU components of each host must sum to 100 within tolerance.
inline QualityFinding cpu_decomposition_check(const TidyTable& table, const QualityConfig& cfg) {
  double worst = -1.0;
  std::string subject;
  TimestampNs worst_ts = 0;
  std::size_t points = 0;
  for (const auto& host : detail::hosts(table)) {
    auto comps = detail::cpu_components(table, host);
    if (comps.size() < 2) continue;
    for (std::size_t i = 0; i < table.n_rows(); ++i) {
      double sum = 0.0;
      bool all = true;
      for (auto c : comps) {
        if (!table.column(c)[i]) {
          all = false;
          break;
        }
        sum += *table.column(c)[i];
      }
      if (!all) continue;
      ++points;
      const double dev = std::abs(sum - 100.0);
      if (dev > worst) {
        worst = dev;
        subject = host + "/sar.cpu.*_pct";
        worst_ts = table.grid().at(i);
      }
    }
  }
  if (points == 0) return detail::skipped(checks::kCpuDecomposition, "needs at least two sar.cpu.*_pct columns per host");
  return detail::model_finding(checks::kCpuDecomposition, subject,
                               "max |sum of cpu components - 100| over " + std::to_string(points) +
                                   " point(s), worst at ts=" + std::to_string(worst_ts),
                               worst, cfg.cpu_decomposition_tolerance);
}

/// While any load generator reports zero throughput for activity_window
/// consecutive points, every host's busy CPU must stay under the idle threshold.
inline QualityFinding activity_check(const TidyTable& table, const QualityConfig& cfg) {
  std::vector<std::size_t> tput;
  for (std::size_t c = 0; c < table.n_columns(); ++c)
    if (table.columns()[c].metric_name == "ux.throughput_ops_s") tput.push_back(c);
  std::vector<std::pair<std::string, std::vector<std::optional<double>>>> busy;
  for (const auto& host : detail::hosts(table)) {
    auto b = detail::busy_series(table, host);
    if (std::any_of(b.begin(), b.end(), [](const auto& v) { return v.has_value(); })) busy.emplace_back(host, std::move(b));
  }
  if (tput.empty() || busy.empty()) return detail::skipped(checks::kActivity, "needs ux.throughput_ops_s and sar.cpu.*_pct");

  std::vector<bool> idle(table.n_rows(), false);
  for (auto c : tput) {
    std::size_t run_start = 0, run = 0;
    for (std::size_t i = 0; i <= table.n_rows(); ++i) {
      const bool zero = i < table.n_rows() && table.column(c)[i] && *table.column(c)[i] == 0.0;
      if (zero) {
        if (run++ == 0) run_start = i;
        continue;
      }
      if (run >= cfg.activity_window)
        for (std::size_t k = run_start; k < run_start + run; ++k) idle[k] = true;
      run = 0;
    }
  }
  const auto idle_points = static_cast<std::size_t>(std::count(idle.begin(), idle.end(), true));
  if (idle_points == 0)
    return {checks::kActivity, Severity::Info, "table", "ok: no zero-throughput window", 0.0, cfg.idle_busy_threshold};

  double worst = -std::numeric_limits<double>::infinity();
  std::string subject;
  TimestampNs worst_ts = 0;
  for (const auto& [host, series] : busy)
    for (std::size_t i = 0; i < series.size(); ++i)
      if (idle[i] && series[i] && *series[i] > worst) {
        worst = *series[i];
        subject = host + "/cpu.busy";
        worst_ts = table.grid().at(i);
      }
  if (subject.empty()) return detail::skipped(checks::kActivity, "no cpu data inside zero-throughput windows");
  // Busy must stay strictly below the threshold.
  const bool fail = worst >= cfg.idle_busy_threshold;
  return {checks::kActivity, fail ? Severity::Fail : Severity::Info, subject,
          std::string(fail ? "violated: " : "ok: ") + "max busy cpu % during " + std::to_string(idle_points) +
              " zero-throughput point(s), worst at ts=" + std::to_string(worst_ts),
          worst, cfg.idle_busy_threshold};
}

/// Model layer: one finding per enabled model.
inline std::vector<QualityFinding> check_models(const TidyTable& table, const QualityConfig& cfg = {}) {
  std::vector<QualityFinding> out;
  if (cfg.models.contains(checks::kLittlesLaw)) out.push_back(littles_law_check(table, cfg));
  if (cfg.models.contains(checks::kCpuDecomposition)) out.push_back(cpu_decomposition_check(table, cfg));
  if (cfg.models.contains(checks::kActivity)) out.push_back(activity_check(table, cfg));
  detail::sort_findings(out);
  return out;
}

inline QualityReport make_report(std::vector<QualityFinding> findings) {
  QualityReport r;
  detail::sort_findings(findings);
  r.findings = std::move(findings);
  for (const auto& f : r.findings) {
    if (f.severity == Severity::Info) ++r.n_info;
    if (f.severity == Severity::Warn) ++r.n_warn;
    if (f.severity == Severity::Fail) ++r.n_fail;
  }
  r.pass = r.n_fail == 0;
  return r;
}

inline QualityReport assess(const TidyTable& table, std::span<const MetricSample> samples, const QualityConfig& cfg = {}) {
  auto findings = check_correctness(table, samples, cfg);
  const bool empty = table.n_columns() == 0 && samples.empty();
  if (cfg.model_layer && !empty) {
    auto models = check_models(table, cfg);
    findings.insert(findings.end(), models.begin(), models.end());
  }
  return make_report(std::move(findings));
}

inline nlohmann::json to_json(const QualityReport& r) {
  nlohmann::json findings = nlohmann::json::array();
  for (const auto& f : r.findings) {
    nlohmann::json j = {{"check_id", f.check_id}, {"severity", to_string(f.severity)}, {"subject", f.subject},
                        {"detail", f.detail}};
    j["measured"] = f.measured ? nlohmann::json(*f.measured) : nlohmann::json(nullptr);
    j["threshold"] = f.threshold ? nlohmann::json(*f.threshold) : nlohmann::json(nullptr);
    findings.push_back(std::move(j));
  }
  return {{"verdict", r.pass ? "pass" : "fail"},
          {"summary", {{"info", r.n_info}, {"warn", r.n_warn}, {"fail", r.n_fail}}},
          {"findings", findings}};
}

inline std::string to_text(const QualityReport& r) {
  std::string out = "verdict: " + std::string(r.pass ? "pass" : "fail") + " (info " + std::to_string(r.n_info) +
                    ", warn " + std::to_string(r.n_warn) + ", fail " + std::to_string(r.n_fail) + ")\n";
  for (const auto& f : r.findings) {
    out += "[" + std::string(to_string(f.severity)) + "] " + f.check_id + " " + f.subject + ": " + f.detail;
    if (f.measured) out += " measured=" + text::format_double(*f.measured);
    if (f.threshold) out += " threshold=" + text::format_double(*f.threshold);
    out += "\n";
  }
  return out;
}

}  // namespace perftidy
