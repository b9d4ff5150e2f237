#pragma once

// Readers for the four supported ';'-delimited export formats, and the
// timestamp canonicalization they share.
//
//   sar      ts;metric_name;value;unit
//   perf     ts;event_name;value
//   gc       ts;pause_ms;heap_before_mb;heap_after_mb
//   loadgen  ts;throughput_ops_s;resp_time_s;concurrency
//
// Every timestamp is mapped to integer nanoseconds since the Unix epoch (UTC).

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "perftidy/text.hpp"
#include "perftidy/types.hpp"

namespace perftidy {

enum class Format { Sar, Perf, Gc, Loadgen };

inline std::string_view to_string(Format f) {
  switch (f) {
    case Format::Sar: return "sar";
    case Format::Perf: return "perf";
    case Format::Gc: return "gc";
    case Format::Loadgen: return "loadgen";
  }
  return "sar";
}

inline Format format_from_string(std::string_view s) {
  if (s == "sar") return Format::Sar;
  if (s == "perf") return Format::Perf;
  if (s == "gc") return Format::Gc;
  if (s == "loadgen") return Format::Loadgen;
  throw Error(ErrorCode::BadArgument, "unknown format '" + std::string(s) + "'");
}

/// Used when a stream has no repeated timestamps to infer a reporting interval from.
inline constexpr std::int64_t kDefaultIntervalNs = kNsPerSecond;

namespace detail {

inline bool checked_mul_add(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t& out) {
  std::int64_t prod = 0;
  if (__builtin_mul_overflow(a, b, &prod)) return false;
  return !__builtin_add_overflow(prod, c, &out);
}

inline TimestampNs epoch_from_text(std::string_view raw, const ClockSpec& clock) {
  std::string_view s = text::trim(raw);
  const std::string original(s);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  auto dot = s.find('.');
  std::string_view int_part = s.substr(0, dot);
  std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  auto all_digits = [](std::string_view d) {
    return std::all_of(d.begin(), d.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if ((int_part.empty() && frac_part.empty()) || !all_digits(int_part) || !all_digits(frac_part) ||
      (dot != std::string_view::npos && frac_part.empty()))
    throw Error(ErrorCode::UnparseableTimestamp, "'" + original + "' is not an epoch number");

  const std::int64_t scale = ns_per_unit(clock.unit);
  std::int64_t whole = 0;
  for (char c : int_part)
    if (!checked_mul_add(whole, 10, c - '0', whole))
      throw Error(ErrorCode::UnparseableTimestamp, "'" + original + "' overflows");

  // Fractional digits are exact down to one nanosecond; anything finer must be zero.
  std::int64_t frac_ns = 0;
  std::int64_t place = scale;
  for (char c : frac_part) {
    if (place % 10 != 0) {
      if (c != '0')
        throw Error(ErrorCode::UnparseableTimestamp, "'" + original + "' has sub-nanosecond digits");
      continue;
    }
    place /= 10;
    frac_ns += (c - '0') * place;
  }
  std::int64_t ns = 0;
  if (!checked_mul_add(whole, scale, frac_ns, ns))
    throw Error(ErrorCode::UnparseableTimestamp, "'" + original + "' overflows");
  if (negative && ns != 0)
    throw Error(ErrorCode::NegativeEpoch, "'" + original + "' is before 1970");
  return ns;
}

inline bool read_digits(std::string_view s, std::size_t& pos, std::size_t min_len, std::size_t max_len,
                        std::int64_t& value, std::size_t* len_out = nullptr) {
  std::size_t len = 0;
  value = 0;
  while (len < max_len && pos + len < s.size() && s[pos + len] >= '0' && s[pos + len] <= '9') {
    value = value * 10 + (s[pos + len] - '0');
    ++len;
  }
  if (len < min_len) return false;
  pos += len;
  if (len_out) *len_out = len;
  return true;
}

inline TimestampNs wall_clock_from_text(std::string_view raw, const ClockSpec& clock) {
  using namespace std::chrono;
  std::string_view s = text::trim(raw);
  const std::string_view pat = clock.datetime_pattern;
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::UnparseableTimestamp,
                 "'" + std::string(s) + "' does not match '" + std::string(pat) + "': " + why);
  };

  std::int64_t year = 1970, month = 1, day = 1, hour = 0, minute = 0, second = 0, frac_ns = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < pat.size(); ++i) {
    if (pat[i] != '%') {
      if (pos >= s.size() || s[pos] != pat[i]) throw fail("literal mismatch");
      ++pos;
      continue;
    }
    if (++i >= pat.size()) throw fail("dangling '%'");
    bool ok = true;
    switch (pat[i]) {
      case 'Y': ok = read_digits(s, pos, 4, 4, year); break;
      case 'm': ok = read_digits(s, pos, 2, 2, month); break;
      case 'd': ok = read_digits(s, pos, 2, 2, day); break;
      case 'H': ok = read_digits(s, pos, 2, 2, hour); break;
      case 'M': ok = read_digits(s, pos, 2, 2, minute); break;
      case 'S': ok = read_digits(s, pos, 2, 2, second); break;
      case 'f': {
        std::size_t len = 0;
        ok = read_digits(s, pos, 1, 9, frac_ns, &len);
        for (std::size_t k = len; k < 9; ++k) frac_ns *= 10;
        break;
      }
      case '%':
        ok = pos < s.size() && s[pos] == '%';
        ++pos;
        break;
      default: throw fail(std::string("unsupported directive %") + pat[i]);
    }
    if (!ok) throw fail("bad field for %" + std::string(1, pat[i]));
  }
  if (pos != s.size()) throw fail("trailing characters");

  year_month_day ymd{std::chrono::year{static_cast<int>(year)},
                     std::chrono::month{static_cast<unsigned>(month)},
                     std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) throw fail("field out of range");

  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t local_s = days * 86400 + hour * 3600 + minute * 60 + second;
  const std::int64_t utc_s = local_s - static_cast<std::int64_t>(clock.tz_offset_minutes) * 60;
  if (utc_s < 0) throw Error(ErrorCode::NegativeEpoch, "'" + std::string(s) + "' is before 1970 UTC");
  return utc_s * kNsPerSecond + frac_ns;
}

inline std::string pad(std::int64_t v, int width) {
  std::string d = std::to_string(v);
  if (static_cast<int>(d.size()) < width) d.insert(0, static_cast<std::size_t>(width) - d.size(), '0');
  return d;
}

}  // namespace detail

/// Canonicalizes a raw timestamp to ns since epoch (UTC). Epoch text may carry a
/// decimal fraction; wall-clock text must match clock.datetime_pattern, which
/// understands %Y %m %d %H %M %S %f and %%.
inline TimestampNs normalize_timestamp(std::string_view raw, const ClockSpec& clock) {
  validate(clock);
  return clock.kind == ClockKind::Epoch ? detail::epoch_from_text(raw, clock)
                                        : detail::wall_clock_from_text(raw, clock);
}

inline TimestampNs normalize_timestamp(std::int64_t raw, const ClockSpec& clock) {
  if (clock.kind != ClockKind::Epoch)
    throw Error(ErrorCode::UnparseableTimestamp, "numeric timestamp under a wall-clock spec");
  if (raw < 0) throw Error(ErrorCode::NegativeEpoch, std::to_string(raw) + " is before 1970");
  std::int64_t ns = 0;
  if (!detail::checked_mul_add(raw, ns_per_unit(clock.unit), 0, ns))
    throw Error(ErrorCode::UnparseableTimestamp, std::to_string(raw) + " overflows");
  return ns;
}

/// Inverse of normalize_timestamp. Throws SchemaMismatch when `ts` cannot be
/// written exactly under `clock` (sub-second precision with no %f in the pattern).
inline std::string format_timestamp(TimestampNs ts, const ClockSpec& clock) {
  using namespace std::chrono;
  validate(clock);
  if (ts < 0) throw Error(ErrorCode::NegativeEpoch, std::to_string(ts));
  if (clock.kind == ClockKind::Epoch) {
    const std::int64_t scale = ns_per_unit(clock.unit);
    std::string out = std::to_string(ts / scale);
    std::int64_t rem = ts % scale;
    if (rem != 0) {
      int width = 0;
      for (std::int64_t s = scale; s > 1; s /= 10) ++width;
      std::string frac = detail::pad(rem, width);
      while (!frac.empty() && frac.back() == '0') frac.pop_back();
      out += "." + frac;
    }
    return out;
  }

  const std::int64_t local_ns = ts + static_cast<std::int64_t>(clock.tz_offset_minutes) * 60 * kNsPerSecond;
  std::int64_t local_s = local_ns / kNsPerSecond;
  std::int64_t frac_ns = local_ns % kNsPerSecond;
  if (frac_ns < 0) {
    frac_ns += kNsPerSecond;
    --local_s;
  }
  std::int64_t days = local_s / 86400;
  std::int64_t secs = local_s % 86400;
  if (secs < 0) {
    secs += 86400;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  const std::string_view pat = clock.datetime_pattern;
  bool has_fraction = false;
  std::string out;
  for (std::size_t i = 0; i < pat.size(); ++i) {
    if (pat[i] != '%' || i + 1 >= pat.size()) {
      out += pat[i];
      continue;
    }
    switch (pat[++i]) {
      case 'Y': out += detail::pad(static_cast<int>(ymd.year()), 4); break;
      case 'm': out += detail::pad(static_cast<unsigned>(ymd.month()), 2); break;
      case 'd': out += detail::pad(static_cast<unsigned>(ymd.day()), 2); break;
      case 'H': out += detail::pad(secs / 3600, 2); break;
      case 'M': out += detail::pad((secs / 60) % 60, 2); break;
      case 'S': out += detail::pad(secs % 60, 2); break;
      case 'f':
        out += detail::pad(frac_ns, 9);
        has_fraction = true;
        break;
      case '%': out += '%'; break;
      default:
        throw Error(ErrorCode::SchemaMismatch, std::string("unsupported directive %") + pat[i]);
    }
  }
  if (frac_ns != 0 && !has_fraction)
    throw Error(ErrorCode::SchemaMismatch,
                "timestamp " + std::to_string(ts) + " has sub-second precision but pattern lacks %f");
  return out;
}

struct ParseOptions {
  /// Reported in MetricSample::source_id; defaults to the format name.
  std::string source_id;
  /// Declared reporting interval; wins over inference when set.
  std::optional<std::int64_t> interval_override_ns;
};

namespace detail {

inline TimestampNs ts_at(std::string_view raw, const ClockSpec& clock, std::size_t line) {
  try {
    return normalize_timestamp(raw, clock);
  } catch (const Error& e) {
    throw Error(e.code(), e.detail(), line);
  }
}

inline double value_at(std::string_view raw, std::string_view what, std::size_t line) {
  auto v = text::parse_double(raw);
  if (!v)
    throw Error(ErrorCode::NonNumericValue, std::string(what) + " '" + std::string(raw) + "'", line);
  return *v;
}

inline void expect_columns(const text::Record& r, std::size_t n, std::string_view layout) {
  if (r.fields.size() != n)
    throw Error(ErrorCode::MalformedRow,
                "expected " + std::to_string(n) + " fields (" + std::string(layout) + "), got " +
                    std::to_string(r.fields.size()),
                r.line);
}

/// Most frequent positive gap between consecutive distinct timestamps; ties go to the smaller gap.
inline std::optional<std::int64_t> modal_gap(std::vector<TimestampNs> ts) {
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  if (ts.size() < 2) return std::nullopt;
  std::map<std::int64_t, std::size_t> counts;
  for (std::size_t i = 1; i < ts.size(); ++i) ++counts[ts[i] - ts[i - 1]];
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

/// Fills interval_ns for every non-event sample: override, else per-metric modal
/// gap, else the file-wide modal gap, else kDefaultIntervalNs.
inline void assign_intervals(std::vector<MetricSample>& samples, const ParseOptions& opts) {
  if (opts.interval_override_ns) {
    if (*opts.interval_override_ns <= 0)
      throw Error(ErrorCode::BadArgument, "interval override must be positive");
    for (auto& s : samples)
      if (s.semantics != Semantics::Event) s.interval_ns = *opts.interval_override_ns;
    return;
  }
  std::map<std::string, std::vector<TimestampNs>> by_metric;
  for (const auto& s : samples)
    if (s.semantics != Semantics::Event) by_metric[s.metric_name].push_back(s.ts);

  std::map<std::string, std::int64_t> gap;
  std::map<std::int64_t, std::size_t> file_votes;
  for (const auto& [name, ts] : by_metric) {
    if (auto g = modal_gap(ts)) {
      gap[name] = *g;
      ++file_votes[*g];
    }
  }
  std::int64_t fallback = kDefaultIntervalNs;
  std::size_t best_votes = 0;
  for (const auto& [g, votes] : file_votes)
    if (votes > best_votes) {
      best_votes = votes;
      fallback = g;
    }
  for (auto& s : samples) {
    if (s.semantics == Semantics::Event) continue;
    auto it = gap.find(s.metric_name);
    s.interval_ns = it != gap.end() ? it->second : fallback;
  }
}

inline std::string source_or(const ParseOptions& opts, Format f) {
  return opts.source_id.empty() ? std::string(to_string(f)) : opts.source_id;
}

}  // namespace detail

inline std::vector<MetricSample> parse_sar(std::string_view input, const ClockSpec& clock,
                                           const std::string& host_id, const ParseOptions& opts = {}) {
  std::vector<MetricSample> out;
  const std::string source = detail::source_or(opts, Format::Sar);
  for (const auto& r : text::records(input)) {
    detail::expect_columns(r, 4, "ts;metric_name;value;unit");
    const std::string name = "sar." + std::string(r.fields[1]);
    if (r.fields[1].empty() || !valid_metric_name(name))
      throw Error(ErrorCode::MalformedRow, "bad metric name '" + std::string(r.fields[1]) + "'", r.line);
    MetricSample s;
    s.source_id = source;
    s.host_id = host_id;
    s.metric_name = name;
    s.ts = detail::ts_at(r.fields[0], clock, r.line);
    s.value = detail::value_at(r.fields[2], "value", r.line);
    s.unit = std::string(r.fields[3]);
    s.semantics = Semantics::IntervalAverage;
    out.push_back(std::move(s));
  }
  detail::assign_intervals(out, opts);
  return out;
}

inline std::vector<MetricSample> parse_perf(std::string_view input, const ClockSpec& clock,
                                            const std::string& host_id, const ParseOptions& opts = {}) {
  std::vector<MetricSample> out;
  std::set<std::pair<TimestampNs, std::string>> seen;
  const std::string source = detail::source_or(opts, Format::Perf);
  for (const auto& r : text::records(input)) {
    detail::expect_columns(r, 3, "ts;event_name;value");
    const std::string name = "perf." + std::string(r.fields[1]);
    if (r.fields[1].empty() || !valid_metric_name(name))
      throw Error(ErrorCode::MalformedRow, "bad event name '" + std::string(r.fields[1]) + "'", r.line);
    MetricSample s;
    s.source_id = source;
    s.host_id = host_id;
    s.metric_name = name;
    s.ts = detail::ts_at(r.fields[0], clock, r.line);
    s.value = detail::value_at(r.fields[2], "value", r.line);
    s.unit = "count";
    s.semantics = Semantics::IntervalAverage;
    if (!seen.emplace(s.ts, name).second)
      throw Error(ErrorCode::DuplicateSample,
                  "(ts=" + std::to_string(s.ts) + ", event=" + std::string(r.fields[1]) + ")", r.line);
    out.push_back(std::move(s));
  }
  detail::assign_intervals(out, opts);
  return out;
}

inline std::vector<MetricSample> parse_gc(std::string_view input, const ClockSpec& clock,
                                          const std::string& host_id, const ParseOptions& opts = {}) {
  static constexpr std::tuple<const char*, const char*> kColumns[] = {
      {"gc.pause_ms", "ms"}, {"gc.heap_before_mb", "MB"}, {"gc.heap_after_mb", "MB"}};
  std::vector<MetricSample> out;
  const std::string source = detail::source_or(opts, Format::Gc);
  for (const auto& r : text::records(input)) {
    detail::expect_columns(r, 4, "ts;pause_ms;heap_before_mb;heap_after_mb");
    const TimestampNs ts = detail::ts_at(r.fields[0], clock, r.line);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& [name, unit] = kColumns[c];
      MetricSample s{source, host_id, name, ts, detail::value_at(r.fields[c + 1], name, r.line), unit,
                     Semantics::Event, 0};
      if (c == 0 && s.value < 0)
        throw Error(ErrorCode::NegativePause, "pause_ms " + std::string(r.fields[1]), r.line);
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline std::vector<MetricSample> parse_loadgen(std::string_view input, const ClockSpec& clock,
                                               const std::string& host_id, const ParseOptions& opts = {}) {
  static constexpr std::tuple<const char*, const char*> kColumns[] = {
      {"ux.throughput_ops_s", "ops/s"}, {"ux.resp_time_s", "s"}, {"ux.concurrency", "count"}};
  std::vector<MetricSample> out;
  const std::string source = detail::source_or(opts, Format::Loadgen);
  for (const auto& r : text::records(input)) {
    detail::expect_columns(r, 4, "ts;throughput_ops_s;resp_time_s;concurrency");
    const TimestampNs ts = detail::ts_at(r.fields[0], clock, r.line);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& [name, unit] = kColumns[c];
      MetricSample s{source, host_id, name, ts, detail::value_at(r.fields[c + 1], name, r.line), unit,
                     Semantics::IntervalAverage, 0};
      if (c == 0 && s.value < 0)
        throw Error(ErrorCode::NegativeThroughput, "throughput " + std::string(r.fields[1]), r.line);
      out.push_back(std::move(s));
    }
  }
  detail::assign_intervals(out, opts);
  return out;
}

inline std::vector<MetricSample> parse(Format format, std::string_view input, const ClockSpec& clock,
                                       const std::string& host_id, const ParseOptions& opts = {}) {
  switch (format) {
    case Format::Sar: return parse_sar(input, clock, host_id, opts);
    case Format::Perf: return parse_perf(input, clock, host_id, opts);
    case Format::Gc: return parse_gc(input, clock, host_id, opts);
    case Format::Loadgen: return parse_loadgen(input, clock, host_id, opts);
  }
  return {};
}

}  // namespace perftidy
