#pragma once

// Core value types shared by every perftidy module: the canonical sample,
// clock descriptions, and the single exception type used for error reporting.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace perftidy {

/// Canonical timestamps are integer nanoseconds since the Unix epoch, UTC.
using TimestampNs = std::int64_t;

inline constexpr TimestampNs kNsPerSecond = 1'000'000'000;

enum class ErrorCode {
  UnparseableTimestamp,
  NegativeEpoch,
  MalformedRow,
  NonNumericValue,
  DuplicateSample,
  NegativePause,
  NegativeThroughput,
  InconsistentInterval,
  EmptyInput,
  BadArgument,
  GridMismatch,
  AllMissing,
  BadPolicy,
  ZeroVariance,
  DegenerateRange,
  NonPositive,
  DivZero,
  MissingFitted,
  InsufficientOverlap,
  BadSpec,
  BadLag,
  BadPattern,
  SchemaMismatch,
  UnknownScenario,
  ConfigError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnparseableTimestamp: return "UnparseableTimestamp";
    case ErrorCode::NegativeEpoch: return "NegativeEpoch";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonNumericValue: return "NonNumericValue";
    case ErrorCode::DuplicateSample: return "DuplicateSample";
    case ErrorCode::NegativePause: return "NegativePause";
    case ErrorCode::NegativeThroughput: return "NegativeThroughput";
    case ErrorCode::InconsistentInterval: return "InconsistentInterval";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::BadArgument: return "BadArgument";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::AllMissing: return "AllMissing";
    case ErrorCode::BadPolicy: return "BadPolicy";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::NonPositive: return "NonPositive";
    case ErrorCode::DivZero: return "DivZero";
    case ErrorCode::MissingFitted: return "MissingFitted";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::BadLag: return "BadLag";
    case ErrorCode::BadPattern: return "BadPattern";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// The one exception type thrown by the library. `line` is set (1-based)
/// when the error originates from a specific input line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(format(code, detail, line)), code_(code), line_(line), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  static std::string format(ErrorCode code, const std::string& detail,
                            std::optional<std::size_t> line) {
    std::string msg{to_string(code)};
    if (line) msg += " at line " + std::to_string(*line);
    if (!detail.empty()) msg += ": " + detail;
    return msg;
  }

  ErrorCode code_;
  std::optional<std::size_t> line_;
  std::string detail_;
};

/// What a tool's reported number denotes relative to its timestamp.
enum class Semantics { IntervalAverage, InstantAtEnd, InstantMid, Event };

inline std::string_view to_string(Semantics s) {
  switch (s) {
    case Semantics::IntervalAverage: return "interval-average";
    case Semantics::InstantAtEnd: return "instant-at-end";
    case Semantics::InstantMid: return "instant-mid";
    case Semantics::Event: return "event";
  }
  return "event";
}

inline Semantics semantics_from_string(std::string_view s) {
  if (s == "interval-average") return Semantics::IntervalAverage;
  if (s == "instant-at-end") return Semantics::InstantAtEnd;
  if (s == "instant-mid") return Semantics::InstantMid;
  if (s == "event") return Semantics::Event;
  throw Error(ErrorCode::BadArgument, "unknown semantics '" + std::string(s) + "'");
}

struct MetricSample {
  std::string source_id;
  std::string host_id;
  std::string metric_name;
  TimestampNs ts = 0;
  double value = 0.0;
  std::string unit;
  Semantics semantics = Semantics::InstantAtEnd;
  std::int64_t interval_ns = 0;

  friend bool operator==(const MetricSample&, const MetricSample&) = default;
};

inline bool valid_metric_name(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') return false;
  return true;
}

/// Throws BadArgument if `s` breaks a MetricSample invariant.
inline void validate(const MetricSample& s) {
  if (s.ts < 0) throw Error(ErrorCode::NegativeEpoch, "sample ts " + std::to_string(s.ts));
  if (!std::isfinite(s.value))
    throw Error(ErrorCode::NonNumericValue, "non-finite value for " + s.metric_name);
  if ((s.semantics == Semantics::Event) != (s.interval_ns == 0))
    throw Error(ErrorCode::BadArgument, "event semantics must coincide with interval_ns == 0 (" +
                                            s.metric_name + ")");
  if (!valid_metric_name(s.metric_name))
    throw Error(ErrorCode::BadArgument, "invalid metric name '" + s.metric_name + "'");
}

enum class ClockKind { Epoch, WallClock };
enum class EpochUnit { Seconds, Milliseconds, Microseconds, Nanoseconds };

inline std::int64_t ns_per_unit(EpochUnit u) {
  switch (u) {
    case EpochUnit::Seconds: return 1'000'000'000;
    case EpochUnit::Milliseconds: return 1'000'000;
    case EpochUnit::Microseconds: return 1'000;
    case EpochUnit::Nanoseconds: return 1;
  }
  return 1;
}

inline std::string_view to_string(EpochUnit u) {
  switch (u) {
    case EpochUnit::Seconds: return "s";
    case EpochUnit::Milliseconds: return "ms";
    case EpochUnit::Microseconds: return "us";
    case EpochUnit::Nanoseconds: return "ns";
  }
  return "s";
}

inline EpochUnit epoch_unit_from_string(std::string_view s) {
  if (s == "s") return EpochUnit::Seconds;
  if (s == "ms") return EpochUnit::Milliseconds;
  if (s == "us") return EpochUnit::Microseconds;
  if (s == "ns") return EpochUnit::Nanoseconds;
  throw Error(ErrorCode::BadArgument, "unknown epoch unit '" + std::string(s) + "'");
}

inline constexpr std::string_view kDefaultDatetimePattern = "%Y-%m-%d %H:%M:%S";

/// How raw timestamps in one input are encoded.
struct ClockSpec {
  ClockKind kind = ClockKind::Epoch;
  EpochUnit unit = EpochUnit::Seconds;
  int tz_offset_minutes = 0;
  std::string datetime_pattern{kDefaultDatetimePattern};

  static ClockSpec epoch(EpochUnit u) {
    ClockSpec c;
    c.kind = ClockKind::Epoch;
    c.unit = u;
    return c;
  }
  static ClockSpec wall_clock(int tz_offset_minutes,
                              std::string pattern = std::string(kDefaultDatetimePattern)) {
    ClockSpec c;
    c.kind = ClockKind::WallClock;
    c.tz_offset_minutes = tz_offset_minutes;
    c.datetime_pattern = std::move(pattern);
    return c;
  }

  friend bool operator==(const ClockSpec&, const ClockSpec&) = default;
};

inline void validate(const ClockSpec& c) {
  if (c.tz_offset_minutes < -840 || c.tz_offset_minutes > 840)
    throw Error(ErrorCode::BadArgument,
                "tz_offset_minutes " + std::to_string(c.tz_offset_minutes) + " outside [-840, 840]");
  if (c.kind == ClockKind::WallClock && c.datetime_pattern.empty())
    throw Error(ErrorCode::BadArgument, "empty datetime_pattern");
}

}  // namespace perftidy
