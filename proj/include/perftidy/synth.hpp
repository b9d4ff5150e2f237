#pragma once

// Deterministic synthetic telemetry: signals, lagged copies, missingness
// patterns, writers for the four input formats, and whole scenarios with a
// ground-truth manifest.
//
// Randomness comes from std::mt19937_64 (whose output sequence is fixed by the
// C++ standard); uniforms take the top 53 bits, normals use Box-Muller.
// Sub-streams are seeded with splitmix64(seed + k). The same (spec, seed)
// always yields the same bytes on any conforming implementation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "perftidy/ingest.hpp"
#include "perftidy/text.hpp"
#include "perftidy/timealign.hpp"
#include "perftidy/types.hpp"

namespace perftidy::synth {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (spare_) {
      double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
  }

  /// Uniform integer in [0, n), by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    for (;;) {
      const std::uint64_t v = engine_();
      if (v < limit) return v % n;
    }
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct Ar1 {
  double phi = 0.8;
  double sigma = 1.0;
};
struct Sine {
  double period_steps = 20.0;
  double amplitude = 1.0;
  double phase = 0.0;
};
struct Step {
  std::size_t change_at = 0;
  double low = 0.0;
  double high = 1.0;
};
struct Constant {
  double v = 0.0;
};

struct SignalSpec {
  std::variant<Ar1, Sine, Step, Constant> kind = Constant{};
  std::size_t n = 2;
  std::uint64_t seed = 0;
};

/// AR(1) starts from its stationary distribution: x_0 = e_0 / sqrt(1 - phi^2).
inline std::vector<double> gen_signal(const SignalSpec& spec) {
  if (spec.n < 2) throw Error(ErrorCode::BadSpec, "signal length must be at least 2");
  std::vector<double> x(spec.n);
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Ar1>) {
          if (!(std::abs(k.phi) < 1.0)) throw Error(ErrorCode::BadSpec, "ar1 requires |phi| < 1");
          if (!(k.sigma >= 0.0)) throw Error(ErrorCode::BadSpec, "ar1 sigma must be non-negative");
          Rng rng(spec.seed);
          x[0] = k.sigma * rng.normal() / std::sqrt(1.0 - k.phi * k.phi);
          for (std::size_t t = 1; t < spec.n; ++t) x[t] = k.phi * x[t - 1] + k.sigma * rng.normal();
        } else if constexpr (std::is_same_v<K, Sine>) {
          if (!(k.period_steps > 0.0)) throw Error(ErrorCode::BadSpec, "sine period must be positive");
          for (std::size_t t = 0; t < spec.n; ++t)
            x[t] = k.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / k.period_steps + k.phase);
        } else if constexpr (std::is_same_v<K, Step>) {
          for (std::size_t t = 0; t < spec.n; ++t) x[t] = t < k.change_at ? k.low : k.high;
        } else {
          std::fill(x.begin(), x.end(), k.v);
        }
      },
      spec.kind);
  return x;
}

/// y_t = x_{t-lag} + e_t; the first `lag` cells are the mean of x plus noise.
inline std::vector<double> lagged_copy(std::span<const double> x, std::size_t lag, double noise_sigma, std::uint64_t seed) {
  if (lag >= x.size()) throw Error(ErrorCode::BadLag, "lag " + std::to_string(lag) + " must be < n=" + std::to_string(x.size()));
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::BadSpec, "noise_sigma must be non-negative");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  Rng rng(seed);
  std::vector<double> y(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double noise = noise_sigma > 0.0 ? noise_sigma * rng.normal() : 0.0;
    y[t] = (t >= lag ? x[t - lag] : mean) + noise;
  }
  return y;
}

struct RandomMissing {
  double rate = 0.0;
};
struct BlockMissing {
  std::size_t start = 0;
  std::size_t len = 0;
};
using MissingPattern = std::variant<RandomMissing, BlockMissing>;

/// random(rate) masks exactly round(rate * n) cells chosen by a seeded
/// partial Fisher-Yates shuffle; block(start, len) masks [start, start + len).
inline Series inject_missing(std::span<const double> x, const MissingPattern& pattern, std::uint64_t seed) {
  Series out(x.begin(), x.end());
  const std::size_t n = x.size();
  if (const auto* r = std::get_if<RandomMissing>(&pattern)) {
    if (!(r->rate >= 0.0 && r->rate < 1.0)) throw Error(ErrorCode::BadPattern, "rate must lie in [0, 1)");
    const auto k = static_cast<std::size_t>(std::llround(r->rate * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(idx[i], idx[j]);
      out[idx[i]] = std::nullopt;
    }
    return out;
  }
  const auto& b = std::get<BlockMissing>(pattern);
  if (b.start > n || b.len > n - b.start) throw Error(ErrorCode::BadPattern, "block outside series bounds");
  for (std::size_t i = b.start; i < b.start + b.len; ++i) out[i] = std::nullopt;
  return out;
}

// ---------------------------------------------------------------------------
// Writers

namespace detail {

inline std::string header(Format f) {
  switch (f) {
    case Format::Sar: return "# perftidy sar export\n# ts;metric_name;value;unit\n";
    case Format::Perf: return "# perftidy perf export\n# ts;event_name;value\n";
    case Format::Gc: return "# perftidy gc log\n# ts;pause_ms;heap_before_mb;heap_after_mb\n";
    case Format::Loadgen: return "# perftidy loadgen log\n# ts;throughput_ops_s;resp_time_s;concurrency\n";
  }
  return {};
}

inline std::string strip_prefix(const MetricSample& s, std::string_view prefix) {
  if (!s.metric_name.starts_with(prefix) || s.metric_name.size() == prefix.size())
    throw Error(ErrorCode::SchemaMismatch, s.metric_name + " lacks prefix '" + std::string(prefix) + "'");
  return s.metric_name.substr(prefix.size());
}

inline std::string emit_rows(std::span<const MetricSample> samples, const ClockSpec& clock,
                             const std::vector<std::string>& columns, Semantics semantics) {
  std::vector<TimestampNs> order;
  std::vector<std::vector<std::optional<double>>> rows;
  for (const auto& s : samples) {
    auto col = std::find(columns.begin(), columns.end(), s.metric_name);
    if (col == columns.end()) throw Error(ErrorCode::SchemaMismatch, "unexpected metric " + s.metric_name);
    if (s.semantics != semantics)
      throw Error(ErrorCode::SchemaMismatch, s.metric_name + " must have " + std::string(to_string(semantics)) + " semantics");
    auto it = std::find(order.begin(), order.end(), s.ts);
    std::size_t r = static_cast<std::size_t>(it - order.begin());
    if (it == order.end()) {
      order.push_back(s.ts);
      rows.emplace_back(columns.size());
    }
    auto& cell = rows[r][static_cast<std::size_t>(col - columns.begin())];
    if (cell) throw Error(ErrorCode::SchemaMismatch, "duplicate " + s.metric_name + " at ts " + std::to_string(s.ts));
    cell = s.value;
  }
  std::string out;
  for (std::size_t r = 0; r < order.size(); ++r) {
    out += format_timestamp(order[r], clock);
    for (const auto& cell : rows[r]) {
      if (!cell) throw Error(ErrorCode::SchemaMismatch, "incomplete row at ts " + std::to_string(order[r]));
      out += ";" + text::format_double(*cell);
    }
    out += "\n";
  }
  return out;
}

}  // namespace detail

/// Writes samples in one of the input formats so that the matching parser
/// reproduces them. All samples must come from one host.
inline std::string emit_format(std::span<const MetricSample> samples, Format format, const ClockSpec& clock) {
  for (const auto& s : samples) {
    if (s.host_id != samples.front().host_id)
      throw Error(ErrorCode::SchemaMismatch, "one file holds one host; saw " + s.host_id + " and " + samples.front().host_id);
    validate(s);
  }
  std::string out = detail::header(format);
  switch (format) {
    case Format::Sar:
    case Format::Perf: {
      const bool sar = format == Format::Sar;
      for (const auto& s : samples) {
        if (s.semantics != Semantics::IntervalAverage)
          throw Error(ErrorCode::SchemaMismatch, s.metric_name + " must be interval-average");
        const std::string name = detail::strip_prefix(s, sar ? "sar." : "perf.");
        if (!sar && s.unit != "count") throw Error(ErrorCode::SchemaMismatch, "perf unit must be 'count'");
        if (sar && (s.unit.empty() || s.unit.find_first_of(";\n#") != std::string::npos || text::trim(s.unit) != s.unit))
          throw Error(ErrorCode::SchemaMismatch, "unit '" + s.unit + "' cannot be written");
        if (name.find(';') != std::string::npos) throw Error(ErrorCode::SchemaMismatch, "';' in metric name");
        out += format_timestamp(s.ts, clock) + ";" + name + ";" + text::format_double(s.value);
        if (sar) out += ";" + s.unit;
        out += "\n";
      }
      return out;
    }
    case Format::Gc:
      return out + detail::emit_rows(samples, clock, {"gc.pause_ms", "gc.heap_before_mb", "gc.heap_after_mb"}, Semantics::Event);
    case Format::Loadgen:
      return out + detail::emit_rows(samples, clock, {"ux.throughput_ops_s", "ux.resp_time_s", "ux.concurrency"},
                                     Semantics::IntervalAverage);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scenarios

struct ScenarioFile {
  std::string filename;
  Format format = Format::Sar;
  ClockSpec clock;
  std::string host_id;
  std::string text;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<ScenarioFile> files;
  nlohmann::json manifest;
};

inline constexpr std::int64_t kScenarioStepNs = 10 * kNsPerSecond;
inline constexpr std::size_t kScenarioRows = 240;
inline constexpr std::int64_t kScenarioOriginS = 1'700'000'000;

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"clean", "planted-lag", "noisy-neighbor", "faulty"};
  return names;
}

namespace detail {

inline double round_to(double v, double quantum) { return std::round(v / quantum) * quantum; }

inline nlohmann::json clock_json(const ClockSpec& c) {
  if (c.kind == ClockKind::Epoch) return {{"kind", "epoch"}, {"unit", to_string(c.unit)}};
  return {{"kind", "wall-clock"}, {"tz_offset_minutes", c.tz_offset_minutes}, {"datetime_pattern", c.datetime_pattern}};
}

struct StreamSeeds {
  std::uint64_t base;
  std::uint64_t operator()(std::uint64_t k) const { return splitmix64(base + k); }
};

inline std::vector<double> ar(std::size_t n, double phi, double sigma, std::uint64_t seed) {
  return gen_signal({Ar1{phi, sigma}, n, seed});
}

}  // namespace detail

/// Builds one of the named scenarios. Sampled tools report at
/// origin + 5 s + 10 s * (i + 1) as interval averages over the preceding 10 s,
/// so after midpoint attribution every stream lands on the 10 s grid.
inline Scenario gen_scenario(const std::string& name, std::uint64_t seed) {
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw Error(ErrorCode::UnknownScenario, "'" + name + "'");
  const bool planted = name == "planted-lag";
  const bool noisy = name == "noisy-neighbor";
  const bool faulty = name == "faulty";
  const std::size_t n = kScenarioRows;
  const std::size_t quiet = noisy ? 0 : 24;  // trailing rows with no load
  const detail::StreamSeeds sub{seed};

  auto end_ts = [](std::size_t i) {
    return (kScenarioOriginS + 5 + 10 * static_cast<std::int64_t>(i + 1)) * kNsPerSecond;
  };
  auto is_quiet = [&](std::size_t i) { return i >= n - quiet; };
  auto sampled = [&](const std::string& host, const std::string& metric, std::size_t i, double v, const std::string& unit) {
    return MetricSample{"", host, metric, end_ts(i), v, unit, Semantics::IntervalAverage, kScenarioStepNs};
  };

  const auto load = detail::ar(n, 0.9, 1.0, sub(1));
  const auto resp_noise = detail::ar(n, 0.7, 1.0, sub(2));
  const auto user_noise = detail::ar(n, 0.6, 1.0, sub(3));
  const auto sys_noise = detail::ar(n, 0.6, 1.0, sub(4));
  const auto wait_noise = detail::ar(n, 0.5, 1.0, sub(5));
  const auto mem_noise = detail::ar(n, 0.95, 1.0, sub(6));
  const auto rx_noise = detail::ar(n, 0.8, 1.0, sub(7));
  const auto cm_base = detail::ar(n, 0.85, 1.0, sub(8));
  const auto instr_noise = detail::ar(n, 0.5, 1.0, sub(9));
  const auto aggressor = detail::ar(n, 0.8, 1.0, sub(10));

  nlohmann::json planted_lags = nlohmann::json::array();
  nlohmann::json violations = nlohmann::json::array();

  // Load generator on host "client".
  std::vector<double> victim(n);
  const std::size_t nn_lag = 4;
  const double nn_gain = 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    victim[i] = 100.0 + 5.0 * load[i];
    if (noisy) victim[i] = 100.0 + 1.5 * load[i] - nn_gain * (i >= nn_lag ? aggressor[i - nn_lag] : 0.0);
  }
  std::vector<MetricSample> ux;
  for (std::size_t i = 0; i < n; ++i) {
    double x = is_quiet(i) ? 0.0 : std::max(1.0, detail::round_to(victim[i], 0.01));
    double r = is_quiet(i) ? 0.0 : std::max(0.001, detail::round_to(0.05 + 0.002 * resp_noise[i], 0.0001));
    ux.push_back(sampled("client", "ux.throughput_ops_s", i, x, "ops/s"));
    ux.push_back(sampled("client", "ux.resp_time_s", i, r, "s"));
    ux.push_back(sampled("client", "ux.concurrency", i, x * r, "count"));
  }
  if (noisy)
    planted_lags.push_back({{"metric_a", "client/ux.throughput_ops_s"},
                            {"metric_b", "web02/perf.cache-misses"},
                            {"lag", -static_cast<int>(nn_lag)},
                            {"gain", nn_gain},
                            {"coupling", "victim_t = baseline_t - gain * aggressor_{t-lag} (aggressor standardized AR(1))"}});

  // SAR on web01.
  const std::size_t range_row = n / 3, decomp_row = n / 2;
  std::vector<MetricSample> sar;
  std::vector<double> cache_misses(n);
  for (std::size_t i = 0; i < n; ++i) cache_misses[i] = detail::round_to(2.0e6 + 1.0e5 * cm_base[i], 1.0);
  std::vector<double> rx(n);
  if (planted) {
    double sd = 0.0, mean = 0.0;
    for (double v : cache_misses) mean += v;
    mean /= static_cast<double>(n);
    for (double v : cache_misses) sd += (v - mean) * (v - mean);
    sd = std::sqrt(sd / static_cast<double>(n - 1));
    const auto y = lagged_copy(cache_misses, 5, 0.01 * sd, sub(11));
    for (std::size_t i = 0; i < n; ++i) rx[i] = detail::round_to(0.5 * y[i], 0.01);
    planted_lags.push_back({{"metric_a", "web01/perf.cache-misses"}, {"metric_b", "web01/sar.net.rx_kBps"}, {"lag", 5}});
  } else {
    for (std::size_t i = 0; i < n; ++i) rx[i] = detail::round_to(1.0e6 + 5.0e4 * rx_noise[i], 0.01);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool q = is_quiet(i);
    double user = q ? 2.0 + 0.2 * std::abs(user_noise[i]) : 40.0 + 2.0 * load[i] + 1.5 * user_noise[i];
    double sys = q ? 1.0 + 0.1 * std::abs(sys_noise[i]) : 10.0 + sys_noise[i];
    double wait = 0.5 + 0.5 * std::abs(wait_noise[i]);
    user = detail::round_to(std::clamp(user, 1.0, 80.0), 0.01);
    sys = detail::round_to(std::clamp(sys, 0.5, 15.0), 0.01);
    wait = detail::round_to(std::min(wait, 3.0), 0.01);
    const double idle = detail::round_to(100.0 - user - sys - wait, 0.01);
    double mem = detail::round_to(std::clamp(60.0 + 3.0 * mem_noise[i], 20.0, 95.0), 0.01);
    if (faulty && i == decomp_row) sys += 15.0;
    if (faulty && i == range_row) mem = 105.0;
    sar.push_back(sampled("web01", "sar.cpu.user_pct", i, user, "percent"));
    sar.push_back(sampled("web01", "sar.cpu.system_pct", i, sys, "percent"));
    sar.push_back(sampled("web01", "sar.cpu.iowait_pct", i, wait, "percent"));
    sar.push_back(sampled("web01", "sar.cpu.idle_pct", i, idle, "percent"));
    sar.push_back(sampled("web01", "sar.mem.used_pct", i, mem, "percent"));
    sar.push_back(sampled("web01", "sar.net.rx_kBps", i, rx[i], "kB/s"));
  }
  if (faulty) {
    violations.push_back({{"check_id", "correctness.range"}, {"subject", "web01/sar.mem.used_pct"},
                          {"ts", end_ts(range_row)}, {"detail", "mem.used_pct set to 105"}});
    violations.push_back({{"check_id", "model.cpu_decomposition"}, {"subject", "web01/sar.cpu.*_pct"},
                          {"ts", end_ts(decomp_row)}, {"detail", "cpu.system_pct raised by 15 points"}});
  }

  // perf on web01 (and the aggressor host web02 for noisy-neighbor).
  std::vector<MetricSample> perf;
  for (std::size_t i = 0; i < n; ++i) {
    const double instr = is_quiet(i) ? 2.0e8 + 1.0e7 * std::abs(instr_noise[i])
                                     : 5.0e9 + 1.0e8 * load[i] + 5.0e7 * instr_noise[i];
    perf.push_back(sampled("web01", "perf.cache-misses", i, cache_misses[i], "count"));
    perf.push_back(sampled("web01", "perf.instructions", i, detail::round_to(instr, 1.0), "count"));
  }
  std::vector<MetricSample> perf2;
  if (noisy)
    for (std::size_t i = 0; i < n; ++i)
      perf2.push_back(sampled("web02", "perf.cache-misses", i, detail::round_to(3.0e6 + 2.0e5 * aggressor[i], 1.0), "count"));

  // GC events on app01, strictly inside the sampled span.
  std::vector<MetricSample> gc;
  {
    Rng rng(sub(12));
    const std::int64_t first_ms = (kScenarioOriginS + 10) * 1000;
    const std::int64_t last_ms = (kScenarioOriginS + 10 * static_cast<std::int64_t>(n)) * 1000;
    std::int64_t t = first_ms + 20'000;
    while (t < last_ms) {
      const TimestampNs ts = t * 1'000'000;
      gc.push_back({"", "app01", "gc.pause_ms", ts, detail::round_to(5.0 + 45.0 * rng.uniform(), 0.1), "ms", Semantics::Event, 0});
      gc.push_back({"", "app01", "gc.heap_before_mb", ts, detail::round_to(800.0 + 50.0 * rng.normal(), 0.1), "MB", Semantics::Event, 0});
      gc.push_back({"", "app01", "gc.heap_after_mb", ts, detail::round_to(300.0 + 30.0 * rng.normal(), 0.1), "MB", Semantics::Event, 0});
      t += 30'000 + static_cast<std::int64_t>(rng.below(60'000));
    }
  }

  Scenario sc;
  sc.name = name;
  sc.seed = seed;
  auto add = [&](std::string file, Format f, ClockSpec clock, std::string host, std::vector<MetricSample>& samples) {
    for (auto& s : samples) s.source_id = std::string(to_string(f));
    sc.files.push_back({std::move(file), f, clock, std::move(host), emit_format(samples, f, clock)});
  };
  add("web01.sar", Format::Sar, ClockSpec::wall_clock(120), "web01", sar);
  add("web01.perf", Format::Perf, ClockSpec::epoch(EpochUnit::Milliseconds), "web01", perf);
  if (noisy) add("web02.perf", Format::Perf, ClockSpec::epoch(EpochUnit::Milliseconds), "web02", perf2);
  add("app01.gc", Format::Gc, ClockSpec::epoch(EpochUnit::Milliseconds), "app01", gc);
  add("client.loadgen", Format::Loadgen, ClockSpec::epoch(EpochUnit::Seconds), "client", ux);

  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : sc.files)
    files.push_back({{"path", f.filename}, {"format", to_string(f.format)}, {"host_id", f.host_id}, {"clock", detail::clock_json(f.clock)}});
  sc.manifest = {{"scenario", name},
                 {"seed", seed},
                 {"step_ns", kScenarioStepNs},
                 {"rows", n},
                 {"files", files},
                 {"planted_lags", planted_lags},
                 {"violations", violations},
                 {"expected_verdict", faulty ? "fail" : "pass"},
                 {"lag_convention", "positive lag k: metric_b trails metric_a by k grid steps"}};
  return sc;
}

}  // namespace perftidy::synth
