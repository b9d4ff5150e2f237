// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "perftidy/pipeline.hpp"

using namespace perftidy;

namespace {

constexpr std::int64_t S = kNsPerSecond;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double sample_sd(const std::vector<double>& x) {
  double m = 0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

// ---------------------------------------------------------------------------
// 1. Round-trip fidelity

ClockSpec random_clock(synth::Rng& rng) {
  switch (rng.below(6)) {
    case 0: return ClockSpec::epoch(EpochUnit::Seconds);
    case 1: return ClockSpec::epoch(EpochUnit::Milliseconds);
    case 2: return ClockSpec::epoch(EpochUnit::Microseconds);
    case 3: return ClockSpec::epoch(EpochUnit::Nanoseconds);
    case 4: return ClockSpec::wall_clock(static_cast<int>(rng.below(1681)) - 840, "%Y-%m-%d %H:%M:%S.%f");
    default: return ClockSpec::wall_clock(static_cast<int>(rng.below(1681)) - 840, "%d/%m/%Y %H:%M:%S.%f");
  }
}

double random_value(synth::Rng& rng, bool non_negative) {
  const double v = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(13)) - 6.0);
  return non_negative ? std::abs(v) : v;
}

std::vector<MetricSample> random_samples(Format f, synth::Rng& rng) {
  const std::string src{to_string(f)};
  const std::string host = "host" + std::to_string(rng.below(100));
  const std::size_t rows = 1 + rng.below(60);
  const std::int64_t step_ms = 1 + static_cast<std::int64_t>(rng.below(60'000));
  const std::int64_t t0 = (1'000'000'000 + static_cast<std::int64_t>(rng.below(1'000'000'000))) * S;
  std::vector<MetricSample> out;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::int64_t ts = t0 + static_cast<std::int64_t>(r) * step_ms * 1'000'000;
    switch (f) {
      case Format::Sar:
        for (const char* m : {"cpu.user_pct", "net.rx_kBps", "mem.used_pct"})
          out.push_back({src, host, std::string("sar.") + m, ts, random_value(rng, false), "unit" + std::to_string(rng.below(3)),
                         Semantics::IntervalAverage, 0});
        break;
      case Format::Perf:
        for (const char* m : {"cache-misses", "instructions", "cycles"})
          out.push_back({src, host, std::string("perf.") + m, ts, random_value(rng, true), "count", Semantics::IntervalAverage, 0});
        break;
      case Format::Gc:
        for (const char* m : {"gc.pause_ms", "gc.heap_before_mb", "gc.heap_after_mb"})
          out.push_back({src, host, m, ts, random_value(rng, true), "", Semantics::Event, 0});
        break;
      case Format::Loadgen:
        for (const char* m : {"ux.throughput_ops_s", "ux.resp_time_s", "ux.concurrency"})
          out.push_back({src, host, m, ts, random_value(rng, true), "", Semantics::IntervalAverage, 0});
        break;
    }
  }
  for (auto& s : out)
    if (s.semantics != Semantics::Event) s.interval_ns = step_ms * 1'000'000;
  return out;
}

Outcome c1_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t sets = 0, samples = 0, failures = 0;
  double worst_rel = 0;
  for (auto f : {Format::Sar, Format::Perf, Format::Gc, Format::Loadgen}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      synth::Rng rng(synth::splitmix64(seed * 4 + static_cast<std::uint64_t>(f)));
      const auto clock = random_clock(rng);
      auto original = random_samples(f, rng);
      // a file with one timestamp carries no gap to infer the interval from; declare it as a config would
      ParseOptions opts{std::string(to_string(f)), std::nullopt};
      if (original.size() == 3 && f != Format::Gc) opts.interval_override_ns = original.front().interval_ns;
      auto parsed = parse(f, synth::emit_format(original, f, clock), clock, original.front().host_id, opts);
      ++sets;
      samples += original.size();
      auto key = [](const MetricSample& s) { return std::tie(s.ts, s.metric_name); };
      auto by_key = [&](const MetricSample& a, const MetricSample& b) { return key(a) < key(b); };
      std::sort(original.begin(), original.end(), by_key);
      std::sort(parsed.begin(), parsed.end(), by_key);
      if (parsed.size() != original.size()) {
        ++failures;
        continue;
      }
      for (std::size_t i = 0; i < parsed.size(); ++i) {
        const auto &p = parsed[i], &o = original[i];
        const double rel = std::abs(p.value - o.value) / std::max(std::abs(o.value), 1e-300);
        worst_rel = std::max(worst_rel, rel);
        const bool unit_ok = f == Format::Sar || f == Format::Perf ? p.unit == o.unit : true;
        if (p.ts != o.ts || p.metric_name != o.metric_name || p.host_id != o.host_id || p.semantics != o.semantics ||
            p.interval_ns != o.interval_ns || !unit_ok || rel > 1e-9)
          ++failures;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < 10.0,
          std::to_string(sets) + " sets, " + std::to_string(samples) + " samples, " + std::to_string(failures) +
              " mismatches, worst value rel err " + fmt(worst_rel) + ", " + fmt(secs) + " s (limit 10 s)"};
}

// ---------------------------------------------------------------------------
// 2. Clock unification

Outcome c2_clocks() {
  synth::Rng rng(2024);
  std::size_t instants = 0, mismatches = 0;
  const std::vector<ClockSpec> clocks{ClockSpec::epoch(EpochUnit::Seconds), ClockSpec::epoch(EpochUnit::Milliseconds),
                                      ClockSpec::epoch(EpochUnit::Nanoseconds), ClockSpec::wall_clock(-300),
                                      ClockSpec::wall_clock(0), ClockSpec::wall_clock(330)};
  for (int i = 0; i < 1000; ++i) {
    const std::int64_t ts = (static_cast<std::int64_t>(rng.below(3'000'000'000ULL)) + 100'000) * S;
    std::set<std::int64_t> seen;
    for (const auto& c : clocks) {
      // each variant is written by hand, independently of format_timestamp
      std::string raw;
      if (c.kind == ClockKind::Epoch) {
        raw = std::to_string(ts / ns_per_unit(c.unit));
      } else {
        const std::time_t local = static_cast<std::time_t>(ts / S + c.tz_offset_minutes * 60);
        std::tm tm{};
        gmtime_r(&local, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%d %H:%M:%S", &tm);
        raw = buf;
      }
      seen.insert(normalize_timestamp(raw, c));
    }
    ++instants;
    if (seen.size() != 1 || *seen.begin() != ts) ++mismatches;
  }
  return {mismatches == 0, std::to_string(instants) + " instants x 6 encodings (epoch s/ms/ns; tz -300/0/+330), " +
                               std::to_string(mismatches) + " disagreements"};
}

// ---------------------------------------------------------------------------
// 3. Semantics alignment

Outcome c3_semantics() {
  // Tools report every 10 s; the grid step is 5 s so end stamps and midpoints both sit on it.
  const std::int64_t interval = 10 * S;
  const double base = 50.0, amp = 20.0;
  double worst_aligned = 0, worst_naive = 0;
  for (double period_steps : {20.0, 40.0, 100.0}) {
    for (double phase : {0.0, 1.0, 2.5}) {
      const double period_s = period_steps * 10.0;
      const double w = 2.0 * std::numbers::pi / period_s;
      auto f = [&](double t) { return base + amp * std::sin(w * t + phase); };
      auto window_mean = [&](double t) {  // exact mean of f over (t - 10, t]
        return base + amp * (std::cos(w * (t - 10.0) + phase) - std::cos(w * t + phase)) / (w * 10.0);
      };
      std::vector<MetricSample> samples;
      for (int i = 1; i <= 200; ++i) {
        const double t = 1000.0 + 10.0 * i;
        const std::int64_t ts = static_cast<std::int64_t>(t) * S;
        samples.push_back({"toolA", "h", "a", ts, window_mean(t), "u", Semantics::IntervalAverage, interval});
        samples.push_back({"toolB", "h", "b", ts, f(t), "u", Semantics::InstantAtEnd, interval});
        samples.push_back({"toolC", "h", "c", ts, f(t - 5.0), "u", Semantics::InstantMid, interval});
      }
      auto worst_error = [&](const std::vector<MetricSample>& in) {
        const auto grid = build_grid(in, 5 * S);
        const auto table = merge({snap_to_grid(in, grid, 0)});
        double worst = 0;
        for (std::size_t c = 0; c < table.n_columns(); ++c)
          for (std::size_t i = 0; i < table.n_rows(); ++i)
            if (const auto& v = table.column(c)[i]) {
              const double truth = f(static_cast<double>(table.grid().at(i)) / static_cast<double>(S));
              worst = std::max(worst, std::abs(*v - truth) / std::abs(truth));
            }
        return worst;
      };
      worst_aligned = std::max(worst_aligned, worst_error(adjust_semantics(samples)));
      worst_naive = std::max(worst_naive, worst_error(samples));
    }
  }
  return {worst_aligned <= 0.05, "periods 20/40/100 steps x 3 phases: worst rel err " + fmt(worst_aligned) +
                                     " after adjust_semantics (limit 0.05; unadjusted " + fmt(worst_naive) + ")"};
}

// ---------------------------------------------------------------------------
// 4. Imputation exactness

Outcome c4_imputation() {
  double lin_err = 0, mean_err = 0, median_err = 0;
  bool zero_ok = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    synth::Rng rng(seed);
    const double a = rng.normal() * 5, b = rng.normal() * 500;
    std::vector<double> truth(300);
    for (std::size_t t = 0; t < truth.size(); ++t) truth[t] = a * static_cast<double>(t) + b;
    const auto holed = synth::inject_missing(truth, synth::RandomMissing{0.3}, seed);
    const auto lin = impute_series(holed, {ImputeMethod::LinearInterpolation, Boundary::LeaveMissing, false});
    for (std::size_t t = 0; t < truth.size(); ++t)
      if (lin.values[t]) lin_err = std::max(lin_err, std::abs(*lin.values[t] - truth[t]) / std::max(1.0, std::abs(truth[t])));

    std::vector<double> noise(301);
    for (auto& v : noise) v = 100 + 30 * rng.normal();
    const auto hn = synth::inject_missing(noise, synth::RandomMissing{0.4}, seed + 1);
    std::vector<double> present;
    for (const auto& v : hn)
      if (v) present.push_back(*v);
    auto stats = [](std::vector<double> v) {
      double m = 0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      std::sort(v.begin(), v.end());
      const std::size_t n = v.size();
      return std::pair{m, n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2])};
    };
    const auto before = stats(present);
    auto filled = [&](ImputeMethod m) {
      std::vector<double> out;
      for (const auto& v : impute_series(hn, {m, Boundary::LeaveMissing, false}).values) out.push_back(*v);
      return stats(out);
    };
    mean_err = std::max(mean_err, std::abs(filled(ImputeMethod::Mean).first - before.first) / std::abs(before.first));
    median_err = std::max(median_err, std::abs(filled(ImputeMethod::Median).second - before.second) / std::abs(before.second));

    // merged GC + SAR: GC zero exactly where no event snapped
    std::vector<MetricSample> sar, gc;
    for (int i = 0; i < 100; ++i)
      sar.push_back({"sar", "h", "sar.cpu.user_pct", (1000 + 10 * i) * S, 10 + rng.uniform(), "percent", Semantics::InstantAtEnd, 10 * S});
    for (int i = 0; i < 12; ++i)
      gc.push_back({"gc", "h", "gc.pause_ms", (1000 + static_cast<std::int64_t>(rng.below(990))) * S, 1 + rng.uniform(), "ms", Semantics::Event, 0});
    std::vector<MetricSample> all = sar;
    all.insert(all.end(), gc.begin(), gc.end());
    const auto grid = build_grid(all, 10 * S);
    const auto merged = merge({snap_to_grid(sar, grid), snap_to_grid(gc, grid)});
    const auto imputed = impute_table(merged);
    const auto c = *merged.find("h", "gc.pause_ms");
    for (std::size_t i = 0; i < merged.n_rows(); ++i) {
      const auto& before_cell = merged.column(c)[i];
      const auto& after_cell = imputed.table.column(c)[i];
      zero_ok = zero_ok && after_cell && (before_cell ? *after_cell == *before_cell : *after_cell == 0.0);
      zero_ok = zero_ok && imputed.masks[c][i] == !before_cell.has_value();
    }
  }
  const bool pass = lin_err <= 1e-9 && mean_err <= 1e-9 && median_err <= 1e-9 && zero_ok;
  return {pass, "linear max rel err " + fmt(lin_err) + ", mean drift " + fmt(mean_err) + ", median drift " + fmt(median_err) +
                    " (limit 1e-9); GC zero-fill " + (zero_ok ? "exact" : "WRONG") + " over 50 seeds"};
}

// ---------------------------------------------------------------------------
// 5. Lag recovery

Outcome c5_lag_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (std::size_t k : {0, 1, 3, 10, 20}) {
    const auto x = synth::gen_signal({synth::Ar1{0.8, 1.0}, 1000, 500 + k});
    const auto y = synth::lagged_copy(x, k, 0.1 * sample_sd(x), 900 + k);
    const auto b = best_lag(std::span<const double>(x), std::span<const double>(y), 30);
    const bool hit = b.lag == static_cast<int>(k) && b.r >= 0.9;
    ok = ok && hit;
    detail += "k=" + std::to_string(k) + "->" + std::to_string(b.lag) + " r=" + fmt(b.r) + "; ";
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 5.0, detail + fmt(secs) + " s (limit 5 s)"};
}

// ---------------------------------------------------------------------------
// 6. Oracle equivalence

TidyTable random_table(std::uint64_t seed, bool with_missing) {
  synth::Rng rng(seed);
  const std::size_t cols = 2 + rng.below(9), rows = 60 + rng.below(141);
  std::vector<std::vector<double>> dense;
  for (std::size_t c = 0; c < cols; ++c) {
    if (c > 0 && rng.uniform() < 0.5) {
      const auto& src = dense[rng.below(c)];
      dense.push_back(synth::lagged_copy(src, rng.below(8), 0.3 + rng.uniform(), seed * 100 + c));
    } else {
      dense.push_back(synth::gen_signal({synth::Ar1{0.9 * rng.uniform(), 1.0}, rows, seed * 100 + c}));
    }
  }
  std::vector<ColumnInfo> info;
  std::vector<Series> cells;
  for (std::size_t c = 0; c < cols; ++c) {
    info.push_back({"h" + std::to_string(c % 3), "m" + std::to_string(c), "u", Semantics::InstantAtEnd});
    cells.push_back(with_missing ? synth::inject_missing(dense[c], synth::RandomMissing{0.1}, seed + c)
                                 : Series(dense[c].begin(), dense[c].end()));
  }
  return TidyTable({0, S, rows}, info, cells);
}

Outcome c6_oracle() {
  std::size_t tables = 0, mismatches = 0, entries = 0;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = random_table(1000 + seed, seed % 2 == 1);
    NominateParams p;
    p.max_lag = 15;
    p.top_k = 100;
    p.min_abs_r = 0.2;
    p.pairwise_complete = true;
    const auto got = nominate(t, p);
    std::vector<std::string> ids;
    for (const auto& c : t.columns()) ids.push_back(c.id());
    const auto want = oracle::nominate(ids, t.cells(), p.max_lag, p.top_k, p.min_abs_r);
    ++tables;
    if (got.ranked.size() != want.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t i = 0; i < want.size(); ++i) {
      ++entries;
      const auto& g = got.ranked[i];
      worst = std::max(worst, std::abs(g.r_at_best - want[i].r));
      if (g.metric_a != want[i].a || g.metric_b != want[i].b || g.best_lag != want[i].lag ||
          std::abs(g.r_at_best - want[i].r) > 1e-9)
        ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(tables) + " tables, " + std::to_string(entries) + " ranked pairs, " +
                               std::to_string(mismatches) + " mismatches, worst |dr| " + fmt(worst) + " (limit 1e-9)"};
}

// ---------------------------------------------------------------------------
// 7. Affine invariance

Outcome c7_affine() {
  double worst = 0;
  std::size_t rank_changes = 0;
  synth::Rng rng(77);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto x = synth::gen_signal({synth::Ar1{0.7, 1.0}, 400, seed});
    const auto y = synth::lagged_copy(x, seed % 10, 1.0, seed + 1000);
    const double a = std::exp(4.0 * rng.normal()), b = rng.normal() * 1e3;
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = a * x[i] + b;
    const auto c0 = ccf(std::span<const double>(x), std::span<const double>(y), 30);
    const auto c1 = ccf(std::span<const double>(z), std::span<const double>(y), 30);
    for (std::size_t i = 0; i < c0.size(); ++i) worst = std::max(worst, std::abs(c0[i].r - c1[i].r));

    const auto other = synth::gen_signal({synth::Ar1{0.5, 1.0}, 400, seed + 5000});
    const auto other2 = synth::lagged_copy(other, 2, 2.0, seed + 6000);
    auto table_with = [&](const std::vector<double>& first) {
      std::vector<ColumnInfo> info;
      std::vector<Series> cells;
      int c = 0;
      for (const auto* col : {&first, &y, &other, &other2}) {
        info.push_back({"h", "m" + std::to_string(c++), "u", Semantics::InstantAtEnd});
        cells.emplace_back(col->begin(), col->end());
      }
      return TidyTable({0, S, x.size()}, info, cells);
    };
    NominateParams p;
    p.min_abs_r = 0.0;
    const auto r0 = nominate(table_with(x), p), r1 = nominate(table_with(z), p);
    bool same = r0.ranked.size() == r1.ranked.size();
    for (std::size_t i = 0; same && i < r0.ranked.size(); ++i)
      same = r0.ranked[i].metric_a == r1.ranked[i].metric_a && r0.ranked[i].metric_b == r1.ranked[i].metric_b &&
             r0.ranked[i].best_lag == r1.ranked[i].best_lag;
    if (!same) ++rank_changes;
  }
  return {worst <= 1e-9 && rank_changes == 0,
          "50 pairs: worst |dr| " + fmt(worst) + " (limit 1e-9), " + std::to_string(rank_changes) + " ranking changes"};
}

// ---------------------------------------------------------------------------
// 8. Quality model

QualityReport assess_scenario(const std::string& name, std::uint64_t seed) {
  const auto dir = fs::temp_directory_path() / ("perftidy_acceptance_" + name + std::to_string(seed));
  fs::remove_all(dir);
  write_scenario(synth::gen_scenario(name, seed), dir);
  const auto cfg = load_config(dir / "config.json");
  const auto samples = ingest_inputs(cfg);
  return assess(align(samples, cfg).table, samples, cfg.quality);
}

Outcome c8_quality() {
  bool ok = true;
  std::string detail;
  std::size_t clean_fails = 0, faulty_mismatch = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto clean = assess_scenario("clean", seed);
    if (!clean.pass || clean.n_fail != 0) ++clean_fails;
    const auto manifest = synth::gen_scenario("faulty", seed).manifest;
    const auto faulty = assess_scenario("faulty", seed);
    std::multiset<std::string> want, got;
    for (const auto& v : manifest["violations"]) want.insert(v["check_id"].get<std::string>());
    for (const auto& f : faulty.findings)
      if (f.severity == Severity::Fail) got.insert(f.check_id);
    if (got != want || faulty.pass) ++faulty_mismatch;
  }
  ok = clean_fails == 0 && faulty_mismatch == 0;
  detail += "clean: " + std::to_string(clean_fails) + "/5 seeds with fails; faulty: " + std::to_string(faulty_mismatch) +
            "/5 seeds with fail set != manifest; ";

  auto loadgen = [](double n) {
    return TidyTable({0, S, 2},
                     {{"c", "ux.throughput_ops_s", "ops/s", Semantics::IntervalAverage},
                      {"c", "ux.resp_time_s", "s", Semantics::IntervalAverage},
                      {"c", "ux.concurrency", "count", Semantics::IntervalAverage}},
                     {Series{100.0, 100.0}, Series{0.5, 0.5}, Series{n, n}});
  };
  QualityConfig cfg;
  cfg.littles_law_tolerance = 0.1;
  const auto pass = littles_law_check(loadgen(50), cfg), fail = littles_law_check(loadgen(500), cfg);
  const bool ll = pass.severity != Severity::Fail && fail.severity == Severity::Fail;
  ok = ok && ll;
  detail += "Little's law N=50 " + std::string(pass.severity == Severity::Fail ? "fail" : "pass") + ", N=500 " +
            (fail.severity == Severity::Fail ? "fail" : "pass") + " (err " + fmt(*fail.measured) + ")";
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 9. Desk-scale throughput

Outcome c9_throughput() {
  const std::size_t m = 1000, n = 1000;
  std::vector<ColumnInfo> info;
  std::vector<Series> cells;
  for (std::size_t c = 0; c < m; ++c) {
    const auto x = synth::gen_signal({synth::Ar1{0.8, 1.0}, n, c});
    char name[16];
    std::snprintf(name, sizeof name, "m%04zu", c);
    info.push_back({"h", name, "u", Semantics::InstantAtEnd});
    cells.emplace_back(x.begin(), x.end());
  }
  const TidyTable table({0, S, n}, info, cells);
  NominateParams p;
  p.max_lag = 30;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = nominate(table, p);
  const double secs = seconds_since(t0);
  return {secs < 300.0 && r.pairs_scored == m * (m - 1) / 2,
          std::to_string(r.pairs_scored) + " pairs x 61 lags in " + fmt(secs) + " s on " +
              std::to_string(std::max(1u, std::thread::hardware_concurrency())) + " hardware thread(s) (limit 300 s)"};
}

// ---------------------------------------------------------------------------
// 10. End-to-end determinism

Outcome c10_determinism() {
  const auto root = fs::temp_directory_path() / "perftidy_acceptance_e2e";
  fs::remove_all(root);
  auto sh = [](const std::string& args) {
    const int st = std::system((std::string(PERFTIDY_BIN) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  };
  if (sh("synth --scenario planted-lag --seed 11 --out " + (root / "in").string()) != 0) return {false, "synth failed"};
  const std::string cfg = (root / "in" / "config.json").string();
  const int s1 = sh("pipeline --plots --config " + cfg + " --out " + (root / "run1").string());
  const int s2 = sh("pipeline --plots --config " + cfg + " --out " + (root / "run2").string());
  if (s1 != 0 || s2 != 0) return {false, "pipeline exit status " + std::to_string(s1) + "/" + std::to_string(s2)};
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(root / "run1")) {
    if (!e.is_regular_file()) continue;  // plots/ holds the images
    ++files;
    if (read_file(e.path()) != read_file(root / "run2" / e.path().filename())) ++differing;
  }
  const auto manifest = nlohmann::json::parse(read_file(root / "in" / "manifest.json"));
  const auto& planted = manifest["planted_lags"][0];
  const auto recs = text::records(read_file(root / "run1" / "nominations.txt"));
  bool top_ok = recs.size() >= 2;
  std::string top = "none";
  if (top_ok) {
    const auto& f = recs[1].fields;  // recs[0] is the column header
    top = std::string(f[0]) + " -> " + std::string(f[1]) + " lag " + std::string(f[2]);
    top_ok = f[0] == planted["metric_a"].get<std::string>() && f[1] == planted["metric_b"].get<std::string>() &&
             f[2] == std::to_string(planted["lag"].get<int>());
  }
  return {differing == 0 && files > 0 && top_ok, std::to_string(files) + " non-image files, " + std::to_string(differing) +
                                                     " differ; top nomination " + top};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 round-trip fidelity", c1_round_trip},     {"2 clock unification", c2_clocks},
      {"3 semantics alignment", c3_semantics},      {"4 imputation exactness", c4_imputation},
      {"5 lag recovery", c5_lag_recovery},          {"6 oracle equivalence", c6_oracle},
      {"7 affine invariance", c7_affine},           {"8 quality model", c8_quality},
      {"9 desk-scale throughput", c9_throughput},   {"10 end-to-end determinism", c10_determinism}};
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criterion(s) failed" : "acceptance: all criteria pass")
            << std::endl;
  return failed ? 1 : 0;
}
