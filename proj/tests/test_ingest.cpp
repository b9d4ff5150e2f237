#include <set>

#include <gtest/gtest.h>

#include "expect_error.hpp"
#include "perftidy/ingest.hpp"
#include "perftidy/synth.hpp"

using namespace perftidy;

namespace {
const ClockSpec kEpochS = ClockSpec::epoch(EpochUnit::Seconds);
constexpr std::int64_t S = kNsPerSecond;
}  // namespace

TEST(NormalizeTimestamp, EpochMilliseconds) {
  EXPECT_EQ(normalize_timestamp(1000, ClockSpec::epoch(EpochUnit::Milliseconds)), 1'000'000'000);
  EXPECT_EQ(normalize_timestamp("1000", ClockSpec::epoch(EpochUnit::Milliseconds)), 1'000'000'000);
}

TEST(NormalizeTimestamp, WallClockUtc) {
  EXPECT_EQ(normalize_timestamp("1970-01-01 00:00:10", ClockSpec::wall_clock(0)), 10 * S);
}

TEST(NormalizeTimestamp, OffsetCancels) {
  EXPECT_EQ(normalize_timestamp("1970-01-01 01:00:00", ClockSpec::wall_clock(60)), 0);
}

TEST(NormalizeTimestamp, EpochFractions) {
  EXPECT_EQ(normalize_timestamp("1.5", kEpochS), 1'500'000'000);
  EXPECT_EQ(normalize_timestamp("2.000000001", kEpochS), 2'000'000'001);
  EXPECT_EQ(normalize_timestamp("3.25", ClockSpec::epoch(EpochUnit::Milliseconds)), 3'250'000);
  EXPECT_ERROR_CODE(normalize_timestamp("1.0000000001", kEpochS), ErrorCode::UnparseableTimestamp);
}

TEST(NormalizeTimestamp, Errors) {
  EXPECT_ERROR_CODE(normalize_timestamp("-5", kEpochS), ErrorCode::NegativeEpoch);
  EXPECT_ERROR_CODE(normalize_timestamp(-5, kEpochS), ErrorCode::NegativeEpoch);
  EXPECT_ERROR_CODE(normalize_timestamp("abc", kEpochS), ErrorCode::UnparseableTimestamp);
  EXPECT_ERROR_CODE(normalize_timestamp("", kEpochS), ErrorCode::UnparseableTimestamp);
  EXPECT_ERROR_CODE(normalize_timestamp("99999999999999999999", kEpochS), ErrorCode::UnparseableTimestamp);
  EXPECT_ERROR_CODE(normalize_timestamp("1970-01-01 00:30:00", ClockSpec::wall_clock(60)), ErrorCode::NegativeEpoch);
  EXPECT_ERROR_CODE(normalize_timestamp("1970-13-01 00:00:00", ClockSpec::wall_clock(0)), ErrorCode::UnparseableTimestamp);
  EXPECT_ERROR_CODE(normalize_timestamp("1970-02-30 00:00:00", ClockSpec::wall_clock(0)), ErrorCode::UnparseableTimestamp);
  EXPECT_ERROR_CODE(normalize_timestamp("1970-01-01 00:00", ClockSpec::wall_clock(0)), ErrorCode::UnparseableTimestamp);
}

TEST(NormalizeTimestamp, CustomPatternWithFraction) {
  const auto clock = ClockSpec::wall_clock(-300, "%d/%m/%Y %H:%M:%S.%f");
  const auto ts = normalize_timestamp("14/11/2023 17:13:20.25", clock);
  EXPECT_EQ(ts, 1'700'000'000 * S + 250'000'000);  // 22:13:20.25 UTC
  EXPECT_EQ(normalize_timestamp(format_timestamp(ts, clock), clock), ts);
}

TEST(NormalizeTimestamp, FormatRejectsLostPrecision) {
  EXPECT_ERROR_CODE(format_timestamp(1'500'000'000, ClockSpec::wall_clock(0)), ErrorCode::SchemaMismatch);
  EXPECT_EQ(format_timestamp(1'500'000'000, kEpochS), "1.5");
}

TEST(NormalizeTimestamp, ManyEncodingsOneInstant) {
  synth::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t ts = static_cast<std::int64_t>(rng.below(4'000'000'000ULL)) * S;
    for (const auto& clock : {ClockSpec::epoch(EpochUnit::Seconds), ClockSpec::epoch(EpochUnit::Milliseconds),
                              ClockSpec::epoch(EpochUnit::Microseconds), ClockSpec::epoch(EpochUnit::Nanoseconds),
                              ClockSpec::wall_clock(-840), ClockSpec::wall_clock(330), ClockSpec::wall_clock(840)}) {
      if (ts + clock.tz_offset_minutes * 60 * S < 0) continue;
      EXPECT_EQ(normalize_timestamp(format_timestamp(ts, clock), clock), ts);
    }
  }
}

TEST(ParseSar, TwoRows) {
  const auto s = parse_sar("10;cpu.user_pct;42.5;percent\n20;cpu.user_pct;40;percent\n", kEpochS, "web01");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].metric_name, "sar.cpu.user_pct");
  EXPECT_EQ(s[0].ts, 10 * S);
  EXPECT_EQ(s[0].value, 42.5);
  EXPECT_EQ(s[0].unit, "percent");
  EXPECT_EQ(s[0].host_id, "web01");
  EXPECT_EQ(s[0].source_id, "sar");
  EXPECT_EQ(s[0].semantics, Semantics::IntervalAverage);
  EXPECT_EQ(s[0].interval_ns, 10 * S);
  EXPECT_EQ(s[1].interval_ns, 10 * S);
}

TEST(ParseSar, EmptyInput) {
  EXPECT_TRUE(parse_sar("", kEpochS, "h").empty());
  EXPECT_TRUE(parse_sar("# only a comment\n\n", kEpochS, "h").empty());
}

TEST(ParseSar, NonNumericValueReportsLine) {
  try {
    parse_sar("10;cpu.user_pct;1;percent\n20;cpu.user_pct;abc;percent\n", kEpochS, "h");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonNumericValue);
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseSar, MalformedRowReportsLine) {
  try {
    parse_sar("# hdr\n10;cpu.user_pct;1\n", kEpochS, "h");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRow);
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseSar, IntervalInference) {
  // per-metric mode wins; a metric with one row falls back to the file-wide mode
  const auto s = parse_sar("0;a;1;u\n5;a;1;u\n10;a;1;u\n30;a;1;u\n0;b;1;u\n", kEpochS, "h");
  for (const auto& x : s) EXPECT_EQ(x.interval_ns, 5 * S) << x.metric_name;
  const auto lone = parse_sar("7;a;1;u\n", kEpochS, "h");
  EXPECT_EQ(lone[0].interval_ns, kDefaultIntervalNs);
  const auto over = parse_sar("0;a;1;u\n5;a;1;u\n", kEpochS, "h", {"src", 60 * S});
  EXPECT_EQ(over[0].interval_ns, 60 * S);
  EXPECT_EQ(over[0].source_id, "src");
}

TEST(ParsePerf, OneRow) {
  const auto s = parse_perf("1;cache-misses;42\n", kEpochS, "h");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].metric_name, "perf.cache-misses");
  EXPECT_EQ(s[0].unit, "count");
  EXPECT_EQ(s[0].ts, S);
  EXPECT_EQ(s[0].semantics, Semantics::IntervalAverage);
}

TEST(ParsePerf, TwoEventsShareTs) {
  const auto s = parse_perf("1;cache-misses;42\n1;instructions;900\n", kEpochS, "h");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].ts, s[1].ts);
}

TEST(ParsePerf, DuplicateSample) {
  try {
    parse_perf("1;cache-misses;42\n1;cache-misses;43\n", kEpochS, "h");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateSample);
    EXPECT_NE(e.detail().find("cache-misses"), std::string::npos);
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseGc, OneEventThreeSamples) {
  const auto s = parse_gc("5;12.5;512;256\n", kEpochS, "app");
  ASSERT_EQ(s.size(), 3u);
  std::set<std::string> names;
  for (const auto& x : s) {
    EXPECT_EQ(x.ts, 5 * S);
    EXPECT_EQ(x.semantics, Semantics::Event);
    EXPECT_EQ(x.interval_ns, 0);
    names.insert(x.metric_name);
  }
  EXPECT_EQ(names, (std::set<std::string>{"gc.pause_ms", "gc.heap_before_mb", "gc.heap_after_mb"}));
}

TEST(ParseGc, IrregularTimestampsPreserved) {
  const auto s = parse_gc("3;1;2;1\n17;1;2;1\n18;1;2;1\n", kEpochS, "app");
  std::set<std::int64_t> ts;
  for (const auto& x : s) ts.insert(x.ts);
  EXPECT_EQ(ts, (std::set<std::int64_t>{3 * S, 17 * S, 18 * S}));
}

TEST(ParseGc, NegativePause) {
  EXPECT_ERROR_CODE(parse_gc("3;-1;2;1\n", kEpochS, "app"), ErrorCode::NegativePause);
  EXPECT_ERROR_CODE(parse_gc("3;1;2\n", kEpochS, "app"), ErrorCode::MalformedRow);
}

TEST(ParseLoadgen, ThreeSamples) {
  const auto s = parse_loadgen("10;100;0.5;50\n", kEpochS, "client");
  ASSERT_EQ(s.size(), 3u);
  for (const auto& x : s) EXPECT_EQ(x.ts, 10 * S);
  EXPECT_TRUE(parse_loadgen("", kEpochS, "client").empty());
}

TEST(ParseLoadgen, NegativeThroughput) {
  EXPECT_ERROR_CODE(parse_loadgen("10;-5;0.5;50\n", kEpochS, "client"), ErrorCode::NegativeThroughput);
}

TEST(Parse, RowCountIsDeterministic) {
  std::string text;
  for (int i = 0; i < 50; ++i) text += std::to_string(i) + ";a;" + std::to_string(i) + ";u\n# c\n";
  EXPECT_EQ(parse(Format::Sar, text, kEpochS, "h").size(), 50u);
}

TEST(Format, Names) {
  for (auto f : {Format::Sar, Format::Perf, Format::Gc, Format::Loadgen})
    EXPECT_EQ(format_from_string(to_string(f)), f);
  EXPECT_THROW(format_from_string("csv"), Error);
}
