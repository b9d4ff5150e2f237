#pragma once

// Reporting-semantics adjustment, uniform time grids, snapping and the
// outer-join merge that produces a TidyTable.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "perftidy/text.hpp"
#include "perftidy/types.hpp"

namespace perftidy {

/// A MISSING cell is std::nullopt; present cells are finite.
using Series = std::vector<std::optional<double>>;

struct TimeGrid {
  TimestampNs start_ns = 0;
  std::int64_t step_ns = 1;
  std::size_t n_points = 2;

  TimestampNs at(std::size_t i) const { return start_ns + static_cast<std::int64_t>(i) * step_ns; }
  TimestampNs last() const { return at(n_points - 1); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

inline void validate(const TimeGrid& g) {
  if (g.step_ns <= 0) throw Error(ErrorCode::BadArgument, "grid step must be positive");
  if (g.n_points < 2) throw Error(ErrorCode::BadArgument, "grid needs at least 2 points");
}

struct ColumnInfo {
  std::string host_id;
  std::string metric_name;
  std::string unit;
  Semantics semantics = Semantics::InstantAtEnd;

  /// Unique column identifier, "host/metric".
  std::string id() const { return host_id + "/" + metric_name; }

  friend bool operator==(const ColumnInfo&, const ColumnInfo&) = default;
};

inline bool column_less(const ColumnInfo& a, const ColumnInfo& b) {
  return std::tie(a.host_id, a.metric_name) < std::tie(b.host_id, b.metric_name);
}

/// Merged observation set over one grid. Immutable once built: columns are
/// kept sorted by (host, metric) and each holds exactly grid.n_points cells.
class TidyTable {
 public:
  TidyTable() = default;

  TidyTable(TimeGrid grid, std::vector<ColumnInfo> columns, std::vector<Series> cells) : grid_(grid) {
    validate(grid_);
    if (columns.size() != cells.size())
      throw Error(ErrorCode::BadArgument, "column metadata and cell vectors differ in count");
    std::vector<std::size_t> order(columns.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return column_less(columns[a], columns[b]); });
    for (auto idx : order) {
      if (cells[idx].size() != grid_.n_points)
        throw Error(ErrorCode::BadArgument, "column " + columns[idx].id() + " has " +
                                                std::to_string(cells[idx].size()) + " cells, grid has " +
                                                std::to_string(grid_.n_points));
      for (const auto& c : cells[idx])
        if (c && !std::isfinite(*c))
          throw Error(ErrorCode::BadArgument, "non-finite cell in " + columns[idx].id());
      if (!columns_.empty() && !column_less(columns_.back(), columns[idx]))
        throw Error(ErrorCode::BadArgument, "duplicate column " + columns[idx].id());
      columns_.push_back(std::move(columns[idx]));
      cells_.push_back(std::move(cells[idx]));
    }
  }

  const TimeGrid& grid() const { return grid_; }
  const std::vector<ColumnInfo>& columns() const { return columns_; }
  const std::vector<Series>& cells() const { return cells_; }
  const Series& column(std::size_t c) const { return cells_.at(c); }
  std::size_t n_columns() const { return columns_.size(); }
  std::size_t n_rows() const { return grid_.n_points; }

  std::optional<std::size_t> find(std::string_view host, std::string_view metric) const {
    for (std::size_t c = 0; c < columns_.size(); ++c)
      if (columns_[c].host_id == host && columns_[c].metric_name == metric) return c;
    return std::nullopt;
  }

  std::size_t present_count() const {
    std::size_t n = 0;
    for (const auto& s : cells_)
      n += static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](const auto& c) { return c.has_value(); }));
    return n;
  }

  friend bool operator==(const TidyTable&, const TidyTable&) = default;

 private:
  TimeGrid grid_{};
  std::vector<ColumnInfo> columns_;
  std::vector<Series> cells_;
};

// ---------------------------------------------------------------------------
// Semantics adjustment

struct AdjustOptions {
  /// Sources whose instant-mid values are already stamped at mid-interval.
  std::set<std::string> mid_stamped_sources;
};

/// Re-attributes each sample to the instant its value best represents:
/// interval averages move to the interval midpoint, end-of-interval stamped
/// mid readings move back by half an interval, everything else stays put.
inline std::vector<MetricSample> adjust_semantics(std::vector<MetricSample> samples,
                                                  const AdjustOptions& opts = {}) {
  std::map<std::pair<std::string, std::string>, std::pair<std::int64_t, std::int64_t>> bounds;
  for (const auto& s : samples) {
    if (s.semantics == Semantics::Event) continue;
    auto [it, fresh] = bounds.try_emplace({s.host_id, s.metric_name}, s.interval_ns, s.interval_ns);
    if (!fresh) {
      it->second.first = std::min(it->second.first, s.interval_ns);
      it->second.second = std::max(it->second.second, s.interval_ns);
    }
  }
  for (const auto& [key, mm] : bounds) {
    if (mm.first <= 0)
      throw Error(ErrorCode::InconsistentInterval, key.first + "/" + key.second + " has non-positive interval");
    if (static_cast<double>(mm.second) > 1.01 * static_cast<double>(mm.first))
      throw Error(ErrorCode::InconsistentInterval, key.first + "/" + key.second + " intervals range " +
                                                       std::to_string(mm.first) + ".." + std::to_string(mm.second));
  }
  for (auto& s : samples) {
    bool shift = s.semantics == Semantics::IntervalAverage ||
                 (s.semantics == Semantics::InstantMid && !opts.mid_stamped_sources.contains(s.source_id));
    if (!shift) continue;
    s.ts -= s.interval_ns / 2;
    if (s.ts < 0)
      throw Error(ErrorCode::NegativeEpoch, s.metric_name + " midpoint falls before 1970");
  }
  return samples;
}

// ---------------------------------------------------------------------------
// Grid construction and snapping

namespace detail {
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
}  // namespace detail

/// Grid starting at the earliest sample rounded down to a step multiple and
/// extending until a point at or beyond the latest sample.
inline TimeGrid build_grid(std::span<const MetricSample> samples, std::int64_t step_ns) {
  if (step_ns <= 0) throw Error(ErrorCode::BadArgument, "step_ns must be positive");
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "no samples to build a grid from");
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                      [](const auto& a, const auto& b) { return a.ts < b.ts; });
  TimeGrid g;
  g.step_ns = step_ns;
  g.start_ns = detail::floor_div(lo->ts, step_ns) * step_ns;
  const std::int64_t span = hi->ts - g.start_ns;
  const std::int64_t steps = span / step_ns + (span % step_ns != 0 ? 1 : 0);
  g.n_points = std::max<std::size_t>(2, static_cast<std::size_t>(steps) + 1);
  return g;
}

/// Per-column snapped series on one grid, with snapping diagnostics.
struct SeriesSet {
  TimeGrid grid;
  std::vector<ColumnInfo> columns;
  std::vector<Series> series;
  std::vector<std::string> diagnostics;
  std::size_t snapped = 0;
  std::size_t collisions = 0;
  std::size_t dropped = 0;
};

inline std::int64_t default_tolerance(std::int64_t step_ns) { return step_ns / 4; }

/// Places every sample on the nearest grid point within `tolerance_ns`
/// (default step/4). Unmatched samples are dropped and two samples landing on
/// one point resolve to the later timestamp; both cases leave a diagnostic.
inline SeriesSet snap_to_grid(std::span<const MetricSample> samples, const TimeGrid& grid,
                              std::optional<std::int64_t> tolerance_ns = std::nullopt) {
  validate(grid);
  const std::int64_t tol = tolerance_ns.value_or(default_tolerance(grid.step_ns));
  if (tol < 0 || 2 * tol >= grid.step_ns)
    throw Error(ErrorCode::BadArgument, "tolerance_ns must lie in [0, step_ns/2)");

  std::map<std::pair<std::string, std::string>, std::size_t> index;
  SeriesSet out;
  out.grid = grid;
  std::vector<std::vector<std::optional<TimestampNs>>> placed_ts;
  for (const auto& s : samples) {
    auto key = std::make_pair(s.host_id, s.metric_name);
    if (!index.contains(key)) {
      index.emplace(key, out.columns.size());
      out.columns.push_back({s.host_id, s.metric_name, s.unit, s.semantics});
      out.series.emplace_back(grid.n_points);
      placed_ts.emplace_back(grid.n_points);
    }
  }

  for (const auto& s : samples) {
    const std::size_t c = index.at({s.host_id, s.metric_name});
    const std::int64_t offset = s.ts - grid.start_ns;
    std::int64_t i = detail::floor_div(offset + grid.step_ns / 2, grid.step_ns);
    const std::string where = s.host_id + "/" + s.metric_name + " ts=" + std::to_string(s.ts);
    if (i < 0 || i >= static_cast<std::int64_t>(grid.n_points)) {
      out.diagnostics.push_back("dropped " + where + ": outside grid");
      ++out.dropped;
      continue;
    }
    const auto idx = static_cast<std::size_t>(i);
    const std::int64_t dist = s.ts - grid.at(idx);
    if (dist > tol || -dist > tol) {
      out.diagnostics.push_back("dropped " + where + ": " + std::to_string(dist < 0 ? -dist : dist) +
                                " ns from nearest grid point exceeds tolerance " + std::to_string(tol));
      ++out.dropped;
      continue;
    }
    auto& prev = placed_ts[c][idx];
    if (prev) {
      ++out.collisions;
      if (s.ts < *prev) {
        out.diagnostics.push_back("collision at grid ts=" + std::to_string(grid.at(idx)) + " for " +
                                  s.host_id + "/" + s.metric_name + ": kept ts=" + std::to_string(*prev) +
                                  ", dropped ts=" + std::to_string(s.ts));
        ++out.snapped;
        continue;
      }
      out.diagnostics.push_back("collision at grid ts=" + std::to_string(grid.at(idx)) + " for " +
                                s.host_id + "/" + s.metric_name + ": kept ts=" + std::to_string(s.ts) +
                                ", dropped ts=" + std::to_string(*prev));
    }
    prev = s.ts;
    out.series[c][idx] = s.value;
    ++out.snapped;
  }

  std::vector<std::size_t> order(out.columns.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return column_less(out.columns[a], out.columns[b]); });
  SeriesSet sorted;
  sorted.grid = out.grid;
  sorted.diagnostics = std::move(out.diagnostics);
  sorted.snapped = out.snapped;
  sorted.collisions = out.collisions;
  sorted.dropped = out.dropped;
  for (auto idx : order) {
    sorted.columns.push_back(std::move(out.columns[idx]));
    sorted.series.push_back(std::move(out.series[idx]));
  }
  return sorted;
}

// ---------------------------------------------------------------------------
// Merge

/// Outer join of series sets sharing one grid. A column present in several
/// sets is overlaid cell by cell; where two present values disagree the later
/// set wins and a note goes to `diagnostics`.
inline TidyTable merge(std::span<const SeriesSet> sets, std::vector<std::string>* diagnostics = nullptr) {
  if (sets.empty()) throw Error(ErrorCode::EmptyInput, "nothing to merge");
  const TimeGrid grid = sets.front().grid;
  std::map<std::pair<std::string, std::string>, std::pair<ColumnInfo, Series>> joined;
  for (const auto& set : sets) {
    if (!(set.grid == grid))
      throw Error(ErrorCode::GridMismatch, "series sets are on different grids");
    for (std::size_t c = 0; c < set.columns.size(); ++c) {
      const auto& info = set.columns[c];
      const auto& src = set.series[c];
      if (src.size() != grid.n_points)
        throw Error(ErrorCode::GridMismatch, info.id() + " length differs from grid");
      auto [it, fresh] = joined.try_emplace({info.host_id, info.metric_name}, info, src);
      if (fresh) continue;
      auto& dst = it->second.second;
      for (std::size_t i = 0; i < dst.size(); ++i) {
        if (!src[i]) continue;
        if (dst[i] && *dst[i] != *src[i] && diagnostics)
          diagnostics->push_back("merge conflict at grid ts=" + std::to_string(grid.at(i)) + " for " +
                                 info.id() + ": kept later value " + text::format_double(*src[i]));
        dst[i] = src[i];
      }
    }
  }
  std::vector<ColumnInfo> columns;
  std::vector<Series> cells;
  for (auto& [key, entry] : joined) {
    columns.push_back(std::move(entry.first));
    cells.push_back(std::move(entry.second));
  }
  return TidyTable(grid, std::move(columns), std::move(cells));
}

inline TidyTable merge(std::initializer_list<SeriesSet> sets, std::vector<std::string>* diagnostics = nullptr) {
  return merge(std::span<const SeriesSet>(sets.begin(), sets.size()), diagnostics);
}

// ---------------------------------------------------------------------------
// Long and wide text forms

struct LongRow {
  TimestampNs ts;
  std::string host_id;
  std::string metric_name;
  double value;

  friend bool operator==(const LongRow&, const LongRow&) = default;
};

/// One row per present (ts, host, metric) cell, ordered by ts then column.
inline std::vector<LongRow> to_long(const TidyTable& table) {
  std::vector<LongRow> rows;
  for (std::size_t i = 0; i < table.n_rows(); ++i)
    for (std::size_t c = 0; c < table.n_columns(); ++c)
      if (const auto& v = table.column(c)[i])
        rows.push_back({table.grid().at(i), table.columns()[c].host_id, table.columns()[c].metric_name, *v});
  return rows;
}

namespace detail {
inline void check_exportable(const ColumnInfo& col) {
  if (col.host_id.find_first_of("/;\n") != std::string::npos ||
      col.metric_name.find_first_of(";\n") != std::string::npos)
    throw Error(ErrorCode::BadArgument, "column " + col.id() + " cannot be written as delimited text");
}

inline std::pair<std::string, std::string> split_column_id(std::string_view id, std::size_t line) {
  auto slash = id.find('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 == id.size())
    throw Error(ErrorCode::MalformedRow, "column id '" + std::string(id) + "' is not host/metric", line);
  return {std::string(id.substr(0, slash)), std::string(id.substr(slash + 1))};
}

inline TimestampNs parse_table_ts(std::string_view raw, std::size_t line) {
  auto v = text::parse_int(raw);
  if (!v || *v < 0) throw Error(ErrorCode::UnparseableTimestamp, "'" + std::string(raw) + "'", line);
  return *v;
}

inline TimeGrid grid_from_timestamps(std::vector<TimestampNs> ts) {
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  if (ts.empty()) throw Error(ErrorCode::EmptyInput, "no timestamps to infer a grid from");
  TimeGrid g;
  g.start_ns = ts.front();
  if (ts.size() == 1) {
    g.step_ns = 1;
    g.n_points = 2;
    return g;
  }
  std::int64_t step = 0;
  for (std::size_t i = 1; i < ts.size(); ++i) step = std::gcd(step, ts[i] - ts[i - 1]);
  g.step_ns = step;
  g.n_points = static_cast<std::size_t>((ts.back() - ts.front()) / step) + 1;
  return g;
}
}  // namespace detail

/// Column metadata file: `host;metric;unit;semantics`.
inline std::string to_columns_text(const TidyTable& table) {
  std::string out = "host;metric;unit;semantics\n";
  for (const auto& col : table.columns()) {
    detail::check_exportable(col);
    out += col.host_id + ";" + col.metric_name + ";" + col.unit + ";" + std::string(to_string(col.semantics)) + "\n";
  }
  return out;
}

inline std::vector<ColumnInfo> from_columns_text(std::string_view input) {
  std::vector<ColumnInfo> cols;
  bool header = true;
  for (const auto& r : text::records(input)) {
    if (header) {
      header = false;
      if (r.fields.size() == 4 && r.fields[0] == "host") continue;
    }
    if (r.fields.size() != 4) throw Error(ErrorCode::MalformedRow, "expected host;metric;unit;semantics", r.line);
    cols.push_back({std::string(r.fields[0]), std::string(r.fields[1]), std::string(r.fields[2]),
                    semantics_from_string(r.fields[3])});
  }
  return cols;
}

/// `ts;host;metric;value`, MISSING cells omitted.
inline std::string to_long_text(const TidyTable& table) {
  for (const auto& col : table.columns()) detail::check_exportable(col);
  std::string out = "ts;host;metric;value\n";
  for (const auto& row : to_long(table))
    out += std::to_string(row.ts) + ";" + row.host_id + ";" + row.metric_name + ";" + text::format_double(row.value) + "\n";
  return out;
}

/// Header `ts;host/metric;...`, one line per grid point, empty field for MISSING.
inline std::string to_wide_text(const TidyTable& table) {
  std::string out = "ts";
  for (const auto& col : table.columns()) {
    detail::check_exportable(col);
    out += ";" + col.id();
  }
  out += "\n";
  for (std::size_t i = 0; i < table.n_rows(); ++i) {
    out += std::to_string(table.grid().at(i));
    for (std::size_t c = 0; c < table.n_columns(); ++c) {
      out += ";";
      if (const auto& v = table.column(c)[i]) out += text::format_double(*v);
    }
    out += "\n";
  }
  return out;
}

namespace detail {
inline ColumnInfo lookup_meta(const std::vector<ColumnInfo>& meta, const std::string& host, const std::string& metric) {
  for (const auto& m : meta)
    if (m.host_id == host && m.metric_name == metric) return m;
  return {host, metric, "", Semantics::InstantAtEnd};
}
}  // namespace detail

/// Rebuilds a table from its long form. Without `grid`, the grid is inferred
/// from the distinct timestamps, which is exact when no row is MISSING at the ends.
inline TidyTable from_long_text(std::string_view input, std::optional<TimeGrid> grid = std::nullopt,
                                const std::vector<ColumnInfo>& meta = {}) {
  struct Cell { TimestampNs ts; std::string host, metric; double v; std::size_t line; };
  std::vector<Cell> cells;
  bool header = true;
  for (const auto& r : text::records(input)) {
    if (header) {
      header = false;
      if (r.fields.size() == 4 && r.fields[0] == "ts") continue;
    }
    if (r.fields.size() != 4) throw Error(ErrorCode::MalformedRow, "expected ts;host;metric;value", r.line);
    auto v = text::parse_double(r.fields[3]);
    if (!v) throw Error(ErrorCode::NonNumericValue, "'" + std::string(r.fields[3]) + "'", r.line);
    cells.push_back({detail::parse_table_ts(r.fields[0], r.line), std::string(r.fields[1]),
                     std::string(r.fields[2]), *v, r.line});
  }
  if (!grid) {
    std::vector<TimestampNs> ts;
    for (const auto& c : cells) ts.push_back(c.ts);
    grid = detail::grid_from_timestamps(std::move(ts));
  }
  validate(*grid);
  std::map<std::pair<std::string, std::string>, Series> cols;
  for (const auto& c : cells) {
    const std::int64_t off = c.ts - grid->start_ns;
    if (off < 0 || off % grid->step_ns != 0 || static_cast<std::size_t>(off / grid->step_ns) >= grid->n_points)
      throw Error(ErrorCode::GridMismatch, "ts " + std::to_string(c.ts) + " is not a grid point", c.line);
    auto& s = cols.try_emplace({c.host, c.metric}, grid->n_points).first->second;
    auto& cell = s[static_cast<std::size_t>(off / grid->step_ns)];
    if (cell) throw Error(ErrorCode::DuplicateSample, c.host + "/" + c.metric + " ts=" + std::to_string(c.ts), c.line);
    cell = c.v;
  }
  std::vector<ColumnInfo> infos;
  std::vector<Series> series;
  for (auto& [key, s] : cols) {
    infos.push_back(detail::lookup_meta(meta, key.first, key.second));
    series.push_back(std::move(s));
  }
  return TidyTable(*grid, std::move(infos), std::move(series));
}

inline TidyTable from_wide_text(std::string_view input, const std::vector<ColumnInfo>& meta = {}) {
  auto recs = text::records(input);
  if (recs.empty() || recs.front().fields.empty() || recs.front().fields[0] != "ts")
    throw Error(ErrorCode::MalformedRow, "wide table must start with a 'ts;...' header", recs.empty() ? 1 : recs.front().line);
  const auto& head = recs.front();
  std::vector<ColumnInfo> infos;
  for (std::size_t c = 1; c < head.fields.size(); ++c) {
    auto [host, metric] = detail::split_column_id(head.fields[c], head.line);
    infos.push_back(detail::lookup_meta(meta, host, metric));
  }
  std::vector<Series> series(infos.size());
  std::vector<TimestampNs> ts;
  for (std::size_t r = 1; r < recs.size(); ++r) {
    const auto& rec = recs[r];
    if (rec.fields.size() != head.fields.size())
      throw Error(ErrorCode::MalformedRow, "expected " + std::to_string(head.fields.size()) + " fields", rec.line);
    ts.push_back(detail::parse_table_ts(rec.fields[0], rec.line));
    for (std::size_t c = 1; c < rec.fields.size(); ++c) {
      if (rec.fields[c].empty()) {
        series[c - 1].push_back(std::nullopt);
        continue;
      }
      auto v = text::parse_double(rec.fields[c]);
      if (!v) throw Error(ErrorCode::NonNumericValue, "'" + std::string(rec.fields[c]) + "'", rec.line);
      series[c - 1].push_back(*v);
    }
  }
  if (ts.size() < 2) throw Error(ErrorCode::EmptyInput, "wide table needs at least 2 rows");
  TimeGrid grid{ts[0], ts[1] - ts[0], ts.size()};
  validate(grid);
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts[i] != grid.at(i))
      throw Error(ErrorCode::GridMismatch, "row timestamps are not uniformly spaced", recs[i + 1].line);
  return TidyTable(grid, std::move(infos), std::move(series));
}

}  // namespace perftidy
