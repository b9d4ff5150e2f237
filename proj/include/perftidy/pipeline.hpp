#pragma once

// Pipeline configuration, stage functions and the on-disk artifacts each
// stage reads and writes. The CLI is a thin layer over this header.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "perftidy/correlate.hpp"
#include "perftidy/impute.hpp"
#include "perftidy/ingest.hpp"
#include "perftidy/plot.hpp"
#include "perftidy/quality.hpp"
#include "perftidy/synth.hpp"
#include "perftidy/text.hpp"
#include "perftidy/timealign.hpp"
#include "perftidy/transform.hpp"
#include "perftidy/types.hpp"

namespace perftidy {

namespace fs = std::filesystem;

struct InputSpec {
  std::string path;  // as written in the config
  Format format = Format::Sar;
  ClockSpec clock;
  std::string host_id;
  std::string source_id;
  std::optional<Semantics> semantics;  // overrides the format's default
  bool undeclared = false;             // semantics unknown: ingest as instant-at-end and flag
  bool mid_stamped = false;
  std::optional<std::int64_t> interval_ns;
};

struct PipelineConfig {
  std::vector<InputSpec> inputs;
  std::int64_t grid_step_ns = 10 * kNsPerSecond;
  std::optional<std::int64_t> snap_tolerance_ns;
  PolicyMap imputation;
  TransformMap transforms{{{"*", TransformSpec{TransformMethod::ZScore, 0.0}}}};
  NominateParams correlate{kDefaultMaxLag, 20, 0.5, kDefaultMinOverlap, true, false, 0};
  QualityConfig quality;
  bool plots = false;
  std::vector<std::string> plot_metrics;  // globs over column ids; empty = nominated columns
  fs::path base_dir;                      // input paths are relative to this
};

// ---------------------------------------------------------------------------
// Config loading

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(const nlohmann::json& root) : root_(root) {}

  [[noreturn]] static void fail(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::ConfigError, "field '" + field + "': " + why);
  }

  template <typename T>
  static T get(const nlohmann::json& j, const std::string& field) {
    try {
      return j.get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail(field, std::string("wrong type (") + e.what() + ")");
    }
  }

  static void only_keys(const nlohmann::json& obj, const std::string& field, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(field, "expected an object");
    for (const auto& [key, _] : obj.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) fail(field.empty() ? key : field + "." + key, "unknown key");
    }
  }

 private:
  const nlohmann::json& root_;
};

inline ClockSpec clock_from_json(const nlohmann::json& j, const std::string& field) {
  using R = ConfigReader;
  R::only_keys(j, field, {"kind", "unit", "tz_offset_minutes", "datetime_pattern"});
  const auto kind = R::get<std::string>(j.at("kind"), field + ".kind");
  ClockSpec c;
  if (kind == "epoch") {
    c.kind = ClockKind::Epoch;
    const auto unit = j.contains("unit") ? R::get<std::string>(j["unit"], field + ".unit") : "s";
    try {
      c.unit = epoch_unit_from_string(unit);
    } catch (const Error&) {
      R::fail(field + ".unit", "expected one of s, ms, us, ns");
    }
  } else if (kind == "wall-clock") {
    c.kind = ClockKind::WallClock;
    c.tz_offset_minutes = j.contains("tz_offset_minutes") ? R::get<int>(j["tz_offset_minutes"], field + ".tz_offset_minutes") : 0;
    if (c.tz_offset_minutes < -840 || c.tz_offset_minutes > 840) R::fail(field + ".tz_offset_minutes", "must lie in [-840, 840]");
    if (j.contains("datetime_pattern")) c.datetime_pattern = R::get<std::string>(j["datetime_pattern"], field + ".datetime_pattern");
  } else {
    R::fail(field + ".kind", "expected 'epoch' or 'wall-clock'");
  }
  return c;
}

inline nlohmann::json clock_to_json(const ClockSpec& c) { return synth::detail::clock_json(c); }

}  // namespace detail

/// Parses a config document. Errors are ConfigError naming the offending field.
inline PipelineConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir = {}) {
  using R = detail::ConfigReader;
  R::only_keys(j, "", {"inputs", "grid_step_ns", "snap_tolerance_ns", "imputation", "transforms", "correlate", "quality",
                       "plots", "plot_metrics"});
  PipelineConfig cfg;
  cfg.base_dir = base_dir;
  if (!j.contains("inputs") || !j["inputs"].is_array()) R::fail("inputs", "required array");
  for (std::size_t i = 0; i < j["inputs"].size(); ++i) {
    const auto& in = j["inputs"][i];
    const std::string f = "inputs[" + std::to_string(i) + "]";
    R::only_keys(in, f, {"path", "format", "clock", "host_id", "source_id", "semantics", "mid_stamped", "interval_ns"});
    InputSpec spec;
    if (!in.contains("path")) R::fail(f + ".path", "required");
    spec.path = R::get<std::string>(in["path"], f + ".path");
    if (!in.contains("format")) R::fail(f + ".format", "required");
    try {
      spec.format = format_from_string(R::get<std::string>(in["format"], f + ".format"));
    } catch (const Error&) {
      R::fail(f + ".format", "expected one of sar, perf, gc, loadgen");
    }
    spec.clock = in.contains("clock") ? detail::clock_from_json(in["clock"], f + ".clock") : ClockSpec{};
    if (!in.contains("host_id")) R::fail(f + ".host_id", "required");
    spec.host_id = R::get<std::string>(in["host_id"], f + ".host_id");
    if (spec.host_id.empty() || spec.host_id.find_first_of("/; \t") != std::string::npos)
      R::fail(f + ".host_id", "must be non-empty without '/', ';' or whitespace");
    spec.source_id = in.contains("source_id") ? R::get<std::string>(in["source_id"], f + ".source_id")
                                              : std::string(to_string(spec.format)) + ":" + fs::path(spec.path).filename().string();
    if (in.contains("semantics")) {
      const auto s = R::get<std::string>(in["semantics"], f + ".semantics");
      if (spec.format == Format::Gc && s != "event") R::fail(f + ".semantics", "gc logs are event-based");
      if (s == "undeclared") {
        spec.undeclared = true;
        spec.semantics = Semantics::InstantAtEnd;
      } else {
        try {
          spec.semantics = semantics_from_string(s);
        } catch (const Error&) {
          R::fail(f + ".semantics", "expected interval-average, instant-at-end, instant-mid, event or undeclared");
        }
        if (*spec.semantics == Semantics::Event && spec.format != Format::Gc)
          R::fail(f + ".semantics", "only gc logs carry event semantics");
      }
    }
    if (in.contains("mid_stamped")) spec.mid_stamped = R::get<bool>(in["mid_stamped"], f + ".mid_stamped");
    if (in.contains("interval_ns")) {
      spec.interval_ns = R::get<std::int64_t>(in["interval_ns"], f + ".interval_ns");
      if (*spec.interval_ns <= 0) R::fail(f + ".interval_ns", "must be positive");
    }
    for (const auto& other : cfg.inputs)
      if (other.path == spec.path) R::fail(f + ".path", "input '" + spec.path + "' declared twice");
    cfg.inputs.push_back(std::move(spec));
  }

  if (j.contains("grid_step_ns")) cfg.grid_step_ns = R::get<std::int64_t>(j["grid_step_ns"], "grid_step_ns");
  if (cfg.grid_step_ns <= 0) R::fail("grid_step_ns", "must be positive");
  if (j.contains("snap_tolerance_ns") && !j["snap_tolerance_ns"].is_null()) {
    cfg.snap_tolerance_ns = R::get<std::int64_t>(j["snap_tolerance_ns"], "snap_tolerance_ns");
    if (*cfg.snap_tolerance_ns < 0 || 2 * *cfg.snap_tolerance_ns >= cfg.grid_step_ns)
      R::fail("snap_tolerance_ns", "must lie in [0, grid_step_ns/2)");
  }

  if (j.contains("imputation")) {
    const auto& im = j["imputation"];
    R::only_keys(im, "imputation", {"steady_state", "policies"});
    if (im.contains("steady_state")) cfg.imputation.steady_state = R::get<bool>(im["steady_state"], "imputation.steady_state");
    if (im.contains("policies")) {
      for (std::size_t i = 0; i < im["policies"].size(); ++i) {
        const auto& p = im["policies"][i];
        const std::string f = "imputation.policies[" + std::to_string(i) + "]";
        R::only_keys(p, f, {"glob", "method", "boundary", "allow_zero_for_sampled"});
        ImputationPolicy pol;
        try {
          pol.method = impute_method_from_string(R::get<std::string>(p.at("method"), f + ".method"));
          if (p.contains("boundary")) pol.boundary = boundary_from_string(R::get<std::string>(p["boundary"], f + ".boundary"));
        } catch (const Error& e) {
          R::fail(f, e.detail());
        } catch (const nlohmann::json::exception&) {
          R::fail(f + ".method", "required");
        }
        if (p.contains("allow_zero_for_sampled"))
          pol.allow_zero_for_sampled = R::get<bool>(p["allow_zero_for_sampled"], f + ".allow_zero_for_sampled");
        if (!p.contains("glob")) R::fail(f + ".glob", "required");
        cfg.imputation.rules.emplace_back(R::get<std::string>(p["glob"], f + ".glob"), pol);
      }
    }
  }

  if (j.contains("transforms")) {
    cfg.transforms.rules.clear();
    for (std::size_t i = 0; i < j["transforms"].size(); ++i) {
      const auto& t = j["transforms"][i];
      const std::string f = "transforms[" + std::to_string(i) + "]";
      R::only_keys(t, f, {"glob", "method", "log_offset"});
      TransformSpec spec;
      if (!t.contains("method")) R::fail(f + ".method", "required");
      try {
        spec.method = transform_method_from_string(R::get<std::string>(t["method"], f + ".method"));
      } catch (const Error&) {
        R::fail(f + ".method", "expected center, zscore, minmax, log or inverse");
      }
      if (t.contains("log_offset")) spec.log_offset = R::get<double>(t["log_offset"], f + ".log_offset");
      if (!(spec.log_offset >= 0.0)) R::fail(f + ".log_offset", "must be non-negative");
      if (!t.contains("glob")) R::fail(f + ".glob", "required");
      cfg.transforms.rules.emplace_back(R::get<std::string>(t["glob"], f + ".glob"), spec);
    }
  }

  if (j.contains("correlate")) {
    const auto& c = j["correlate"];
    R::only_keys(c, "correlate", {"max_lag", "top_k", "min_abs_r", "min_overlap", "pairwise_complete", "curves", "threads"});
    auto& p = cfg.correlate;
    if (c.contains("max_lag")) p.max_lag = R::get<int>(c["max_lag"], "correlate.max_lag");
    if (p.max_lag < 0) R::fail("correlate.max_lag", "must be non-negative");
    if (c.contains("top_k")) p.top_k = R::get<std::size_t>(c["top_k"], "correlate.top_k");
    if (c.contains("min_abs_r")) p.min_abs_r = R::get<double>(c["min_abs_r"], "correlate.min_abs_r");
    if (!(p.min_abs_r >= 0.0 && p.min_abs_r <= 1.0)) R::fail("correlate.min_abs_r", "must lie in [0, 1]");
    if (c.contains("min_overlap")) p.min_overlap = R::get<std::size_t>(c["min_overlap"], "correlate.min_overlap");
    if (p.min_overlap < 2) R::fail("correlate.min_overlap", "must be at least 2");
    if (c.contains("pairwise_complete")) p.pairwise_complete = R::get<bool>(c["pairwise_complete"], "correlate.pairwise_complete");
    if (c.contains("curves")) p.keep_curves = R::get<bool>(c["curves"], "correlate.curves");
    if (c.contains("threads")) p.threads = R::get<unsigned>(c["threads"], "correlate.threads");
  }

  if (j.contains("quality")) {
    const auto& q = j["quality"];
    R::only_keys(q, "quality", {"ranges", "completeness_warn", "regularity_cv", "littles_law_tolerance",
                                "cpu_decomposition_tolerance", "idle_busy_threshold", "activity_window", "model_layer", "models"});
    auto& qc = cfg.quality;
    if (q.contains("ranges")) {
      qc.ranges.clear();
      for (std::size_t i = 0; i < q["ranges"].size(); ++i) {
        const auto& r = q["ranges"][i];
        const std::string f = "quality.ranges[" + std::to_string(i) + "]";
        R::only_keys(r, f, {"glob", "lo", "hi"});
        RangeBound b;
        if (!r.contains("glob")) R::fail(f + ".glob", "required");
        b.glob = R::get<std::string>(r["glob"], f + ".glob");
        if (r.contains("lo")) b.lo = R::get<double>(r["lo"], f + ".lo");
        if (r.contains("hi")) b.hi = R::get<double>(r["hi"], f + ".hi");
        if (!(b.lo <= b.hi)) R::fail(f, "lo must not exceed hi");
        qc.ranges.push_back(b);
      }
    }
    auto positive = [&](const char* key, double& dst) {
      if (!q.contains(key)) return;
      dst = R::get<double>(q[key], std::string("quality.") + key);
      if (!(dst >= 0.0)) R::fail(std::string("quality.") + key, "must be non-negative");
    };
    positive("completeness_warn", qc.completeness_warn);
    positive("regularity_cv", qc.regularity_cv);
    positive("littles_law_tolerance", qc.littles_law_tolerance);
    positive("cpu_decomposition_tolerance", qc.cpu_decomposition_tolerance);
    positive("idle_busy_threshold", qc.idle_busy_threshold);
    if (q.contains("activity_window")) qc.activity_window = R::get<std::size_t>(q["activity_window"], "quality.activity_window");
    if (qc.activity_window == 0) R::fail("quality.activity_window", "must be positive");
    if (q.contains("model_layer")) qc.model_layer = R::get<bool>(q["model_layer"], "quality.model_layer");
    if (q.contains("models")) {
      qc.models.clear();
      for (const auto& m : q["models"]) {
        const auto name = R::get<std::string>(m, "quality.models");
        if (name != checks::kLittlesLaw && name != checks::kCpuDecomposition && name != checks::kActivity)
          R::fail("quality.models", "unknown model '" + name + "'");
        qc.models.insert(name);
      }
    }
  }
  for (const auto& in : cfg.inputs)
    if (in.undeclared) cfg.quality.undeclared_sources.push_back(in.source_id);

  if (j.contains("plots")) cfg.plots = R::get<bool>(j["plots"], "plots");
  if (j.contains("plot_metrics")) cfg.plot_metrics = R::get<std::vector<std::string>>(j["plot_metrics"], "plot_metrics");
  return cfg;
}

inline nlohmann::json config_to_json(const PipelineConfig& cfg) {
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& in : cfg.inputs) {
    nlohmann::json j = {{"path", in.path}, {"format", to_string(in.format)}, {"clock", detail::clock_to_json(in.clock)},
                        {"host_id", in.host_id}, {"source_id", in.source_id}, {"mid_stamped", in.mid_stamped}};
    if (in.undeclared) j["semantics"] = "undeclared";
    else if (in.semantics) j["semantics"] = to_string(*in.semantics);
    if (in.interval_ns) j["interval_ns"] = *in.interval_ns;
    inputs.push_back(std::move(j));
  }
  nlohmann::json policies = nlohmann::json::array();
  for (const auto& [glob, p] : cfg.imputation.rules)
    policies.push_back({{"glob", glob}, {"method", to_string(p.method)}, {"boundary", to_string(p.boundary)},
                        {"allow_zero_for_sampled", p.allow_zero_for_sampled}});
  nlohmann::json transforms = nlohmann::json::array();
  for (const auto& [glob, t] : cfg.transforms.rules)
    transforms.push_back({{"glob", glob}, {"method", to_string(t.method)}, {"log_offset", t.log_offset}});
  nlohmann::json ranges = nlohmann::json::array();
  for (const auto& r : cfg.quality.ranges) {
    nlohmann::json b = {{"glob", r.glob}};
    if (std::isfinite(r.lo)) b["lo"] = r.lo;
    if (std::isfinite(r.hi)) b["hi"] = r.hi;
    ranges.push_back(std::move(b));
  }
  const auto& p = cfg.correlate;
  const auto& q = cfg.quality;
  nlohmann::json out = {
      {"inputs", inputs},
      {"grid_step_ns", cfg.grid_step_ns},
      {"snap_tolerance_ns", cfg.snap_tolerance_ns.value_or(default_tolerance(cfg.grid_step_ns))},
      {"imputation", {{"steady_state", cfg.imputation.steady_state}, {"policies", policies}}},
      {"transforms", transforms},
      {"correlate", {{"max_lag", p.max_lag}, {"top_k", p.top_k}, {"min_abs_r", p.min_abs_r}, {"min_overlap", p.min_overlap},
                     {"pairwise_complete", p.pairwise_complete}, {"curves", p.keep_curves}}},
      {"quality", {{"ranges", ranges}, {"completeness_warn", q.completeness_warn}, {"regularity_cv", q.regularity_cv},
                   {"littles_law_tolerance", q.littles_law_tolerance},
                   {"cpu_decomposition_tolerance", q.cpu_decomposition_tolerance},
                   {"idle_busy_threshold", q.idle_busy_threshold}, {"activity_window", q.activity_window},
                   {"model_layer", q.model_layer}, {"models", q.models}}},
      {"plots", cfg.plots},
      {"plot_metrics", cfg.plot_metrics}};
  return out;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

inline PipelineConfig load_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, "field '<document>': " + std::string(e.what()));
  }
  return config_from_json(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

/// Canonical sample dump: `source;host;metric;ts;value;unit;semantics;interval_ns`.
inline std::string samples_to_text(std::span<const MetricSample> samples) {
  std::string out = "source;host;metric;ts;value;unit;semantics;interval_ns\n";
  for (const auto& s : samples)
    out += s.source_id + ";" + s.host_id + ";" + s.metric_name + ";" + std::to_string(s.ts) + ";" +
           text::format_double(s.value) + ";" + s.unit + ";" + std::string(to_string(s.semantics)) + ";" +
           std::to_string(s.interval_ns) + "\n";
  return out;
}

inline std::vector<MetricSample> samples_from_text(std::string_view input) {
  std::vector<MetricSample> out;
  bool header = true;
  for (const auto& r : text::records(input)) {
    if (header) {
      header = false;
      if (!r.fields.empty() && r.fields[0] == "source") continue;
    }
    if (r.fields.size() != 8) throw Error(ErrorCode::MalformedRow, "expected 8 sample fields", r.line);
    MetricSample s;
    s.source_id = std::string(r.fields[0]);
    s.host_id = std::string(r.fields[1]);
    s.metric_name = std::string(r.fields[2]);
    auto ts = text::parse_int(r.fields[3]);
    auto v = text::parse_double(r.fields[4]);
    auto iv = text::parse_int(r.fields[7]);
    if (!ts || !iv) throw Error(ErrorCode::MalformedRow, "bad integer field", r.line);
    if (!v) throw Error(ErrorCode::NonNumericValue, std::string(r.fields[4]), r.line);
    s.ts = *ts;
    s.value = *v;
    s.unit = std::string(r.fields[5]);
    s.semantics = semantics_from_string(r.fields[6]);
    s.interval_ns = *iv;
    validate(s);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stages

inline std::vector<MetricSample> ingest_inputs(const PipelineConfig& cfg) {
  std::vector<MetricSample> all;
  for (const auto& in : cfg.inputs) {
    const fs::path p = fs::path(in.path).is_absolute() ? fs::path(in.path) : cfg.base_dir / in.path;
    const std::string content = read_file(p);
    std::vector<MetricSample> samples;
    try {
      samples = parse(in.format, content, in.clock, in.host_id, ParseOptions{in.source_id, in.interval_ns});
    } catch (const Error& e) {
      throw Error(e.code(), in.path + ": " + e.detail(), e.line());
    }
    if (in.semantics)
      for (auto& s : samples) s.semantics = *in.semantics;
    all.insert(all.end(), std::make_move_iterator(samples.begin()), std::make_move_iterator(samples.end()));
  }
  return all;
}

struct Aligned {
  TidyTable table;
  std::vector<std::string> diagnostics;
  std::size_t snapped = 0, collisions = 0, dropped = 0;
};

/// Semantics adjustment, one grid for everything, snapping per source, merge.
inline Aligned align(std::span<const MetricSample> samples, const PipelineConfig& cfg) {
  AdjustOptions adj;
  for (const auto& in : cfg.inputs)
    if (in.mid_stamped) adj.mid_stamped_sources.insert(in.source_id);
  const auto adjusted = adjust_semantics(std::vector<MetricSample>(samples.begin(), samples.end()), adj);
  const TimeGrid grid = build_grid(adjusted, cfg.grid_step_ns);

  std::vector<std::string> sources;
  for (const auto& s : adjusted)
    if (std::find(sources.begin(), sources.end(), s.source_id) == sources.end()) sources.push_back(s.source_id);
  std::vector<SeriesSet> sets;
  Aligned out;
  for (const auto& src : sources) {
    std::vector<MetricSample> part;
    for (const auto& s : adjusted)
      if (s.source_id == src) part.push_back(s);
    auto set = snap_to_grid(part, grid, cfg.snap_tolerance_ns);
    out.snapped += set.snapped;
    out.collisions += set.collisions;
    out.dropped += set.dropped;
    for (const auto& d : set.diagnostics) out.diagnostics.push_back(src + ": " + d);
    sets.push_back(std::move(set));
  }
  out.table = merge(sets, &out.diagnostics);
  return out;
}

inline std::string imputation_summary_text(const ImputedTable& t) {
  std::string out = "host;metric;method;boundary;imputed_fraction\n";
  for (std::size_t c = 0; c < t.table.n_columns(); ++c)
    out += t.table.columns()[c].host_id + ";" + t.table.columns()[c].metric_name + ";" +
           std::string(to_string(t.policies[c].method)) + ";" + std::string(to_string(t.policies[c].boundary)) + ";" +
           text::format_double(t.imputed_fraction[c]) + "\n";
  return out;
}

inline std::string nominations_text(const Nomination& n) {
  std::string out = "# positive best_lag k: metric_b trails metric_a by k grid steps\nmetric_a;metric_b;best_lag;r;n_effective\n";
  for (const auto& r : n.ranked)
    out += r.metric_a + ";" + r.metric_b + ";" + std::to_string(r.best_lag) + ";" + text::format_double(r.r_at_best) + ";" +
           std::to_string(r.n_effective) + "\n";
  return out;
}

inline nlohmann::json nominations_json(const Nomination& n, const NominateParams& p) {
  nlohmann::json ranked = nlohmann::json::array();
  for (const auto& r : n.ranked) {
    nlohmann::json j = {{"metric_a", r.metric_a}, {"metric_b", r.metric_b}, {"best_lag", r.best_lag},
                        {"r", r.r_at_best}, {"n_effective", r.n_effective}};
    if (!r.ccf.empty()) {
      nlohmann::json curve = nlohmann::json::array();
      for (const auto& c : r.ccf) curve.push_back({{"lag", c.lag}, {"r", c.r}, {"n", c.n}});
      j["ccf"] = std::move(curve);
    }
    ranked.push_back(std::move(j));
  }
  return {{"lag_convention", "positive best_lag k: metric_b trails metric_a by k grid steps"},
          {"params", {{"max_lag", p.max_lag}, {"top_k", p.top_k}, {"min_abs_r", p.min_abs_r}, {"min_overlap", p.min_overlap},
                      {"pairwise_complete", p.pairwise_complete}}},
          {"pairs_scored", n.pairs_scored},
          {"skipped", n.skipped},
          {"ranked", ranked}};
}

inline std::string lines(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += s + "\n";
  return out;
}

/// Writes tidy table artifacts as <stem>_wide.txt, <stem>_long.txt and columns.txt.
inline void write_table(const fs::path& dir, const std::string& stem, const TidyTable& t) {
  write_file(dir / (stem + "_wide.txt"), to_wide_text(t));
  write_file(dir / (stem + "_long.txt"), to_long_text(t));
  write_file(dir / "columns.txt", to_columns_text(t));
}

inline TidyTable read_table(const fs::path& dir, const std::string& stem) {
  std::vector<ColumnInfo> meta;
  if (fs::exists(dir / "columns.txt")) meta = from_columns_text(read_file(dir / "columns.txt"));
  return from_wide_text(read_file(dir / (stem + "_wide.txt")), meta);
}

/// Writes up to two SVGs; returns human-readable notes (skips and warnings).
inline std::vector<std::string> emit_plots(const TidyTable& table, const Nomination& nomination,
                                           const std::vector<std::string>& plot_metrics, const fs::path& out_dir) {
  std::vector<std::string> notes;
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < table.n_columns() && chosen.size() < 8; ++c) {
    const std::string id = table.columns()[c].id();
    bool pick = false;
    if (!plot_metrics.empty()) {
      for (const auto& g : plot_metrics) pick = pick || text::glob_match(g, id);
    } else {
      for (const auto& r : nomination.ranked) pick = pick || r.metric_a == id || r.metric_b == id;
    }
    if (pick) chosen.push_back(c);
  }
  if (chosen.empty())
    for (std::size_t c = 0; c < table.n_columns() && c < 6; ++c) chosen.push_back(c);
  try {
    if (chosen.empty()) {
      notes.push_back("PlotUnavailable: no columns to chart");
    } else {
      write_file(out_dir / "plots" / "metrics.svg", plot::line_chart_svg(table, chosen, "transformed metrics"));
    }
    if (nomination.ranked.empty()) {
      notes.push_back("info: empty nomination list, heatmap skipped");
    } else {
      write_file(out_dir / "plots" / "correlation_heatmap.svg",
                 plot::heatmap_svg(nomination.ranked, "nominated pairs: r at best lag (cell text: lag)"));
    }
  } catch (const std::exception& e) {
    notes.push_back(std::string("PlotUnavailable: ") + e.what());
  }
  return notes;
}

/// Config that runs the pipeline over a generated scenario written next to it.
inline nlohmann::json config_from_scenario(const synth::Scenario& sc) {
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& f : sc.files)
    inputs.push_back({{"path", f.filename}, {"format", to_string(f.format)}, {"host_id", f.host_id},
                      {"clock", detail::clock_to_json(f.clock)}});
  return {{"inputs", inputs}, {"grid_step_ns", synth::kScenarioStepNs}};
}

inline void write_scenario(const synth::Scenario& sc, const fs::path& dir) {
  for (const auto& f : sc.files) write_file(dir / f.filename, f.text);
  write_file(dir / "manifest.json", sc.manifest.dump(2) + "\n");
  write_file(dir / "config.json", config_from_scenario(sc).dump(2) + "\n");
}

}  // namespace perftidy
