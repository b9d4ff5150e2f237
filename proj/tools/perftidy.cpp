// perftidy: command-line front end. Each subcommand runs one stage; `pipeline`
// runs them all. Exit status: 0 ok, 1 quality fail, 2 usage/config/data error.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "perftidy/pipeline.hpp"

namespace {

using namespace perftidy;

struct Flags {
  std::string config;
  std::string out;
  std::string in;
  std::string scenario = "clean";
  std::uint64_t seed = 1;
  std::optional<std::int64_t> step;
  std::optional<int> max_lag;
  std::optional<std::size_t> top_k;
  bool plots = false;
  bool curves = false;
};

/// Files are staged in memory and only written once every stage succeeded,
/// so a failing invocation leaves the output directory untouched.
using Outputs = std::map<std::string, std::string>;

PipelineConfig effective_config(const Flags& f) {
  PipelineConfig cfg = load_config(f.config);
  nlohmann::json j = config_to_json(cfg);
  if (f.step) {
    j["grid_step_ns"] = *f.step;
    j.erase("snap_tolerance_ns");  // recomputed from the new step
  }
  if (f.max_lag) j["correlate"]["max_lag"] = *f.max_lag;
  if (f.top_k) j["correlate"]["top_k"] = *f.top_k;
  if (f.plots) j["plots"] = true;
  if (f.curves) j["correlate"]["curves"] = true;
  return config_from_json(j, cfg.base_dir);
}

std::vector<MetricSample> samples_for(const Flags& f, const PipelineConfig& cfg) {
  if (!f.in.empty()) return samples_from_text(read_file(fs::path(f.in) / "samples.txt"));
  return ingest_inputs(cfg);
}

TidyTable stage_table(const Flags& f, const PipelineConfig& cfg, const std::string& upstream) {
  if (!f.in.empty()) return read_table(f.in, upstream);
  auto table = align(ingest_inputs(cfg), cfg).table;
  if (upstream == "tidy") return table;
  table = impute_table(table, cfg.imputation).table;
  if (upstream == "imputed") return table;
  return transform_table(table, cfg.transforms).table;
}

void add_merge(Outputs& out, const Aligned& a) {
  out["tidy_wide.txt"] = to_wide_text(a.table);
  out["tidy_long.txt"] = to_long_text(a.table);
  out["columns.txt"] = to_columns_text(a.table);
  out["merge_diagnostics.txt"] = lines(a.diagnostics);
}

void add_impute(Outputs& out, const ImputedTable& t) {
  out["imputed_wide.txt"] = to_wide_text(t.table);
  out["imputed_long.txt"] = to_long_text(t.table);
  out["imputed_mask.txt"] = to_mask_text(t);
  out["imputation_summary.txt"] = imputation_summary_text(t);
  out["columns.txt"] = to_columns_text(t.table);
}

void add_transform(Outputs& out, const TransformedTable& t) {
  out["transformed_wide.txt"] = to_wide_text(t.table);
  out["transformed_long.txt"] = to_long_text(t.table);
  out["transform_params.json"] = fitted_table_json(t).dump(2) + "\n";
  out["transform_diagnostics.txt"] = lines(t.diagnostics);
  out["columns.txt"] = to_columns_text(t.table);
}

void add_correlate(Outputs& out, const Nomination& n, const NominateParams& p) {
  out["nominations.txt"] = nominations_text(n);
  out["nominations.json"] = nominations_json(n, p).dump(2) + "\n";
  out["nomination_skipped.txt"] = lines(n.skipped);
}

void add_quality(Outputs& out, const QualityReport& r) {
  out["quality.json"] = to_json(r).dump(2) + "\n";
  out["quality.txt"] = to_text(r);
}

void flush(const Outputs& out, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [name, content] : out) write_file(dir / name, content);
}

int run(const std::string& cmd, const Flags& f) {
  const fs::path out_dir = f.out;
  if (cmd == "synth") {
    const auto sc = synth::gen_scenario(f.scenario, f.seed);
    write_scenario(sc, out_dir);
    return 0;
  }

  const PipelineConfig cfg = effective_config(f);
  Outputs out;
  out["effective_config.json"] = config_to_json(cfg).dump(2) + "\n";
  int status = 0;

  if (cmd == "ingest") {
    out["samples.txt"] = samples_to_text(ingest_inputs(cfg));
  } else if (cmd == "merge") {
    // samples.txt travels with the merged table so `quality --in` finds both
    const auto samples = samples_for(f, cfg);
    out["samples.txt"] = samples_to_text(samples);
    add_merge(out, align(samples, cfg));
  } else if (cmd == "impute") {
    add_impute(out, impute_table(stage_table(f, cfg, "tidy"), cfg.imputation));
  } else if (cmd == "transform") {
    add_transform(out, transform_table(stage_table(f, cfg, "imputed"), cfg.transforms));
  } else if (cmd == "correlate") {
    add_correlate(out, nominate(stage_table(f, cfg, "transformed"), cfg.correlate), cfg.correlate);
  } else if (cmd == "quality") {
    const auto samples = samples_for(f, cfg);
    const TidyTable table = f.in.empty() ? align(samples, cfg).table : read_table(f.in, "tidy");
    const auto report = assess(table, samples, cfg.quality);
    add_quality(out, report);
    status = report.pass ? 0 : 1;
  } else if (cmd == "pipeline") {
    const auto samples = ingest_inputs(cfg);
    out["samples.txt"] = samples_to_text(samples);
    const auto aligned = align(samples, cfg);
    add_merge(out, aligned);
    const auto imputed = impute_table(aligned.table, cfg.imputation);
    add_impute(out, imputed);
    const auto transformed = transform_table(imputed.table, cfg.transforms);
    add_transform(out, transformed);
    const auto nomination = nominate(transformed.table, cfg.correlate);
    add_correlate(out, nomination, cfg.correlate);
    const auto report = assess(aligned.table, samples, cfg.quality);
    add_quality(out, report);
    status = report.pass ? 0 : 1;

    nlohmann::json top = nullptr;
    if (!nomination.ranked.empty()) {
      const auto& r = nomination.ranked.front();
      top = {{"metric_a", r.metric_a}, {"metric_b", r.metric_b}, {"best_lag", r.best_lag}, {"r", r.r_at_best}};
    }
    const nlohmann::json summary = {
        {"inputs", cfg.inputs.size()},
        {"samples", samples.size()},
        {"grid", {{"start_ns", aligned.table.grid().start_ns}, {"step_ns", aligned.table.grid().step_ns},
                  {"n_points", aligned.table.grid().n_points}}},
        {"columns", aligned.table.n_columns()},
        {"snapped", aligned.snapped},
        {"collisions", aligned.collisions},
        {"dropped", aligned.dropped},
        {"transform_skipped_columns", transformed.diagnostics.size()},
        {"pairs_scored", nomination.pairs_scored},
        {"nominations", nomination.ranked.size()},
        {"top_nomination", top},
        {"quality", {{"verdict", report.pass ? "pass" : "fail"}, {"info", report.n_info}, {"warn", report.n_warn},
                     {"fail", report.n_fail}}},
        {"exit_status", status}};
    out["run_summary.json"] = summary.dump(2) + "\n";
    flush(out, out_dir);
    if (cfg.plots)
      for (const auto& note : emit_plots(transformed.table, nomination, cfg.plot_metrics, out_dir)) std::cerr << note << "\n";
    return status;
  }
  flush(out, out_dir);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perftidy: tidy, align and correlate performance telemetry"};
  app.require_subcommand(1, 1);
  Flags f;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", f.config, "pipeline config JSON")->check(CLI::ExistingFile);
    if (needs_config) c->required();
    sub->add_option("--out", f.out, "output directory")->required();
  };
  auto tuning = [&](CLI::App* sub) {
    sub->add_option("--step", f.step, "grid step in ns");
    sub->add_option("--max-lag", f.max_lag, "largest lag in grid steps");
    sub->add_option("--top-k", f.top_k, "number of nominated pairs to keep");
  };
  auto upstream = [&](CLI::App* sub) {
    sub->add_option("--in", f.in, "output directory of the upstream stage")->check(CLI::ExistingDirectory);
  };

  auto* synth_cmd = app.add_subcommand("synth", "generate a scenario with its manifest and config");
  synth_cmd->add_option("--out", f.out, "output directory")->required();
  synth_cmd->add_option("--seed", f.seed, "generator seed");
  synth_cmd->add_option("--scenario", f.scenario, "clean, planted-lag, noisy-neighbor or faulty")
      ->check(CLI::IsMember(synth::scenario_names()));

  auto* ingest_cmd = app.add_subcommand("ingest", "parse inputs into canonical samples");
  common(ingest_cmd, true);
  tuning(ingest_cmd);
  for (const char* name : {"merge", "impute", "transform", "correlate", "quality"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " stage");
    common(sub, true);
    upstream(sub);
    tuning(sub);
    if (std::string(name) == "correlate") sub->add_flag("--curves", f.curves, "include full ccf curves in nominations.json");
  }
  auto* pipe_cmd = app.add_subcommand("pipeline", "run every stage and write a run summary");
  common(pipe_cmd, true);
  tuning(pipe_cmd);
  pipe_cmd->add_flag("--plots", f.plots, "write SVG charts under plots/");
  pipe_cmd->add_flag("--curves", f.curves, "include full ccf curves in nominations.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, f);
  } catch (const Error& e) {
    std::cerr << "perftidy " << cmd << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "perftidy " << cmd << ": " << e.what() << "\n";
    return 2;
  }
}
