#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "perftidy/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(PERFTIDY_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("perftidy_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

fs::path synth(const std::string& scenario, const std::string& seed = "1") {
  const auto dir = scratch("synth_" + scenario + seed);
  EXPECT_EQ(run("synth --scenario " + scenario + " --seed " + seed + " --out " + dir.string()), 0);
  return dir;
}

std::string slurp(const fs::path& p) { return perftidy::read_file(p); }

}  // namespace

TEST(Cli, PipelineOnCleanScenario) {
  const auto in = synth("clean");
  const auto out = scratch("clean_out");
  EXPECT_EQ(run("pipeline --config " + (in / "config.json").string() + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "nominations.txt"));
  EXPECT_TRUE(fs::exists(out / "effective_config.json"));
  EXPECT_EQ(nlohmann::json::parse(slurp(out / "quality.json"))["verdict"], "pass");
  EXPECT_FALSE(fs::exists(out / "plots"));
}

TEST(Cli, QualityOnFaultyExitsOne) {
  const auto in = synth("faulty");
  EXPECT_EQ(run("quality --config " + (in / "config.json").string() + " --out " + scratch("faulty_q").string()), 1);
}

TEST(Cli, UnknownFlagWritesNothing) {
  const auto in = synth("clean", "2");
  const auto out = scratch("unknown_flag");
  EXPECT_EQ(run("pipeline --config " + (in / "config.json").string() + " --out " + out.string() + " --bogus"), 2);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run("frobnicate --out " + out.string()), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, ConfigErrorExitsTwo) {
  const auto dir = scratch("bad_config");
  fs::create_directories(dir);
  perftidy::write_file(dir / "config.json", R"({"inputs": [{"path": "x", "format": "xml", "host_id": "h"}]})");
  EXPECT_EQ(run("ingest --config " + (dir / "config.json").string() + " --out " + (dir / "out").string()), 2);
  EXPECT_FALSE(fs::exists(dir / "out"));
  perftidy::write_file(dir / "config.json", R"({"inputs": [{"path": "missing.sar", "format": "sar", "host_id": "h"}]})");
  EXPECT_EQ(run("ingest --config " + (dir / "config.json").string() + " --out " + (dir / "out").string()), 2);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, DeterministicAcrossRuns) {
  const auto in = synth("planted-lag");
  const auto a = scratch("det_a"), b = scratch("det_b");
  const std::string cfg = (in / "config.json").string();
  EXPECT_EQ(run("pipeline --config " + cfg + " --out " + a.string()), 0);
  EXPECT_EQ(run("pipeline --config " + cfg + " --out " + b.string()), 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
  }
  EXPECT_GT(files, 10u);
}

TEST(Cli, SubcommandsComposeToPipeline) {
  const auto in = synth("noisy-neighbor");
  const std::string cfg = " --config " + (in / "config.json").string();
  const auto whole = scratch("compose_whole");
  EXPECT_EQ(run("pipeline" + cfg + " --out " + whole.string()), 0);
  const auto s1 = scratch("c1"), s2 = scratch("c2"), s3 = scratch("c3"), s4 = scratch("c4"), s5 = scratch("c5"), s6 = scratch("c6");
  EXPECT_EQ(run("ingest" + cfg + " --out " + s1.string()), 0);
  EXPECT_EQ(run("merge" + cfg + " --in " + s1.string() + " --out " + s2.string()), 0);
  EXPECT_EQ(run("impute" + cfg + " --in " + s2.string() + " --out " + s3.string()), 0);
  EXPECT_EQ(run("transform" + cfg + " --in " + s3.string() + " --out " + s4.string()), 0);
  EXPECT_EQ(run("correlate" + cfg + " --in " + s4.string() + " --out " + s5.string()), 0);
  EXPECT_EQ(run("quality" + cfg + " --in " + s2.string() + " --out " + s6.string()), 0);
  for (const auto& d : {s1, s2, s3, s4, s5, s6})
    for (const auto& e : fs::directory_iterator(d))
      EXPECT_EQ(slurp(e.path()), slurp(whole / e.path().filename())) << d << " " << e.path().filename();
}

TEST(Cli, FlagOverridesAreEchoed) {
  const auto in = synth("clean", "3");
  const auto out = scratch("overrides");
  EXPECT_EQ(run("correlate --config " + (in / "config.json").string() + " --max-lag 12 --top-k 3 --out " + out.string()), 0);
  const auto eff = nlohmann::json::parse(slurp(out / "effective_config.json"));
  EXPECT_EQ(eff["correlate"]["max_lag"], 12);
  EXPECT_EQ(eff["correlate"]["top_k"], 3);
  EXPECT_LE(perftidy::text::records(slurp(out / "nominations.txt")).size(), 4u);  // header + 3
}

TEST(Cli, PlotsAreOptionalAndDoNotChangeAnalytics) {
  const auto in = synth("planted-lag", "4");
  const auto plain = scratch("noplots"), plotted = scratch("plots");
  const std::string cfg = (in / "config.json").string();
  EXPECT_EQ(run("pipeline --config " + cfg + " --out " + plain.string()), 0);
  EXPECT_EQ(run("pipeline --config " + cfg + " --plots --out " + plotted.string()), 0);
  EXPECT_TRUE(fs::exists(plotted / "plots" / "metrics.svg"));
  EXPECT_TRUE(fs::exists(plotted / "plots" / "correlation_heatmap.svg"));
  for (const auto& e : fs::directory_iterator(plain)) {
    if (e.path().filename() == "effective_config.json") continue;  // echoes plots=true
    EXPECT_EQ(slurp(e.path()), slurp(plotted / e.path().filename())) << e.path().filename();
  }
}
