#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "gkp/factory.hpp"
#include "gkp/targets.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result gkpsim_run(std::vector<std::string> args) {
  args.insert(args.begin(), "gkpsim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = gkpsim::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / (std::string("gkpsim_") + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string write_config(const json& j, const std::string& name = "cfg.json") {
    const auto p = root_ / name;
    std::ofstream(p) << j.dump();
    return p.string();
  }
  std::string out_dir() const { return (root_ / "runs").string(); }
  std::vector<fs::path> runs() const {
    std::vector<fs::path> v;
    if (!fs::exists(root_ / "runs")) return v;
    for (const auto& e : fs::directory_iterator(root_ / "runs")) v.push_back(e.path());
    std::sort(v.begin(), v.end());
    return v;
  }
  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path root_;
};

}  // namespace

TEST_F(CliTest, GpsDistWindowSum) {
  const auto r = gkpsim_run({"gps-dist", "--out", out_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pos = r.out.find("P_NGS = ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_NEAR(std::stod(r.out.substr(pos + 8)), 0.19, 0.02);
  ASSERT_EQ(runs().size(), 1u);
  EXPECT_TRUE(fs::exists(runs()[0] / "gps_dist.csv"));
}

TEST_F(CliTest, GpsDistVacuum) {
  const auto cfg = write_config({{"r", 0.0}, {"transmittance", 0.5}, {"n_cap", 10}, {"n_min", 1}, {"n_max", 5}});
  const auto r = gkpsim_run({"gps-dist", "--config", cfg, "--out", out_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(runs()[0] / "gps_dist.csv");
  std::istringstream lines(csv);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  EXPECT_EQ(header, "n,P(n),cumulative,accepted");
  EXPECT_NEAR(std::stod(first.substr(first.find(',') + 1)), 1.0, 1e-10);
}

TEST_F(CliTest, MalformedWindowWritesNothing) {
  const auto cfg = write_config({{"n_min", 20}, {"n_max", 10}});
  for (const char* cmd : {"gps-dist", "simulate", "solve"}) {
    const auto r = gkpsim_run({cmd, "--config", cfg, "--out", out_dir()});
    EXPECT_EQ(r.code, 1) << cmd;
    EXPECT_NE(r.err.find("n_min"), std::string::npos) << r.err;
  }
  EXPECT_FALSE(fs::exists(root_ / "runs"));
}

TEST_F(CliTest, FieldDiagnostics) {
  auto r = gkpsim_run({"solve", "--config", write_config({{"M", "five"}})});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("field 'M': expected integer"), std::string::npos) << r.err;
  r = gkpsim_run({"solve", "--config", write_config({{"grid", {{"pts", 4096}}}})});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("grid.pts"), std::string::npos) << r.err;
  std::ofstream(root_ / "broken.json") << "{\n  \"M\": 5,\n  \"N\": \n}";
  r = gkpsim_run({"solve", "--config", (root_ / "broken.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
  r = gkpsim_run({"solve", "--bogus"});
  EXPECT_EQ(r.code, 1);
  r = gkpsim_run({"solve", "--config", (root_ / "missing.json").string()});
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, SolveRows) {
  auto r = gkpsim_run({"solve"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_NEAR(j["input_db"].get<double>(), 17.7, 0.5);
  EXPECT_TRUE(j["envelope_check"].get<bool>());
  EXPECT_NEAR(j["envelope_exponent"].get<double>(), 1.3 / 5, 1e-12);

  r = gkpsim_run({"solve", "--config", write_config({{"c", 1.4}, {"n_max", 40}, {"n_cap", 60}})});
  ASSERT_EQ(r.code, 0) << r.err;
  j = json::parse(r.out);
  EXPECT_NEAR(j["input_db"].get<double>(), 19.4, 0.5);
}

TEST_F(CliTest, SolveCScan) {
  const auto cfg = write_config({{"c_scan", {1.2, 1.4}}, {"c_scan_trials", 0}});
  const auto r = gkpsim_run({"solve", "--config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  ASSERT_EQ(j["c_scan"].size(), 2u);
  EXPECT_GT(j["c_scan"][1]["p_ngs"].get<double>(), 0.1);
}

TEST_F(CliTest, SimulateSmokeRun) {
  const auto cfg = write_config({{"count_trials", 2000}});
  const auto r = gkpsim_run({"simulate", "--config", cfg, "--trials", "1", "--out", out_dir(), "--workers", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(runs().size(), 1u);
  const auto dir = runs()[0];
  EXPECT_NE(dir.filename().string().find("-seed1"), std::string::npos);
  for (const char* f : {"manifest.json", "results.csv", "summary.json"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto csv = slurp(dir / "results.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  const auto summary = json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(summary["report"]["conditioned_trials"].get<long>(), 1);
  EXPECT_TRUE(summary.contains("correction_diagnostic"));
  EXPECT_TRUE(summary["runtime_seconds"].contains("total"));
  const auto manifest = json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["config"]["trials"].get<long>(), 1);
}

TEST_F(CliTest, SimulateDeterministic) {
  const auto cfg = write_config({{"count_trials", 1000}, {"trials", 4}, {"seed", 42}});
  ASSERT_EQ(gkpsim_run({"simulate", "--config", cfg, "--out", out_dir(), "--workers", "1"}).code, 0);
  ASSERT_EQ(gkpsim_run({"simulate", "--config", cfg, "--out", out_dir(), "--workers", "3"}).code, 0);
  const auto r = runs();
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(slurp(r[0] / "results.csv"), slurp(r[1] / "results.csv"));
}

TEST_F(CliTest, FlagsOverrideFile) {
  const auto cfg = write_config({{"seed", 5}, {"trials", 3}, {"count_trials", 100}});
  const auto r = gkpsim_run({"simulate", "--config", cfg, "--seed", "9", "--trials", "1", "--out", out_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto manifest = json::parse(slurp(runs()[0] / "manifest.json"));
  EXPECT_EQ(manifest["config"]["seed"].get<int>(), 9);
  EXPECT_EQ(manifest["config"]["trials"].get<int>(), 1);
}

TEST(CliConfig, EnvironmentOverrides) {
  gkpsim::RunConfig cfg;
  gkpsim::apply_env(cfg, {{"SEED", "17"}, {"TRIALS", "30"}, {"OUT", "elsewhere"}, {"GRID_POINTS", "8192"}});
  EXPECT_EQ(cfg.factory.seed, 17u);
  EXPECT_EQ(cfg.factory.trials, 30);
  EXPECT_EQ(cfg.out, "elsewhere");
  EXPECT_EQ(cfg.factory.grid.points, 8192u);
  EXPECT_THROW(gkpsim::apply_env(cfg, {{"NOPE", "1"}}), gkpsim::UsageError);
  EXPECT_THROW(gkpsim::apply_env(cfg, {{"SEED", "\"x\""}}), gkpsim::UsageError);
}

TEST(CliConfig, MRange) {
  EXPECT_EQ(gkpsim::parse_m_range("5..40"), std::make_pair(5, 40));
  EXPECT_THROW(gkpsim::parse_m_range("5-40"), gkpsim::UsageError);
  EXPECT_THROW(gkpsim::parse_m_range("a..4"), gkpsim::UsageError);
}

TEST(CliConfig, RoundTrip) {
  gkpsim::RunConfig cfg;
  cfg.factory.M = 9;
  cfg.input_db = 18.0;
  cfg.variant = gkpsim::Variant::cat;
  const auto back = gkpsim::config_from_json(gkpsim::config_to_json(cfg));
  EXPECT_EQ(back.factory.M, 9);
  EXPECT_EQ(back.input_db, 18.0);
  EXPECT_EQ(back.variant, gkpsim::Variant::cat);
}

TEST_F(CliTest, WaveplotSweep) {
  const auto cfg = write_config({{"p_hd", 0.30}});
  const auto r = gkpsim_run({"waveplot", "--config", cfg, "--mode", "sweep", "--m-range", "5..30", "--out", out_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("from M = "), std::string::npos);
  const auto csv = slurp(runs()[0] / "sweep.csv");
  EXPECT_EQ(csv.substr(0, 10), "M,p_total\n");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 27);
}

TEST_F(CliTest, WaveplotOverlayChiTarget) {
  const auto cfg = write_config({{"trials", 2}});
  const auto r = gkpsim_run({"waveplot", "--config", cfg, "--mode", "overlay-chi", "--out", out_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ostringstream want;
  gkp::write_csv(gkp::chi_target(1.3, 20, 5, gkp::GridSpec{}), want);
  EXPECT_EQ(slurp(runs()[0] / "target.csv"), want.str());
}

TEST_F(CliTest, WaveplotScatterAndBadMode) {
  const auto cfg = write_config({{"trials", 2}});
  auto r = gkpsim_run({"waveplot", "--config", cfg, "--mode", "scatter", "--out", out_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(runs()[0] / "scatter.csv").substr(0, 38), "trial_id,delta_x_db,delta_p_db,success");
  r = gkpsim_run({"waveplot", "--config", cfg, "--mode", "movie", "--out", out_dir()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(runs().size(), 1u);
}

TEST_F(CliTest, NumericalFailureExitCode) {
  // A grid too small for the heralded inputs fails in the numerics, not in validation.
  const auto cfg = write_config({{"grid", {{"half_width", 4.0}, {"points", 1024}}}});
  const auto r = gkpsim_run({"simulate", "--config", cfg, "--out", out_dir()});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_FALSE(fs::exists(root_ / "runs"));
}
