#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "predlab/experiments.hpp"

using namespace predlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("predlab_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(ParseConfig, Minimal) {
  const auto cfg = parse_config("# comment\nexperiment = E3\nseed = 7\nk = 2\n\n");
  EXPECT_EQ(cfg.id, ExperimentId::E3_model_nonpredict);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.get_count("k", 1), 2u);
  EXPECT_EQ(cfg.get("kappa", 0.05), 0.05);
}

TEST(ParseConfig, Errors) {
  try {
    parse_config("experiment = E1_parabolic\nseed = abc\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(std::string(e.what()).rfind("line 2: ", 0), 0u);
  }
  try {
    parse_config("");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("experiment missing"), std::string::npos);
  }
  try {
    parse_config("experiment = E1\nwobble = 3\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("wobble"), std::string::npos);
  }
  EXPECT_THROW(parse_config("experiment = E1\nk = 2\nk = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("experiment = E9\n"), ConfigError);
  EXPECT_THROW(parse_config("experiment = E1\nkappa = -1\n"), ConfigError);
  EXPECT_THROW(parse_config("experiment = E1\nkappa\n"), ConfigError);
}

TEST(ExperimentIds, RoundTrip) {
  ASSERT_EQ(all_experiments().size(), 6u);
  for (auto id : all_experiments()) {
    EXPECT_EQ(parse_experiment_id(to_string(id)), id);
    EXPECT_EQ(parse_experiment_id(to_string(id).substr(0, 2)), id);
    EXPECT_FALSE(describe(id).empty());
  }
  for (const auto& key : known_override_keys()) EXPECT_FALSE(key.empty());
}

TEST(EmitCsv, Format) {
  const auto dir = scratch("csv");
  fs::create_directories(dir);
  emit_csv(dir / "a.csv", {"x", "y"}, {{0.1, std::int64_t{3}}});
  EXPECT_EQ(slurp(dir / "a.csv"), "x,y\n0.10000000000000001,3\n");
  emit_csv(dir / "b.csv", {"x"}, {});
  EXPECT_EQ(slurp(dir / "b.csv"), "x\n");
  EXPECT_THROW(emit_csv(dir / "c.csv", {"x", "y"}, {{1.0}}), std::invalid_argument);
  EXPECT_EQ(format_real(1.0), "1");
  fs::remove_all(dir);
}

TEST(RunSummary, JsonHandlesNonFinite) {
  RunSummary s;
  s.metrics["a"] = std::numeric_limits<double>::quiet_NaN();
  s.pass_flags["f"] = true;
  const auto j = s.to_json();
  EXPECT_NE(j.find("null"), std::string::npos);
  EXPECT_TRUE(s.all_passed());
  s.pass_flags["g"] = false;
  EXPECT_FALSE(s.all_passed());
}

TEST(RunExperiment, SmallRunsAreByteIdentical) {
  ExperimentConfig cfg;
  cfg.id = ExperimentId::E1_parabolic;
  cfg.seed = 3;
  cfg.overrides["orbit_length"] = 20000;
  const auto a = scratch("e1a");
  const auto b = scratch("e1b");
  const auto sa = run_experiment(cfg, a);
  const auto sb = run_experiment(cfg, b);
  ASSERT_EQ(sa.files, sb.files);
  ASSERT_FALSE(sa.files.empty());
  for (const auto& f : sa.files) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_TRUE(fs::exists(a / "summary.json"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(RunExperiment, E6SmallOverride) {
  ExperimentConfig cfg;
  cfg.id = ExperimentId::E6_idim;
  cfg.overrides["n_samples"] = 5000;
  cfg.overrides["n_centers"] = 200;
  cfg.overrides["measure_length"] = 5000;
  const auto dir = scratch("e6");
  const auto s = run_experiment(cfg, dir);
  EXPECT_TRUE(s.pass_flags.count("c5_segment_box"));
  EXPECT_TRUE(fs::exists(dir / "e6_estimates.csv"));
  fs::remove_all(dir);
}
