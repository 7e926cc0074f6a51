#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lakevort/error.hpp"
#include "lakevort/io.hpp"

using namespace lakevort;

TEST(Config, DefaultsAreValid) {
  const RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_TRUE(cfg.profile().is_constant());
  EXPECT_DOUBLE_EQ(cfg.r_out(1.5), 3.0);
}

TEST(Config, ValidationErrors) {
  EXPECT_THROW(RunConfig::from_json(nlohmann::json::array()), ConfigError);
  EXPECT_THROW(RunConfig::from_json({{"grid", {{"n_r", 10}}}}), ConfigError);
  EXPECT_THROW(RunConfig::from_json({{"grid", {{"theta_n", 4}}}}), ConfigError);
  EXPECT_THROW(RunConfig::from_json({{"tolerances", {{"newton_tol", -1.0}}}}), ConfigError);
  EXPECT_THROW(RunConfig::from_json({{"grid", {{"n_r", "many"}}}}), ConfigError);
  EXPECT_THROW(RunConfig::from_json({{"profile", {{"family", "bump"}, {"b_inf", 1.0}, {"amp", 0.5}, {"r_inf", 2.0}}},
                                     {"grid", {{"r_out", 3.0}}}}),
               ConfigError);
  EXPECT_THROW(parse_json("{ broken", "test"), ConfigError);
}

TEST(Config, HashIsDeterministic) {
  const nlohmann::json doc = {{"tolerances", {{"quad_tol", 1e-9}}}, {"workflow", {{"m", 3}}}};
  const RunConfig a = RunConfig::from_json(doc);
  const RunConfig b = RunConfig::from_json(RunConfig::from_json(doc).to_json());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  RunConfig c = a;
  c.workflow["m"] = 4;
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Output, AtomicWriteAndStamp) {
  const auto dir = std::filesystem::temp_directory_path() / "lakevort_io_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "nested" / "table.csv";
  write_atomic(path, stamp_csv("n,x\n1,2\n", "0123456789abcdef"));
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), "# config_hash=0123456789abcdef\nn,x\n1,2\n");
  EXPECT_FALSE(std::filesystem::exists(dir / "nested" / "table.csv.tmp"));
  std::filesystem::remove_all(dir);
}
