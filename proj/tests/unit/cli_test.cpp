#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = sgn::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sgn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  nlohmann::json read_json(const std::string& name) const {
    std::ifstream in(dir_ / name);
    return nlohmann::json::parse(in);
  }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, NoSubcommandIsUsageError) { EXPECT_EQ(run({}).code, sgn::cli::kUsage); }

TEST_F(CliTest, UnknownFlagIsUsageError) {
  const CliResult r = run({"complexity", "--bogus", "--out", path("o")});
  EXPECT_EQ(r.code, sgn::cli::kUsage);
  EXPECT_NE(r.err.find("--bogus"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("o")));
}

TEST_F(CliTest, ComplexityWritesManifest) {
  const CliResult r = run({"complexity", "--out", path("o"), "--grid", "2,3"});
  ASSERT_EQ(r.code, sgn::cli::kOk) << r.err;
  const auto m = read_json("o/run_manifest.json");
  EXPECT_EQ(m["subcommand"], "complexity");
  EXPECT_EQ(m["seed"], 0);
  EXPECT_EQ(m["config"]["grid"], nlohmann::json::array({2, 3}));
  EXPECT_EQ(m["artifacts"], nlohmann::json::array({"complexity.csv"}));
  EXPECT_TRUE(m["wall_time_seconds"].is_number());
  EXPECT_TRUE(fs::exists(path("o/complexity.csv")));
}

TEST_F(CliTest, JsonFormat) {
  ASSERT_EQ(run({"complexity", "--out", path("o"), "--format", "json"}).code, 0);
  const auto rows = read_json("o/complexity.json");
  ASSERT_TRUE(rows.is_array());
  EXPECT_EQ(rows[0]["model"], "SGN");
  EXPECT_EQ(run({"complexity", "--out", path("p"), "--format", "xml"}).code, sgn::cli::kUsage);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  write("cfg.json", R"({"d_model": 16, "d_ff": 64, "m": 4})");
  ASSERT_EQ(run({"complexity", "--config", path("cfg.json"), "--m", "8", "--out", path("o")}).code, 0);
  const auto m = read_json("o/run_manifest.json");
  EXPECT_EQ(m["config"]["d_model"], 16);
  EXPECT_EQ(m["config"]["d_ff"], 64);
  EXPECT_EQ(m["config"]["m"], 8);
}

TEST_F(CliTest, UnknownConfigKeyNamed) {
  write("cfg.json", R"({"d_model": 16, "widht": 3})");
  const CliResult r = run({"complexity", "--config", path("cfg.json"), "--out", path("o")});
  EXPECT_EQ(r.code, sgn::cli::kUsage);
  EXPECT_NE(r.err.find("widht"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("o")));
}

TEST_F(CliTest, BadConfigValueType) {
  write("cfg.json", R"({"d_model": "wide"})");
  EXPECT_EQ(run({"complexity", "--config", path("cfg.json"), "--out", path("o")}).code, sgn::cli::kUsage);
  write("bad.json", "{not json");
  EXPECT_EQ(run({"complexity", "--config", path("bad.json"), "--out", path("o")}).code, sgn::cli::kUsage);
}

TEST_F(CliTest, InvalidParameterIsUsageError) {
  EXPECT_EQ(run({"derive-sigma", "--n", "7", "--out", path("o")}).code, sgn::cli::kUsage);
  EXPECT_EQ(run({"fit", "--tasks", "nonesuch", "--epochs", "1", "--out", path("o")}).code, sgn::cli::kUsage);
  EXPECT_EQ(run({"homotopy", "--sigma", "0", "--out", path("o")}).code, sgn::cli::kUsage);
  EXPECT_FALSE(fs::exists(path("o")));
}

TEST_F(CliTest, GradcheckPasses) {
  const CliResult r = run({"gradcheck", "--out", path("o"), "--instances", "4"});
  EXPECT_EQ(r.code, sgn::cli::kOk) << r.out;
  EXPECT_TRUE(read_json("o/run_manifest.json")["passed"].get<bool>());
}

TEST_F(CliTest, FailedCheckExitsOne) {
  const CliResult r = run({"gradcheck", "--out", path("o"), "--instances", "2", "--tolerance", "1e-30"});
  EXPECT_EQ(r.code, sgn::cli::kCheckFailed);
  EXPECT_NE(r.out.find("FAIL max_rel_error_below_tolerance"), std::string::npos);
  EXPECT_FALSE(read_json("o/run_manifest.json")["passed"].get<bool>());
}

TEST_F(CliTest, HomotopyWritesLoadableCheckpoint) {
  ASSERT_EQ(run({"homotopy", "--out", path("o"), "--instances", "2", "--inputs", "5"}).code, 0);
  EXPECT_EQ(read_json("o/checkpoint.json")["format"], "sgn-checkpoint");
}

TEST_F(CliTest, SmallFitRunsAndIsRepeatable) {
  const std::vector<std::string> base{"fit", "--epochs", "3", "--seeds", "2", "--d-ff", "4", "--m", "2",
                                      "--tasks", "bessel"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a")});
  b.insert(b.end(), {"--out", path("b")});
  EXPECT_NE(run(a).code, sgn::cli::kUsage);
  EXPECT_NE(run(b).code, sgn::cli::kUsage);
  std::ifstream fa(path("a/fit.csv")), fb(path("b/fit.csv"));
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_FALSE(sa.str().empty());
  EXPECT_EQ(sa.str(), sb.str());
}
