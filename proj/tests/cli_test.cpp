#include "reasonforge/cli.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "reasonforge/dataset.h"
#include "stub_server.h"

namespace {

using namespace reasonforge;
namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json error_line(const Result& r) {
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
  return nlohmann::json::parse(r.err);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("rf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, GenCountZeroWritesEmptyFile) {
  const auto r = run({"gen", "--paradigm", "deduction", "--count", "0", "--seed", "1", "--out", path("d.jsonl")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("d.jsonl")));
  EXPECT_EQ(slurp(path("d.jsonl")), "");
  EXPECT_TRUE(fs::exists(path("d.jsonl.manifest.json")));
}

TEST_F(CliTest, GenWritesRecordsAndManifest) {
  const auto r = run({"gen", "--paradigm", "abduction", "--count", "7", "--seed", "3", "--out", path("a.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto records = dataset::read_jsonl(path("a.jsonl"));
  ASSERT_EQ(records.size(), 7u);
  EXPECT_EQ(records[0].id, "abduction-000000");
  EXPECT_EQ(records[6].id, "abduction-000006");
  for (const auto& rec : records) EXPECT_EQ(rec.paradigm, dataset::Paradigm::Abduction);
  const auto manifest = nlohmann::json::parse(slurp(path("a.jsonl.manifest.json")));
  EXPECT_EQ(manifest.at("command"), "gen");
  EXPECT_EQ(manifest.at("seeds").at("seed"), 3);
  EXPECT_EQ(manifest.at("config").at("count"), 7);
  EXPECT_TRUE(manifest.contains("tool_version"));
  EXPECT_TRUE(manifest.contains("config_digest"));
}

TEST_F(CliTest, ConfigFileAndOverridesLayer) {
  std::ofstream(path("cfg.txt")) << "# induction settings\nseq_len = 8\ncount = 3\nallow_mul = false\n";
  auto r = run({"gen", "--paradigm", "induction", "--config", path("cfg.txt"), "--set", "seq_len=6", "--out",
                path("i.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto records = dataset::read_jsonl(path("i.jsonl"));
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].meta.at("sequence").size(), 6u);
  EXPECT_EQ(records[0].meta.at("config").at("allow_mul"), false);

  // An explicit --count beats the file.
  r = run({"gen", "--paradigm", "induction", "--config", path("cfg.txt"), "--count", "2", "--out", path("i.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(dataset::read_jsonl(path("i.jsonl")).size(), 2u);
}

TEST_F(CliTest, InductionHeadlineSplit) {
  ASSERT_EQ(run({"gen", "--paradigm", "induction", "--count", "4500", "--seed", "1", "--out", path("i.jsonl")}).code,
            0);
  const auto r = run({"split", "--in", path("i.jsonl"), "--seed", "0", "--out-dir", path("splits")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(dataset::read_jsonl(path("splits/train.jsonl")).size(), 4300u);
  EXPECT_EQ(dataset::read_jsonl(path("splits/dev.jsonl")).size(), 100u);
  EXPECT_EQ(dataset::read_jsonl(path("splits/test.jsonl")).size(), 100u);
  const auto manifest = nlohmann::json::parse(slurp(path("splits/manifest.json")));
  EXPECT_EQ(manifest.at("sizes").at("train"), 4300);
  EXPECT_EQ(manifest.at("proportional_fallback"), false);
}

TEST_F(CliTest, SmallSplitWarns) {
  ASSERT_EQ(run({"gen", "--paradigm", "deduction", "--count", "20", "--out", path("d.jsonl")}).code, 0);
  const auto r = run({"split", "--in", path("d.jsonl"), "--out-dir", path("s")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_EQ(dataset::read_jsonl(path("s/test.jsonl")).size(), 2u);
}

TEST_F(CliTest, SampleGradeAndStats) {
  ASSERT_EQ(run({"gen", "--paradigm", "induction", "--count", "2", "--seed", "5", "--out", path("q.jsonl")}).code, 0);
  testsupport::StubServer server([](const nlohmann::json&, int) -> std::pair<int, std::string> {
    return {200, testsupport::words(25) + " <answer>0</answer>"};
  });
  auto r = run({"sample", "--in", path("q.jsonl"), "--endpoint", server.endpoint(), "--model", "stub", "--samples",
                "3", "--backoff-ms", "1", "--out", path("t.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ts = dataset::read_trajectories(path("t.jsonl"));
  ASSERT_EQ(ts.size(), 6u);
  EXPECT_TRUE(fs::exists(path("t.jsonl.manifest.json")));

  r = run({"stats", "--questions", path("q.jsonl"), "--trajectories", path("t.jsonl"), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto stats = nlohmann::json::parse(r.out);
  ASSERT_EQ(stats.size(), 1u);
  EXPECT_EQ(stats[0].at("teacher"), "stub");
  EXPECT_EQ(stats[0].at("questions"), 2);
  EXPECT_EQ(stats[0].at("trajectories"), 6);
  EXPECT_EQ(stats[0].at("total_tokens"), 6 * 26);

  const auto records = dataset::read_jsonl(path("q.jsonl"));
  {
    std::ofstream o(path("outputs.jsonl"));
    o << nlohmann::json{{"record_id", records[0].id}, {"output", "<answer>" + records[0].gold + "</answer>"}}.dump()
      << '\n';
    o << nlohmann::json{{"record_id", records[1].id}, {"text", "<answer>nope</answer>"}}.dump() << '\n';
  }
  r = run({"grade", "--in", path("q.jsonl"), "--outputs", path("outputs.jsonl"), "--report", path("report.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(slurp(path("report.json")));
  EXPECT_EQ(report.at("report").at("overall").at("correct"), 1);
  EXPECT_EQ(report.at("report").at("overall").at("unparseable"), 1);
  EXPECT_EQ(report.at("outcomes").size(), 2u);
  EXPECT_TRUE(fs::exists(path("report.json.manifest.json")));
}

TEST_F(CliTest, ErrorsAreSingleJsonLines) {
  auto r = run({"split", "--in", path("absent.jsonl"), "--out-dir", path("s")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_line(r).at("error"), "missing_input");

  r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_line(r).at("error"), "usage");

  r = run({"gen", "--paradigm", "deduction"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_line(r).at("error"), "usage");

  r = run({"gen", "--paradigm", "deduction", "--count", "1", "--set", "bogus=1", "--out", path("x.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_line(r).at("error"), "config");

  r = run({"gen", "--paradigm", "deduction", "--count", "1", "--set", "num_vars=0", "--out", path("x.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_line(r).at("error"), "config");

  r = run({"gen", "--paradigm", "analogy", "--count", "1", "--out", path("x.jsonl")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_line(r).at("error"), "usage");

  std::ofstream(path("bad.jsonl")) << "{\"id\": 1}\n";
  r = run({"split", "--in", path("bad.jsonl"), "--out-dir", path("s")});
  EXPECT_EQ(r.code, 1);
  const auto e = error_line(r);
  EXPECT_EQ(e.at("error"), "schema");
  EXPECT_NE(e.at("message").get<std::string>().find("line 1"), std::string::npos);
}

TEST_F(CliTest, StatsRejectsDanglingTrajectories) {
  ASSERT_EQ(run({"gen", "--paradigm", "induction", "--count", "1", "--out", path("q.jsonl")}).code, 0);
  dataset::TrajectoryRecord t;
  t.record_id = "ghost";
  dataset::write_trajectories({t}, path("t.jsonl"));
  const auto r = run({"stats", "--questions", path("q.jsonl"), "--trajectories", path("t.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_line(r).at("error"), "schema");
}

TEST(ParseKeyValues, Basics) {
  const auto kv = cli::parse_key_values("a = 1\n# comment\n\nb=two # trailing\n");
  EXPECT_EQ(kv, (std::map<std::string, std::string>{{"a", "1"}, {"b", "two"}}));
}

TEST(Cli, VersionAndHelp) {
  auto r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_FALSE(r.out.empty());
  r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("gen"), std::string::npos);
}

}  // namespace
