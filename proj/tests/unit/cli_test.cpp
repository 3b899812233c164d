#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "radarnet/csv.hpp"
#include "radarnet/json_io.hpp"

namespace radarnet::cli {
namespace {

namespace fs = std::filesystem;

const std::string kTraining = std::string(RADARNET_SCENARIO_DIR) + "/training.json";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "radarnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("radarnet_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST(PolicySpec, Parsing) {
  EXPECT_EQ(parse_policy_spec("baseline").kind, "baseline");
  const PolicySpec e = parse_policy_spec("esto:w.json");
  EXPECT_EQ(e.kind, "esto");
  EXPECT_EQ(e.path, "w.json");
  EXPECT_EQ(parse_policy_spec("rl:a/b:c.json").path, "a/b:c.json");
  EXPECT_THROW(parse_policy_spec("esto"), ConfigError);
  EXPECT_THROW(parse_policy_spec("baseline:x"), ConfigError);
  EXPECT_THROW(parse_policy_spec("greedy"), ConfigError);
  EXPECT_THROW(make_policy_factory(parse_policy_spec("esto:/no/such/file.json")), ConfigError);
}

TEST(Seeds, CountOrList) {
  EXPECT_EQ(parse_seeds("3"), (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(parse_seeds("7,2"), (std::vector<std::uint64_t>{7, 2}));
  EXPECT_THROW(parse_seeds("0"), ConfigError);
  EXPECT_THROW(parse_seeds("x"), ConfigError);
  EXPECT_THROW(parse_seeds("1,,2"), ConfigError);
}

TEST(Scenario, OverridesApplyToJson) {
  const auto s = load_scenario(kTraining, {"targets.count=5", "episode_length=12", "name=tweaked"});
  EXPECT_EQ(s->num_targets(), 5);
  EXPECT_EQ(s->episode_length, 12);
  EXPECT_EQ(s->name, "tweaked");
  EXPECT_THROW(load_scenario(kTraining, {"novalue"}), ConfigError);
  EXPECT_THROW(load_scenario(kTraining, {"targets.count=0"}), ConfigError);
}

TEST(ExitCodes, Distinct) {
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  EXPECT_EQ(cli({}).code, kExitConfig);
  EXPECT_EQ(cli({"simulate", "--steps", "abc"}).code, kExitConfig);
  EXPECT_EQ(cli({"simulate", "--scenario", "/no/such.json"}).code, kExitConfig);
  EXPECT_EQ(cli({"verify", "--level", "medium"}).code, kExitConfig);
  EXPECT_EQ(cli({"eval", "--seeds", "0"}).code, kExitConfig);
  const Result r = cli({"simulate", "--steps", "3", "--out", "/no/such/dir/out.csv"});
  EXPECT_EQ(r.code, kExitRuntime);
  EXPECT_NE(r.err.find("cannot write"), std::string::npos);
}

TEST(Verify, QuickPasses) {
  verify::Options o;
  std::ostringstream out;
  EXPECT_EQ(run_verify(o, out), kExitOk) << out.str();
  EXPECT_NE(out.str().find("max_error"), std::string::npos);
}

TEST(Verify, TamperedInverseIsCaught) {
  verify::Options o;
  // Shifts half of the empty-prefix stop mass onto target 0.
  o.invert = [](const seqdec::PolicyTable& pi) {
    seqdec::SeqPolicyTable s = seqdec::invert(pi);
    for (auto& agent : s.probs) {
      for (auto& obs : agent) {
        auto& empty_prefix = obs[0];
        const double stop = empty_prefix.back();
        empty_prefix.back() = 0.5 * stop;
        empty_prefix[0] += 0.5 * stop;
      }
    }
    return s;
  };
  std::ostringstream out;
  EXPECT_EQ(run_verify(o, out), kExitVerify);
  EXPECT_NE(out.str().find("FAIL surjectivity"), std::string::npos);
  EXPECT_NE(out.str().find("FAIL worked_inverse"), std::string::npos);
  EXPECT_NE(out.str().find("FAIL value_equivalence"), std::string::npos);
}

TEST_F(CliDir, EvalIsDeterministicAndRoundTrips) {
  const std::vector<std::string> args = {"eval", "--scenario", kTraining, "--policies", "baseline",
                                         "--seeds", "3", "--steps", "8", "--threads", "2"};
  auto with_out = [&](const std::string& d) {
    auto a = args;
    a.push_back("--out");
    a.push_back(d);
    return a;
  };
  ASSERT_EQ(cli(with_out(path("a"))).code, kExitOk);
  auto single = with_out(path("b"));
  single[single.size() - 3] = "1";  // --threads 1
  ASSERT_EQ(cli(single).code, kExitOk);
  const std::string bytes = slurp(dir_ / "a" / "results.csv");
  EXPECT_EQ(bytes, slurp(dir_ / "b" / "results.csv"));

  std::istringstream in(bytes);
  const std::vector<ResultRow> rows = read_results(in);
  ASSERT_EQ(rows.size(), 3u * 8u);
  for (const ResultRow& r : rows) {
    EXPECT_GT(r.utility, 0.0);
    EXPECT_LE(r.utility, 1.0);
  }
  std::ostringstream again;
  write_results(again, rows);
  EXPECT_EQ(again.str(), bytes);

  const auto summary = read_json_file((dir_ / "a" / "summary.json").string(), "summary");
  EXPECT_EQ(summary.at("policies").size(), 1u);
  EXPECT_EQ(summary.at("policies")[0].at("episode_mean").at("n"), 3);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "aggregate.csv"));
}

TEST_F(CliDir, TrainedArtifactsFeedEval) {
  const std::string weights = path("w.json");
  const Result te = cli({"train-esto", "--scenario", kTraining, "--variant", "esto-m",
                         "--generations", "3", "--runs", "1", "--steps", "5", "--out", weights});
  ASSERT_EQ(te.code, kExitOk) << te.err;
  std::ifstream hist(path("w_history.csv"));
  const Table h = read_table(hist);
  ASSERT_EQ(h.rows.size(), 3u);
  for (std::size_t g = 1; g < h.rows.size(); ++g) EXPECT_GE(h.rows[g][3], h.rows[g - 1][3]);
  EXPECT_TRUE(fs::exists(path("w.checkpoint.json")));

  const std::string ckpt = path("rl.json");
  const Result tr = cli({"train-rl", "--scenario", kTraining, "--iterations", "1", "--episodes",
                         "1", "--steps", "4", "--out", ckpt});
  ASSERT_EQ(tr.code, kExitOk) << tr.err;
  EXPECT_TRUE(fs::exists(path("rl_history.csv")));

  const Result ev = cli({"eval", "--scenario", kTraining, "--policies",
                         "baseline,esto:" + weights + ",rl:" + ckpt, "--seeds", "2", "--steps", "4",
                         "--out", path("eval")});
  ASSERT_EQ(ev.code, kExitOk) << ev.err;
  std::ifstream res(dir_ / "eval" / "results.csv");
  EXPECT_EQ(read_results(res).size(), 3u * 2u * 4u);
  const auto summary = read_json_file((dir_ / "eval" / "summary.json").string(), "summary");
  EXPECT_TRUE(summary.at("policies")[1].contains("difference_vs_baseline"));
}

TEST_F(CliDir, SimulateWritesOneRowPerStep) {
  const Result r = cli({"simulate", "--scenario", kTraining, "--policy", "baseline", "--seed", "4",
                        "--steps", "6", "--out", path("s.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream in(path("s.csv"));
  const auto rows = read_results(in);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows.back().step, 5);
  EXPECT_EQ(rows.front().seed, 4u);
}

}  // namespace
}  // namespace radarnet::cli
