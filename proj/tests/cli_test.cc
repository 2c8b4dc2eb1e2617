// Copyright 2026 The Pommer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pommer/cli.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "pommer/errors.h"
#include "pommer/harness.h"

namespace pommer {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pommer");
  std::ostringstream out, err;
  CliRun r;
  r.code = RunCli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

int CountMatches(const std::string& text, const std::string& pattern) {
  const std::regex re(pattern);
  return static_cast<int>(std::distance(
      std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

// Drops the wall-clock fields so runs can be compared.
std::string WithoutTimes(const std::string& text) {
  std::string s = std::regex_replace(text, std::regex("Episode Time: .*\n"), "");
  s = std::regex_replace(s, std::regex("wall_time [0-9.]+s"), "");
  return std::regex_replace(s, std::regex(",\"mean_wall_time\":[0-9.e-]+"), "");
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pommer_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("POMMER_SEED");
  }
  void TearDown() override {
    fs::remove_all(dir_);
    unsetenv("POMMER_SEED");
  }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST_F(CliTest, PlayPrintsOneRewardQuadruplePerEpisode) {
  const CliRun r = Cli({"play", "--episodes", "5", "--seed", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(CountMatches(r.out, "rewards \\[-?[01], -?[01], -?[01], -?[01]\\]"), 5);
  EXPECT_EQ(CountMatches(r.out, "Episode Rewards: \\["), 1);
  EXPECT_NE(r.out.find("stats_json {"), std::string::npos);
}

TEST_F(CliTest, PlayZeroEpisodesIsEmptyAndSucceeds) {
  const CliRun r = Cli({"play", "--episodes", "0"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Episode Rewards: []"), std::string::npos);
  EXPECT_NE(r.out.find("\"episodes\":0"), std::string::npos);
}

TEST_F(CliTest, EffectiveConfigIsEchoed) {
  const CliRun r = Cli({"play", "--episodes", "0", "--seed", "17", "--partial-obs"});
  EXPECT_NE(r.out.find("# seed = 17"), std::string::npos);
  EXPECT_NE(r.out.find("# full_observability = false"), std::string::npos);
  EXPECT_NE(r.out.find("# config_hash "), std::string::npos);
}

TEST_F(CliTest, IdenticalFlagsGiveIdenticalOutput) {
  const CliRun a = Cli({"play", "--episodes", "3", "--seed", "8", "--agents",
                     "simple,random,simple,static"});
  const CliRun b = Cli({"play", "--episodes", "3", "--seed", "8", "--agents",
                     "simple,random,simple,static", "--jobs", "3"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(WithoutTimes(a.out), WithoutTimes(b.out));
}

TEST_F(CliTest, SeedFallsBackToEnvironment) {
  setenv("POMMER_SEED", "21", 1);
  const CliRun env = Cli({"play", "--episodes", "2"});
  EXPECT_NE(env.out.find("# seed = 21"), std::string::npos);
  const CliRun flag = Cli({"play", "--episodes", "2", "--seed", "21"});
  EXPECT_EQ(WithoutTimes(env.out), WithoutTimes(flag.out));
  const CliRun override_env = Cli({"play", "--episodes", "0", "--seed", "5"});
  EXPECT_NE(override_env.out.find("# seed = 5"), std::string::npos);
  setenv("POMMER_SEED", "abc", 1);
  EXPECT_EQ(Cli({"play", "--episodes", "0"}).code, kExitConfigError);
}

TEST_F(CliTest, ConfigFileOverridesDefaults) {
  const std::string cfg = Path("run.cfg");
  std::ofstream(cfg) << "# comment\nmax_steps = 50\nseed=4  # trailing\n";
  const CliRun r = Cli({"play", "--episodes", "2", "--config", cfg});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# max_steps = 50"), std::string::npos);
  EXPECT_NE(r.out.find("# seed = 4"), std::string::npos);
  EXPECT_EQ(CountMatches(r.out, "length 50 "), 2);
}

TEST_F(CliTest, ConfigErrorsExitWithCode2) {
  const std::string cfg = Path("bad.cfg");
  std::ofstream(cfg) << "gamma = 0.5\nnot_a_key = 3\n";
  EXPECT_EQ(Cli({"play", "--config", cfg}).code, kExitConfigError);
  std::ofstream(cfg) << "gamma = lots\n";
  EXPECT_EQ(Cli({"play", "--config", cfg}).code, kExitConfigError);
  std::ofstream(cfg) << "gamma = 2\n";
  EXPECT_EQ(Cli({"play", "--config", cfg}).code, kExitConfigError);
  std::ofstream(cfg) << "just words\n";
  EXPECT_EQ(Cli({"play", "--config", cfg}).code, kExitConfigError);
  EXPECT_EQ(Cli({"play", "--agents", "simple,simple,simple"}).code, kExitConfigError);
  EXPECT_EQ(Cli({"play", "--agents", "simple,simple,simple,bogus"}).code,
            kExitConfigError);
  EXPECT_EQ(Cli({"play", "--no-such-flag"}).code, kExitConfigError);
  EXPECT_EQ(Cli({}).code, kExitConfigError);
  EXPECT_EQ(Cli({"train", "ppo", "--out", Path("m")}).code, kExitConfigError);
}

TEST_F(CliTest, FileErrorsExitWithCode3) {
  EXPECT_EQ(Cli({"play", "--config", Path("missing.cfg")}).code, kExitFileError);
  EXPECT_EQ(Cli({"eval", "--model", Path("missing.ckpt")}).code, kExitFileError);
  EXPECT_EQ(Cli({"play", "--agents", "model:" + Path("nope") + ",simple,simple,simple"})
                .code,
            kExitFileError);
  EXPECT_EQ(Cli({"collect", "--episodes", "1", "--out", Path("no/dir/x.jsonl")}).code,
            kExitFileError);
  EXPECT_EQ(Cli({"replay", Path("missing.replay")}).code, kExitFileError);
  // A checkpoint with the wrong shape is rejected as a file problem.
  SaveNetwork(Network({3}, {LayerSpec::Dense(6)}), Path("wrong.ckpt"));
  EXPECT_EQ(Cli({"eval", "--model", Path("wrong.ckpt"), "--episodes", "1"}).code,
            kExitFileError);
}

TEST_F(CliTest, HelpAndVersionSucceed) {
  const CliRun help = Cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("play"), std::string::npos);
  EXPECT_EQ(Cli({"--version"}).code, 0);
  const CliRun play_help = Cli({"play", "--help"});
  EXPECT_NE(play_help.out.find("* bomb"), std::string::npos);
}

TEST_F(CliTest, ReplayRoundTripAndMismatch) {
  const std::string rd = Path("replays");
  ASSERT_EQ(Cli({"play", "--episodes", "2", "--seed", "6", "--replay-dir", rd}).code, 0);
  EXPECT_TRUE(fs::exists(rd + "/replays.manifest.json"));
  const std::string file = rd + "/episode_1.replay";
  const CliRun ok = Cli({"replay", file});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("replay ok"), std::string::npos);

  EpisodeRecord rec = ReadReplay(file);
  rec.rewards[0] = rec.rewards[0] == 1 ? -1 : 1;
  WriteReplay(rec, Path("tampered.replay"));
  const CliRun bad = Cli({"replay", Path("tampered.replay")});
  EXPECT_EQ(bad.code, kExitContractViolation);
  EXPECT_NE(bad.err.find("mismatch"), std::string::npos);
}

TEST_F(CliTest, ReplayRenderPrintsFrames) {
  const std::string rd = Path("r");
  const std::string cfg = Path("short.cfg");
  std::ofstream(cfg) << "max_steps = 4\n";
  ASSERT_EQ(Cli({"play", "--episodes", "1", "--config", cfg, "--replay-dir", rd}).code, 0);
  const CliRun r = Cli({"replay", rd + "/episode_0.replay", "--render"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(CountMatches(r.out, "step [0-9]+\n"), 5);
  const CliRun play = Cli({"play", "--episodes", "1", "--config", cfg, "--render"});
  EXPECT_EQ(CountMatches(play.out, "step [0-9]+\n"), 5);
}

TEST_F(CliTest, CollectWritesJsonlAndManifest) {
  const std::string out = Path("demos.jsonl");
  const CliRun r = Cli({"collect", "--episodes", "2", "--seed", "1", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto records = ReadDemonstrations(out);
  EXPECT_GT(records.size(), 100u);
  EXPECT_NE(r.out.find("records " + std::to_string(records.size())), std::string::npos);
  std::ifstream mf(out + ".manifest.json");
  ASSERT_TRUE(mf.good());
  const auto manifest = nlohmann::json::parse(mf);
  EXPECT_EQ(manifest.at("command"), "collect");
  EXPECT_EQ(manifest.at("seed"), 1u);
  EXPECT_EQ(manifest.at("config").at("max_steps"), "800");
  EXPECT_EQ(manifest.at("config_hash").get<std::string>().size(), 16u);
}

TEST_F(CliTest, TrainBcFromCollectedDataThenEval) {
  const std::string data = Path("demos.jsonl");
  ASSERT_EQ(Cli({"collect", "--episodes", "2", "--seed", "1", "--out", data}).code, 0);
  const std::string cfg = Path("tiny.cfg");
  std::ofstream(cfg) << "conv_filters = 2\ndense_units = 8\nepochs = 1\n"
                        "held_out_every = 2\nmax_steps = 60\n";
  const std::string model = Path("bc.ckpt");
  const CliRun train = Cli({"train", "bc", "--data", data, "--config", cfg, "--out", model});
  ASSERT_EQ(train.code, 0) << train.err;
  EXPECT_NE(train.out.find("held_out_accuracy"), std::string::npos);
  EXPECT_TRUE(fs::exists(model));
  EXPECT_TRUE(fs::exists(model + ".loss.csv"));
  EXPECT_TRUE(fs::exists(model + ".manifest.json"));
  const CliRun eval = Cli({"eval", "--model", model, "--episodes", "2", "--config", cfg,
                        "--out", Path("eval.json")});
  ASSERT_EQ(eval.code, 0) << eval.err;
  EXPECT_NE(eval.out.find("win_rate (decisive)"), std::string::npos);
  EXPECT_TRUE(fs::exists(Path("eval.json")));
  const CliRun play = Cli({"play", "--agents", "model:" + model + ",simple,simple,simple",
                        "--episodes", "2", "--config", cfg});
  EXPECT_EQ(play.code, 0) << play.err;
}

TEST_F(CliTest, TrainDqnAndDqfdWriteCheckpoints) {
  const std::string cfg = Path("tiny.cfg");
  std::ofstream(cfg) << "conv_filters = 2\ndense_units = 8\nenv_steps = 40\n"
                        "learning_starts = 8\nbatch_size = 4\nlog_every = 2\n"
                        "checkpoint_every = 10\ndemo_episodes = 1\npretrain_steps = 4\n"
                        "max_steps = 30\n";
  const CliRun dqn = Cli({"train", "dqn", "--config", cfg, "--out", Path("dqn.ckpt")});
  ASSERT_EQ(dqn.code, 0) << dqn.err;
  EXPECT_NO_THROW(LoadNetwork(Path("dqn.ckpt")));
  EXPECT_NE(dqn.out.find("env_steps 40"), std::string::npos);
  const CliRun dqfd = Cli({"train", "dqfd", "--config", cfg, "--out", Path("dqfd.ckpt"),
                        "--steps", "20"});
  ASSERT_EQ(dqfd.code, 0) << dqfd.err;
  EXPECT_NE(dqfd.out.find("pretrain step 4"), std::string::npos);
  EXPECT_NE(dqfd.out.find("env_steps 20"), std::string::npos);
  std::ifstream log(Path("dqfd.ckpt") + ".loss.csv");
  std::string header;
  std::getline(log, header);
  EXPECT_EQ(header, "phase,step,loss");
}

TEST(Settings, EveryKeyRoundTrips) {
  Settings a;
  Settings b;
  for (const auto& [k, v] : a.Items()) EXPECT_NO_THROW(b.Set(k, v)) << k;
  EXPECT_EQ(a.Hash(), b.Hash());
  b.Set("gamma", "0.5");
  EXPECT_NE(a.Hash(), b.Hash());
  EXPECT_THROW(b.Set("nope", "1"), InvalidConfig);
  EXPECT_THROW(b.Set("seed", "-3"), InvalidConfig);
  EXPECT_THROW(b.Set("full_observability", "maybe"), InvalidConfig);
}

TEST(MakeAgent, KnownSpecs) {
  EXPECT_EQ(MakeAgent("simple", GameConfig{})->Name(), "simple");
  EXPECT_EQ(MakeAgent("random", GameConfig{})->Name(), "random");
  EXPECT_EQ(MakeAgent("static", GameConfig{})->Name(), "static");
  EXPECT_THROW(MakeAgent("clever", GameConfig{}), InvalidConfig);
}

}  // namespace
}  // namespace pommer
