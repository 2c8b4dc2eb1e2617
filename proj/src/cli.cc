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

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "pommer/errors.h"
#include "pommer/harness.h"
#include "pommer/nn.h"

namespace pommer {
namespace {

using json = nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& value) {
  T out{};
  std::istringstream in(value);
  in >> out;
  if (in.fail() || !in.eof()) {
    throw InvalidConfig("bad value for " + key + ": '" + value + "'");
  }
  return out;
}

void Assign(int& field, const std::string& key, const std::string& v) {
  field = ParseNumber<int>(key, v);
}
void Assign(int64_t& field, const std::string& key, const std::string& v) {
  field = ParseNumber<int64_t>(key, v);
}
void Assign(uint64_t& field, const std::string& key, const std::string& v) {
  if (!v.empty() && v[0] == '-') throw InvalidConfig(key + " must be non-negative");
  field = ParseNumber<uint64_t>(key, v);
}
void Assign(double& field, const std::string& key, const std::string& v) {
  field = ParseNumber<double>(key, v);
}
void Assign(bool& field, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") {
    field = true;
  } else if (v == "false" || v == "0") {
    field = false;
  } else {
    throw InvalidConfig("bad boolean for " + key + ": '" + v + "'");
  }
}

std::string Format(int v) { return std::to_string(v); }
std::string Format(int64_t v) { return std::to_string(v); }
std::string Format(uint64_t v) { return std::to_string(v); }
std::string Format(bool v) { return v ? "true" : "false"; }
std::string Format(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct Key {
  const char* name;
  std::function<void(Settings&, const std::string&)> set;
  std::function<std::string(const Settings&)> get;
};

template <typename Ref>
Key K(const char* name, Ref ref) {
  return {name,
          [ref, name](Settings& s, const std::string& v) { Assign(ref(s), name, v); },
          [ref](const Settings& s) { return Format(ref(const_cast<Settings&>(s))); }};
}

#define POMMER_KEY(name, expr) \
  K(name, [](Settings& s) -> auto& { return s.expr; })

const std::vector<Key>& Keys() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k = {
        POMMER_KEY("board_size", game.board_size),
        POMMER_KEY("num_rigid", game.num_rigid),
        POMMER_KEY("num_wood", game.num_wood),
        POMMER_KEY("num_powerups", game.num_powerups),
        POMMER_KEY("bomb_life", game.bomb_life),
        POMMER_KEY("flame_life", game.flame_life),
        POMMER_KEY("initial_ammo", game.initial_ammo),
        POMMER_KEY("initial_blast", game.initial_blast),
        POMMER_KEY("max_steps", game.max_steps),
        POMMER_KEY("view_radius", game.view_radius),
        POMMER_KEY("full_observability", game.full_observability),
        POMMER_KEY("gamma", train.gamma),
        POMMER_KEY("learning_rate", train.learning_rate),
        POMMER_KEY("batch_size", train.batch_size),
        POMMER_KEY("epsilon_start", train.epsilon_start),
        POMMER_KEY("epsilon_end", train.epsilon_end),
        POMMER_KEY("epsilon_decay_steps", train.epsilon_decay_steps),
        POMMER_KEY("target_update_period", train.target_update_period),
        POMMER_KEY("dqfd_margin", train.dqfd_margin),
        POMMER_KEY("margin_weight", train.margin_weight),
        POMMER_KEY("expert_fraction", train.expert_fraction),
        POMMER_KEY("pretrain_steps", train.pretrain_steps),
        POMMER_KEY("huber_delta", train.huber_delta),
        POMMER_KEY("learning_starts", train.learning_starts),
        POMMER_KEY("train_every", train.train_every),
        POMMER_KEY("conv_filters", conv_filters),
        POMMER_KEY("dense_units", dense_units),
        POMMER_KEY("env_steps", env_steps),
        POMMER_KEY("demo_episodes", demo_episodes),
        POMMER_KEY("epochs", epochs),
        POMMER_KEY("held_out_every", held_out_every),
        POMMER_KEY("augment", augment),
        POMMER_KEY("checkpoint_every", checkpoint_every),
        POMMER_KEY("log_every", log_every),
    };
    k.push_back({"replay_capacity",
                 [](Settings& s, const std::string& v) {
                   uint64_t cap = 0;
                   Assign(cap, "replay_capacity", v);
                   s.train.replay_capacity = static_cast<size_t>(cap);
                 },
                 [](const Settings& s) {
                   return Format(static_cast<uint64_t>(s.train.replay_capacity));
                 }});
    k.push_back({"seed",
                 [](Settings& s, const std::string& v) {
                   Assign(s.game.seed, "seed", v);
                   s.train.seed = s.game.seed;
                 },
                 [](const Settings& s) { return Format(s.game.seed); }});
    return k;
  }();
  return keys;
}

#undef POMMER_KEY

void Validate(const Settings& s) {
  s.game.Validate();
  s.train.Validate();
  auto positive = [](int64_t v, const char* name) {
    if (v < 1) throw InvalidConfig(std::string(name) + " must be positive");
  };
  positive(s.conv_filters, "conv_filters");
  positive(s.dense_units, "dense_units");
  positive(s.epochs, "epochs");
  positive(s.checkpoint_every, "checkpoint_every");
  positive(s.log_every, "log_every");
  if (s.env_steps < 0) throw InvalidConfig("env_steps must be non-negative");
  if (s.demo_episodes < 0) throw InvalidConfig("demo_episodes must be non-negative");
  if (s.held_out_every < 2) throw InvalidConfig("held_out_every must be >= 2");
}

std::string HexHash(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void WriteManifest(const std::string& output, const std::vector<std::string>& args,
                   const std::string& command, const Settings& s) {
  json config = json::object();
  for (const auto& [k, v] : s.Items()) config[k] = v;
  json j = {{"tool", "pommer"},
            {"version", kVersion},
            {"command", command},
            {"argv", args},
            {"output", output},
            {"seed", s.game.seed},
            {"config", config},
            {"config_hash", HexHash(s.Hash())},
            {"compiler", __VERSION__},
            {"cxx_standard", __cplusplus}};
  const std::string path = output + ".manifest.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileError("cannot write manifest " + path);
  out << j.dump(2) << '\n';
}

std::vector<std::string> SplitComma(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) parts.push_back(Trim(cur));
  return parts;
}

std::string RewardsText(const std::array<int, kNumAgents>& r) {
  std::ostringstream out;
  out << "[" << r[0] << ", " << r[1] << ", " << r[2] << ", " << r[3] << "]";
  return out.str();
}

template <typename T>
std::string ListText(const std::vector<T>& values) {
  std::ostringstream out;
  out << "[";
  for (size_t i = 0; i < values.size(); ++i) out << (i ? ", " : "") << values[i];
  out << "]";
  return out.str();
}

struct CommonFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  int episodes = -1;
  std::string out;
  std::string model;
  bool render = false;
  bool partial_obs = false;
  int jobs = 1;
};

class Cli {
 public:
  Cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
      : args_(args), out_(out), err_(err) {}

  int Run();

 private:
  void Resolve(const std::string& command);
  int Play();
  int Collect();
  int Train();
  int TrainDqn(bool dqfd);
  int TrainBc();
  int Eval();
  int Replay();
  void PrintFrame(const GameState& state);

  std::vector<std::string> args_;
  std::ostream& out_;
  std::ostream& err_;
  CommonFlags flags_;
  Settings settings_;
  std::string agents_spec_ = "simple,simple,simple,simple";
  std::string replay_dir_;
  std::string train_algo_;
  std::string data_path_;
  std::string opponents_ = "simple";
  std::string replay_path_;
  int delay_ms_ = 0;
  int64_t steps_override_ = -1;
  int epochs_override_ = -1;
};

void Cli::Resolve(const std::string& command) {
  bool seed_from_file = false;
  if (!flags_.config_path.empty()) {
    const auto keys = LoadSettingsFile(flags_.config_path, &settings_);
    seed_from_file = std::find(keys.begin(), keys.end(), "seed") != keys.end();
  }
  if (flags_.seed) {
    settings_.Set("seed", std::to_string(*flags_.seed));
  } else if (!seed_from_file) {
    if (const char* env = std::getenv("POMMER_SEED")) settings_.Set("seed", env);
  }
  if (flags_.partial_obs) settings_.game.full_observability = false;
  if (steps_override_ >= 0) settings_.env_steps = steps_override_;
  if (epochs_override_ >= 0) settings_.epochs = epochs_override_;
  Validate(settings_);
  out_ << "# pommer " << command << "\n" << settings_.Echo();
  out_ << "# config_hash " << HexHash(settings_.Hash()) << "\n";
}

void Cli::PrintFrame(const GameState& state) {
  out_ << "step " << state.step << "\n" << RenderAscii(state);
  if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
}

int Cli::Play() {
  Resolve("play");
  const auto specs = SplitComma(agents_spec_);
  if (specs.size() != kNumAgents) {
    throw InvalidConfig("--agents needs 4 comma-separated specs, got " +
                        std::to_string(specs.size()));
  }
  std::array<std::unique_ptr<Agent>, kNumAgents> agents;
  std::array<std::string, kNumAgents> names;
  for (int i = 0; i < kNumAgents; ++i) {
    agents[i] = MakeAgent(specs[i], settings_.game);
    names[i] = specs[i];
  }
  const int episodes = flags_.episodes < 0 ? 5 : flags_.episodes;
  const auto seeds = MatchSeeds(settings_.game.seed, episodes);
  const bool keep_actions = !replay_dir_.empty();
  std::vector<EpisodeRecord> records;
  if (flags_.render) {
    std::array<Agent*, kNumAgents> seats{};
    for (int i = 0; i < kNumAgents; ++i) seats[i] = agents[i].get();
    for (uint64_t seed : seeds) {
      records.push_back(RunEpisode(settings_.game, seed, seats, keep_actions,
                                   [&](const GameState& s) { PrintFrame(s); }));
    }
  } else {
    std::array<const Agent*, kNumAgents> protos{};
    for (int i = 0; i < kNumAgents; ++i) protos[i] = agents[i].get();
    records = RunMatch(settings_.game, protos, seeds, flags_.jobs, keep_actions).episodes;
  }
  if (!replay_dir_.empty()) std::filesystem::create_directories(replay_dir_);
  MatchStats stats;
  std::vector<int> seat0;
  std::vector<std::string> times;
  for (size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    stats.Add(r);
    seat0.push_back(r.rewards[0]);
    char t[32];
    std::snprintf(t, sizeof(t), "%.3f", r.wall_time);
    times.push_back(t);
    out_ << "episode " << k << " seed " << r.seed() << " length " << r.length
         << " winner " << (r.winner ? std::to_string(*r.winner) : "none")
         << " rewards " << RewardsText(r.rewards) << "\n";
    if (!replay_dir_.empty()) {
      WriteReplay(r, (std::filesystem::path(replay_dir_) /
                      ("episode_" + std::to_string(k) + ".replay"))
                         .string());
    }
  }
  out_ << "Stats:\n";
  out_ << "Episode Rewards: " << ListText(seat0) << "\n";
  out_ << "Episode Time: " << ListText(times) << "\n";
  out_ << stats.ToText(names);
  out_ << "stats_json " << stats.ToJson() << "\n";
  if (!flags_.out.empty()) {
    std::ofstream f(flags_.out, std::ios::trunc);
    if (!f) throw FileError("cannot write " + flags_.out);
    f << stats.ToJson() << "\n";
    WriteManifest(flags_.out, args_, "play", settings_);
  }
  if (!replay_dir_.empty()) {
    WriteManifest((std::filesystem::path(replay_dir_) / "replays").string(), args_,
                  "play", settings_);
  }
  return kExitOk;
}

int Cli::Collect() {
  Resolve("collect");
  if (flags_.out.empty()) throw InvalidConfig("collect needs --out");
  const int episodes = flags_.episodes < 0 ? 600 : flags_.episodes;
  JsonlDemoSink sink(flags_.out);
  const auto summary =
      CollectDemonstrations(settings_.game, episodes, settings_.game.seed, sink);
  sink.Flush();
  out_ << "episodes " << summary.episodes << " records " << summary.records
       << " draws " << summary.draws << " wins "
       << ListText(std::vector<int>(summary.wins.begin(), summary.wins.end())) << "\n";
  out_ << "action_counts "
       << ListText(std::vector<int64_t>(summary.action_counts.begin(),
                                        summary.action_counts.end()))
       << "\n";
  WriteManifest(flags_.out, args_, "collect", settings_);
  return kExitOk;
}

int Cli::Train() {
  if (train_algo_ == "dqn") return TrainDqn(false);
  if (train_algo_ == "dqfd") return TrainDqn(true);
  if (train_algo_ == "bc") return TrainBc();
  throw InvalidConfig("unknown trainer '" + train_algo_ + "' (dqn, dqfd or bc)");
}

int Cli::TrainDqn(bool dqfd) {
  Resolve(dqfd ? "train dqfd" : "train dqn");
  if (flags_.out.empty()) throw InvalidConfig("train needs --out");
  const Settings& s = settings_;
  QLearner learner(MakePolicyNetwork(s.game.board_size, MixSeed(s.train.seed, 11),
                                     s.conv_filters, s.dense_units),
                   s.train);
  std::ofstream log(flags_.out + ".loss.csv", std::ios::trunc);
  if (!log) throw FileError("cannot write " + flags_.out + ".loss.csv");
  log << "phase,step,loss\n";
  std::unique_ptr<ReplayBuffer> expert;
  if (dqfd) {
    // The expert buffer holds every transition of demo_episodes games.
    expert = std::make_unique<ReplayBuffer>(static_cast<size_t>(s.demo_episodes) * 4 *
                                                    s.game.max_steps +
                                                1,
                                            ReplayBuffer::Eviction::kNever);
    const int64_t n = CollectExpertTransitions(s.game, s.demo_episodes,
                                               MixSeed(s.train.seed, 12), *expert);
    out_ << "expert transitions " << n << "\n";
    const auto trace = DqfdPretrain(learner, *expert);
    double window = 0;
    for (size_t i = 0; i < trace.size(); ++i) {
      window += trace[i];
      if ((i + 1) % s.log_every == 0 || i + 1 == trace.size()) {
        const size_t count = (i % s.log_every) + 1;
        log << "pretrain," << i + 1 << "," << window / count << "\n";
        out_ << "pretrain step " << i + 1 << " loss " << window / count << "\n";
        window = 0;
      }
    }
    SaveNetwork(learner.online, flags_.out);
  }
  ReplayBuffer self(s.train.replay_capacity);
  SimpleAgent opponent(AgentRules::From(s.game));
  double window = 0;
  int64_t in_window = 0;
  int64_t updates = 0;
  int64_t next_checkpoint = s.checkpoint_every;
  const auto report = TrainInGame(
      learner, s.game, opponent, s.env_steps, self, expert.get(),
      [&](int64_t step, double loss) {
        window += loss;
        ++in_window;
        if (++updates % s.log_every == 0) {
          log << "train," << step << "," << window / in_window << "\n";
          out_ << "env step " << step << " loss " << window / in_window << "\n";
          window = 0;
          in_window = 0;
        }
        if (step >= next_checkpoint) {
          SaveNetwork(learner.online, flags_.out);
          next_checkpoint += s.checkpoint_every;
        }
      });
  SaveNetwork(learner.online, flags_.out);
  int wins = 0;
  for (int r : report.episode_rewards) wins += r == 1;
  out_ << "episodes " << report.episodes << " env_steps " << report.env_steps
       << " updates " << report.losses.size() << " training_wins " << wins << "\n";
  out_ << "saved " << flags_.out << "\n";
  WriteManifest(flags_.out, args_, dqfd ? "train dqfd" : "train dqn", settings_);
  return kExitOk;
}

int Cli::TrainBc() {
  Resolve("train bc");
  if (flags_.out.empty()) throw InvalidConfig("train needs --out");
  const Settings& s = settings_;
  DemoStore store(s.game.board_size);
  if (!data_path_.empty()) {
    const int64_t n = ReadDemonstrations(data_path_, store);
    out_ << "loaded " << n << " records from " << data_path_ << "\n";
  } else {
    const int episodes = flags_.episodes < 0 ? 300 : flags_.episodes;
    const auto summary =
        CollectDemonstrations(s.game, episodes, MixSeed(s.train.seed, 13), store);
    out_ << "collected " << summary.records << " records from " << episodes
         << " episodes\n";
  }
  std::vector<size_t> train, held_out;
  SplitByEpisode(store, s.held_out_every, &train, &held_out);
  Network net = MakePolicyNetwork(s.game.board_size, MixSeed(s.train.seed, 11),
                                  s.conv_filters, s.dense_units);
  Optimizer opt(OptimizerConfig{OptimizerKind::kAdam, s.train.learning_rate});
  Rng rng(MixSeed(s.train.seed, 14));
  std::ofstream log(flags_.out + ".loss.csv", std::ios::trunc);
  if (!log) throw FileError("cannot write " + flags_.out + ".loss.csv");
  log << "epoch,loss\n";
  const auto report = TrainBehaviorCloning(
      net, opt, store, train, held_out, s.epochs, s.train.batch_size, s.game.bomb_life,
      s.augment, rng, [&](int epoch, double loss) {
        log << epoch << "," << loss << "\n";
        log.flush();
        out_ << "epoch " << epoch << " loss " << loss << "\n";
        SaveNetwork(net, flags_.out);
      });
  SaveNetwork(net, flags_.out);
  out_ << "train_records " << train.size() << " held_out_records " << held_out.size()
       << "\n";
  out_ << "train_accuracy " << report.train_accuracy << " held_out_accuracy "
       << report.held_out_accuracy << " majority_baseline " << report.majority_baseline
       << "\n";
  out_ << "saved " << flags_.out << "\n";
  WriteManifest(flags_.out, args_, "train bc", settings_);
  return kExitOk;
}

int Cli::Eval() {
  Resolve("eval");
  if (flags_.model.empty()) throw InvalidConfig("eval needs --model");
  const auto model = MakeAgent("model:" + flags_.model, settings_.game);
  const auto opponent = MakeAgent(opponents_, settings_.game);
  const int episodes = flags_.episodes < 0 ? 100 : flags_.episodes;
  const auto seeds = MatchSeeds(settings_.game.seed, episodes);
  const auto result = RunMatch(settings_.game,
                               {model.get(), opponent.get(), opponent.get(), opponent.get()},
                               seeds, flags_.jobs);
  std::vector<int> seat0;
  for (const auto& r : result.episodes) seat0.push_back(r.rewards[0]);
  out_ << "Episode Rewards: " << ListText(seat0) << "\n";
  out_ << result.stats.ToText({"model", opponents_, opponents_, opponents_});
  out_ << "model win_rate (decisive) " << result.stats.WinRate(0) << " win_share (all) "
       << result.stats.WinShare(0) << " draw_rate " << result.stats.DrawRate() << "\n";
  out_ << "stats_json " << result.stats.ToJson() << "\n";
  if (!flags_.out.empty()) {
    std::ofstream f(flags_.out, std::ios::trunc);
    if (!f) throw FileError("cannot write " + flags_.out);
    f << result.stats.ToJson() << "\n";
    WriteManifest(flags_.out, args_, "eval", settings_);
  }
  return kExitOk;
}

int Cli::Replay() {
  const EpisodeRecord record = ReadReplay(replay_path_);
  StepObserver observer;
  if (flags_.render) observer = [&](const GameState& s) { PrintFrame(s); };
  const ReplayCheck check = VerifyReplay(record, observer);
  out_ << "replay " << replay_path_ << " seed " << record.seed() << " length "
       << check.resimulated.length << " rewards "
       << RewardsText(check.resimulated.rewards) << "\n";
  if (!check.ok) {
    err_ << "replay mismatch: " << check.mismatch << "\n";
    return kExitContractViolation;
  }
  out_ << "replay ok\n";
  return kExitOk;
}

int Cli::Run() {
  CLI::App app{"Pommerman free-for-all engine, agents and learners", "pommer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", flags_.config_path, "key = value settings file");
    sub->add_option("--seed", flags_.seed, "base seed (falls back to POMMER_SEED)");
    sub->add_option("--episodes", flags_.episodes, "number of episodes");
    sub->add_option("--jobs", flags_.jobs, "parallel episode workers")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--partial-obs", flags_.partial_obs, "agents see a limited window");
  };

  auto* play = app.add_subcommand("play", "run episodes and print statistics");
  common(play);
  play->add_option("--agents", agents_spec_,
                   "four comma-separated specs: simple|random|static|model:<path>");
  play->add_option("--out", flags_.out, "write stats JSON here");
  play->add_option("--replay-dir", replay_dir_, "write one replay file per episode");
  play->add_flag("--render", flags_.render, "print ASCII frames");
  play->footer(RenderLegend());

  auto* collect = app.add_subcommand("collect", "record SimpleAgent demonstrations");
  common(collect);
  collect->add_option("--out", flags_.out, "JSON Lines output")->required();

  auto* train = app.add_subcommand("train", "train a policy network");
  common(train);
  train->add_option("algo", train_algo_, "dqn | dqfd | bc")
      ->required()
      ->check(CLI::IsMember({"dqn", "dqfd", "bc"}));
  train->add_option("--out", flags_.out, "checkpoint path")->required();
  train->add_option("--data", data_path_, "demonstrations (bc)");
  train->add_option("--steps", steps_override_, "environment steps (dqn, dqfd)");
  train->add_option("--epochs", epochs_override_, "epochs (bc)");

  auto* eval = app.add_subcommand("eval", "evaluate a model against three opponents");
  common(eval);
  eval->add_option("--model", flags_.model, "checkpoint path")->required();
  eval->add_option("--opponents", opponents_, "opponent spec");
  eval->add_option("--out", flags_.out, "write stats JSON here");

  auto* replay = app.add_subcommand("replay", "re-simulate a replay file");
  replay->add_option("path", replay_path_, "replay file")->required();
  replay->add_flag("--render", flags_.render, "print ASCII frames");
  replay->add_option("--delay-ms", delay_ms_, "pause between frames");
  replay->footer(RenderLegend());

  std::vector<const char*> argv;
  for (const auto& a : args_) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out_, err_);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (play->parsed()) return Play();
    if (collect->parsed()) return Collect();
    if (train->parsed()) return Train();
    if (eval->parsed()) return Eval();
    if (replay->parsed()) return Replay();
  } catch (const InvalidConfig& e) {
    err_ << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const FileError& e) {
    err_ << "file error: " << e.what() << "\n";
    return kExitFileError;
  } catch (const IncompatibleModel& e) {
    err_ << "file error: incompatible model: " << e.what() << "\n";
    return kExitFileError;
  } catch (const ContractViolation& e) {
    err_ << "contract violation: " << e.what() << "\n";
    return kExitContractViolation;
  } catch (const std::exception& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace

void Settings::Set(const std::string& key, const std::string& value) {
  for (const auto& k : Keys()) {
    if (key == k.name) {
      k.set(*this, Trim(value));
      return;
    }
  }
  throw InvalidConfig("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> Settings::Items() const {
  std::vector<std::pair<std::string, std::string>> items;
  for (const auto& k : Keys()) items.emplace_back(k.name, k.get(*this));
  return items;
}

std::string Settings::Echo() const {
  std::string text;
  for (const auto& [k, v] : Items()) text += "# " + k + " = " + v + "\n";
  return text;
}

uint64_t Settings::Hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : Items()) {
    for (char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::vector<std::string> LoadSettingsFile(const std::string& path, Settings* settings) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open config " + path);
  std::vector<std::string> keys;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfig(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    try {
      settings->Set(key, line.substr(eq + 1));
    } catch (const InvalidConfig& e) {
      throw InvalidConfig(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    keys.push_back(key);
  }
  return keys;
}

std::unique_ptr<Agent> MakeAgent(const std::string& spec, const GameConfig& game) {
  if (spec == "simple") return std::make_unique<SimpleAgent>(AgentRules::From(game));
  if (spec == "random") return std::make_unique<RandomAgent>();
  if (spec == "static") return std::make_unique<StaticAgent>();
  if (spec.rfind("model:", 0) == 0) {
    const std::string path = spec.substr(6);
    auto net = std::make_shared<const Network>(LoadNetwork(path));
    return std::make_unique<GreedyPolicyAgent>(net, game.board_size, game.bomb_life,
                                               "model:" + path);
  }
  throw InvalidConfig("unknown agent spec '" + spec +
                      "' (simple, random, static or model:<path>)");
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return Cli(args, out, err).Run();
}

}  // namespace pommer
