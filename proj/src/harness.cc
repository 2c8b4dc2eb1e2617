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

#include "pommer/harness.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pommer/errors.h"

namespace pommer {
namespace {

using json = nlohmann::json;

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

void HashInt(uint64_t& h, int64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= static_cast<uint64_t>(v >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
}

json ConfigJson(const GameConfig& c) {
  return {{"board_size", c.board_size},   {"num_agents", c.num_agents},
          {"num_rigid", c.num_rigid},     {"num_wood", c.num_wood},
          {"num_powerups", c.num_powerups}, {"bomb_life", c.bomb_life},
          {"flame_life", c.flame_life},   {"initial_ammo", c.initial_ammo},
          {"initial_blast", c.initial_blast}, {"max_steps", c.max_steps},
          {"view_radius", c.view_radius},
          {"full_observability", c.full_observability},
          {"seed", c.seed}};
}

GameConfig ConfigFromJsonValue(const json& j) {
  GameConfig c;
  c.board_size = j.at("board_size").get<int>();
  c.num_agents = j.at("num_agents").get<int>();
  c.num_rigid = j.at("num_rigid").get<int>();
  c.num_wood = j.at("num_wood").get<int>();
  c.num_powerups = j.at("num_powerups").get<int>();
  c.bomb_life = j.at("bomb_life").get<int>();
  c.flame_life = j.at("flame_life").get<int>();
  c.initial_ammo = j.at("initial_ammo").get<int>();
  c.initial_blast = j.at("initial_blast").get<int>();
  c.max_steps = j.at("max_steps").get<int>();
  c.view_radius = j.at("view_radius").get<int>();
  c.full_observability = j.at("full_observability").get<bool>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

uint64_t StateHash(const GameState& s) {
  uint64_t h = kFnvOffset;
  HashInt(h, s.step);
  for (Item item : s.board) HashInt(h, static_cast<int>(item));
  for (const auto& b : s.bombs) {
    HashInt(h, s.Index(b.position));
    HashInt(h, b.owner);
    HashInt(h, b.life);
    HashInt(h, b.blast_strength);
    HashInt(h, b.moving_direction ? static_cast<int>(*b.moving_direction) : -1);
  }
  for (const auto& f : s.flames) {
    HashInt(h, s.Index(f.position));
    HashInt(h, f.life);
  }
  for (const auto& a : s.agents) {
    HashInt(h, s.Index(a.position));
    HashInt(h, a.ammo);
    HashInt(h, a.blast_strength);
    HashInt(h, a.can_kick);
    HashInt(h, a.alive);
  }
  return h == 0 ? 1 : h;
}

EpisodeRecord RunEpisode(const GameConfig& config, uint64_t seed,
                         const std::array<Agent*, kNumAgents>& agents,
                         bool record_actions, const StepObserver& on_step) {
  const auto start = std::chrono::steady_clock::now();
  EpisodeRecord rec;
  rec.config = config;
  rec.config.seed = seed;
  for (int i = 0; i < kNumAgents; ++i) {
    if (!agents[i]) throw ContractViolation("missing agent in seat " + std::to_string(i));
    agents[i]->Reset(MixSeed(seed, 100 + i));
    rec.agent_names[i] = agents[i]->Name();
  }
  GameState state = NewGame(rec.config);
  if (on_step) on_step(state);
  StepResult res;
  while (!state.done) {
    std::array<Action, kNumAgents> actions{};
    for (int i = 0; i < kNumAgents; ++i) {
      if (!state.agents[i].alive) continue;
      const Action a = agents[i]->Act(Observe(state, i));
      if (!ActionFromInt(static_cast<int>(a))) {
        throw ContractViolation("agent " + std::to_string(i) + " (" +
                                rec.agent_names[i] + ") returned action " +
                                std::to_string(static_cast<int>(a)));
      }
      actions[i] = a;
    }
    if (record_actions) rec.actions.push_back(actions);
    res = Step(state, actions);
    if (on_step) on_step(state);
  }
  rec.rewards = res.rewards;
  rec.winner = state.winner;
  rec.length = state.step;
  rec.final_hash = StateHash(state);
  rec.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

// ------------------------------------------------------------- stats

void MatchStats::Add(const EpisodeRecord& r) {
  ++episodes;
  if (r.winner) ++decisive;
  for (int i = 0; i < kNumAgents; ++i) {
    if (!r.winner) {
      ++draws[i];
    } else if (*r.winner == i) {
      ++wins[i];
    } else {
      ++losses[i];
    }
  }
  length_sum += r.length;
  length_sq_sum += static_cast<double>(r.length) * r.length;
  wall_time_sum += r.wall_time;
}

void MatchStats::Merge(const MatchStats& o) {
  episodes += o.episodes;
  decisive += o.decisive;
  for (int i = 0; i < kNumAgents; ++i) {
    wins[i] += o.wins[i];
    losses[i] += o.losses[i];
    draws[i] += o.draws[i];
  }
  length_sum += o.length_sum;
  length_sq_sum += o.length_sq_sum;
  wall_time_sum += o.wall_time_sum;
}

double MatchStats::WinRate(int seat) const {
  return decisive ? static_cast<double>(wins[seat]) / decisive : 0.0;
}

double MatchStats::WinShare(int seat) const {
  return episodes ? static_cast<double>(wins[seat]) / episodes : 0.0;
}

double MatchStats::DrawRate() const {
  return episodes ? static_cast<double>(episodes - decisive) / episodes : 0.0;
}

double MatchStats::MeanLength() const {
  return episodes ? length_sum / episodes : 0.0;
}

double MatchStats::StddevLength() const {
  if (episodes < 2) return 0.0;
  const double mean = MeanLength();
  const double var = (length_sq_sum - episodes * mean * mean) / (episodes - 1);
  return var > 0 ? std::sqrt(var) : 0.0;
}

double MatchStats::MeanWallTime() const {
  return episodes ? wall_time_sum / episodes : 0.0;
}

std::string MatchStats::ToJson(bool include_wall_time) const {
  json j = {{"episodes", episodes},
            {"decisive", decisive},
            {"draw_rate", DrawRate()},
            {"wins", wins},
            {"losses", losses},
            {"draws", draws},
            {"mean_length", MeanLength()},
            {"stddev_length", StddevLength()}};
  json rates = json::array();
  for (int i = 0; i < kNumAgents; ++i) rates.push_back(WinRate(i));
  j["win_rate_decisive"] = rates;
  if (include_wall_time) j["mean_wall_time"] = MeanWallTime();
  return j.dump();
}

std::string MatchStats::ToText(const std::array<std::string, kNumAgents>& names) const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-4s %-24s %6s %6s %6s %10s\n", "seat", "agent",
                "wins", "losses", "draws", "win_rate");
  out << line;
  for (int i = 0; i < kNumAgents; ++i) {
    std::snprintf(line, sizeof(line), "%-4d %-24s %6d %6d %6d %10.4f\n", i,
                  names[i].c_str(), wins[i], losses[i], draws[i], WinRate(i));
    out << line;
  }
  out << "episodes " << episodes << "  decisive " << decisive << "  draw_rate "
      << Fixed(DrawRate(), 4) << "  length " << Fixed(MeanLength(), 1) << " +- "
      << Fixed(StddevLength(), 1) << "  wall_time " << Fixed(MeanWallTime(), 4)
      << "s\n";
  return out.str();
}

std::vector<uint64_t> MatchSeeds(uint64_t base_seed, int n) {
  std::vector<uint64_t> seeds(std::max(0, n));
  for (int i = 0; i < n; ++i) seeds[i] = MixSeed(base_seed, i);
  return seeds;
}

MatchResult RunMatch(const GameConfig& config,
                     const std::array<const Agent*, kNumAgents>& prototypes,
                     std::span<const uint64_t> seeds, int jobs,
                     bool record_actions) {
  config.Validate();
  for (const Agent* p : prototypes) {
    if (!p) throw ContractViolation("missing agent prototype");
  }
  std::vector<EpisodeRecord> records(seeds.size());
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    std::array<std::unique_ptr<Agent>, kNumAgents> owned;
    std::array<Agent*, kNumAgents> agents{};
    for (int i = 0; i < kNumAgents; ++i) {
      owned[i] = prototypes[i]->Clone();
      agents[i] = owned[i].get();
    }
    for (;;) {
      const size_t k = next.fetch_add(1);
      if (k >= seeds.size() || failed.load()) return;
      try {
        records[k] = RunEpisode(config, seeds[k], agents, record_actions);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  const int n_jobs =
      std::max(1, std::min<int>(jobs, static_cast<int>(std::max<size_t>(1, seeds.size()))));
  if (n_jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int j = 0; j < n_jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);
  MatchResult result;
  for (const auto& r : records) result.stats.Add(r);
  result.episodes = std::move(records);
  return result;
}

// ------------------------------------------------------------- replays

std::string ConfigToJson(const GameConfig& config) { return ConfigJson(config).dump(); }

GameConfig ConfigFromJson(const std::string& text) {
  try {
    return ConfigFromJsonValue(json::parse(text));
  } catch (const json::exception& e) {
    throw CorruptFile(std::string("bad config json: ") + e.what());
  }
}

std::string ReplayToJson(const EpisodeRecord& r) {
  json actions = json::array();
  for (const auto& step : r.actions) {
    json row = json::array();
    for (Action a : step) row.push_back(static_cast<int>(a));
    actions.push_back(std::move(row));
  }
  json j = {{"version", kReplayVersion},
            {"config", ConfigJson(r.config)},
            {"seed", r.config.seed},
            {"agents", r.agent_names},
            {"actions", std::move(actions)},
            {"rewards", r.rewards},
            {"winner", r.winner ? json(*r.winner) : json(nullptr)},
            {"length", r.length},
            {"final_hash", r.final_hash}};
  return j.dump();
}

EpisodeRecord ReplayFromJson(const std::string& text) {
  EpisodeRecord r;
  try {
    const json j = json::parse(text);
    const int version = j.at("version").get<int>();
    if (version != kReplayVersion) {
      throw CorruptFile("replay version " + std::to_string(version) +
                        " is not supported (expected " +
                        std::to_string(kReplayVersion) + ")");
    }
    r.config = ConfigFromJsonValue(j.at("config"));
    r.config.seed = j.at("seed").get<uint64_t>();
    if (j.contains("agents")) {
      r.agent_names = j.at("agents").get<std::array<std::string, kNumAgents>>();
    }
    for (const auto& row : j.at("actions")) {
      const auto values = row.get<std::array<int, kNumAgents>>();
      std::array<Action, kNumAgents> step{};
      for (int i = 0; i < kNumAgents; ++i) {
        const auto a = ActionFromInt(values[i]);
        if (!a) throw CorruptFile("action out of range: " + std::to_string(values[i]));
        step[i] = *a;
      }
      r.actions.push_back(step);
    }
    r.rewards = j.at("rewards").get<std::array<int, kNumAgents>>();
    if (!j.at("winner").is_null()) r.winner = j.at("winner").get<int>();
    r.length = j.at("length").get<int>();
    if (j.contains("final_hash")) r.final_hash = j.at("final_hash").get<uint64_t>();
  } catch (const json::exception& e) {
    throw CorruptFile(std::string("malformed replay: ") + e.what());
  }
  try {
    r.config.Validate();
  } catch (const InvalidConfig& e) {
    throw CorruptFile(std::string("replay config invalid: ") + e.what());
  }
  return r;
}

void WriteReplay(const EpisodeRecord& record, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileError("cannot open " + path + " for writing");
  out << ReplayToJson(record) << '\n';
  if (!out) throw FileError("write failed: " + path);
}

EpisodeRecord ReadReplay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ReplayFromJson(buf.str());
}

ReplayCheck VerifyReplay(const EpisodeRecord& record, const StepObserver& on_step) {
  ReplayCheck check;
  EpisodeRecord& sim = check.resimulated;
  sim.config = record.config;
  sim.agent_names = record.agent_names;
  GameState state = NewGame(record.config);
  if (on_step) on_step(state);
  StepResult res;
  for (const auto& actions : record.actions) {
    if (state.done) {
      check.mismatch = "episode ended at step " + std::to_string(state.step) +
                       " but the replay has " + std::to_string(record.actions.size()) +
                       " action rows";
      return check;
    }
    res = Step(state, actions);
    sim.actions.push_back(actions);
    if (on_step) on_step(state);
  }
  sim.rewards = state.done ? res.rewards : CurrentRewards(state);
  sim.winner = state.winner;
  sim.length = state.step;
  sim.final_hash = StateHash(state);
  auto rewards_text = [](const std::array<int, kNumAgents>& r) {
    return "[" + std::to_string(r[0]) + ", " + std::to_string(r[1]) + ", " +
           std::to_string(r[2]) + ", " + std::to_string(r[3]) + "]";
  };
  if (!state.done) {
    check.mismatch = "episode not finished after " + std::to_string(state.step) + " steps";
  } else if (sim.length != record.length) {
    check.mismatch = "length " + std::to_string(sim.length) + " != recorded " +
                     std::to_string(record.length);
  } else if (sim.rewards != record.rewards) {
    check.mismatch = "rewards " + rewards_text(sim.rewards) + " != recorded " +
                     rewards_text(record.rewards);
  } else if (sim.winner != record.winner) {
    check.mismatch = "winner differs";
  } else if (record.final_hash != 0 && sim.final_hash != record.final_hash) {
    check.mismatch = "final state hash differs";
  }
  check.ok = check.mismatch.empty();
  return check;
}

// ------------------------------------------------------------- rendering

namespace {
char Glyph(Item item) {
  switch (item) {
    case Item::kPassage: return '.';
    case Item::kRigid: return '#';
    case Item::kWood: return '+';
    case Item::kBomb: return '*';
    case Item::kFlames: return '~';
    case Item::kFog: return '?';
    case Item::kExtraBomb: return 'b';
    case Item::kIncrRange: return 'r';
    case Item::kKick: return 'k';
    case Item::kAgentDummy: return '.';
    case Item::kAgent0: return '0';
    case Item::kAgent1: return '1';
    case Item::kAgent2: return '2';
    case Item::kAgent3: return '3';
  }
  return '?';
}
}  // namespace

std::string RenderAscii(const GameState& state) {
  const int n = state.size();
  std::string out;
  out.reserve(static_cast<size_t>(n) * (n + 1));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) out += Glyph(state.board[r * n + c]);
    out += '\n';
  }
  return out;
}

std::string RenderLegend() {
  return ". passage  # rigid  + wood  * bomb  ~ flames  ? fog\n"
         "b extra bomb  r blast range  k kick  0-3 agents";
}

}  // namespace pommer
