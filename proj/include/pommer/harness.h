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

// Episode and match execution, statistics, replays, and ASCII rendering.

#ifndef POMMER_HARNESS_H_
#define POMMER_HARNESS_H_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pommer/agents.h"
#include "pommer/engine.h"

namespace pommer {

inline constexpr int kReplayVersion = 1;

struct EpisodeRecord {
  GameConfig config;  // config.seed is the episode seed
  std::array<std::string, kNumAgents> agent_names;
  std::vector<std::array<Action, kNumAgents>> actions;
  std::array<int, kNumAgents> rewards{};
  std::optional<int> winner;
  int length = 0;
  double wall_time = 0.0;
  // Hash of the final state. Zero means absent.
  uint64_t final_hash = 0;

  uint64_t seed() const { return config.seed; }
};

uint64_t StateHash(const GameState& state);

using StepObserver = std::function<void(const GameState&)>;

// Agents are Reset with MixSeed(seed, 100 + seat). Actions of dead agents are
// not requested and recorded as Stop. Throws ContractViolation if an agent
// returns a value outside [0, 5]. `on_step` sees the initial state and every
// state after a step.
EpisodeRecord RunEpisode(const GameConfig& config, uint64_t seed,
                         const std::array<Agent*, kNumAgents>& agents,
                         bool record_actions = true,
                         const StepObserver& on_step = {});

struct MatchStats {
  int episodes = 0;
  int decisive = 0;
  std::array<int, kNumAgents> wins{};
  std::array<int, kNumAgents> losses{};
  std::array<int, kNumAgents> draws{};
  double length_sum = 0.0;
  double length_sq_sum = 0.0;
  double wall_time_sum = 0.0;

  void Add(const EpisodeRecord& record);
  void Merge(const MatchStats& other);

  // Wins over decisive episodes; 0 when there are none.
  double WinRate(int seat) const;
  // Wins over all episodes.
  double WinShare(int seat) const;
  double DrawRate() const;
  double MeanLength() const;
  double StddevLength() const;
  double MeanWallTime() const;

  std::string ToJson(bool include_wall_time = true) const;
  std::string ToText(const std::array<std::string, kNumAgents>& names) const;
};

struct MatchResult {
  MatchStats stats;
  // In seed order. Action lists are kept only when requested.
  std::vector<EpisodeRecord> episodes;
};

std::vector<uint64_t> MatchSeeds(uint64_t base_seed, int n);

// Runs one episode per seed with clones of `prototypes`. With jobs > 1 the
// episodes run on worker threads; results are merged in seed order.
MatchResult RunMatch(const GameConfig& config,
                     const std::array<const Agent*, kNumAgents>& prototypes,
                     std::span<const uint64_t> seeds, int jobs = 1,
                     bool record_actions = false);

// Replay files: JSON {version, config, seed, agents, actions, rewards, winner,
// length, final_hash}. Throws FileError / CorruptFile.
std::string ReplayToJson(const EpisodeRecord& record);
EpisodeRecord ReplayFromJson(const std::string& text);
void WriteReplay(const EpisodeRecord& record, const std::string& path);
EpisodeRecord ReadReplay(const std::string& path);

struct ReplayCheck {
  bool ok = false;
  std::string mismatch;  // empty when ok
  EpisodeRecord resimulated;
};
// Re-simulates seed + actions and compares winner, rewards, length and (when
// present) the final state hash.
ReplayCheck VerifyReplay(const EpisodeRecord& record,
                         const StepObserver& on_step = {});

// One glyph per cell, one line per row.
std::string RenderAscii(const GameState& state);
std::string RenderLegend();

GameConfig ConfigFromJson(const std::string& text);
std::string ConfigToJson(const GameConfig& config);

}  // namespace pommer

#endif  // POMMER_HARNESS_H_
