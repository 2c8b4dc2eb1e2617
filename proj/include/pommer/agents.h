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

#ifndef POMMER_AGENTS_H_
#define POMMER_AGENTS_H_

#include <climits>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pommer/engine.h"
#include "pommer/pathfind.h"
#include "pommer/rng.h"

namespace pommer {

// Behavior interface. One instance belongs to one episode runner at a time.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual Action Act(const Observation& obs) = 0;
  // Called before every episode with a seed derived from the episode seed.
  virtual void Reset(uint64_t seed) { (void)seed; }
  virtual std::string Name() const = 0;
  // Fresh instance with the same parameters, for parallel episode workers.
  virtual std::unique_ptr<Agent> Clone() const = 0;
};

class RandomAgent : public Agent {
 public:
  explicit RandomAgent(uint64_t seed = 0) : rng_(seed) {}
  Action Act(const Observation& obs) override;
  void Reset(uint64_t seed) override { rng_ = Rng(seed); }
  std::string Name() const override { return "random"; }
  std::unique_ptr<Agent> Clone() const override;

 private:
  Rng rng_;
};

class StaticAgent : public Agent {
 public:
  Action Act(const Observation&) override { return Action::kStop; }
  std::string Name() const override { return "static"; }
  std::unique_ptr<Agent> Clone() const override;
};

// Game constants an observation does not carry.
struct AgentRules {
  int bomb_life = 10;
  int flame_life = 2;
  static AgentRules From(const GameConfig& config) {
    return {config.bomb_life, config.flame_life};
  }
};

// A bomb as seen through an observation.
struct VisibleBomb {
  Position position;
  int life = 0;
  int blast_strength = 0;
};

std::vector<VisibleBomb> VisibleBombs(const Observation& obs);

// When flames will cover each cell, counted in future ticks: tick k is the
// state after the agent's k-th next action. Chained detonations and wood
// burnt by earlier blasts are accounted for; flames already on the board are
// assumed to last one more tick.
class ThreatMap {
 public:
  static constexpr int kNever = INT_MAX;

  ThreatMap(const Observation& obs, const AgentRules& rules,
            std::span<const VisibleBomb> extra_bombs = {});

  int size() const { return size_; }
  // First tick at which the cell is in flames, or kNever.
  int Arrival(Position p) const { return arrival_[Index(p)]; }
  // Last tick at which the cell is in flames, or -1.
  int Clear(Position p) const { return clear_[Index(p)]; }
  bool Dangerous(Position p, int tick) const {
    const int i = Index(p);
    return tick >= arrival_[i] && tick <= clear_[i];
  }
  bool Threatened(Position p) const { return arrival_[Index(p)] != kNever; }
  // Safe at `tick` and at every later tick.
  bool SafeFrom(Position p, int tick) const {
    return !Threatened(p) || tick > Clear(p);
  }
  // Latest tick with flames anywhere, or 0.
  int Horizon() const { return horizon_; }
  // Effective detonation tick per bomb, in VisibleBombs() order followed by
  // extra_bombs.
  const std::vector<int>& DetonationTicks() const { return detonation_; }

 private:
  int Index(Position p) const { return p.row * size_ + p.col; }

  int size_ = 0;
  int horizon_ = 0;
  std::vector<int> arrival_;
  std::vector<int> clear_;
  std::vector<int> detonation_;
};

// Cells the agent can step into: not rigid, wood, bomb, fog or another
// living agent. The observer's own cell counts as walkable unless it holds a
// bomb.
PassabilityView WalkableView(const Observation& obs,
                             std::span<const VisibleBomb> extra_bombs = {});

// Shortest survival plans in the time-expanded grid, starting at `start` at
// `start_tick`. A stay is always allowed; entering requires a walkable cell.
// A plan ends on a cell that is safe from then on.
struct EscapePlan {
  // Bit a set: some earliest plan begins with Action(a), a in [0, 4].
  uint8_t first_actions = 0;
  int arrival_tick = 0;
  bool Allows(Action a) const {
    return (first_actions >> static_cast<int>(a)) & 1u;
  }
};
std::optional<EscapePlan> PlanEscape(const ThreatMap& threat,
                                     const PassabilityView& walkable,
                                     Position start, int start_tick = 0);

// Scripted baseline. Priorities, highest first:
//   1. evade when the current cell will burn within bomb_life ticks;
//   2. bomb an enemy standing in the would-be blast if an escape exists;
//   3. walk toward the nearest power-up within 5 steps;
//   4. bomb adjacent wood if an escape exists;
//   5. take a random safe step, avoiding recently visited cells.
class SimpleAgent : public Agent {
 public:
  static constexpr int kPowerUpRange = 5;
  static constexpr int kRecentMemory = 5;

  explicit SimpleAgent(AgentRules rules = {}, uint64_t seed = 0)
      : rules_(rules), rng_(seed) {}

  Action Act(const Observation& obs) override;
  void Reset(uint64_t seed) override;
  std::string Name() const override { return "simple"; }
  std::unique_ptr<Agent> Clone() const override;

  // True if placing a bomb here now leaves a survivable plan.
  bool CanBombSafely(const Observation& obs) const;
  // True if stepping with `action` is not lethal next tick and leaves a plan.
  bool IsSafeAction(const Observation& obs, const ThreatMap& threat,
                    const PassabilityView& walkable, Action action) const;

 private:
  AgentRules rules_;
  Rng rng_;
  std::deque<Position> recent_;
};

}  // namespace pommer

#endif  // POMMER_AGENTS_H_
