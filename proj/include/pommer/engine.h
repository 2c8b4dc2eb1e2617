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

// Deterministic four-player free-for-all bomber world.
//
// A GameState is a plain value. NewGame() builds one from a GameConfig,
// Step() advances it by one tick given one action per seat, Observe() cuts
// the per-agent view. All randomness is consumed during board generation, so
// a (seed, action script) pair fully determines a trajectory.

#ifndef POMMER_ENGINE_H_
#define POMMER_ENGINE_H_

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pommer/rng.h"

namespace pommer {

inline constexpr int kNumAgents = 4;
inline constexpr int kNumActions = 6;

// Tile codes as they appear in the encoded board. Fog only ever appears in
// observations.
enum class Item : int8_t {
  kPassage = 0,
  kRigid = 1,
  kWood = 2,
  kBomb = 3,
  kFlames = 4,
  kFog = 5,
  kExtraBomb = 6,
  kIncrRange = 7,
  kKick = 8,
  kAgentDummy = 9,
  kAgent0 = 10,
  kAgent1 = 11,
  kAgent2 = 12,
  kAgent3 = 13,
};

inline constexpr int ItemCode(Item item) { return static_cast<int>(item); }
inline constexpr int AgentCode(int agent_id) { return 10 + agent_id; }
inline constexpr bool IsAgentCode(int code) { return code >= 10 && code <= 13; }
inline constexpr bool IsPowerUp(Item item) {
  return item == Item::kExtraBomb || item == Item::kIncrRange ||
         item == Item::kKick;
}
inline constexpr bool IsPowerUpCode(int code) { return code >= 6 && code <= 8; }

enum class Action : int {
  kStop = 0,
  kUp = 1,
  kLeft = 2,
  kDown = 3,
  kRight = 4,
  kBomb = 5,
};

std::optional<Action> ActionFromInt(int value);
const char* ActionName(Action action);
inline constexpr bool IsMove(Action a) {
  return a == Action::kUp || a == Action::kLeft || a == Action::kDown ||
         a == Action::kRight;
}

struct Position {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Position&, const Position&) = default;
};

// Neighbor in the direction of a move action; identity for Stop and Bomb.
Position Moved(Position p, Action a);
inline int ManhattanDistance(Position a, Position b) {
  return (a.row > b.row ? a.row - b.row : b.row - a.row) +
         (a.col > b.col ? a.col - b.col : b.col - a.col);
}

struct GameConfig {
  int board_size = 11;
  int num_agents = 4;
  int num_rigid = 36;
  int num_wood = 36;
  int num_powerups = 20;
  int bomb_life = 10;
  int flame_life = 2;
  int initial_ammo = 1;
  int initial_blast = 2;
  int max_steps = 800;
  int view_radius = 2;
  bool full_observability = true;
  uint64_t seed = 0;

  // Throws InvalidConfig.
  void Validate() const;
  bool operator==(const GameConfig&) const = default;
};

struct BombState {
  Position position;
  int owner = 0;
  int blast_strength = 2;
  int life = 10;
  // Set by a kick; the bomb slides one cell per tick until obstructed.
  std::optional<Action> moving_direction;
  bool operator==(const BombState&) const = default;
};

struct FlameState {
  Position position;
  int life = 0;
  bool operator==(const FlameState&) const = default;
};

struct AgentState {
  int id = 0;
  Position position;
  int ammo = 1;
  int blast_strength = 2;
  bool can_kick = false;
  bool alive = true;
  bool operator==(const AgentState&) const = default;
};

// Per-agent view. Grids are row-major, board_size * board_size long.
struct Observation {
  std::vector<int> board;
  std::array<int, 2> position{};  // (row, col)
  int ammo = 0;
  int blast_strength = 0;
  int can_kick = 0;
  int teammate = ItemCode(Item::kAgentDummy);
  std::array<int, 3> enemies{};
  std::vector<int> bomb_blast_strength;
  std::vector<int> bomb_life;
  std::array<int, 2> message{};
  int step = 0;

  int BoardSize() const;
  bool operator==(const Observation&) const = default;
};

struct StepResult {
  std::array<int, kNumAgents> rewards{};
  bool done = false;
  std::optional<int> winner;
};

struct GameState {
  GameConfig config;
  int step = 0;
  // Authoritative encoding, kept in sync with the lists below by
  // RebuildBoard().
  std::vector<Item> board;
  // Static layer under bombs, flames and agents: passage, rigid, wood or a
  // revealed power-up.
  std::vector<Item> terrain;
  // Cell index of a wood tile -> power-up it hides.
  std::map<int, Item> hidden_items;
  std::vector<BombState> bombs;
  std::vector<FlameState> flames;
  std::array<AgentState, kNumAgents> agents{};
  Rng rng;
  bool done = false;
  std::optional<int> winner;
  // What each agent saw at the end of the tick it died.
  std::array<std::optional<Observation>, kNumAgents> death_observations;

  int size() const { return config.board_size; }
  bool OnBoard(Position p) const {
    return p.row >= 0 && p.col >= 0 && p.row < size() && p.col < size();
  }
  int Index(Position p) const { return p.row * size() + p.col; }
  Position At(int index) const { return {index / size(), index % size()}; }
  int AliveCount() const;
  const BombState* BombAt(Position p) const;
  bool HasFlame(Position p) const;

  bool operator==(const GameState&) const = default;
};

// Corner start cells, one per seat, listed counter-clockwise from top-left.
std::array<Position, kNumAgents> StartPositions(int board_size);

// Symmetric random board: rigid walls and wood mirrored across both axes,
// agents in the corners, power-ups hidden under wood. Throws InvalidConfig.
GameState NewGame(const GameConfig& config);

// Board with no rigid walls, no wood and no hidden items; agents in the
// corners. Starting point for scripted scenarios.
GameState MakeEmptyGame(const GameConfig& config);

// Advances one tick. Throws EpisodeFinished after the terminal tick and
// ContractViolation for action values outside [0, 5].
StepResult Step(GameState& state, const std::array<Action, kNumAgents>& actions);

// Rewards as they stand: alive 0 / dead -1, or +1/-1 once decided.
std::array<int, kNumAgents> CurrentRewards(const GameState& state);

Observation Observe(const GameState& state, int agent_id);

std::vector<int> EncodeBoard(const GameState& state);

// Recomputes `board` from terrain, flames, bombs and living agents.
void RebuildBoard(GameState& state);

// Cells covered by a bomb's blast: the origin plus four arms of
// blast_strength - 1 cells. An arm ends before a rigid wall and on the first
// wood tile. `is_rigid`/`is_wood` are queried with in-bounds positions.
template <typename IsRigid, typename IsWood>
void ForEachBlastCell(int board_size, Position origin, int blast_strength,
                      IsRigid is_rigid, IsWood is_wood, auto&& visit) {
  visit(origin);
  static constexpr int kDr[4] = {-1, 1, 0, 0};
  static constexpr int kDc[4] = {0, 0, -1, 1};
  for (int d = 0; d < 4; ++d) {
    for (int dist = 1; dist < blast_strength; ++dist) {
      const Position p{origin.row + kDr[d] * dist, origin.col + kDc[d] * dist};
      if (p.row < 0 || p.col < 0 || p.row >= board_size ||
          p.col >= board_size) {
        break;
      }
      if (is_rigid(p)) break;
      visit(p);
      if (is_wood(p)) break;
    }
  }
}

}  // namespace pommer

#endif  // POMMER_ENGINE_H_
