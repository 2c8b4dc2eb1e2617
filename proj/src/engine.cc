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

#include "pommer/engine.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pommer/errors.h"

namespace pommer {
namespace {

constexpr int kMaxGenerationAttempts = 1000;

// A set of cells mapped onto each other by the two mirror axes.
using Orbit = std::vector<int>;

std::vector<Orbit> MirrorOrbits(int n, const std::vector<char>& excluded) {
  std::vector<Orbit> orbits;
  std::vector<char> seen(n * n, 0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (seen[r * n + c]) continue;
      Orbit orbit;
      const int rows[2] = {r, n - 1 - r};
      const int cols[2] = {c, n - 1 - c};
      bool blocked = false;
      for (int rr : rows) {
        for (int cc : cols) {
          const int idx = rr * n + cc;
          if (seen[idx]) continue;
          seen[idx] = 1;
          orbit.push_back(idx);
          blocked = blocked || excluded[idx];
        }
      }
      if (!blocked) orbits.push_back(std::move(orbit));
    }
  }
  return orbits;
}

// Fills exactly `count` cells from `orbits` (consumed orbits are removed).
// Returns false if the remaining orbit sizes cannot sum to `count`.
bool PlaceOrbits(int count, std::vector<Orbit>& orbits, Rng& rng,
                 std::vector<Item>& terrain, Item item) {
  rng.Shuffle(std::span<Orbit>(orbits));
  int remaining = count;
  std::vector<Orbit> unused;
  for (Orbit& orbit : orbits) {
    if (remaining > 0 && static_cast<int>(orbit.size()) <= remaining) {
      for (int idx : orbit) terrain[idx] = item;
      remaining -= static_cast<int>(orbit.size());
    } else {
      unused.push_back(std::move(orbit));
    }
  }
  orbits = std::move(unused);
  return remaining == 0;
}

bool StartsConnected(int n, const std::vector<Item>& terrain,
                     const std::array<Position, kNumAgents>& starts) {
  std::vector<char> seen(n * n, 0);
  std::vector<int> stack{starts[0].row * n + starts[0].col};
  seen[stack.back()] = 1;
  while (!stack.empty()) {
    const int idx = stack.back();
    stack.pop_back();
    const int r = idx / n, c = idx % n;
    const int nbrs[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
    for (const auto& nb : nbrs) {
      if (nb[0] < 0 || nb[1] < 0 || nb[0] >= n || nb[1] >= n) continue;
      const int j = nb[0] * n + nb[1];
      if (seen[j] || terrain[j] == Item::kRigid) continue;
      seen[j] = 1;
      stack.push_back(j);
    }
  }
  return std::all_of(starts.begin(), starts.end(), [&](Position p) {
    return seen[p.row * n + p.col] != 0;
  });
}

void PlaceAgents(GameState& state) {
  const auto starts = StartPositions(state.size());
  for (int i = 0; i < kNumAgents; ++i) {
    AgentState& a = state.agents[i];
    a.id = i;
    a.position = starts[i];
    a.ammo = state.config.initial_ammo;
    a.blast_strength = state.config.initial_blast;
    a.can_kick = false;
    a.alive = true;
  }
}

Observation ObserveUnchecked(const GameState& state, int agent_id) {
  const int n = state.size();
  const AgentState& me = state.agents[agent_id];
  Observation obs;
  obs.board.resize(n * n);
  for (int i = 0; i < n * n; ++i) obs.board[i] = ItemCode(state.board[i]);
  obs.bomb_blast_strength.assign(n * n, 0);
  obs.bomb_life.assign(n * n, 0);
  for (const BombState& b : state.bombs) {
    const int idx = state.Index(b.position);
    obs.bomb_blast_strength[idx] = b.blast_strength;
    obs.bomb_life[idx] = b.life;
  }
  if (!state.config.full_observability) {
    const int radius = state.config.view_radius;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        if (std::abs(r - me.position.row) <= radius &&
            std::abs(c - me.position.col) <= radius) {
          continue;
        }
        const int idx = r * n + c;
        obs.board[idx] = ItemCode(Item::kFog);
        obs.bomb_blast_strength[idx] = 0;
        obs.bomb_life[idx] = 0;
      }
    }
  }
  obs.position = {me.position.row, me.position.col};
  obs.ammo = me.ammo;
  obs.blast_strength = me.blast_strength;
  obs.can_kick = me.can_kick ? 1 : 0;
  obs.teammate = ItemCode(Item::kAgentDummy);
  int k = 0;
  for (int j = 0; j < kNumAgents; ++j) {
    if (j != agent_id) obs.enemies[k++] = AgentCode(j);
  }
  obs.message = {0, 0};
  obs.step = state.step;
  return obs;
}

}  // namespace

std::optional<Action> ActionFromInt(int value) {
  if (value < 0 || value >= kNumActions) return std::nullopt;
  return static_cast<Action>(value);
}

const char* ActionName(Action action) {
  switch (action) {
    case Action::kStop: return "Stop";
    case Action::kUp: return "Up";
    case Action::kLeft: return "Left";
    case Action::kDown: return "Down";
    case Action::kRight: return "Right";
    case Action::kBomb: return "Bomb";
  }
  return "?";
}

Position Moved(Position p, Action a) {
  switch (a) {
    case Action::kUp: return {p.row - 1, p.col};
    case Action::kDown: return {p.row + 1, p.col};
    case Action::kLeft: return {p.row, p.col - 1};
    case Action::kRight: return {p.row, p.col + 1};
    default: return p;
  }
}

void GameConfig::Validate() const {
  auto fail = [](const std::string& msg) { throw InvalidConfig(msg); };
  if (board_size < 5 || board_size % 2 == 0) {
    fail("board_size must be odd and >= 5, got " + std::to_string(board_size));
  }
  if (num_agents != kNumAgents) fail("num_agents must be 4");
  if (bomb_life < 1) fail("bomb_life must be >= 1");
  if (flame_life < 1) fail("flame_life must be >= 1");
  if (num_rigid < 0 || num_wood < 0 || num_powerups < 0) {
    fail("tile counts must be non-negative");
  }
  if (num_powerups > num_wood) fail("num_powerups must not exceed num_wood");
  if (initial_ammo < 0) fail("initial_ammo must be >= 0");
  if (initial_blast < 2) fail("initial_blast must be >= 2");
  if (max_steps < 1) fail("max_steps must be >= 1");
  if (view_radius < 0) fail("view_radius must be >= 0");
  // Agent cells and their neighbors stay open.
  const int free_cells = board_size * board_size - 4 * 5;
  if (num_rigid + num_wood > free_cells) {
    fail("num_rigid + num_wood exceeds the " + std::to_string(free_cells) +
         " placeable cells");
  }
}

int Observation::BoardSize() const {
  return static_cast<int>(std::lround(std::sqrt(static_cast<double>(board.size()))));
}

int GameState::AliveCount() const {
  return static_cast<int>(std::count_if(agents.begin(), agents.end(),
                                        [](const AgentState& a) { return a.alive; }));
}

const BombState* GameState::BombAt(Position p) const {
  for (const BombState& b : bombs) {
    if (b.position == p) return &b;
  }
  return nullptr;
}

bool GameState::HasFlame(Position p) const {
  return std::any_of(flames.begin(), flames.end(),
                     [&](const FlameState& f) { return f.position == p; });
}

std::array<Position, kNumAgents> StartPositions(int board_size) {
  const int far = board_size - 2;
  return {Position{1, 1}, Position{far, 1}, Position{far, far},
          Position{1, far}};
}

void RebuildBoard(GameState& state) {
  state.board = state.terrain;
  for (const FlameState& f : state.flames) {
    state.board[state.Index(f.position)] = Item::kFlames;
  }
  for (const BombState& b : state.bombs) {
    state.board[state.Index(b.position)] = Item::kBomb;
  }
  for (const AgentState& a : state.agents) {
    if (a.alive) {
      state.board[state.Index(a.position)] = static_cast<Item>(AgentCode(a.id));
    }
  }
}

GameState MakeEmptyGame(const GameConfig& config) {
  config.Validate();
  GameState state;
  state.config = config;
  state.rng = Rng(config.seed);
  state.terrain.assign(config.board_size * config.board_size, Item::kPassage);
  PlaceAgents(state);
  RebuildBoard(state);
  return state;
}

GameState NewGame(const GameConfig& config) {
  config.Validate();
  const int n = config.board_size;
  const auto starts = StartPositions(n);
  std::vector<char> protected_cells(n * n, 0);
  for (Position p : starts) {
    protected_cells[p.row * n + p.col] = 1;
    for (Action a : {Action::kUp, Action::kLeft, Action::kDown, Action::kRight}) {
      const Position q = Moved(p, a);
      protected_cells[q.row * n + q.col] = 1;
    }
  }

  GameState state;
  state.config = config;
  state.rng = Rng(config.seed);
  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    state.terrain.assign(n * n, Item::kPassage);
    std::vector<Orbit> orbits = MirrorOrbits(n, protected_cells);
    if (!PlaceOrbits(config.num_rigid, orbits, state.rng, state.terrain,
                     Item::kRigid)) {
      continue;
    }
    if (!PlaceOrbits(config.num_wood, orbits, state.rng, state.terrain,
                     Item::kWood)) {
      continue;
    }
    if (!StartsConnected(n, state.terrain, starts)) continue;

    std::vector<int> wood;
    for (int i = 0; i < n * n; ++i) {
      if (state.terrain[i] == Item::kWood) wood.push_back(i);
    }
    // Partial Fisher-Yates: the first num_powerups entries are a uniform
    // sample without replacement.
    state.hidden_items.clear();
    for (int k = 0; k < config.num_powerups; ++k) {
      const int j = k + static_cast<int>(state.rng.UniformInt(
                            static_cast<uint64_t>(wood.size() - k)));
      std::swap(wood[k], wood[j]);
      const int kind = static_cast<int>(state.rng.UniformInt(uint64_t{3}));
      state.hidden_items[wood[k]] =
          static_cast<Item>(ItemCode(Item::kExtraBomb) + kind);
    }
    PlaceAgents(state);
    RebuildBoard(state);
    return state;
  }
  throw InvalidConfig("could not generate a connected board in " +
                      std::to_string(kMaxGenerationAttempts) + " attempts");
}

StepResult Step(GameState& state, const std::array<Action, kNumAgents>& actions) {
  if (state.done) {
    throw EpisodeFinished("step() called after the episode finished at step " +
                          std::to_string(state.step));
  }
  for (int i = 0; i < kNumAgents; ++i) {
    if (!ActionFromInt(static_cast<int>(actions[i]))) {
      throw ContractViolation("agent " + std::to_string(i) +
                              " issued out-of-range action " +
                              std::to_string(static_cast<int>(actions[i])));
    }
  }
  const GameConfig& cfg = state.config;
  const int n = cfg.board_size;
  auto& terrain = state.terrain;
  auto& agents = state.agents;

  // (1) Flames decay.
  for (FlameState& f : state.flames) --f.life;
  std::erase_if(state.flames, [](const FlameState& f) { return f.life <= 0; });

  // (2) Countdown and chained detonation. Blast crosses are computed against
  // the terrain as it stood at the start of the tick.
  for (BombState& b : state.bombs) --b.life;
  std::vector<int> bomb_at(n * n, -1);
  for (int i = 0; i < static_cast<int>(state.bombs.size()); ++i) {
    bomb_at[state.Index(state.bombs[i].position)] = i;
  }
  std::vector<char> exploding(state.bombs.size(), 0);
  std::vector<int> pending;
  for (int i = 0; i < static_cast<int>(state.bombs.size()); ++i) {
    if (state.bombs[i].life <= 0) {
      exploding[i] = 1;
      pending.push_back(i);
    }
  }
  std::vector<char> blast(n * n, 0);
  auto is_rigid = [&](Position p) { return terrain[p.row * n + p.col] == Item::kRigid; };
  auto is_wood = [&](Position p) { return terrain[p.row * n + p.col] == Item::kWood; };
  while (!pending.empty()) {
    const BombState& b = state.bombs[pending.back()];
    pending.pop_back();
    ForEachBlastCell(n, b.position, b.blast_strength, is_rigid, is_wood,
                     [&](Position p) {
                       const int idx = p.row * n + p.col;
                       blast[idx] = 1;
                       const int j = bomb_at[idx];
                       if (j >= 0 && !exploding[j]) {
                         exploding[j] = 1;
                         pending.push_back(j);
                       }
                     });
  }
  {
    std::vector<BombState> kept;
    kept.reserve(state.bombs.size());
    for (size_t i = 0; i < state.bombs.size(); ++i) {
      if (exploding[i]) {
        ++agents[state.bombs[i].owner].ammo;
      } else {
        kept.push_back(state.bombs[i]);
      }
    }
    state.bombs = std::move(kept);
  }

  // (3) Destruction: wood turns into its hidden item or a passage, exposed
  // power-ups burn, and every blast cell carries a fresh flame.
  for (int idx = 0; idx < n * n; ++idx) {
    if (!blast[idx]) continue;
    if (terrain[idx] == Item::kWood) {
      auto it = state.hidden_items.find(idx);
      if (it != state.hidden_items.end()) {
        terrain[idx] = it->second;
        state.hidden_items.erase(it);
      } else {
        terrain[idx] = Item::kPassage;
      }
    } else if (IsPowerUp(terrain[idx])) {
      terrain[idx] = Item::kPassage;
    }
    const Position p = state.At(idx);
    auto f = std::find_if(state.flames.begin(), state.flames.end(),
                          [&](const FlameState& fl) { return fl.position == p; });
    if (f != state.flames.end()) {
      f->life = cfg.flame_life;
    } else {
      state.flames.push_back({p, cfg.flame_life});
    }
  }
  std::vector<char> flame(n * n, 0);
  for (const FlameState& f : state.flames) flame[state.Index(f.position)] = 1;
  std::fill(bomb_at.begin(), bomb_at.end(), -1);
  for (int i = 0; i < static_cast<int>(state.bombs.size()); ++i) {
    bomb_at[state.Index(state.bombs[i].position)] = i;
  }

  // (4) Movement. Targets are judged against the start-of-tick occupancy;
  // a cell wanted by two agents is taken by neither.
  std::array<Position, kNumAgents> start{};
  std::vector<char> agent_at(n * n, 0);
  for (const AgentState& a : agents) {
    start[a.id] = a.position;
    if (a.alive) agent_at[state.Index(a.position)] = 1;
  }
  auto bomb_can_enter = [&](Position p) {
    if (!state.OnBoard(p)) return false;
    const int idx = state.Index(p);
    return terrain[idx] == Item::kPassage && bomb_at[idx] < 0 &&
           !agent_at[idx] && !flame[idx];
  };
  std::array<bool, kNumAgents> moves{};
  std::array<Position, kNumAgents> target{};
  std::array<int, kNumAgents> kicked{-1, -1, -1, -1};
  for (const AgentState& a : agents) {
    const Action act = actions[a.id];
    if (!a.alive || !IsMove(act)) continue;
    const Position t = Moved(a.position, act);
    if (!state.OnBoard(t)) continue;
    const int idx = state.Index(t);
    if (terrain[idx] == Item::kRigid || terrain[idx] == Item::kWood) continue;
    if (agent_at[idx]) continue;
    if (bomb_at[idx] >= 0) {
      if (!a.can_kick || !bomb_can_enter(Moved(t, act))) continue;
      kicked[a.id] = bomb_at[idx];
    }
    moves[a.id] = true;
    target[a.id] = t;
  }
  for (int i = 0; i < kNumAgents; ++i) {
    for (int j = i + 1; j < kNumAgents; ++j) {
      if (moves[i] && moves[j] && target[i] == target[j]) {
        moves[i] = moves[j] = false;
      }
    }
  }
  for (int i = 0; i < kNumAgents; ++i) {
    if (moves[i]) {
      agents[i].position = target[i];
    } else {
      kicked[i] = -1;
    }
  }

  // (5) Bomb placement.
  for (AgentState& a : agents) {
    if (!a.alive || actions[a.id] != Action::kBomb || a.ammo <= 0) continue;
    if (state.BombAt(a.position) != nullptr) continue;
    state.bombs.push_back({a.position, a.id, a.blast_strength, cfg.bomb_life,
                           std::nullopt});
    --a.ammo;
  }

  // (6) Kicks and sliding bombs. A sliding bomb stops in front of a wall,
  // wood, power-up, flame, agent or another bomb; a kick whose bomb cannot
  // move sends the kicker back to where it came from.
  for (int i = 0; i < kNumAgents; ++i) {
    if (kicked[i] >= 0) state.bombs[kicked[i]].moving_direction = actions[i];
  }
  {
    std::vector<char> blocked_by_agent(n * n, 0);
    for (const AgentState& a : agents) {
      if (!a.alive) continue;
      blocked_by_agent[state.Index(a.position)] = 1;
      if (kicked[a.id] >= 0) blocked_by_agent[state.Index(start[a.id])] = 1;
    }
    std::fill(bomb_at.begin(), bomb_at.end(), -1);
    for (int i = 0; i < static_cast<int>(state.bombs.size()); ++i) {
      bomb_at[state.Index(state.bombs[i].position)] = i;
    }
    const int nb = static_cast<int>(state.bombs.size());
    std::vector<char> ok(nb, 0);
    std::vector<Position> dest(nb);
    for (int i = 0; i < nb; ++i) {
      const BombState& b = state.bombs[i];
      if (!b.moving_direction) continue;
      dest[i] = Moved(b.position, *b.moving_direction);
      if (!state.OnBoard(dest[i])) continue;
      const int idx = state.Index(dest[i]);
      ok[i] = terrain[idx] == Item::kPassage && !flame[idx] &&
              !blocked_by_agent[idx];
    }
    for (bool changed = true; changed;) {
      changed = false;
      for (int i = 0; i < nb; ++i) {
        if (!ok[i]) continue;
        bool stop = false;
        for (int j = 0; j < nb && !stop; ++j) {
          if (j != i && ok[j] && dest[j] == dest[i]) stop = true;
        }
        const int occupant = bomb_at[state.Index(dest[i])];
        if (occupant >= 0 && occupant != i) {
          // Entering a cell is fine only if its bomb slides away, and not
          // straight into us.
          if (!ok[occupant] || dest[occupant] == state.bombs[i].position) {
            stop = true;
          }
        }
        if (stop) {
          ok[i] = 0;
          changed = true;
        }
      }
    }
    for (int i = 0; i < nb; ++i) {
      BombState& b = state.bombs[i];
      if (!b.moving_direction) continue;
      if (ok[i]) {
        b.position = dest[i];
        continue;
      }
      b.moving_direction.reset();
      for (int k = 0; k < kNumAgents; ++k) {
        if (kicked[k] == i) agents[k].position = start[k];
      }
    }
  }

  // (7) Power-up pickup.
  for (AgentState& a : agents) {
    if (!a.alive) continue;
    Item& cell = terrain[state.Index(a.position)];
    switch (cell) {
      case Item::kExtraBomb: ++a.ammo; break;
      case Item::kIncrRange: ++a.blast_strength; break;
      case Item::kKick: a.can_kick = true; break;
      default: continue;
    }
    cell = Item::kPassage;
  }

  // (8) Agents standing in flames die.
  std::vector<int> died;
  for (AgentState& a : agents) {
    if (a.alive && flame[state.Index(a.position)]) {
      a.alive = false;
      died.push_back(a.id);
    }
  }

  ++state.step;
  RebuildBoard(state);
  for (int id : died) state.death_observations[id] = ObserveUnchecked(state, id);

  // (9) Terminal check.
  StepResult result;
  const int alive = state.AliveCount();
  if (alive == 1) {
    state.done = true;
    for (const AgentState& a : agents) {
      if (a.alive) state.winner = a.id;
    }
  } else if (alive == 0 || state.step >= cfg.max_steps) {
    state.done = true;
  }
  result.done = state.done;
  result.winner = state.winner;
  result.rewards = CurrentRewards(state);
  return result;
}

std::array<int, kNumAgents> CurrentRewards(const GameState& state) {
  std::array<int, kNumAgents> rewards{};
  for (const AgentState& a : state.agents) {
    if (state.winner) {
      rewards[a.id] = (a.id == *state.winner) ? 1 : -1;
    } else {
      rewards[a.id] = a.alive ? 0 : -1;
    }
  }
  return rewards;
}

Observation Observe(const GameState& state, int agent_id) {
  if (agent_id < 0 || agent_id >= kNumAgents) {
    throw std::out_of_range("agent_id must be in [0, 3], got " +
                            std::to_string(agent_id));
  }
  if (!state.agents[agent_id].alive && state.death_observations[agent_id]) {
    return *state.death_observations[agent_id];
  }
  return ObserveUnchecked(state, agent_id);
}

std::vector<int> EncodeBoard(const GameState& state) {
  std::vector<int> out(state.board.size());
  std::transform(state.board.begin(), state.board.end(), out.begin(),
                 [](Item item) { return ItemCode(item); });
  return out;
}

}  // namespace pommer
