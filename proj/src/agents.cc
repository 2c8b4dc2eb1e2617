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

#include "pommer/agents.h"

#include <algorithm>

namespace pommer {
namespace {

constexpr Action kMoves[4] = {Action::kUp, Action::kLeft, Action::kDown,
                              Action::kRight};
constexpr Action kStepActions[5] = {Action::kStop, Action::kUp, Action::kLeft,
                                    Action::kDown, Action::kRight};

Position Self(const Observation& obs) {
  return {obs.position[0], obs.position[1]};
}

int CellCode(const Observation& obs, Position p) {
  return obs.board[p.row * obs.BoardSize() + p.col];
}

bool OnBoard(int n, Position p) {
  return p.row >= 0 && p.col >= 0 && p.row < n && p.col < n;
}

bool IsEnemyCode(const Observation& obs, int code) {
  return std::find(obs.enemies.begin(), obs.enemies.end(), code) !=
         obs.enemies.end();
}

template <typename T>
T Pick(Rng& rng, const std::vector<T>& options) {
  return options[rng.UniformInt(0, static_cast<int>(options.size()) - 1)];
}

}  // namespace

Action RandomAgent::Act(const Observation&) {
  return static_cast<Action>(rng_.UniformInt(0, kNumActions - 1));
}

std::unique_ptr<Agent> RandomAgent::Clone() const {
  return std::make_unique<RandomAgent>();
}

std::unique_ptr<Agent> StaticAgent::Clone() const {
  return std::make_unique<StaticAgent>();
}

std::vector<VisibleBomb> VisibleBombs(const Observation& obs) {
  std::vector<VisibleBomb> bombs;
  const int n = obs.BoardSize();
  for (int i = 0; i < n * n; ++i) {
    if (obs.bomb_life[i] > 0) {
      bombs.push_back({{i / n, i % n}, obs.bomb_life[i],
                       obs.bomb_blast_strength[i]});
    }
  }
  return bombs;
}

ThreatMap::ThreatMap(const Observation& obs, const AgentRules& rules,
                     std::span<const VisibleBomb> extra_bombs)
    : size_(obs.BoardSize()) {
  const int n = size_;
  std::vector<VisibleBomb> bombs = VisibleBombs(obs);
  bombs.insert(bombs.end(), extra_bombs.begin(), extra_bombs.end());
  const int num = static_cast<int>(bombs.size());

  std::vector<int> bomb_at(n * n, -1);
  for (int i = 0; i < num; ++i) {
    bomb_at[bombs[i].position.row * n + bombs[i].position.col] = i;
  }

  // Detonation ticks and wood burn ticks depend on each other: a burnt wood
  // tile lets later blasts travel further, which can pull chains earlier.
  // Both only ever decrease, so iterate to the fixed point.
  detonation_.resize(num);
  for (int i = 0; i < num; ++i) detonation_[i] = bombs[i].life;
  std::vector<int> wood_burn(n * n, kNever);
  std::vector<std::vector<int>> cross(num);
  auto is_rigid = [&](Position p) {
    return obs.board[p.row * n + p.col] == ItemCode(Item::kRigid);
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (int i = 0; i < num; ++i) {
      cross[i].clear();
      const int t = detonation_[i];
      auto is_wood = [&](Position p) {
        const int idx = p.row * n + p.col;
        return obs.board[idx] == ItemCode(Item::kWood) && wood_burn[idx] >= t;
      };
      ForEachBlastCell(n, bombs[i].position, bombs[i].blast_strength, is_rigid,
                       is_wood,
                       [&](Position p) { cross[i].push_back(p.row * n + p.col); });
    }
    for (bool chained = true; chained;) {
      chained = false;
      for (int i = 0; i < num; ++i) {
        for (int idx : cross[i]) {
          const int j = bomb_at[idx];
          if (j >= 0 && detonation_[j] > detonation_[i]) {
            detonation_[j] = detonation_[i];
            chained = changed = true;
          }
        }
      }
    }
    for (int i = 0; i < num; ++i) {
      for (int idx : cross[i]) {
        if (obs.board[idx] == ItemCode(Item::kWood) &&
            wood_burn[idx] > detonation_[i]) {
          wood_burn[idx] = detonation_[i];
          changed = true;
        }
      }
    }
  }

  arrival_.assign(n * n, kNever);
  clear_.assign(n * n, -1);
  auto mark = [&](int idx, int from, int to) {
    arrival_[idx] = std::min(arrival_[idx], from);
    clear_[idx] = std::max(clear_[idx], to);
    horizon_ = std::max(horizon_, to);
  };
  const int lingering = std::max(1, rules.flame_life - 1);
  for (int idx = 0; idx < n * n; ++idx) {
    if (obs.board[idx] == ItemCode(Item::kFlames)) mark(idx, 1, lingering);
  }
  for (int i = 0; i < num; ++i) {
    for (int idx : cross[i]) {
      mark(idx, detonation_[i], detonation_[i] + rules.flame_life - 1);
    }
  }
}

PassabilityView WalkableView(const Observation& obs,
                             std::span<const VisibleBomb> extra_bombs) {
  const int n = obs.BoardSize();
  std::vector<uint8_t> passable(n * n, 0);
  for (int i = 0; i < n * n; ++i) {
    const int code = obs.board[i];
    const bool open = code == ItemCode(Item::kPassage) ||
                      code == ItemCode(Item::kFlames) || IsPowerUpCode(code);
    passable[i] = open && obs.bomb_life[i] == 0 ? 1 : 0;
  }
  const int self = obs.position[0] * n + obs.position[1];
  if (obs.bomb_life[self] == 0) passable[self] = 1;
  for (const VisibleBomb& b : extra_bombs) {
    passable[b.position.row * n + b.position.col] = 0;
  }
  return PassabilityView(n, n, std::move(passable));
}

std::optional<EscapePlan> PlanEscape(const ThreatMap& threat,
                                     const PassabilityView& walkable,
                                     Position start, int start_tick) {
  if (threat.SafeFrom(start, start_tick)) {
    return EscapePlan{1u << static_cast<int>(Action::kStop), start_tick};
  }
  const int cells = walkable.cells();
  // Per layer: bit set of first actions that can occupy each cell; 0 = none.
  std::vector<uint8_t> layer(cells, 0), next(cells, 0);
  bool first = true;
  layer[walkable.Index(start)] = 1;
  for (int tick = start_tick + 1; tick <= threat.Horizon() + 1; ++tick) {
    std::fill(next.begin(), next.end(), 0);
    bool any = false;
    for (int idx = 0; idx < cells; ++idx) {
      if (!layer[idx]) continue;
      const Position p = walkable.At(idx);
      for (Action a : kStepActions) {
        const Position q = Moved(p, a);
        if (a != Action::kStop && !walkable.Passable(q)) continue;
        if (threat.Dangerous(q, tick)) continue;
        const uint8_t bits =
            first ? static_cast<uint8_t>(1u << static_cast<int>(a)) : layer[idx];
        next[walkable.Index(q)] |= bits;
        any = true;
      }
    }
    if (!any) return std::nullopt;
    first = false;
    EscapePlan plan{0, tick};
    for (int idx = 0; idx < cells; ++idx) {
      if (next[idx] && threat.SafeFrom(walkable.At(idx), tick)) {
        plan.first_actions |= next[idx];
      }
    }
    if (plan.first_actions) return plan;
    layer.swap(next);
  }
  return std::nullopt;
}

void SimpleAgent::Reset(uint64_t seed) {
  rng_ = Rng(seed);
  recent_.clear();
}

std::unique_ptr<Agent> SimpleAgent::Clone() const {
  return std::make_unique<SimpleAgent>(rules_);
}

bool SimpleAgent::CanBombSafely(const Observation& obs) const {
  const Position me = Self(obs);
  const int n = obs.BoardSize();
  if (obs.ammo <= 0 || obs.bomb_life[me.row * n + me.col] > 0) return false;
  // Planted this tick, it detonates bomb_life ticks after the next one.
  const VisibleBomb planted{me, rules_.bomb_life + 1, obs.blast_strength};
  const ThreatMap threat(obs, rules_, std::span(&planted, 1));
  const PassabilityView walkable = WalkableView(obs, std::span(&planted, 1));
  if (threat.Dangerous(me, 1)) return false;
  return PlanEscape(threat, walkable, me, 1).has_value();
}

bool SimpleAgent::IsSafeAction(const Observation& obs, const ThreatMap& threat,
                               const PassabilityView& walkable,
                               Action action) const {
  const Position target = Moved(Self(obs), action);
  if (IsMove(action) && !walkable.Passable(target)) return false;
  if (threat.Dangerous(target, 1)) return false;
  return PlanEscape(threat, walkable, target, 1).has_value();
}

Action SimpleAgent::Act(const Observation& obs) {
  const int n = obs.BoardSize();
  const Position me = Self(obs);
  recent_.push_back(me);
  while (static_cast<int>(recent_.size()) > kRecentMemory) recent_.pop_front();

  const ThreatMap threat(obs, rules_);
  const PassabilityView walkable = WalkableView(obs);

  // 1. Evade.
  if (threat.Threatened(me) && threat.Arrival(me) <= rules_.bomb_life) {
    std::vector<Action> options;
    if (auto plan = PlanEscape(threat, walkable, me, 0)) {
      for (Action a : kStepActions) {
        if (plan->Allows(a)) options.push_back(a);
      }
    } else {
      for (Action a : kStepActions) {
        const Position q = Moved(me, a);
        if (a != Action::kStop && !walkable.Passable(q)) continue;
        if (!threat.Dangerous(q, 1)) options.push_back(a);
      }
    }
    return options.empty() ? Action::kStop : Pick(rng_, options);
  }

  auto is_rigid = [&](Position p) {
    return CellCode(obs, p) == ItemCode(Item::kRigid);
  };
  auto is_wood = [&](Position p) {
    return CellCode(obs, p) == ItemCode(Item::kWood);
  };

  // 2. Enemy inside the would-be blast.
  if (obs.ammo > 0) {
    bool enemy_in_range = false;
    ForEachBlastCell(n, me, obs.blast_strength, is_rigid, is_wood,
                     [&](Position p) {
                       if (IsEnemyCode(obs, CellCode(obs, p))) enemy_in_range = true;
                     });
    if (enemy_in_range && CanBombSafely(obs)) return Action::kBomb;
  }

  // 3. Nearest power-up within range.
  {
    PassabilityView roam = walkable;
    roam.SetPassable(me, true);
    const SearchResult search = Dijkstra(roam, me);
    int best = kPowerUpRange + 1;
    std::vector<Position> targets;
    for (int idx = 0; idx < n * n; ++idx) {
      const int d = search.distances[idx];
      if (d <= 0 || d > kPowerUpRange || !IsPowerUpCode(obs.board[idx])) continue;
      if (d < best) {
        best = d;
        targets.clear();
      }
      if (d == best) targets.push_back(roam.At(idx));
    }
    if (!targets.empty()) {
      const std::vector<Position> path =
          search.PathTo(roam, Pick(rng_, targets));
      for (Action a : kMoves) {
        if (Moved(me, a) == path[1]) {
          if (IsSafeAction(obs, threat, walkable, a)) return a;
          break;
        }
      }
    }
  }

  // 4. Adjacent wood.
  if (obs.ammo > 0) {
    bool wood_adjacent = false;
    for (Action a : kMoves) {
      const Position q = Moved(me, a);
      if (OnBoard(n, q) && is_wood(q)) wood_adjacent = true;
    }
    if (wood_adjacent && CanBombSafely(obs)) return Action::kBomb;
  }

  // 5. Random safe step.
  std::vector<Action> safe;
  for (Action a : kStepActions) {
    if (IsSafeAction(obs, threat, walkable, a)) safe.push_back(a);
  }
  std::vector<Action> fresh;
  for (Action a : safe) {
    const Position q = Moved(me, a);
    if (std::find(recent_.begin(), recent_.end(), q) == recent_.end()) {
      fresh.push_back(a);
    }
  }
  std::vector<Action>& options = fresh.empty() ? safe : fresh;
  if (options.size() > 1) std::erase(options, Action::kStop);
  return options.empty() ? Action::kStop : Pick(rng_, options);
}

}  // namespace pommer
