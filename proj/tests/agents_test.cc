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

#include <gtest/gtest.h>

#include "test_util.h"

namespace pommer {
namespace {

using A = Action;

// Empty 11x11 arena; agent 0 moved to `me`, the others parked in corners.
GameState Arena(Position me) {
  GameState s = MakeEmptyGame(GameConfig{});
  s.agents[0].position = me;
  RebuildBoard(s);
  return s;
}

void Put(GameState& s, Position p, Item item) {
  s.terrain[s.Index(p)] = item;
  RebuildBoard(s);
}

void PutBomb(GameState& s, Position p, int life, int blast, int owner = 1) {
  s.bombs.push_back({p, owner, blast, life, std::nullopt});
  RebuildBoard(s);
}

Action SimpleAct(const GameState& s, uint64_t seed = 3) {
  SimpleAgent agent(AgentRules::From(s.config), seed);
  return agent.Act(Observe(s, 0));
}

TEST(RandomAgent, ActionsAreUniform) {
  RandomAgent agent(99);
  const Observation obs = Observe(Arena({5, 5}), 0);
  std::vector<long> counts(kNumActions, 0);
  constexpr int kDraws = 60000;
  for (int i = 0; i < kDraws; ++i) {
    const int a = static_cast<int>(agent.Act(obs));
    ASSERT_GE(a, 0);
    ASSERT_LT(a, kNumActions);
    ++counts[a];
  }
  for (long c : counts) {
    EXPECT_TRUE(testing_util::WithinThreeSigma(c, kDraws, 1.0 / kNumActions)) << c;
  }
  // 5 degrees of freedom, p = 0.001.
  EXPECT_LT(testing_util::ChiSquareUniform(counts), 20.515);
}

TEST(RandomAgent, SeedFixesTheSequence) {
  const Observation obs = Observe(Arena({5, 5}), 0);
  RandomAgent a(7), b(8);
  std::vector<Action> first, second, other;
  for (int i = 0; i < 100; ++i) first.push_back(a.Act(obs));
  a.Reset(7);
  for (int i = 0; i < 100; ++i) second.push_back(a.Act(obs));
  for (int i = 0; i < 100; ++i) other.push_back(b.Act(obs));
  EXPECT_EQ(first, second);
  EXPECT_NE(first, other);
}

TEST(StaticAgent, AlwaysStops) {
  StaticAgent agent;
  GameConfig cfg;
  cfg.seed = 5;
  GameState s = NewGame(cfg);
  for (int i = 0; i < 20; ++i) {
    for (int id = 0; id < kNumAgents; ++id) {
      EXPECT_EQ(agent.Act(Observe(s, id)), A::kStop);
    }
    Step(s, {A::kStop, A::kStop, A::kStop, A::kStop});
  }
}

TEST(ThreatMap, CrossCellsArriveNoLaterThanBombLife) {
  GameState s = Arena({5, 5});
  Put(s, {3, 7}, Item::kRigid);
  PutBomb(s, {3, 5}, 6, 3);
  const ThreatMap t(Observe(s, 0), AgentRules{});
  for (Position p : {Position{3, 5}, Position{1, 5}, Position{2, 5}, Position{4, 5},
                     Position{5, 5}, Position{3, 3}, Position{3, 4},
                     Position{3, 6}}) {
    EXPECT_EQ(t.Arrival(p), 6);
    EXPECT_EQ(t.Clear(p), 7);
  }
  EXPECT_FALSE(t.Threatened({3, 7}));
  EXPECT_FALSE(t.Threatened({6, 5}));
  EXPECT_TRUE(t.Dangerous({5, 5}, 6));
  EXPECT_FALSE(t.Dangerous({5, 5}, 5));
  EXPECT_TRUE(t.SafeFrom({5, 5}, 8));
  EXPECT_EQ(t.Horizon(), 7);
}

TEST(ThreatMap, ChainPullsDetonationForward) {
  GameState s = Arena({5, 5});
  PutBomb(s, {3, 3}, 2, 2);
  PutBomb(s, {3, 4}, 9, 3);
  const ThreatMap t(Observe(s, 0), AgentRules{});
  EXPECT_EQ(t.DetonationTicks(), (std::vector<int>{2, 2}));
  EXPECT_EQ(t.Arrival({3, 6}), 2);
}

TEST(ThreatMap, WoodBurntEarlierNoLongerStopsLaterBlasts) {
  GameState s = Arena({9, 5});
  Put(s, {3, 5}, Item::kWood);
  PutBomb(s, {2, 5}, 2, 2);
  PutBomb(s, {5, 5}, 5, 4);
  const ThreatMap t(Observe(s, 0), AgentRules{});
  EXPECT_EQ(t.Arrival({3, 5}), 2);
  EXPECT_EQ(t.Arrival({4, 5}), 5);
  // The first blast burns the wood, so the second reaches past it.
  EXPECT_EQ(t.Clear({3, 5}), 6);
  EXPECT_EQ(t.Clear({2, 5}), 6);
  EXPECT_EQ(t.Clear({1, 5}), 3);
  EXPECT_EQ(t.DetonationTicks(), (std::vector<int>{2, 5}));
}

TEST(ThreatMap, ExistingFlamesBurnOnlyNextTick) {
  GameState s = Arena({5, 5});
  PutBomb(s, {3, 3}, 1, 2);
  Step(s, {A::kStop, A::kStop, A::kStop, A::kStop});
  const ThreatMap t(Observe(s, 0), AgentRules{});
  EXPECT_TRUE(t.Dangerous({3, 3}, 1));
  EXPECT_TRUE(t.SafeFrom({3, 3}, 2));
}

TEST(PlanEscape, FindsTheOnlyDoor) {
  GameState s = Arena({5, 5});
  Put(s, {4, 5}, Item::kRigid);
  Put(s, {5, 6}, Item::kRigid);
  PutBomb(s, {5, 3}, 1, 3);
  const Observation obs = Observe(s, 0);
  const ThreatMap t(obs, AgentRules{});
  const auto plan = PlanEscape(t, WalkableView(obs), {5, 5});
  ASSERT_TRUE(plan.has_value());
  EXPECT_EQ(plan->first_actions, 1u << static_cast<int>(A::kDown));
  EXPECT_EQ(plan->arrival_tick, 1);
}

TEST(PlanEscape, PrefersTheEarliestSafeCell) {
  GameState s = Arena({5, 5});
  for (Position p : {Position{4, 4}, Position{4, 5}, Position{6, 4}, Position{6, 5},
                     Position{6, 6}, Position{4, 6}, Position{5, 7}}) {
    Put(s, p, Item::kRigid);
  }
  PutBomb(s, {5, 3}, 3, 3);
  const Observation obs = Observe(s, 0);
  const ThreatMap t(obs, AgentRules{});
  const auto plan = PlanEscape(t, WalkableView(obs), {5, 5});
  ASSERT_TRUE(plan.has_value());
  EXPECT_EQ(plan->arrival_tick, 1);
  EXPECT_EQ(plan->first_actions, 1u << static_cast<int>(A::kRight));
}

TEST(PlanEscape, WaitsOutABlastAndComesBack) {
  // Every reachable cell burns at some point; the agent has to dodge into
  // the side pocket and return once the first blast is over.
  GameState s = Arena({5, 5});
  for (Position p : {Position{4, 4}, Position{4, 5}, Position{6, 4}, Position{6, 5},
                     Position{6, 6}, Position{5, 7}, Position{4, 7}}) {
    Put(s, p, Item::kRigid);
  }
  PutBomb(s, {5, 3}, 3, 3);
  PutBomb(s, {3, 6}, 9, 3);
  const Observation obs = Observe(s, 0);
  const ThreatMap t(obs, AgentRules{});
  const auto plan = PlanEscape(t, WalkableView(obs), {5, 5});
  ASSERT_TRUE(plan.has_value());
  EXPECT_EQ(plan->arrival_tick, 5);
  EXPECT_TRUE(plan->Allows(A::kRight));
}

TEST(SimpleAgent, EvadesToTheSingleSafeNeighbor) {
  GameState s = Arena({5, 5});
  Put(s, {4, 5}, Item::kRigid);
  Put(s, {5, 6}, Item::kRigid);
  PutBomb(s, {5, 3}, 1, 3);
  const ThreatMap t(Observe(s, 0), AgentRules{});
  ASSERT_EQ(t.Arrival({5, 5}), 1);
  for (uint64_t seed = 0; seed < 20; ++seed) EXPECT_EQ(SimpleAct(s, seed), A::kDown);
}

TEST(SimpleAgent, BombsAdjacentWoodWithAnOpenCorridor) {
  GameState s = Arena({1, 1});
  Put(s, {1, 2}, Item::kWood);
  for (uint64_t seed = 0; seed < 20; ++seed) EXPECT_EQ(SimpleAct(s, seed), A::kBomb);
}

TEST(SimpleAgent, StopsWhenBoxedInByRigidWalls) {
  GameState s = Arena({5, 5});
  for (Action a : {A::kUp, A::kLeft, A::kDown, A::kRight}) {
    Put(s, Moved({5, 5}, a), Item::kRigid);
  }
  for (uint64_t seed = 0; seed < 20; ++seed) EXPECT_EQ(SimpleAct(s, seed), A::kStop);
}

TEST(SimpleAgent, DoesNotBombWithoutAnEscape) {
  GameState s = Arena({5, 5});
  Put(s, {4, 5}, Item::kRigid);
  Put(s, {5, 4}, Item::kRigid);
  Put(s, {6, 5}, Item::kRigid);
  Put(s, {5, 6}, Item::kWood);
  SimpleAgent agent;
  EXPECT_FALSE(agent.CanBombSafely(Observe(s, 0)));
  EXPECT_EQ(SimpleAct(s), A::kStop);
}

TEST(SimpleAgent, BombsAnEnemyInBlastRange) {
  GameState s = Arena({5, 5});
  s.agents[1].position = {5, 6};
  RebuildBoard(s);
  EXPECT_EQ(SimpleAct(s), A::kBomb);
}

TEST(SimpleAgent, WalksTowardANearbyPowerUp) {
  GameState s = Arena({1, 1});
  Put(s, {1, 4}, Item::kKick);
  for (uint64_t seed = 0; seed < 10; ++seed) EXPECT_EQ(SimpleAct(s, seed), A::kRight);
}

TEST(SimpleAgent, ResetRestoresTheSequence) {
  GameConfig cfg;
  cfg.seed = 12;
  const GameState s = NewGame(cfg);
  SimpleAgent agent;
  agent.Reset(4);
  std::vector<Action> first, second;
  GameState a = s, b = s;
  for (int i = 0; i < 30; ++i) {
    first.push_back(agent.Act(Observe(a, 0)));
    Step(a, {first.back(), A::kStop, A::kStop, A::kStop});
  }
  agent.Reset(4);
  for (int i = 0; i < 30; ++i) {
    second.push_back(agent.Act(Observe(b, 0)));
    Step(b, {second.back(), A::kStop, A::kStop, A::kStop});
  }
  EXPECT_EQ(first, second);
}

// Random cluttered boards with live bombs around the agent. Nobody else
// moves, so the threat map is exact: the agent must never step onto a cell
// that burns on arrival, and must survive whenever a plan existed up front.
TEST(SimpleAgent, NeverStepsIntoFlamesOnScriptedBoards) {
  Rng rng(31337);
  int survivable = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Position me{rng.UniformInt(2, 8), rng.UniformInt(2, 8)};
    GameState s = Arena(me);
    for (int i = 0; i < 25; ++i) {
      const Position p{rng.UniformInt(0, 10), rng.UniformInt(0, 10)};
      if (s.board[s.Index(p)] != Item::kPassage) continue;
      Put(s, p, rng.Bernoulli(0.5) ? Item::kRigid : Item::kWood);
    }
    for (int i = 0; i < 3; ++i) {
      const Position p{me.row + rng.UniformInt(-3, 3), me.col + rng.UniformInt(-3, 3)};
      if (!s.OnBoard(p) || p == me || s.board[s.Index(p)] != Item::kPassage) continue;
      PutBomb(s, p, rng.UniformInt(1, 10), rng.UniformInt(2, 4));
    }
    const AgentRules rules = AgentRules::From(s.config);
    const Observation obs0 = Observe(s, 0);
    const bool had_plan =
        PlanEscape(ThreatMap(obs0, rules), WalkableView(obs0), me).has_value();
    survivable += had_plan;

    SimpleAgent agent(rules, trial);
    for (int t = 0; t < 30 && !s.done && s.agents[0].alive; ++t) {
      const Observation obs = Observe(s, 0);
      const ThreatMap threat(obs, rules);
      const Action a = agent.Act(obs);
      const Position from{obs.position[0], obs.position[1]};
      const Position to = Moved(from, a);
      bool any_safe = false;
      for (Action c : {A::kStop, A::kUp, A::kLeft, A::kDown, A::kRight}) {
        const Position q = Moved(from, c);
        if (c != A::kStop && !WalkableView(obs).Passable(q)) continue;
        any_safe |= !threat.Dangerous(q, 1);
      }
      if (any_safe) {
        ASSERT_FALSE(threat.Dangerous(to, 1))
            << "trial " << trial << " tick " << t << " action " << ActionName(a);
      }
      Step(s, {a, A::kStop, A::kStop, A::kStop});
    }
    if (had_plan) EXPECT_TRUE(s.agents[0].alive) << "trial " << trial;
  }
  EXPECT_GT(survivable, 200);
}

TEST(SimpleAgent, OutlastsStaticOpponents) {
  int decisive = 0, won = 0;
  for (uint64_t seed = 0; seed < 200; ++seed) {
    GameConfig cfg;
    cfg.seed = seed;
    GameState s = NewGame(cfg);
    SimpleAgent agent(AgentRules::From(cfg), MixSeed(seed, 0));
    while (!s.done) {
      Step(s, {agent.Act(Observe(s, 0)), A::kStop, A::kStop, A::kStop});
    }
    if (s.winner) {
      ++decisive;
      won += *s.winner == 0;
    }
  }
  ASSERT_GT(decisive, 0);
  EXPECT_GE(won, 0.9 * decisive);
  EXPECT_GE(decisive, 150);
}

}  // namespace
}  // namespace pommer
