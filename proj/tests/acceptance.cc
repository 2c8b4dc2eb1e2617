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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. `acceptance 3 5` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pommer/agents.h"
#include "pommer/engine.h"
#include "pommer/errors.h"
#include "pommer/harness.h"
#include "pommer/learn.h"
#include "pommer/nn.h"
#include "pommer/pathfind.h"
#include "pommer/rng.h"
#include "test_util.h"
#include "toy_tasks.h"

namespace pommer {
namespace {

using Clock = std::chrono::steady_clock;
using A = Action;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects named sub-checks; the first few failures go into the detail.
class Checks {
 public:
  void Expect(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    ++failed_;
    if (failed_ <= 3) failures_ += (failures_.empty() ? "" : "; ") + what;
  }
  Outcome Done(const std::string& summary) const {
    Outcome o;
    o.pass = failed_ == 0;
    o.detail = summary + " (" + std::to_string(total_ - failed_) + "/" +
               std::to_string(total_) + " checks)";
    if (!o.pass) o.detail += " failed: " + failures_;
    return o;
  }

 private:
  int total_ = 0;
  int failed_ = 0;
  std::string failures_;
};

std::string Fmt(const char* format, double a = 0, double b = 0, double c = 0,
                double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// 1. Replays of SimpleAgent games re-simulate exactly.
Outcome ReplayFidelity() {
  const GameConfig config;
  const std::vector<uint64_t> seeds = MatchSeeds(20260101, 500);
  int mismatches = 0;
  long steps = 0;
  std::array<SimpleAgent, kNumAgents> simple;
  for (uint64_t seed : seeds) {
    const EpisodeRecord played =
        RunEpisode(config, seed, {&simple[0], &simple[1], &simple[2], &simple[3]});
    steps += played.length;
    const EpisodeRecord loaded = ReplayFromJson(ReplayToJson(played));
    const ReplayCheck check = VerifyReplay(loaded);
    const bool same = check.ok && loaded.winner == played.winner &&
                      loaded.rewards == played.rewards && loaded.length == played.length;
    mismatches += !same;
  }
  Outcome o;
  o.pass = mismatches == 0;
  o.detail = Fmt("500 episodes, %.0f steps, %.0f mismatches", steps, mismatches);
  return o;
}

constexpr std::array<Action, 4> kAllStop = {A::kStop, A::kStop, A::kStop, A::kStop};

std::array<Action, 4> Only(int agent, Action a) {
  auto actions = kAllStop;
  actions[agent] = a;
  return actions;
}

GameState Arena(int alive) {
  GameState s = MakeEmptyGame(GameConfig{});
  for (int i = alive; i < kNumAgents; ++i) s.agents[i].alive = alive == 1 && i == 2;
  RebuildBoard(s);
  return s;
}

std::set<Position> FlameCells(const GameState& s) {
  std::set<Position> out;
  for (const FlameState& f : s.flames) out.insert(f.position);
  return out;
}

// 2. Scripted mechanics scenarios.
Outcome Mechanics() {
  Checks c;
  {
    GameState s = Arena(1);
    Step(s, Only(0, A::kBomb));
    c.Expect(s.agents[0].ammo == 0, "plant spends one ammo");
    c.Expect(s.bombs.size() == 1 && s.bombs[0].life == 10, "bomb starts at life 10");
    Step(s, Only(0, A::kRight));
    Step(s, Only(0, A::kRight));
    Step(s, Only(0, A::kDown));
    for (int t = 4; t < 10; ++t) {
      Step(s, kAllStop);
      c.Expect(s.bombs.size() == 1, "bomb alive at tick " + std::to_string(t));
      c.Expect(s.agents[0].ammo == 0, "ammo held at tick " + std::to_string(t));
    }
    Step(s, kAllStop);
    c.Expect(s.bombs.empty(), "detonation at tick 10");
    c.Expect(s.agents[0].ammo == 1, "ammo refunded on detonation");
    c.Expect(FlameCells(s) == std::set<Position>{{1, 1}, {0, 1}, {2, 1}, {1, 0}, {1, 2}},
             "blast cross of strength 2");
  }
  {
    GameState s = Arena(1);
    s.agents[0].ammo = 2;
    Step(s, Only(0, A::kBomb));
    Step(s, Only(0, A::kRight));
    c.Expect(s.agents[0].ammo == 1, "second ammo remains");
    Step(s, Only(0, A::kBomb));
    c.Expect(s.agents[0].ammo == 0 && s.bombs.size() == 2, "two bombs two ammo");
  }
  {
    // Three bombs in a row: the first one's cross reaches the second, whose
    // cross reaches the third. All go off in the same tick.
    GameState s = Arena(1);
    s.agents[0].ammo = 3;
    s.agents[0].blast_strength = 3;
    s.agents[0].position = {5, 1};
    RebuildBoard(s);
    Step(s, Only(0, A::kBomb));   // (5,1)
    Step(s, Only(0, A::kRight));
    Step(s, Only(0, A::kRight));  // (5,3)
    Step(s, Only(0, A::kBomb));
    Step(s, Only(0, A::kRight));
    Step(s, Only(0, A::kRight));  // (5,5)
    Step(s, Only(0, A::kBomb));
    Step(s, Only(0, A::kDown));
    Step(s, Only(0, A::kDown));
    Step(s, Only(0, A::kRight));  // (7,6), clear of all crosses
    c.Expect(s.bombs.size() == 3, "three bombs live");
    Step(s, kAllStop);  // tick 10 of the first bomb
    c.Expect(s.bombs.empty(), "chain closes in one tick");
    c.Expect(s.agents[0].ammo == 3, "all ammo refunded by the chain");
    const auto flames = FlameCells(s);
    c.Expect(flames.count({5, 0}) && flames.count({5, 7}) && flames.count({3, 5}) &&
                 flames.count({7, 3}),
             "chain flames cover every cross");
    c.Expect(s.agents[0].alive, "planter survives outside the crosses");
  }
  {
    GameState s = Arena(1);
    s.terrain[s.Index({1, 2})] = Item::kExtraBomb;
    s.terrain[s.Index({1, 3})] = Item::kIncrRange;
    s.terrain[s.Index({1, 4})] = Item::kKick;
    RebuildBoard(s);
    Step(s, Only(0, A::kRight));
    c.Expect(s.agents[0].ammo == 2 && s.agents[0].blast_strength == 2,
             "extra bomb adds one ammo only");
    Step(s, Only(0, A::kRight));
    c.Expect(s.agents[0].blast_strength == 3 && s.agents[0].ammo == 2,
             "range adds one blast only");
    c.Expect(!s.agents[0].can_kick, "no kick before pickup");
    Step(s, Only(0, A::kRight));
    c.Expect(s.agents[0].can_kick, "kick enabled");
    // A bigger blast reaches one cell further.
    Step(s, Only(0, A::kBomb));
    Step(s, Only(0, A::kDown));
    Step(s, Only(0, A::kDown));
    Step(s, Only(0, A::kLeft));  // (3,3), off the cross
    for (int t = 4; t < 10; ++t) Step(s, kAllStop);
    Step(s, kAllStop);
    c.Expect(FlameCells(s).count({1, 6}) && !FlameCells(s).count({1, 7}),
             "blast 3 reaches two cells");
  }
  {
    // Fog count: every cell outside the clipped (2r+1)^2 window is fog.
    GameConfig cfg;
    cfg.full_observability = false;
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
      cfg.seed = rng.UniformInt(1u << 30);
      GameState s = NewGame(cfg);
      for (int t = rng.UniformInt(30); t > 0 && !s.done; --t) {
        std::array<Action, 4> a{};
        for (auto& x : a) x = static_cast<Action>(rng.UniformInt(kNumActions));
        Step(s, a);
      }
      for (int i = 0; i < kNumAgents; ++i) {
        if (!s.agents[i].alive) continue;
        const Observation obs = Observe(s, i);
        const Position p = s.agents[i].position;
        const int r = cfg.view_radius;
        const int rows = std::min(p.row + r, 10) - std::max(p.row - r, 0) + 1;
        const int cols = std::min(p.col + r, 10) - std::max(p.col - r, 0) + 1;
        const long fog = std::count(obs.board.begin(), obs.board.end(),
                                    ItemCode(Item::kFog));
        c.Expect(fog == 121 - rows * cols, "fog count at trial " + std::to_string(trial));
        for (int idx = 0; idx < 121; ++idx) {
          const bool hidden = obs.board[idx] == ItemCode(Item::kFog);
          if (hidden && (obs.bomb_life[idx] != 0 || obs.bomb_blast_strength[idx] != 0)) {
            c.Expect(false, "bomb data leaks through fog");
          }
        }
      }
    }
  }
  return c.Done("ammo, 10-tick fuse, chain, power-ups, fog");
}

// 3. A*, Dijkstra and a BFS oracle agree on random boards.
Outcome Pathfinding() {
  Rng rng(3003);
  int cost_mismatch = 0;
  int more_expanded = 0;
  int reachable = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const PassabilityView view = testing_util::RandomView(rng, 11, 0.3);
    const Position source = testing_util::RandomPassableCell(rng, view);
    const Position target = testing_util::RandomPassableCell(rng, view);
    const std::vector<int> bfs = testing_util::BfsDistances(view, source);
    const SearchResult a = AStar(view, source, target);
    const SearchResult d = Dijkstra(view, source, target);
    const int oracle = bfs[view.Index(target)];
    cost_mismatch += !(a.cost == oracle && d.cost == oracle);
    more_expanded += a.expanded > d.expanded;
    reachable += oracle >= 0;
  }
  Outcome o;
  o.pass = cost_mismatch == 0 && more_expanded == 0;
  o.detail = Fmt("1000 queries (%.0f reachable), %.0f cost mismatches, "
                 "A* expanded more in %.0f",
                 reachable, cost_mismatch, more_expanded);
  return o;
}

Network RandomSmallNetwork(Rng& rng, uint64_t seed, Shape* input) {
  std::vector<LayerSpec> specs;
  if (rng.Bernoulli(0.5)) {
    const int n = rng.UniformInt(4, 7);
    *input = {rng.UniformInt(1, 3), n, n};
    for (int l = rng.UniformInt(1, 2); l > 0; --l) {
      specs.push_back(LayerSpec::Conv2D(rng.UniformInt(1, 4), rng.UniformInt(1, 3),
                                      rng.UniformInt(1, 2), rng.UniformInt(0, 1)));
      specs.push_back(LayerSpec::ReLU());
    }
    specs.push_back(LayerSpec::Flatten());
  } else {
    *input = {rng.UniformInt(2, 12)};
  }
  specs.push_back(LayerSpec::Dense(rng.UniformInt(2, 10)));
  specs.push_back(LayerSpec::ReLU());
  specs.push_back(LayerSpec::Dense(rng.UniformInt(1, 6)));
  if (rng.Bernoulli(0.3)) specs.push_back(LayerSpec::Softmax());
  try {
    return Network(*input, specs, seed);
  } catch (const ShapeError&) {
    return RandomSmallNetwork(rng, seed, input);
  }
}

Tensor RandomTensor(Rng& rng, const Shape& shape) {
  Tensor t(shape);
  for (size_t i = 0; i < t.size(); ++i) t[i] = rng.Uniform(-1.0, 1.0);
  return t;
}

// 4. Backprop against central differences.
Outcome Gradients() {
  Rng rng(4004);
  double worst = 0.0;
  size_t checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Shape input;
    Network net = RandomSmallNetwork(rng, 100 + trial, &input);
    std::vector<double> params = net.FlatParameters();
    for (double& v : params) v += rng.Uniform(-0.5, 0.5);
    net.SetFlatParameters(params);
    Shape batched{2};
    batched.insert(batched.end(), input.begin(), input.end());
    Shape out{2};
    out.insert(out.end(), net.output_shape().begin(), net.output_shape().end());
    const Tensor x = RandomTensor(rng, batched);
    const Tensor w = RandomTensor(rng, out);
    const GradientCheckResult r = CheckGradients(net, x, w);
    worst = std::max(worst, r.max_relative_error);
    checked += r.checked;
  }
  Outcome o;
  o.pass = worst < 1e-4;
  o.detail = Fmt("50 networks, %.0f partials, max relative error %.2e",
                 static_cast<double>(checked), worst);
  return o;
}

// 5. DQN on the gridworld reaches the value-iteration policy.
Outcome GridworldDqn() {
  Outcome o;
  std::string per_seed;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const toy::GridworldRun run = toy::TrainGridworldDqn(seed, 20000);
    const bool ok = run.mismatched_states == 0 && run.train_steps <= 20000;
    o.pass = o.pass && ok;
    per_seed += Fmt(" %.0f:%.0f/%.0f", static_cast<double>(seed),
                    run.mismatched_states, static_cast<double>(run.train_steps));
  }
  o.detail = "seed:mismatched/steps" + per_seed;
  return o;
}

// 6. DQfD pretraining on the scripted navigation task.
Outcome DqfdPretraining() {
  TrainConfig cfg;
  cfg.pretrain_steps = 1500;
  cfg.gamma = 0.9;
  cfg.target_update_period = 250;
  cfg.seed = 6;
  QLearner learner(toy::NavigationNetwork(60), cfg);
  ReplayBuffer expert(5000, ReplayBuffer::Eviction::kNever);
  toy::NavigationDemos(5000, 61, &expert);
  const auto held_out = toy::NavigationDemos(1000, 62, nullptr);
  const double before = toy::NavigationAgreement(learner.online, held_out);
  DqfdPretrain(learner, expert);
  const double after = toy::NavigationAgreement(learner.online, held_out);

  int satisfied = 0;
  bool all_zero = true;
  for (const auto& d : held_out) {
    const std::vector<double> q = toy::NavigationQ(learner.online, d);
    bool ok = true;
    for (int a = 0; a < static_cast<int>(q.size()); ++a) {
      if (a != d.expert_action && q[a] + cfg.dqfd_margin > q[d.expert_action]) ok = false;
    }
    if (!ok) continue;
    ++satisfied;
    const MarginLossResult m = MarginLoss(q, d.expert_action, cfg.dqfd_margin);
    all_zero = all_zero && m.value == 0.0 &&
               std::all_of(m.grad.begin(), m.grad.end(), [](double g) { return g == 0.0; });
  }
  Outcome o;
  o.pass = after - before >= 0.30 && all_zero && satisfied > 0;
  o.detail = Fmt("agreement %.3f -> %.3f; margin loss exactly 0 on %.0f satisfied states",
                 before, after, satisfied) +
             (all_zero ? "" : " (nonzero found)");
  return o;
}

// 7. Behavior cloning from SimpleAgent games, then evaluation.
constexpr int kBcEpisodes = 300;
constexpr int kBcFilters = 16;
constexpr int kBcEpochs = 2;

Outcome BehaviorCloning() {
  const GameConfig game;
  DemoStore store(game.board_size);
  const DemoSummary summary = CollectDemonstrations(game, kBcEpisodes, 7007, store);
  std::vector<size_t> train, held_out;
  SplitByEpisode(store, 10, &train, &held_out);
  Network net = MakePolicyNetwork(game.board_size, 7, kBcFilters);
  Optimizer opt({OptimizerKind::kAdam, 1e-3});
  Rng rng(77);
  const BcReport report = TrainBehaviorCloning(net, opt, store, train, held_out,
                                               kBcEpochs, 32, game.bomb_life, false, rng);
  const bool accurate = report.held_out_accuracy >= report.majority_baseline + 0.20;

  const GreedyPolicyAgent bc(std::make_shared<const Network>(std::move(net)),
                             game.board_size, game.bomb_life, "bc");
  const SimpleAgent simple;
  const std::vector<uint64_t> seeds = MatchSeeds(7070, 500);
  const MatchStats stats = RunMatch(game, {&bc, &simple, &simple, &simple}, seeds).stats;
  const double share = stats.WinRate(0);

  Outcome o;
  o.pass = accurate && share >= 0.15 && share <= 0.35;
  o.detail = Fmt("%.0f records; held-out %.3f vs majority %.3f; ",
                 static_cast<double>(summary.records), report.held_out_accuracy,
                 report.majority_baseline) +
             Fmt("500 games: %.0f wins / %.0f decisive = %.3f",
                 static_cast<double>(stats.wins[0]), static_cast<double>(stats.decisive),
                 share);
  return o;
}

// 8. A briefly trained DQN loses to SimpleAgents.
Outcome BriefDqn() {
  const GameConfig game;
  TrainConfig cfg;
  cfg.seed = 8;
  cfg.learning_starts = 500;
  cfg.epsilon_decay_steps = 2000;
  QLearner learner(MakePolicyNetwork(game.board_size, 8, kDefaultConvFilters), cfg);
  ReplayBuffer self(cfg.replay_capacity);
  const SimpleAgent simple;
  const GameTrainingReport trained =
      TrainInGame(learner, game, simple, 3000, self, nullptr);
  const GreedyPolicyAgent dqn(std::make_shared<const Network>(learner.online),
                              game.board_size, game.bomb_life, "dqn");
  const MatchStats stats =
      RunMatch(game, {&dqn, &simple, &simple, &simple}, MatchSeeds(8080, 100)).stats;
  const double win_fraction = stats.wins[0] / 100.0;
  Outcome o;
  o.pass = win_fraction < 0.10;
  o.detail = Fmt("%.0f env steps, %.0f updates; 100 games: %.0f wins, ",
                 static_cast<double>(trained.env_steps),
                 static_cast<double>(trained.losses.size()),
                 static_cast<double>(stats.wins[0])) +
             Fmt("%.0f losses, %.0f draws", static_cast<double>(stats.losses[0]),
                 static_cast<double>(stats.draws[0]));
  return o;
}

// 9. Identical agents win equally often from every seat.
Outcome SeatSymmetry() {
  const SimpleAgent simple;
  const MatchStats stats =
      RunMatch(GameConfig{}, {&simple, &simple, &simple, &simple}, MatchSeeds(9009, 1000))
          .stats;
  Outcome o;
  std::string shares;
  for (int i = 0; i < kNumAgents; ++i) {
    o.pass = o.pass && testing_util::WithinThreeSigma(static_cast<double>(stats.wins[i]),
                                                      static_cast<double>(stats.decisive),
                                                      0.25);
    shares += Fmt(" %.3f", stats.WinRate(i));
  }
  o.detail = Fmt("%.0f decisive of 1000; seat shares", static_cast<double>(stats.decisive)) +
             shares;
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double time_limit;  // seconds; 0 means none
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace pommer

int main(int argc, char** argv) {
  using namespace pommer;
  const std::vector<Criterion> criteria = {
      {1, "replay fidelity", 60, ReplayFidelity},
      {2, "mechanics conservation", 0, Mechanics},
      {3, "pathfinding oracle", 10, Pathfinding},
      {4, "gradient check", 30, Gradients},
      {5, "gridworld DQN", 120, GridworldDqn},
      {6, "DQfD pretraining", 120, DqfdPretraining},
      {7, "behavior cloning", 1800, BehaviorCloning},
      {8, "brief DQN loses", 0, BriefDqn},
      {9, "seat symmetry", 0, SeatSymmetry},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = Seconds(start);
    if (c.time_limit > 0 && secs > c.time_limit) {
      o.pass = false;
      o.detail += Fmt(" [over the %.0f s limit]", c.time_limit);
    }
    failures += !o.pass;
    std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
