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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>

#include "pommer/agents.h"
#include "pommer/cli.h"
#include "pommer/engine.h"
#include "pommer/errors.h"
#include "pommer/harness.h"
#include "pommer/learn.h"
#include "pommer/pathfind.h"

namespace py = pybind11;

namespace pommer {
namespace {

std::array<Action, kNumAgents> ToActions(const std::vector<int>& ints) {
  if (ints.size() != kNumAgents) throw InvalidConfig("expected 4 actions");
  std::array<Action, kNumAgents> out{};
  for (int i = 0; i < kNumAgents; ++i) {
    const auto a = ActionFromInt(ints[i]);
    if (!a) throw ContractViolation("action out of range: " + std::to_string(ints[i]));
    out[i] = *a;
  }
  return out;
}

PassabilityView ViewFromGrid(const std::vector<std::vector<bool>>& grid) {
  const int h = static_cast<int>(grid.size());
  const int w = h ? static_cast<int>(grid[0].size()) : 0;
  std::vector<uint8_t> cells;
  for (const auto& row : grid) {
    if (static_cast<int>(row.size()) != w) throw InvalidConfig("ragged grid");
    for (bool b : row) cells.push_back(b);
  }
  return PassabilityView(h, w, std::move(cells));
}

py::dict SearchDict(const SearchResult& r) {
  py::dict d;
  d["cost"] = r.reachable() ? py::object(py::int_(r.cost)) : py::object(py::none());
  py::list path;
  for (Position p : r.path) path.append(py::make_tuple(p.row, p.col));
  d["path"] = path;
  d["expanded"] = r.expanded;
  return d;
}

// One game state stepped from Python.
class Game {
 public:
  explicit Game(const GameConfig& config) : config_(config), state_(NewGame(config)) {}

  void Reset(std::optional<uint64_t> seed) {
    if (seed) config_.seed = *seed;
    state_ = NewGame(config_);
  }
  py::tuple StepPy(const std::vector<int>& actions) {
    const StepResult r = Step(state_, ToActions(actions));
    return py::make_tuple(std::vector<int>(r.rewards.begin(), r.rewards.end()), r.done,
                          r.winner ? py::object(py::int_(*r.winner)) : py::object(py::none()));
  }
  const GameState& state() const { return state_; }
  const GameConfig& config() const { return config_; }

 private:
  GameConfig config_;
  GameState state_;
};

py::array_t<float> FeaturizePy(const Observation& obs, int bomb_life) {
  const int n = static_cast<int>(std::lround(std::sqrt(obs.board.size())));
  py::array_t<float> out({kFeaturePlanes, n, n});
  FeaturizeInto(obs, bomb_life,
                std::span<float>(out.mutable_data(), static_cast<size_t>(out.size())));
  return out;
}

}  // namespace
}  // namespace pommer

PYBIND11_MODULE(_core, m) {
  using namespace pommer;
  m.doc() = "Pommerman free-for-all engine, agents and learners.";

  py::register_exception<InvalidConfig>(m, "InvalidConfig", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);
  py::register_exception<EpisodeFinished>(m, "EpisodeFinished", PyExc_RuntimeError);
  py::register_exception<InvalidSource>(m, "InvalidSource", PyExc_ValueError);
  py::register_exception<FileError>(m, "FileError", PyExc_OSError);

  py::enum_<Action>(m, "Action")
      .value("STOP", Action::kStop)
      .value("UP", Action::kUp)
      .value("LEFT", Action::kLeft)
      .value("DOWN", Action::kDown)
      .value("RIGHT", Action::kRight)
      .value("BOMB", Action::kBomb);

  py::class_<GameConfig>(m, "GameConfig")
      .def(py::init<>())
      .def_readwrite("board_size", &GameConfig::board_size)
      .def_readwrite("num_rigid", &GameConfig::num_rigid)
      .def_readwrite("num_wood", &GameConfig::num_wood)
      .def_readwrite("num_powerups", &GameConfig::num_powerups)
      .def_readwrite("bomb_life", &GameConfig::bomb_life)
      .def_readwrite("flame_life", &GameConfig::flame_life)
      .def_readwrite("initial_ammo", &GameConfig::initial_ammo)
      .def_readwrite("initial_blast", &GameConfig::initial_blast)
      .def_readwrite("max_steps", &GameConfig::max_steps)
      .def_readwrite("view_radius", &GameConfig::view_radius)
      .def_readwrite("full_observability", &GameConfig::full_observability)
      .def_readwrite("seed", &GameConfig::seed)
      .def("validate", &GameConfig::Validate);

  py::class_<Observation>(m, "Observation")
      .def_property_readonly("board", [](const Observation& o) { return o.board; })
      .def_property_readonly("position",
                             [](const Observation& o) {
                               return py::make_tuple(o.position[0], o.position[1]);
                             })
      .def_readonly("ammo", &Observation::ammo)
      .def_readonly("blast_strength", &Observation::blast_strength)
      .def_readonly("can_kick", &Observation::can_kick)
      .def_readonly("enemies", &Observation::enemies)
      .def_readonly("bomb_life", &Observation::bomb_life)
      .def_readonly("bomb_blast_strength", &Observation::bomb_blast_strength)
      .def_readonly("step", &Observation::step);

  py::class_<Game>(m, "Game")
      .def(py::init<const GameConfig&>(), py::arg("config") = GameConfig{})
      .def("reset", &Game::Reset, py::arg("seed") = py::none())
      .def("step", &Game::StepPy, py::arg("actions"),
           "Advances one tick. Returns (rewards, done, winner).")
      .def("observe", [](const Game& g, int i) { return Observe(g.state(), i); })
      .def("render", [](const Game& g) { return RenderAscii(g.state()); })
      .def("state_hash", [](const Game& g) { return StateHash(g.state()); })
      .def_property_readonly("done", [](const Game& g) { return g.state().done; })
      .def_property_readonly("step_count", [](const Game& g) { return g.state().step; })
      .def_property_readonly("alive", [](const Game& g) {
        std::vector<bool> alive;
        for (const auto& a : g.state().agents) alive.push_back(a.alive);
        return alive;
      });

  py::class_<Agent, std::shared_ptr<Agent>>(m, "Agent")
      .def("act", [](Agent& a, const Observation& o) { return a.Act(o); })
      .def("reset", &Agent::Reset)
      .def_property_readonly("name", &Agent::Name);
  m.def(
      "make_agent",
      [](const std::string& spec, const GameConfig& config) {
        return std::shared_ptr<Agent>(MakeAgent(spec, config));
      },
      py::arg("spec"), py::arg("config") = GameConfig{},
      "simple | random | static | model:<checkpoint>");

  m.def("astar", [](const std::vector<std::vector<bool>>& grid, std::pair<int, int> s,
                    std::pair<int, int> t) {
    return SearchDict(AStar(ViewFromGrid(grid), {s.first, s.second}, {t.first, t.second}));
  });
  m.def("dijkstra", [](const std::vector<std::vector<bool>>& grid, std::pair<int, int> s,
                       std::pair<int, int> t) {
    return SearchDict(
        Dijkstra(ViewFromGrid(grid), {s.first, s.second}, Position{t.first, t.second}));
  });

  m.def("featurize", &FeaturizePy, py::arg("obs"), py::arg("bomb_life") = 10,
        "Feature planes of shape (17, n, n).");

  m.def(
      "run_match",
      [](const std::vector<std::string>& specs, int episodes, uint64_t seed, int jobs,
         const GameConfig& config) {
        if (specs.size() != kNumAgents) throw InvalidConfig("expected 4 agent specs");
        std::array<std::unique_ptr<Agent>, kNumAgents> owned;
        std::array<const Agent*, kNumAgents> seats{};
        for (int i = 0; i < kNumAgents; ++i) {
          owned[i] = MakeAgent(specs[i], config);
          seats[i] = owned[i].get();
        }
        const auto seeds = MatchSeeds(seed, episodes);
        MatchResult result;
        {
          py::gil_scoped_release release;
          result = RunMatch(config, seats, seeds, jobs);
        }
        return result.stats.ToJson(false);
      },
      py::arg("agents"), py::arg("episodes"), py::arg("seed") = 0, py::arg("jobs") = 1,
      py::arg("config") = GameConfig{}, "Returns match statistics as a JSON string.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        std::vector<std::string> argv = {"pommer"};
        argv.insert(argv.end(), args.begin(), args.end());
        int code;
        {
          py::gil_scoped_release release;
          code = RunCli(argv, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool. Returns (exit_code, stdout, stderr).");

  m.def("verify_replay", [](const std::string& path) {
    const ReplayCheck check = VerifyReplay(ReadReplay(path));
    return py::make_tuple(check.ok, check.mismatch);
  });
}
