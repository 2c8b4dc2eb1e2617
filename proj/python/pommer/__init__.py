# Copyright 2026 The Pommer Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Pommerman free-for-all engine, agents and learners."""

import json as _json

from ._core import (
    Action,
    Agent,
    ContractViolation,
    EpisodeFinished,
    FileError,
    Game,
    GameConfig,
    InvalidConfig,
    InvalidSource,
    Observation,
    astar,
    dijkstra,
    featurize,
    make_agent,
    run_cli,
    verify_replay,
)
from ._core import run_match as _run_match

__version__ = "0.1.0"


def run_match(agents, episodes, seed=0, jobs=1, config=None):
    """Plays `episodes` games and returns the match statistics as a dict."""
    return _json.loads(_run_match(list(agents), episodes, seed, jobs, config or GameConfig()))


def play_episode(game, agents):
    """Steps `game` to the end with four agents. Returns (rewards, winner)."""
    rewards, winner = [0, 0, 0, 0], None
    while not game.done:
        alive = game.alive
        actions = [
            int(agents[i].act(game.observe(i))) if alive[i] else 0 for i in range(4)
        ]
        rewards, _, winner = game.step(actions)
    return rewards, winner
