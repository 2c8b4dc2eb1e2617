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

// The `pommer` command line: play, collect, train, eval, replay.

#ifndef POMMER_CLI_H_
#define POMMER_CLI_H_

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pommer/agents.h"
#include "pommer/engine.h"
#include "pommer/learn.h"

namespace pommer {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfigError = 2,
  kExitFileError = 3,
  kExitContractViolation = 4,
};

// Everything a config file can set.
struct Settings {
  GameConfig game;
  TrainConfig train;
  int conv_filters = kDefaultConvFilters;
  int dense_units = 128;
  int64_t env_steps = 20000;
  int demo_episodes = 5;
  int epochs = 2;
  int held_out_every = 10;
  bool augment = false;
  int64_t checkpoint_every = 5000;
  int log_every = 100;

  // Sets one key. Throws InvalidConfig on unknown keys or bad values.
  void Set(const std::string& key, const std::string& value);
  // key -> value for every known key, in a fixed order.
  std::vector<std::pair<std::string, std::string>> Items() const;
  std::string Echo() const;
  uint64_t Hash() const;
};

// Reads `key = value` lines; '#' starts a comment. Returns the keys set.
std::vector<std::string> LoadSettingsFile(const std::string& path, Settings* settings);

// simple | random | static | model:<path>
std::unique_ptr<Agent> MakeAgent(const std::string& spec, const GameConfig& game);

// Returns the process exit code. args[0] is the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pommer

#endif  // POMMER_CLI_H_
