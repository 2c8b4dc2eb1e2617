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

#ifndef POMMER_ERRORS_H_
#define POMMER_ERRORS_H_

#include <stdexcept>
#include <string>

namespace pommer {

// Configuration rejected before any work started (bad GameConfig, bad
// TrainConfig, unknown config keys, malformed agent specs).
class InvalidConfig : public std::invalid_argument {
 public:
  explicit InvalidConfig(const std::string& what) : std::invalid_argument(what) {}
};

// Step() called on a state whose episode already ended.
class EpisodeFinished : public std::logic_error {
 public:
  explicit EpisodeFinished(const std::string& what) : std::logic_error(what) {}
};

// Search started from an impassable or off-board cell.
class InvalidSource : public std::invalid_argument {
 public:
  explicit InvalidSource(const std::string& what) : std::invalid_argument(what) {}
};

// Network input/output does not fit the caller (featurizer, action count).
class IncompatibleModel : public std::invalid_argument {
 public:
  explicit IncompatibleModel(const std::string& what)
      : std::invalid_argument(what) {}
};

// Shape mismatch inside the nn core, or backward before forward.
class ShapeError : public std::logic_error {
 public:
  explicit ShapeError(const std::string& what) : std::logic_error(what) {}
};

// A party broke a runtime contract: an agent emitted an out-of-range action,
// a replay did not reproduce, a buffer was sampled while too small.
class ContractViolation : public std::runtime_error {
 public:
  explicit ContractViolation(const std::string& what)
      : std::runtime_error(what) {}
};

// Unreadable/unwritable path.
class FileError : public std::runtime_error {
 public:
  explicit FileError(const std::string& what) : std::runtime_error(what) {}
};

// File readable but its content is malformed or of the wrong version.
class CorruptFile : public FileError {
 public:
  explicit CorruptFile(const std::string& what) : FileError(what) {}
};

}  // namespace pommer

#endif  // POMMER_ERRORS_H_
