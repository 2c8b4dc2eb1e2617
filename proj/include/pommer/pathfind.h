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

// Shortest paths on the 4-connected grid with unit step costs.

#ifndef POMMER_PATHFIND_H_
#define POMMER_PATHFIND_H_

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "pommer/engine.h"

namespace pommer {

class PassabilityView {
 public:
  // Rigid, wood and bombs block; everything else is walkable.
  static constexpr uint32_t kDefaultBlocking =
      (1u << ItemCode(Item::kRigid)) | (1u << ItemCode(Item::kWood)) |
      (1u << ItemCode(Item::kBomb));

  PassabilityView() = default;
  PassabilityView(int height, int width, std::vector<uint8_t> passable);

  // `blocking_codes` is a bit set over cell codes 0..13.
  static PassabilityView FromBoard(std::span<const int> board, int size,
                                   uint32_t blocking_codes = kDefaultBlocking);
  static uint32_t CodeMask(std::initializer_list<Item> items);

  int height() const { return height_; }
  int width() const { return width_; }
  int cells() const { return height_ * width_; }
  bool OnBoard(Position p) const {
    return p.row >= 0 && p.col >= 0 && p.row < height_ && p.col < width_;
  }
  bool Passable(Position p) const {
    return OnBoard(p) && passable_[p.row * width_ + p.col] != 0;
  }
  void SetPassable(Position p, bool value) {
    passable_[p.row * width_ + p.col] = value ? 1 : 0;
  }
  int Index(Position p) const { return p.row * width_ + p.col; }
  Position At(int index) const { return {index / width_, index % width_}; }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<uint8_t> passable_;
};

struct SearchResult {
  static constexpr int kUnreachable = -1;

  // Cost to the requested target (kUnreachable if none).
  int cost = kUnreachable;
  // Source to target inclusive; empty when unreachable.
  std::vector<Position> path;
  // Nodes settled (popped and finalized) by the search.
  int expanded = 0;
  // Dijkstra only: distance and predecessor index per cell, row-major.
  std::vector<int> distances;
  std::vector<int> parents;

  bool reachable() const { return cost != kUnreachable; }
  int DistanceTo(const PassabilityView& view, Position p) const {
    return distances[view.Index(p)];
  }
  // Walks `parents` back from `target`. Empty when unreachable.
  std::vector<Position> PathTo(const PassabilityView& view, Position target) const;
};

// One-to-all Dijkstra; ties settle in row-major order. With `stop_at`, the
// search ends once that cell is settled and cost/path refer to it.
// Throws InvalidSource if the source is off-board or impassable.
SearchResult Dijkstra(const PassabilityView& view, Position source,
                      std::optional<Position> stop_at = std::nullopt);

// A* with the Manhattan heuristic; ties on f go to the lower h, then
// row-major. Unreachable targets yield cost kUnreachable and an empty path.
SearchResult AStar(const PassabilityView& view, Position source,
                   Position target);

}  // namespace pommer

#endif  // POMMER_PATHFIND_H_
