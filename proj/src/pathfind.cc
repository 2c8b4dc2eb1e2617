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

#include "pommer/pathfind.h"

#include <algorithm>
#include <functional>
#include <queue>
#include <string>
#include <tuple>

#include "pommer/errors.h"

namespace pommer {
namespace {

constexpr int kInf = SearchResult::kUnreachable;
constexpr int kDr[4] = {-1, 0, 0, 1};
constexpr int kDc[4] = {0, -1, 1, 0};

void CheckSource(const PassabilityView& view, Position source) {
  if (!view.Passable(source)) {
    throw InvalidSource("search source (" + std::to_string(source.row) + ", " +
                        std::to_string(source.col) +
                        ") is off-board or impassable");
  }
}

std::vector<Position> WalkParents(const PassabilityView& view,
                                  const std::vector<int>& parents, int from) {
  std::vector<Position> path;
  for (int idx = from; idx >= 0; idx = parents[idx]) path.push_back(view.At(idx));
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

PassabilityView::PassabilityView(int height, int width,
                                 std::vector<uint8_t> passable)
    : height_(height), width_(width), passable_(std::move(passable)) {
  if (static_cast<int>(passable_.size()) != height_ * width_) {
    throw std::invalid_argument("passability grid size does not match its dimensions");
  }
}

PassabilityView PassabilityView::FromBoard(std::span<const int> board, int size,
                                           uint32_t blocking_codes) {
  if (static_cast<int>(board.size()) != size * size) {
    throw std::invalid_argument("board size does not match dimensions");
  }
  std::vector<uint8_t> passable(board.size());
  for (size_t i = 0; i < board.size(); ++i) {
    const int code = board[i];
    passable[i] = (code >= 0 && code < 32 && ((blocking_codes >> code) & 1u)) ? 0 : 1;
  }
  return PassabilityView(size, size, std::move(passable));
}

uint32_t PassabilityView::CodeMask(std::initializer_list<Item> items) {
  uint32_t mask = 0;
  for (Item item : items) mask |= 1u << ItemCode(item);
  return mask;
}

std::vector<Position> SearchResult::PathTo(const PassabilityView& view,
                                           Position target) const {
  if (!view.OnBoard(target) || distances[view.Index(target)] == kInf) return {};
  return WalkParents(view, parents, view.Index(target));
}

SearchResult Dijkstra(const PassabilityView& view, Position source,
                      std::optional<Position> stop_at) {
  CheckSource(view, source);
  SearchResult result;
  result.distances.assign(view.cells(), kInf);
  result.parents.assign(view.cells(), -1);
  std::vector<char> settled(view.cells(), 0);

  // (distance, row-major index): equal distances settle in reading order.
  using Entry = std::pair<int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const int src = view.Index(source);
  result.distances[src] = 0;
  open.push({0, src});
  const int goal = stop_at && view.OnBoard(*stop_at) ? view.Index(*stop_at) : -1;

  while (!open.empty()) {
    const auto [dist, idx] = open.top();
    open.pop();
    if (settled[idx]) continue;
    settled[idx] = 1;
    ++result.expanded;
    if (idx == goal) break;
    const Position p = view.At(idx);
    for (int d = 0; d < 4; ++d) {
      const Position q{p.row + kDr[d], p.col + kDc[d]};
      if (!view.Passable(q)) continue;
      const int j = view.Index(q);
      if (settled[j]) continue;
      const int candidate = dist + 1;
      if (result.distances[j] == kInf || candidate < result.distances[j]) {
        result.distances[j] = candidate;
        result.parents[j] = idx;
        open.push({candidate, j});
      }
    }
  }
  if (goal >= 0 && settled[goal]) {
    result.cost = result.distances[goal];
    result.path = WalkParents(view, result.parents, goal);
  }
  return result;
}

SearchResult AStar(const PassabilityView& view, Position source,
                   Position target) {
  CheckSource(view, source);
  SearchResult result;
  if (!view.Passable(target)) return result;

  std::vector<int> g(view.cells(), kInf);
  std::vector<int> parent(view.cells(), -1);
  std::vector<char> closed(view.cells(), 0);
  // (f, h, index)
  using Entry = std::tuple<int, int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const int src = view.Index(source);
  const int goal = view.Index(target);
  g[src] = 0;
  const int h0 = ManhattanDistance(source, target);
  open.push({h0, h0, src});

  while (!open.empty()) {
    const auto [f, h, idx] = open.top();
    open.pop();
    if (closed[idx]) continue;
    closed[idx] = 1;
    ++result.expanded;
    if (idx == goal) {
      result.cost = g[goal];
      result.path = WalkParents(view, parent, goal);
      return result;
    }
    const Position p = view.At(idx);
    for (int d = 0; d < 4; ++d) {
      const Position q{p.row + kDr[d], p.col + kDc[d]};
      if (!view.Passable(q)) continue;
      const int j = view.Index(q);
      if (closed[j]) continue;
      const int candidate = g[idx] + 1;
      if (g[j] == kInf || candidate < g[j]) {
        g[j] = candidate;
        parent[j] = idx;
        const int hq = ManhattanDistance(q, target);
        open.push({candidate + hq, hq, j});
      }
    }
  }
  return result;
}

}  // namespace pommer
