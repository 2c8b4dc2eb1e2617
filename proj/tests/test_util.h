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

// Oracles and generators shared by the unit and acceptance suites. Nothing
// here calls into the code paths it is used to check.

#ifndef POMMER_TESTS_TEST_UTIL_H_
#define POMMER_TESTS_TEST_UTIL_H_

#include <cmath>
#include <deque>
#include <vector>

#include "pommer/pathfind.h"
#include "pommer/rng.h"

namespace pommer::testing_util {

// Plain breadth-first search; -1 marks unreachable cells.
inline std::vector<int> BfsDistances(const PassabilityView& view, Position source) {
  std::vector<int> dist(view.cells(), -1);
  std::deque<Position> queue{source};
  dist[view.Index(source)] = 0;
  while (!queue.empty()) {
    const Position p = queue.front();
    queue.pop_front();
    const Position nbrs[4] = {{p.row - 1, p.col}, {p.row + 1, p.col},
                              {p.row, p.col - 1}, {p.row, p.col + 1}};
    for (Position q : nbrs) {
      if (!view.Passable(q) || dist[view.Index(q)] >= 0) continue;
      dist[view.Index(q)] = dist[view.Index(p)] + 1;
      queue.push_back(q);
    }
  }
  return dist;
}

inline PassabilityView RandomView(Rng& rng, int n, double wall_density) {
  std::vector<uint8_t> passable(n * n);
  for (auto& cell : passable) cell = rng.Bernoulli(wall_density) ? 0 : 1;
  return PassabilityView(n, n, std::move(passable));
}

inline Position RandomPassableCell(Rng& rng, const PassabilityView& view) {
  for (;;) {
    const Position p{rng.UniformInt(0, view.height() - 1),
                     rng.UniformInt(0, view.width() - 1)};
    if (view.Passable(p)) return p;
  }
}

// Pearson chi-square statistic of observed counts against a uniform law.
inline double ChiSquareUniform(const std::vector<long>& counts) {
  double total = 0;
  for (long c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0;
  for (long c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

// |count - n p| <= 3 sqrt(n p (1 - p))
inline bool WithinThreeSigma(double count, double n, double p) {
  return std::abs(count - n * p) <= 3.0 * std::sqrt(n * p * (1.0 - p));
}

}  // namespace pommer::testing_util

#endif  // POMMER_TESTS_TEST_UTIL_H_
