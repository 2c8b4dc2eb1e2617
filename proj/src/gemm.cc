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

#include "gemm.h"

#include <algorithm>

namespace pommer::internal {
namespace {

constexpr int kBlockK = 128;
constexpr int kBlockN = 512;

// Four rows of C share each streamed row of B.
inline void Rows4(int n, int k, const double* a, int lda, const double* b,
                  int ldb, double* c, int ldc) {
  double* __restrict c0 = c;
  double* __restrict c1 = c + ldc;
  double* __restrict c2 = c + 2 * ldc;
  double* __restrict c3 = c + 3 * ldc;
  for (int p = 0; p < k; ++p) {
    const double a0 = a[p], a1 = a[lda + p], a2 = a[2 * lda + p],
                 a3 = a[3 * lda + p];
    const double* __restrict bp = b + static_cast<long>(p) * ldb;
    for (int j = 0; j < n; ++j) {
      const double bj = bp[j];
      c0[j] += a0 * bj;
      c1[j] += a1 * bj;
      c2[j] += a2 * bj;
      c3[j] += a3 * bj;
    }
  }
}

inline void Rows1(int n, int k, const double* a, const double* b, int ldb,
                  double* c) {
  double* __restrict c0 = c;
  for (int p = 0; p < k; ++p) {
    const double a0 = a[p];
    const double* __restrict bp = b + static_cast<long>(p) * ldb;
    for (int j = 0; j < n; ++j) c0[j] += a0 * bp[j];
  }
}

}  // namespace

void GemmAccumulate(int m, int n, int k, const double* a, const double* b,
                    double* c) {
  for (int j0 = 0; j0 < n; j0 += kBlockN) {
    const int nb = std::min(kBlockN, n - j0);
    for (int p0 = 0; p0 < k; p0 += kBlockK) {
      const int kb = std::min(kBlockK, k - p0);
      const double* bb = b + static_cast<long>(p0) * n + j0;
      int i = 0;
      for (; i + 4 <= m; i += 4) {
        Rows4(nb, kb, a + static_cast<long>(i) * k + p0, k, bb, n,
              c + static_cast<long>(i) * n + j0, n);
      }
      for (; i < m; ++i) {
        Rows1(nb, kb, a + static_cast<long>(i) * k + p0, bb, n,
              c + static_cast<long>(i) * n + j0);
      }
    }
  }
}

void Transpose(int rows, int cols, const double* src, double* dst) {
  constexpr int kTile = 32;
  for (int r0 = 0; r0 < rows; r0 += kTile) {
    for (int c0 = 0; c0 < cols; c0 += kTile) {
      const int r1 = std::min(rows, r0 + kTile);
      const int c1 = std::min(cols, c0 + kTile);
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
          dst[static_cast<long>(c) * rows + r] = src[static_cast<long>(r) * cols + c];
        }
      }
    }
  }
}

}  // namespace pommer::internal
