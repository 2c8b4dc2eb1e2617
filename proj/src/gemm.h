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

#ifndef POMMER_SRC_GEMM_H_
#define POMMER_SRC_GEMM_H_

namespace pommer::internal {

// C[m, n] += A[m, k] * B[k, n], all row-major and densely packed.
void GemmAccumulate(int m, int n, int k, const double* a, const double* b,
                    double* c);

// dst[cols, rows] = src[rows, cols]^T
void Transpose(int rows, int cols, const double* src, double* dst);

}  // namespace pommer::internal

#endif  // POMMER_SRC_GEMM_H_
