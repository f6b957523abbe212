// Copyright 2026 The StyleRL Authors.
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

#ifndef STYLERL_KERNELS_H_
#define STYLERL_KERNELS_H_

#include <cstddef>
#include <functional>

namespace stylerl {
namespace kernels {

// Dense matrix products on row-major buffers. All variants write
// c = op(a) * op(b), or add to c when `accumulate` is set.
//
// The functions at namespace level split the output rows across OpenMP
// threads once the product is large enough to amortize the fork. Every output
// element is reduced in the same order as in the serial reference below, so
// both paths produce bitwise-identical results.

// c[m,n] (+)= a[m,k] * b[k,n]
void GemmNN(int m, int n, int k, const double *a, const double *b, double *c,
            bool accumulate);
// c[m,n] (+)= a[m,k] * b[n,k]^T
void GemmNT(int m, int n, int k, const double *a, const double *b, double *c,
            bool accumulate);
// c[m,n] (+)= a[k,m]^T * b[k,n]
void GemmTN(int m, int n, int k, const double *a, const double *b, double *c,
            bool accumulate);

// Runs body(i) for i in [0, n). Iterations must touch disjoint state.
void ParallelFor(size_t n, const std::function<void(size_t)> &body);

// Number of threads the parallel kernels may use.
int MaxThreads();

// Reference implementations, single threaded.
namespace serial {

void GemmNN(int m, int n, int k, const double *a, const double *b, double *c,
            bool accumulate);
void GemmNT(int m, int n, int k, const double *a, const double *b, double *c,
            bool accumulate);
void GemmTN(int m, int n, int k, const double *a, const double *b, double *c,
            bool accumulate);

}  // namespace serial

}  // namespace kernels
}  // namespace stylerl

#endif  // STYLERL_KERNELS_H_
