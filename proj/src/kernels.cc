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

#include "stylerl/kernels.h"

#include <algorithm>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stylerl {
namespace kernels {
namespace {

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr long kParallelWork = 1L << 16;

inline bool Worthwhile(int m, int n, int k) {
  return m > 1 && static_cast<long>(m) * n * k >= kParallelWork;
}

inline void RowNN(int i, int n, int k, const double *a, const double *b,
                  double *c, bool accumulate) {
  double *ci = c + static_cast<size_t>(i) * n;
  if (!accumulate) std::fill(ci, ci + n, 0.0);
  const double *ai = a + static_cast<size_t>(i) * k;
  for (int p = 0; p < k; ++p) {
    const double s = ai[p];
    if (s == 0.0) continue;
    const double *bp = b + static_cast<size_t>(p) * n;
    for (int j = 0; j < n; ++j) ci[j] += s * bp[j];
  }
}

inline void RowNT(int i, int n, int k, const double *a, const double *b,
                  double *c, bool accumulate) {
  double *ci = c + static_cast<size_t>(i) * n;
  const double *ai = a + static_cast<size_t>(i) * k;
  for (int j = 0; j < n; ++j) {
    const double *bj = b + static_cast<size_t>(j) * k;
    double sum = 0.0;
    for (int p = 0; p < k; ++p) sum += ai[p] * bj[p];
    ci[j] = accumulate ? ci[j] + sum : sum;
  }
}

inline void RowTN(int i, int m, int n, int k, const double *a, const double *b,
                  double *c, bool accumulate) {
  double *ci = c + static_cast<size_t>(i) * n;
  if (!accumulate) std::fill(ci, ci + n, 0.0);
  for (int p = 0; p < k; ++p) {
    const double s = a[static_cast<size_t>(p) * m + i];
    if (s == 0.0) continue;
    const double *bp = b + static_cast<size_t>(p) * n;
    for (int j = 0; j < n; ++j) ci[j] += s * bp[j];
  }
}

}  // namespace

namespace serial {

void GemmNN(int m, int n, int k, const double *a, const double *b, double *c,
            bool accumulate) {
  for (int i = 0; i < m; ++i) RowNN(i, n, k, a, b, c, accumulate);
}

void GemmNT(int m, int n, int k, const double *a, const double *b, double *c,
            bool accumulate) {
  for (int i = 0; i < m; ++i) RowNT(i, n, k, a, b, c, accumulate);
}

void GemmTN(int m, int n, int k, const double *a, const double *b, double *c,
            bool accumulate) {
  for (int i = 0; i < m; ++i) RowTN(i, m, n, k, a, b, c, accumulate);
}

}  // namespace serial

void GemmNN(int m, int n, int k, const double *a, const double *b, double *c,
            bool accumulate) {
#pragma omp parallel for schedule(static) if (Worthwhile(m, n, k))
  for (int i = 0; i < m; ++i) RowNN(i, n, k, a, b, c, accumulate);
}

void GemmNT(int m, int n, int k, const double *a, const double *b, double *c,
            bool accumulate) {
#pragma omp parallel for schedule(static) if (Worthwhile(m, n, k))
  for (int i = 0; i < m; ++i) RowNT(i, n, k, a, b, c, accumulate);
}

void GemmTN(int m, int n, int k, const double *a, const double *b, double *c,
            bool accumulate) {
#pragma omp parallel for schedule(static) if (Worthwhile(m, n, k))
  for (int i = 0; i < m; ++i) RowTN(i, m, n, k, a, b, c, accumulate);
}

void ParallelFor(size_t n, const std::function<void(size_t)> &body) {
  const long count = static_cast<long>(n);
  // Exceptions cannot leave an OpenMP region; the first one is rethrown.
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 8) if (count > 1)
  for (long i = 0; i < count; ++i) {
    try {
      body(static_cast<size_t>(i));
    } catch (...) {
#pragma omp critical(stylerl_parallel_for_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

int MaxThreads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace kernels
}  // namespace stylerl
