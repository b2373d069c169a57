// Copyright 2026 The mfteams Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "mfteams/simd/kernels.h"

namespace mfteams::simd::avx2 {
namespace {

inline double HorizontalSum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

inline double HorizontalMax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, shuf));
}

}  // namespace

double Dot(std::span<const double> a, std::span<const double> b) {
  const size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4),
                           _mm256_loadu_pd(pb + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
  }
  double sum = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += pa[i] * pb[i];
  return sum;
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const size_t n = x.size();
  const double* px = x.data();
  double* py = y.data();
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(py + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(px + i), vy);
    _mm256_storeu_pd(py + i, vy);
  }
  for (; i < n; ++i) py[i] += alpha * px[i];
}

double MaxScaledAbsDiff(std::span<const double> values, double pivot,
                        std::span<const double> weights) {
  const size_t n = values.size();
  const double* pv = values.data();
  const double* pw = weights.data();
  const __m256d vp = _mm256_set1_pd(pivot);
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d best = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(pv + i), vp);
    d = _mm256_andnot_pd(sign, d);
    best = _mm256_max_pd(best, _mm256_mul_pd(d, _mm256_loadu_pd(pw + i)));
  }
  double out = HorizontalMax(best);
  for (; i < n; ++i) out = std::max(out, std::abs(pv[i] - pivot) * pw[i]);
  return out;
}

}  // namespace mfteams::simd::avx2
