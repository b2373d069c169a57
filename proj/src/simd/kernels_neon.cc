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

#if defined(__aarch64__)

#include <arm_neon.h>

#include <algorithm>
#include <cmath>

#include "mfteams/simd/kernels.h"

namespace mfteams::simd::neon {

double Dot(std::span<const double> a, std::span<const double> b) {
  const size_t n = a.size();
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a.data() + i), vld1q_f64(b.data() + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a.data() + i + 2),
                     vld1q_f64(b.data() + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const size_t n = x.size();
  const float64x2_t va = vdupq_n_f64(alpha);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y.data() + i,
              vfmaq_f64(vld1q_f64(y.data() + i), va, vld1q_f64(x.data() + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double MaxScaledAbsDiff(std::span<const double> values, double pivot,
                        std::span<const double> weights) {
  const size_t n = values.size();
  const float64x2_t vp = vdupq_n_f64(pivot);
  float64x2_t best = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vabsq_f64(vsubq_f64(vld1q_f64(values.data() + i), vp));
    best = vmaxq_f64(best, vmulq_f64(d, vld1q_f64(weights.data() + i)));
  }
  double out = vmaxvq_f64(best);
  for (; i < n; ++i) out = std::max(out, std::abs(values[i] - pivot) * weights[i]);
  return out;
}

}  // namespace mfteams::simd::neon

#endif  // __aarch64__
