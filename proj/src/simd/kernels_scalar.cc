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

#include <algorithm>
#include <cmath>

#include "mfteams/simd/kernels.h"

namespace mfteams::simd::scalar {

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double MaxScaledAbsDiff(std::span<const double> values, double pivot,
                        std::span<const double> weights) {
  double best = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    best = std::max(best, std::abs(values[i] - pivot) * weights[i]);
  }
  return best;
}

}  // namespace mfteams::simd::scalar
