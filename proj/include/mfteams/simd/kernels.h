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

#ifndef MFTEAMS_SIMD_KERNELS_H_
#define MFTEAMS_SIMD_KERNELS_H_

// Dense double-precision inner loops used by the equilibrium solvers:
// tensor contraction (Axpy), expected costs (Dot) and pairwise Lipschitz
// scans (MaxScaledAbsDiff). Each kernel has a scalar reference and
// vectorized variants; the variant is picked once at runtime from CPU
// features and can be overridden with MFTEAMS_SIMD=scalar.

#include <span>

namespace mfteams::simd {

enum class Isa { kScalar, kAvx2, kNeon };

const char* IsaName(Isa isa);

// Best variant supported by this CPU and build.
Isa DetectIsa();
// Variant currently used by the dispatched entry points.
Isa ActiveIsa();
// Overrides the dispatch; returns false if `isa` is unavailable here.
bool SetActiveIsa(Isa isa);
bool IsaAvailable(Isa isa);

double Dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
// max_i |values[i] - pivot| * weights[i]; 0 for empty input.
double MaxScaledAbsDiff(std::span<const double> values, double pivot,
                        std::span<const double> weights);

namespace scalar {
double Dot(std::span<const double> a, std::span<const double> b);
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
double MaxScaledAbsDiff(std::span<const double> values, double pivot,
                        std::span<const double> weights);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double Dot(std::span<const double> a, std::span<const double> b);
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
double MaxScaledAbsDiff(std::span<const double> values, double pivot,
                        std::span<const double> weights);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double Dot(std::span<const double> a, std::span<const double> b);
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
double MaxScaledAbsDiff(std::span<const double> values, double pivot,
                        std::span<const double> weights);
}  // namespace neon
#endif

}  // namespace mfteams::simd

#endif  // MFTEAMS_SIMD_KERNELS_H_
