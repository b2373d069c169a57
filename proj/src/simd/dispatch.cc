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

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "mfteams/simd/kernels.h"

namespace mfteams::simd {
namespace {

struct KernelTable {
  Isa isa;
  double (*dot)(std::span<const double>, std::span<const double>);
  void (*axpy)(double, std::span<const double>, std::span<double>);
  double (*max_scaled_abs_diff)(std::span<const double>, double,
                                std::span<const double>);
};

constexpr KernelTable kScalarTable{Isa::kScalar, &scalar::Dot, &scalar::Axpy,
                                   &scalar::MaxScaledAbsDiff};
#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2Table{Isa::kAvx2, &avx2::Dot, &avx2::Axpy,
                                 &avx2::MaxScaledAbsDiff};
#endif
#if defined(__aarch64__)
constexpr KernelTable kNeonTable{Isa::kNeon, &neon::Dot, &neon::Axpy,
                                 &neon::MaxScaledAbsDiff};
#endif

const KernelTable* TableFor(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &kScalarTable;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return &kAvx2Table;
#else
      return nullptr;
#endif
    case Isa::kNeon:
#if defined(__aarch64__)
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable* InitialTable() {
  const char* env = std::getenv("MFTEAMS_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return &kScalarTable;
  return TableFor(DetectIsa());
}

std::atomic<const KernelTable*>& Active() {
  static std::atomic<const KernelTable*> table{InitialTable()};
  return table;
}

}  // namespace

const char* IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

bool IsaAvailable(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa DetectIsa() {
  if (IsaAvailable(Isa::kAvx2)) return Isa::kAvx2;
  if (IsaAvailable(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

Isa ActiveIsa() { return Active().load()->isa; }

bool SetActiveIsa(Isa isa) {
  if (!IsaAvailable(isa)) return false;
  Active().store(TableFor(isa));
  return true;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  return Active().load(std::memory_order_relaxed)->dot(a, b);
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  Active().load(std::memory_order_relaxed)->axpy(alpha, x, y);
}

double MaxScaledAbsDiff(std::span<const double> values, double pivot,
                        std::span<const double> weights) {
  return Active().load(std::memory_order_relaxed)
      ->max_scaled_abs_diff(values, pivot, weights);
}

}  // namespace mfteams::simd
