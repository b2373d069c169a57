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

#ifndef MFTEAMS_COUNT_DYNAMICS_H_
#define MFTEAMS_COUNT_DYNAMICS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "mfteams/game_model.h"
#include "mfteams/lattice.h"
#include "mfteams/rng.h"

namespace mfteams {

// Map from local state to a distribution over actions, stored row-major
// [s][a]. This is the action a team's coordinator takes at each stage.
struct Prescription {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> rows;

  double operator()(int s, int a) const {
    return rows[static_cast<size_t>(s) * num_actions + a];
  }
  std::span<const double> row(int s) const {
    return {rows.data() + static_cast<size_t>(s) * num_actions,
            static_cast<size_t>(num_actions)};
  }
  bool operator==(const Prescription&) const = default;

  // Row s is the Dirac at actions[s].
  static Prescription Deterministic(const std::vector<int>& actions,
                                    int num_actions);
  static Prescription Uniform(int num_states, int num_actions);
};

// Throws std::invalid_argument unless every row is a distribution (1e-12).
void ValidatePrescription(const Prescription& gamma);

// Law over integer tensors (flattened). Probabilities below 1e-15 are pruned
// and the rest renormalized; support is in ascending lexicographic order.
struct CountDistribution {
  std::vector<std::vector<int>> support;
  std::vector<double> probs;

  double total() const;
  // 0 when `x` is not in the support.
  double ProbabilityOf(const std::vector<int>& x) const;
};

struct JointCountDistribution {
  std::vector<std::vector<CountVector>> support;
  std::vector<double> probs;

  double total() const;
  double ProbabilityOf(const std::vector<CountVector>& x) const;
};

inline constexpr size_t kDefaultSupportCap = 10'000'000;

// log(n!) with a cached table for small n.
double LogFactorial(int n);

// Multinomial(n; p) pmf at x.
double MultinomialPmf(std::span<const int> x, std::span<const double> p);

// Law of the state-action counts mbar[s][a]: independently per state, m(s)
// agents split across actions by Multinomial(m(s), gamma(.|s)).
CountDistribution ActionCountDist(const CountVector& m, const Prescription& gamma,
                                  size_t cap = kDefaultSupportCap);

// Law of the state-action-next-state counts mhat[s][a][s'] given mbar: per
// (s,a) cell, Multinomial(mbar(s,a), P^(k)(.|s,a,z)).
CountDistribution NextStateCountDist(const std::vector<int>& mbar,
                                     const MeanField& z, const GameSpec& spec,
                                     int k, size_t cap = kDefaultSupportCap);

// m'(s') = sum_{s,a} mhat(s,a,s').
CountVector MarginalizeCounts(const std::vector<int>& mhat, int num_states,
                              int num_actions);

// Q^(k)(m' | z, gamma): law of the next state counts of team k. Computed by
// convolving per-state Multinomial(m(s), r_s) laws, where
// r_s(s') = sum_a gamma(a|s) P(s'|s,a,z) is one agent's next-state law.
CountDistribution TeamTransitionKernel(const CountVector& m, const MeanField& z,
                                       const Prescription& gamma,
                                       const GameSpec& spec, int k,
                                       size_t cap = kDefaultSupportCap);

// Same law obtained literally: ActionCountDist, then NextStateCountDist per
// atom, then MarginalizeCounts. Exponentially larger intermediate support;
// kept as the second route for cross-checks and audits.
CountDistribution TeamTransitionKernelByComposition(
    const CountVector& m, const MeanField& z, const Prescription& gamma,
    const GameSpec& spec, int k, size_t cap = kDefaultSupportCap);

// Q^(k) scattered onto a dense vector over `lattice` (denominator N^(k)).
std::vector<double> TeamKernelOnLattice(const GameSpec& spec, int k,
                                        const MeanField& z,
                                        const CountVector& m,
                                        const Prescription& gamma,
                                        const TeamLattice& lattice);

// Mean field m^(k) / N^(k) per team.
MeanField CountMeanField(const std::vector<CountVector>& counts,
                         const GameSpec& spec);

// Q(M' | M, Gamma) = prod_k Q^(k): teams move independently given (z, Gamma).
JointCountDistribution JointTransitionKernel(
    const std::vector<CountVector>& counts,
    const std::vector<Prescription>& gammas, const GameSpec& spec,
    size_t cap = kDefaultSupportCap);

// One draw from JointTransitionKernel by sequential multinomial sampling of
// mbar, then mhat, then marginalizing.
std::vector<CountVector> SampleNextCounts(const std::vector<CountVector>& counts,
                                          const std::vector<Prescription>& gammas,
                                          const GameSpec& spec, RngStream& rng);

// l^(k)_t(z, gamma) = sum_s z(s) sum_a gamma(a|s) c_t(s,a,z): the expected
// team cost, which is linear in the state-action counts.
double StageCost(const MeanField& z, const Prescription& gamma,
                 const GameSpec& spec, int k, int t);

}  // namespace mfteams

#endif  // MFTEAMS_COUNT_DYNAMICS_H_
