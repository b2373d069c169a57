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

#ifndef MFTEAMS_APPROX_METRICS_H_
#define MFTEAMS_APPROX_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfteams/count_dynamics.h"
#include "mfteams/game_model.h"
#include "mfteams/lattice.h"

namespace mfteams {

// Exact optimal transport cost between p and q over |p| states with the
// row-major cost matrix d. Common mass stays in place; the remainder is moved
// by successive shortest augmenting paths.
double Wasserstein(std::span<const double> p, std::span<const double> q,
                   std::span<const double> d);

// W(z, z') = sum_k W_k(z^(k), z'^(k)) under each team's state metric.
double JointDistance(const GameSpec& spec, const MeanField& z,
                     const MeanField& z_hat);

inline constexpr size_t kDefaultDeviationAtomCap = 100'000;
inline constexpr int kDeviationSamples = 20'000;

// E_{M' ~ Q(.|M, Gamma)} W(M'/N, flow image), split per team.
struct DeviationEstimate {
  double total = 0.0;
  std::vector<double> per_team;
  double stderr = 0.0;  // 0 when exact
  bool monte_carlo = false;
};

DeviationEstimate ExpectedDeviation(const GameSpec& spec,
                                    const std::vector<CountVector>& counts,
                                    const std::vector<Prescription>& gammas,
                                    size_t atom_cap = kDefaultDeviationAtomCap);

// Least squares of log deviation against log N.
struct RateFit {
  std::vector<int> populations;
  std::vector<double> deviation;
  std::vector<double> stderr;
  std::vector<std::vector<double>> per_team;  // [i][k]
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool degenerate = false;  // some deviation is 0; slope undefined
  std::vector<double> kappa;  // max_N sqrt(N) * per-team deviation
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LineFit FitLine(std::span<const double> x, std::span<const double> y);

// Scales the mean field z to every population in `populations` (all teams
// share the population) and fits the decay. Throws std::invalid_argument when
// z * N is not integral or fewer than 4 distinct populations are given.
RateFit FitRate(const GameSpec& spec, const MeanField& z,
                const std::vector<Prescription>& gammas,
                const std::vector<int>& populations);

inline constexpr size_t kDefaultLipschitzPairCap = 1'000'000;

// lipschitz[k][t-1] = max over point pairs of |V(z) - V(z')| / W(z, z') for a
// table values[t-1][k][z] over `points`. Above `pair_cap` pairs a
// deterministic random subset of that size is scanned.
std::vector<std::vector<double>> EstimateLipschitz(
    const GameSpec& spec, const JointLattice& points,
    const std::vector<std::vector<std::vector<double>>>& values,
    size_t pair_cap = kDefaultLipschitzPairCap, std::uint64_t seed = 0);

// 2 sum_t sum_k kappa_k L_{k,t} / sqrt(N_k).
double ApproximationBound(const std::vector<double>& kappa,
                          const std::vector<std::vector<double>>& lipschitz,
                          const std::vector<int>& populations);

struct LimitCheckCase {
  std::vector<CountVector> counts;
  std::vector<Prescription> gammas;
};

struct LimitCheckReport {
  double max_cost_gap = 0.0;       // |l - l_bar|, max over cases and teams
  double max_deviation_excess = 0.0;  // deviation - sum_k kappa_k / sqrt(N_k)
  std::vector<double> cost_gap;
  std::vector<double> deviation_excess;
};

LimitCheckReport LimitConsistencyCheck(const GameSpec& spec,
                                       const std::vector<LimitCheckCase>& cases,
                                       const std::vector<double>& kappa);

}  // namespace mfteams

#endif  // MFTEAMS_APPROX_METRICS_H_
