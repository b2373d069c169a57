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

#ifndef MFTEAMS_MPE_FINITE_H_
#define MFTEAMS_MPE_FINITE_H_

#include <cstddef>
#include <vector>

#include "mfteams/game_model.h"
#include "mfteams/lattice.h"
#include "mfteams/stage_game.h"

namespace mfteams {

// Coordinator game on a finite joint lattice. kernels[z][k][j] is the law of
// team k's next lattice index when it plays item j of its set at point z, and
// costs[t-1][z][k][j] its stage cost. Kernels are stationary. The finite
// population game fills them from the exact count kernels; the limit game
// uses Dirac kernels at the projected flow image.
struct LatticeGame {
  GameSpec spec;
  JointLattice lattice;
  std::vector<PrescriptionSet> sets;
  std::vector<std::vector<std::vector<std::vector<double>>>> kernels;
  std::vector<std::vector<std::vector<std::vector<double>>>> costs;

  int horizon() const { return spec.horizon; }
  int num_teams() const { return spec.num_teams(); }
  std::vector<size_t> team_dims() const;
};

inline constexpr size_t kDefaultGameEntryCap = 50'000'000;

// Exact finite-population game over the count lattice of spec's populations.
LatticeGame BuildFiniteGame(const GameSpec& spec,
                            std::vector<PrescriptionSet> sets, int workers = 1,
                            size_t entry_cap = kDefaultGameEntryCap);

// values[t-1][k][z] = V^(k)_t(z).
using ValueTable = std::vector<std::vector<std::vector<double>>>;

// psi_t(z) for t = 1..T at every lattice point.
struct PolicyTable {
  std::vector<std::vector<StageEquilibrium>> stages;  // [t-1][z]

  const StageEquilibrium& at(int t, size_t z) const { return stages[t - 1][z]; }
};

// Stage game at (t, z) with continuation V_{t+1}; `next` may be null at t = T.
StageGame AssembleStageGame(const LatticeGame& game, int t, size_t z,
                            const std::vector<std::vector<double>>* next);

// Mixture-averaged stage cost and kernel of team k under `eq` at (t, z).
double MixedStageCost(const LatticeGame& game, int t, size_t z, int k,
                      const std::vector<double>& mixture);
std::vector<double> MixedKernel(const LatticeGame& game, size_t z, int k,
                                const std::vector<double>& mixture);

struct MpeOptions {
  StageSolveOptions stage;
  int workers = 1;
};

struct MpeSolution {
  PolicyTable policy;
  ValueTable values;
  bool all_pure = true;
  double max_stage_epsilon = 0.0;
};

// Backward induction over every lattice point and stage.
MpeSolution SolveMpe(const LatticeGame& game, const MpeOptions& options = {});

// V^(k)_t under psi, mixtures propagated as expectations.
ValueTable EvaluatePolicyValues(const LatticeGame& game, const PolicyTable& psi,
                                int workers = 1);

struct BestResponseResult {
  std::vector<std::vector<int>> choice;    // [t-1][z], index into sets[k]
  std::vector<std::vector<double>> values;  // [t-1][z]
};

// Optimal single-controller response of team k to psi^{-k}; lexicographically
// first minimizer at every (t, z).
BestResponseResult BestResponse(const LatticeGame& game, const PolicyTable& psi,
                                int k, int workers = 1);

// psi with team k replaced by the pure response.
PolicyTable ReplaceTeam(const PolicyTable& psi, int k,
                        const std::vector<std::vector<int>>& choice,
                        const LatticeGame& game);

struct CertificateEntry {
  int stage = 0;
  size_t z = 0;
  int team = 0;
  double gain = 0.0;            // V^psi - V^BR from (t, z)
  double pointwise_gain = 0.0;  // one-shot deviation at (t, z)
  bool mixed = false;
};

struct Certificate {
  std::vector<CertificateEntry> entries;  // by stage, point, team
  double max_gain = 0.0;
  double mean_gain = 0.0;
  double max_pointwise_gain = 0.0;
  // Gains averaged under the initial law of the count process, per team.
  std::vector<double> initial_gain;
  int mixed_points = 0;
};

Certificate VerifyMpe(const LatticeGame& game, const PolicyTable& psi,
                      int workers = 1);

// Product over teams of Multinomial(N^(k), P^(k)_0), on game.lattice.
std::vector<double> InitialCountLaw(const LatticeGame& game);

struct TotalCostReport {
  std::vector<double> cost;           // per team
  std::vector<double> mass_by_stage;  // total probability at t = 1..T
};

// Forward propagation of the exact lattice law under psi from `initial`.
TotalCostReport EvaluateTotalCost(const LatticeGame& game, const PolicyTable& psi,
                                  const std::vector<double>& initial);

}  // namespace mfteams

#endif  // MFTEAMS_MPE_FINITE_H_
