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

#ifndef MFTEAMS_MF_LIMIT_H_
#define MFTEAMS_MF_LIMIT_H_

#include <cstddef>
#include <vector>

#include "mfteams/count_dynamics.h"
#include "mfteams/game_model.h"
#include "mfteams/lattice.h"
#include "mfteams/mpe_finite.h"

namespace mfteams {

// q_bar^(k)(z, gamma)(s') = sum_s z^(k)(s) sum_a gamma(a|s) P^(k)(s'|s,a,z).
std::vector<double> TeamFlow(const GameSpec& spec, int k, const MeanField& z,
                             const Prescription& gamma);
MeanField Flow(const GameSpec& spec, const MeanField& z,
               const std::vector<Prescription>& gammas);

// l_bar^(k)_t(z, gamma): cost integrated against the state-action occupation
// z^(k)(s) gamma(a|s).
double LimitStageCost(const MeanField& z, const Prescription& gamma,
                      const GameSpec& spec, int k, int t);

struct GridProjection {
  size_t index = 0;  // joint grid index
  std::vector<size_t> per_team;
  double error = 0.0;  // W(z, grid point)
};

// Nearest joint grid point. The joint metric is a sum over teams, so each
// team is projected separately; ties go to the earlier enumeration index.
GridProjection ProjectToGrid(const GameSpec& spec, const MeanField& z,
                             const JointLattice& grid);

// Per-team resolutions 2 N^(k).
std::vector<int> DefaultResolutions(const GameSpec& spec);

struct LimitGame {
  LatticeGame game;  // lattice holds the simplex grid
  double max_projection_error = 0.0;
  double mean_projection_error = 0.0;
};

// Coordinator game of the infinite population on the simplex grid: each item
// moves the team deterministically to the projected flow image.
LimitGame BuildLimitGame(const GameSpec& spec, std::vector<PrescriptionSet> sets,
                         const std::vector<int>& resolutions, int workers = 1);

struct Rollout {
  std::vector<MeanField> z;                    // z_bar_1..z_bar_T
  std::vector<size_t> grid_point;              // projected index per stage
  std::vector<double> projection_error;        // per stage
  std::vector<std::vector<std::vector<double>>> mixture;  // [t-1][k]
  std::vector<std::vector<double>> cost_so_far;           // [t-1][k]
  std::vector<double> total;                              // per team
};

// Deterministic rollout from the initial laws: at each stage play
// psi_t(project(z_bar_t)), accumulate l_bar at z_bar_t and advance by Flow.
Rollout RolloutInf(const LimitGame& limit, const PolicyTable& psi);

// psi on the finite count lattice: psi(z) = psi_bar(project(z)).
PolicyTable ProjectLimitPolicy(const LimitGame& limit, const PolicyTable& psi_bar,
                               const LatticeGame& finite);

}  // namespace mfteams

#endif  // MFTEAMS_MF_LIMIT_H_
