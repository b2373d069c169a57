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

#ifndef MFTEAMS_BOUND_PIPELINE_H_
#define MFTEAMS_BOUND_PIPELINE_H_

#include <vector>

#include "mfteams/approx_metrics.h"
#include "mfteams/game_model.h"
#include "mfteams/stage_game.h"

namespace mfteams {

struct BoundOptions {
  std::vector<int> populations = {4, 8, 16};
  std::vector<int> kappa_sweep = {2, 4, 8, 16, 32, 64};
  PrescriptionMode mode = PrescriptionMode::kPure;
  int grid_g = 1;
  StageSolveOptions stage;
  int workers = 1;
};

struct BoundRow {
  int population = 0;
  std::vector<double> team_gain;  // initial-law gain of the best response
  double gain = 0.0;              // max over teams
  double max_state_gain = 0.0;    // max over (t, z, k) of V^psi - V^BR
  std::vector<std::vector<double>> lipschitz;  // [k][t-1]
  double bound = 0.0;
  double max_projection_error = 0.0;
  bool limit_all_pure = true;
  bool within_bound = false;
};

struct BoundReport {
  // Concentration envelope: per N the largest expected deviation over the
  // probe points (the 1/2-grid of every team's simplex) and pure profiles.
  RateFit rate;
  std::vector<double> kappa;
  std::vector<BoundRow> rows;
  bool all_within_bound = false;
  int inversions = 0;  // consecutive populations where the gain increases
};

// For every population N (all teams): solve the limit game on the 1/(2N)
// grid, project its policy onto the count lattice, best-respond per team in
// the exact finite game and set the measured gain next to the bound
// 2 sum_t sum_k kappa_k L_{k,t} / sqrt(N) with kappa from the probe sweep and
// L from the limit value tables.
BoundReport RunBoundPipeline(const GameSpec& spec, const BoundOptions& options);

}  // namespace mfteams

#endif  // MFTEAMS_BOUND_PIPELINE_H_
