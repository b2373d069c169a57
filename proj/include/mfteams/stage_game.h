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

#ifndef MFTEAMS_STAGE_GAME_H_
#define MFTEAMS_STAGE_GAME_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mfteams/count_dynamics.h"
#include "mfteams/game_model.h"
#include "mfteams/lattice.h"

namespace mfteams {

enum class PrescriptionMode { kPure, kGridded };

// Finite subset of a team's prescriptions that the coordinator chooses from.
// Pure: all |A|^|S| deterministic maps. Gridded: every row on the 1/g grid of
// the action simplex. Items are ordered with state 0 as the most significant
// digit and each row in EnumerateCounts order, so pure == gridded with g = 1.
struct PrescriptionSet {
  int team = 0;
  PrescriptionMode mode = PrescriptionMode::kPure;
  int grid_resolution = 1;
  std::vector<Prescription> items;

  size_t size() const { return items.size(); }
};

inline constexpr size_t kDefaultPrescriptionCap = 100'000;

PrescriptionSet BuildPrescriptionSet(const GameSpec& spec, int k,
                                     PrescriptionMode mode, int g = 1,
                                     size_t cap = kDefaultPrescriptionCap);

std::vector<PrescriptionSet> BuildPrescriptionSets(
    const GameSpec& spec, PrescriptionMode mode, int g = 1,
    size_t cap = kDefaultPrescriptionCap);

// One-shot game among the K coordinators at a fixed mean field. cost[k] is a
// tensor over joint prescription indices (team 0 most significant); every
// team minimizes its own tensor.
struct StageGame {
  std::vector<int> shape;
  std::vector<std::vector<double>> cost;

  int num_teams() const { return static_cast<int>(shape.size()); }
  size_t num_profiles() const;
  std::vector<int> Decompose(size_t joint) const;
  size_t Compose(std::span<const int> profile) const;
};

// Contracts `tensor` (axes of extent dims[k], axis 0 most significant) with a
// list of vectors per axis: out[j_0..j_{K-1}] =
//   sum_m tensor[m_0..m_{K-1}] * prod_k factors[k][j_k][m_k].
std::vector<double> Contract(std::span<const double> tensor,
                             std::span<const size_t> dims,
                             const std::vector<std::vector<std::vector<double>>>& factors);

// l^(k)_t(z, gamma_j) for every item of `set` at lattice point z_index.
std::vector<double> StageCostsAt(const GameSpec& spec, const JointLattice& lattice,
                                 size_t z_index, int k, int t,
                                 const PrescriptionSet& set);

// Q^(k)(. | z, gamma_j) as dense vectors over team k's lattice.
std::vector<std::vector<double>> TeamKernelsAt(const GameSpec& spec,
                                               const JointLattice& lattice,
                                               size_t z_index, int k,
                                               const PrescriptionSet& set);

// cost[k][Gamma] = l^(k)_t(z, gamma^(k)) + sum_{M'} Q(M'|z,Gamma) V^(k)_{t+1}(M').
// `continuation` holds one dense table over `lattice` per team; pass an empty
// vector at the last stage.
StageGame BuildStageGame(const GameSpec& spec, const JointLattice& lattice,
                         size_t z_index, int t,
                         const std::vector<std::vector<double>>& continuation,
                         const std::vector<PrescriptionSet>& sets);

// Same tensors from precomputed parts: stage_costs[k][j], kernels[k][j] over
// a lattice with per-team sizes `dims`, continuation[k] over that lattice.
StageGame ComposeStageGame(
    const std::vector<std::vector<double>>& stage_costs,
    const std::vector<std::vector<std::vector<double>>>& kernels,
    std::span<const size_t> dims,
    const std::vector<std::vector<double>>& continuation);

// A pure profile or independent mixtures over each team's prescription set.
struct StageEquilibrium {
  bool pure = true;
  std::vector<int> profile;                   // pure only
  std::vector<std::vector<double>> mixture;   // always set; Dirac when pure
  double epsilon = 0.0;                       // certified max unilateral gain

  size_t support_size() const;
};

// Team k's expected cost for each of its own indices, others mixing.
std::vector<double> ExpectedCostVector(const StageGame& game, int k,
                                       const std::vector<std::vector<double>>& mixture);
// Expected cost of every team under the mixture profile.
std::vector<double> ExpectedCosts(const StageGame& game,
                                  const std::vector<std::vector<double>>& mixture);
// max_k (expected cost - best unilateral deviation cost) >= 0.
double CertifyEpsilon(const StageGame& game,
                      const std::vector<std::vector<double>>& mixture);

StageEquilibrium MakePureEquilibrium(const StageGame& game,
                                     const std::vector<int>& profile);

inline constexpr double kPureNashTol = 1e-12;

// Every profile where no team lowers its cost by more than `tol` through a
// unilateral change, in ascending joint index order.
std::vector<std::vector<int>> PureNash(const StageGame& game,
                                       double tol = kPureNashTol);

struct MixedNashOptions {
  int support_bound = 4;
  double tol = 1e-9;
  size_t max_support_pairs = 1'000'000;
};

// Support enumeration for K = 2. Support-size pairs are visited by total
// size, then imbalance, then team 0's size; supports lexicographically.
// Throws NotFoundError when nothing within the bound certifies to `tol`.
StageEquilibrium MixedNash2Team(const StageGame& game,
                                const MixedNashOptions& options = {});

// Damped fictitious play; returns the visited profile (pure best-response
// profile or empirical mixture) with the smallest certified epsilon.
StageEquilibrium BrIteration(const StageGame& game, int max_iters, double tol);

// Pure before mixed; pure by smallest joint index; mixed by smallest total
// support, then lexicographic supports; first on exact ties.
StageEquilibrium SelectEquilibrium(const std::vector<StageEquilibrium>& candidates);

enum class EquilibriumPolicy { kPureOnly, kFallback };

struct StageSolveOptions {
  EquilibriumPolicy policy = EquilibriumPolicy::kFallback;
  MixedNashOptions mixed;
  int br_max_iters = 5000;
  double br_tol = 1e-9;
};

// PureNash -> SelectEquilibrium; otherwise (fallback only) MixedNash2Team for
// K = 2, then BrIteration. Pure-only mode throws NoPureEquilibriumError
// carrying (stage, point_label).
StageEquilibrium SolveStageGame(const StageGame& game,
                                const StageSolveOptions& options, int stage,
                                const std::string& point_label);

}  // namespace mfteams

#endif  // MFTEAMS_STAGE_GAME_H_
