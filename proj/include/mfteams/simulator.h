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

#ifndef MFTEAMS_SIMULATOR_H_
#define MFTEAMS_SIMULATOR_H_

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "mfteams/count_dynamics.h"
#include "mfteams/game_model.h"
#include "mfteams/lattice.h"
#include "mfteams/mpe_finite.h"

namespace mfteams {

// Weighted prescriptions a team's agents follow at one (t, z). A single
// entry is the usual case; several entries encode a mixed stage equilibrium,
// realized by one public draw per (episode, stage, team).
using PrescriptionMix = std::vector<std::pair<double, Prescription>>;

// Markov agent policy pi^(k)_t(s, z): the row of the prescription in force.
struct AgentPolicy {
  JointLattice lattice;
  std::vector<std::vector<std::vector<PrescriptionMix>>> table;  // [t-1][z][k]

  int horizon() const { return static_cast<int>(table.size()); }
  // Action law of an agent in state s; requires a single prescription.
  std::span<const double> Row(int t, size_t z, int k, int s) const;
};

AgentPolicy LiftPolicy(const LatticeGame& game, const PolicyTable& psi);
// Inverse of LiftPolicy on policies built from game.sets.
PolicyTable ProjectPolicy(const AgentPolicy& pi, const LatticeGame& game);

struct EpisodeOptions {
  // Agent i of every team draws from the streams of agent (i + r) mod N.
  int agent_label_rotation = 0;
  bool record_counts = false;
};

struct EpisodeResult {
  std::vector<double> cost;                        // per team
  std::vector<std::vector<CountVector>> counts;    // [t-1][k], if recorded
  std::vector<size_t> points;                      // lattice index per stage
};

// One agent-level episode. Every draw comes from a stream keyed by
// (seed, episode, stage, team, agent, purpose).
EpisodeResult SimulateEpisode(const GameSpec& spec, const AgentPolicy& pi,
                              std::uint64_t seed, std::uint64_t episode,
                              const EpisodeOptions& options = {});

struct SimResult {
  std::vector<double> mean;
  std::vector<double> stderr;
  int episodes = 0;
  std::vector<std::vector<double>> per_episode;  // [episode][k]
};

// Episodes run in parallel; the reduction is in episode order.
SimResult EstimateCost(const GameSpec& spec, const AgentPolicy& pi, int episodes,
                       std::uint64_t seed, int workers = 1);

struct KernelCheck {
  double tv = 0.0;
  double radius = 0.0;  // 0.5 sum 1.96 sqrt(p (1 - p) / n)
  int samples = 0;
  size_t support = 0;
};

// One-step agent-level simulation from counts M under Gamma against the exact
// joint kernel.
KernelCheck EmpiricalKernelCheck(const GameSpec& spec,
                                 const std::vector<CountVector>& counts,
                                 const std::vector<Prescription>& gammas,
                                 int samples, std::uint64_t seed);

}  // namespace mfteams

#endif  // MFTEAMS_SIMULATOR_H_
