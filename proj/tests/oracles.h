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

#ifndef MFTEAMS_TESTS_ORACLES_H_
#define MFTEAMS_TESTS_ORACLES_H_

// Reference computations that work agent by agent, straight from the spec
// tensors, without the count machinery of the library.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mfteams/count_dynamics.h"
#include "mfteams/game_model.h"
#include "mfteams/lattice.h"
#include "mfteams/stage_game.h"

namespace mfteams::oracle {

std::string DataPath(const std::string& name);
GameSpec LoadData(const std::string& name);
std::string ReadFile(const std::string& path);

// Uniform point of the simplex product (normalized exponentials).
MeanField RandomMeanField(const GameSpec& spec, std::uint64_t seed);

// theta0 + sum theta1 z, read directly from the tensors.
double Transition(const GameSpec& spec, int k, int s, int a,
                  const MeanField& z, int s_next);
double Cost(const GameSpec& spec, int k, int t, int s, int a, const MeanField& z);

MeanField MeanFieldOf(const GameSpec& spec, const std::vector<CountVector>& counts);

using JointLaw = std::map<std::vector<CountVector>, double>;

// Law of the next joint counts by enumerating every agent's (action, next
// state) pair.
JointLaw AgentLevelKernel(const GameSpec& spec,
                          const std::vector<CountVector>& counts,
                          const std::vector<Prescription>& gammas);

// E[(1/N) sum_i c_t(s_i, a_i, z)] by enumerating the agents' actions.
double AgentLevelStageCost(const GameSpec& spec,
                           const std::vector<CountVector>& counts,
                           const Prescription& gamma, int k, int t);

// Per lattice point (JointLattice::ForPopulations order) the smallest total
// cost from stage `from` that team k reaches over all pure Markov
// strategies (one item of sets[k] per (t, z)), the other teams playing
// others(t, z) (a full profile; entry k is ignored).
std::vector<double> BruteForceBestValues(
    const GameSpec& spec, const std::vector<PrescriptionSet>& sets, int k,
    const std::function<std::vector<int>(int, size_t)>& others, int from = 1);

// Every pure strategy profile of a normal form game given as cost tensors,
// checked against every unilateral deviation.
std::vector<std::vector<int>> BruteForcePureNash(const StageGame& game);

}  // namespace mfteams::oracle

#endif  // MFTEAMS_TESTS_ORACLES_H_
