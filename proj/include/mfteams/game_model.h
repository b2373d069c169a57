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

#ifndef MFTEAMS_GAME_MODEL_H_
#define MFTEAMS_GAME_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace mfteams {

// Per-team probability vectors over local states. A count mean field is the
// special case where team k's entries are multiples of 1/N^(k).
struct MeanField {
  std::vector<std::vector<double>> per_team;

  int num_teams() const { return static_cast<int>(per_team.size()); }
  bool operator==(const MeanField&) const = default;
};

// A homogeneous population of agents. Transition and cost depend on the
// joint mean field z through an affine coupling:
//
//   P(s'|s,a,z) = base[s][a][s'] + sum_{k',sigma} coupling[s][a][s'][k',sigma] z^(k')(sigma)
//   c_t(s,a,z)  = base[t][s][a] + sum_{k',sigma} coupling[t][s][a][k',sigma] z^(k')(sigma)
//
// The (k', sigma) axis is flattened over all teams in team order; its width is
// GameSpec::coupling_width().
struct TeamModel {
  std::vector<std::string> state_labels;
  std::vector<std::string> action_labels;
  int population = 1;
  std::vector<double> initial_law;
  std::vector<double> state_metric;         // row-major |S| x |S|
  std::vector<double> transition_base;      // [s][a][s']
  std::vector<double> transition_coupling;  // [s][a][s'][flat sigma]
  std::vector<double> cost_base;            // [t][s][a], t = 0..T-1
  std::vector<double> cost_coupling;        // [t][s][a][flat sigma]

  int num_states() const { return static_cast<int>(state_labels.size()); }
  int num_actions() const { return static_cast<int>(action_labels.size()); }
  double metric(int i, int j) const {
    return state_metric[static_cast<size_t>(i) * state_labels.size() + j];
  }
};

struct GameSpec {
  std::vector<TeamModel> teams;
  int horizon = 1;
  std::uint64_t seed = 0;

  int num_teams() const { return static_cast<int>(teams.size()); }
  // Sum of |S^(k)| over teams.
  size_t coupling_width() const;
  // Start of team k's block on the flattened (k', sigma) axis.
  size_t coupling_offset(int k) const;
};

// Parses and validates a spec document. Throws ParseError on malformed JSON
// or schema violations and ValidationError on the first violated invariant.
GameSpec LoadSpec(std::string_view document);
GameSpec LoadSpecFile(const std::string& path);

// Serializes back to the document schema (dense base tensors, sparse coupling
// records holding only nonzero entries).
nlohmann::json SpecToJson(const GameSpec& spec);

// Checks every TeamModel / GameSpec invariant; throws ValidationError naming
// the first violation and where it occurred.
void ValidateSpec(const GameSpec& spec);

// Concatenates the per-team vectors in team order.
std::vector<double> Flatten(const MeanField& z);

// True when every team's vector is nonnegative and sums to one within tol.
bool InSimplexProduct(const GameSpec& spec, const MeanField& z,
                      double tol = 1e-9);

MeanField InitialMeanField(const GameSpec& spec);

// Returns P^(k)(.|s,a,z). Throws std::out_of_range on bad indices and
// std::invalid_argument when z is off the simplex product.
std::vector<double> EvalTransition(const GameSpec& spec, int k, int s, int a,
                                   const MeanField& z);

// Returns c^(k)_t(s,a,z) for stage t in 1..T.
double EvalCost(const GameSpec& spec, int k, int t, int s, int a,
                const MeanField& z);

// Unchecked hot-path variants taking the flattened mean field.
void TransitionRow(const GameSpec& spec, int k, int s, int a,
                   std::span<const double> z_flat, std::span<double> out);
double CostAt(const GameSpec& spec, int k, int t, int s, int a,
              std::span<const double> z_flat);

// Closed-form Lipschitz constants of the model primitives with respect to the
// joint metric W(z, z') = sum_k W_k(z^(k), z'^(k)):
//   |c_t(s,a,z) - c_t(s,a,z')|            <= cost * W(z, z')
//   ||P(.|s,a,z) - P(.|s,a,z')||_1        <= transition_l1 * W(z, z')
// Each linear functional f on Delta(S^(k')) has Kantorovich-Rubinstein constant
// max_{sigma != sigma'} |f(sigma) - f(sigma')| / d(sigma, sigma').
struct LipschitzBounds {
  double cost = 0.0;
  double transition_l1 = 0.0;
};
std::vector<LipschitzBounds> ComputeLipschitzBounds(const GameSpec& spec);

// Copy of spec with every team's population replaced by n.
GameSpec WithPopulation(const GameSpec& spec, int n);

}  // namespace mfteams

#endif  // MFTEAMS_GAME_MODEL_H_
