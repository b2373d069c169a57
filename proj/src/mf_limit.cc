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

#include "mfteams/mf_limit.h"

#include <stdexcept>
#include <string>
#include <utility>

#include "mfteams/approx_metrics.h"
#include "mfteams/simd/kernels.h"
#include "mfteams/util.h"

namespace mfteams {
namespace {

constexpr double kTieTol = 1e-12;

std::pair<size_t, double> ProjectTeam(const GameSpec& spec, int k,
                                      const std::vector<double>& x,
                                      const TeamLattice& grid) {
  const std::vector<double>& metric = spec.teams[k].state_metric;
  size_t best = 0;
  double best_err = Wasserstein(x, grid.mean_field(0), metric);
  for (size_t i = 1; i < grid.size(); ++i) {
    double err = Wasserstein(x, grid.mean_field(i), metric);
    if (err < best_err - kTieTol) {
      best = i;
      best_err = err;
    }
  }
  return {best, best_err};
}

}  // namespace

std::vector<double> TeamFlow(const GameSpec& spec, int k, const MeanField& z,
                             const Prescription& gamma) {
  const TeamModel& team = spec.teams[k];
  const int num_states = team.num_states();
  std::vector<double> z_flat = Flatten(z);
  std::vector<double> out(num_states, 0.0);
  std::vector<double> row(num_states);
  for (int s = 0; s < num_states; ++s) {
    const double mass = z.per_team[k][s];
    if (mass == 0.0) continue;
    for (int a = 0; a < team.num_actions(); ++a) {
      const double w = mass * gamma(s, a);
      if (w == 0.0) continue;
      TransitionRow(spec, k, s, a, z_flat, row);
      simd::Axpy(w, row, out);
    }
  }
  return out;
}

MeanField Flow(const GameSpec& spec, const MeanField& z,
               const std::vector<Prescription>& gammas) {
  MeanField out;
  for (int k = 0; k < spec.num_teams(); ++k) {
    out.per_team.push_back(TeamFlow(spec, k, z, gammas[k]));
  }
  return out;
}

double LimitStageCost(const MeanField& z, const Prescription& gamma,
                      const GameSpec& spec, int k, int t) {
  const TeamModel& team = spec.teams[k];
  const int num_states = team.num_states();
  const int num_actions = team.num_actions();
  std::vector<double> occupation(static_cast<size_t>(num_states) * num_actions);
  std::vector<double> cost(occupation.size());
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      occupation[static_cast<size_t>(s) * num_actions + a] =
          z.per_team[k][s] * gamma(s, a);
      cost[static_cast<size_t>(s) * num_actions + a] = EvalCost(spec, k, t, s, a, z);
    }
  }
  return simd::Dot(occupation, cost);
}

GridProjection ProjectToGrid(const GameSpec& spec, const MeanField& z,
                             const JointLattice& grid) {
  GridProjection proj;
  for (int k = 0; k < grid.num_teams(); ++k) {
    auto [index, err] = ProjectTeam(spec, k, z.per_team[k], grid.team(k));
    proj.per_team.push_back(index);
    proj.error += err;
  }
  proj.index = grid.Compose(proj.per_team);
  return proj;
}

std::vector<int> DefaultResolutions(const GameSpec& spec) {
  std::vector<int> out;
  for (const TeamModel& team : spec.teams) out.push_back(2 * team.population);
  return out;
}

LimitGame BuildLimitGame(const GameSpec& spec, std::vector<PrescriptionSet> sets,
                         const std::vector<int>& resolutions, int workers) {
  LimitGame limit;
  LatticeGame& game = limit.game;
  game.spec = spec;
  game.lattice = JointLattice::ForResolutions(spec, resolutions);
  game.sets = std::move(sets);
  const int num_teams = spec.num_teams();
  const size_t num_points = game.lattice.size();
  game.kernels.resize(num_points);
  game.costs.assign(spec.horizon,
                    std::vector<std::vector<std::vector<double>>>(num_points));
  std::vector<double> max_err(num_points, 0.0), sum_err(num_points, 0.0);
  ParallelFor(num_points, workers, [&](size_t z) {
    MeanField zbar = game.lattice.MeanFieldAt(z);
    game.kernels[z].resize(num_teams);
    for (int k = 0; k < num_teams; ++k) {
      const TeamLattice& grid = game.lattice.team(k);
      for (const Prescription& gamma : game.sets[k].items) {
        auto [index, err] = ProjectTeam(spec, k, TeamFlow(spec, k, zbar, gamma), grid);
        std::vector<double> dirac(grid.size(), 0.0);
        dirac[index] = 1.0;
        game.kernels[z][k].push_back(std::move(dirac));
        max_err[z] = std::max(max_err[z], err);
        sum_err[z] += err;
      }
    }
    for (int t = 1; t <= spec.horizon; ++t) {
      game.costs[t - 1][z].resize(num_teams);
      for (int k = 0; k < num_teams; ++k) {
        for (const Prescription& gamma : game.sets[k].items) {
          game.costs[t - 1][z][k].push_back(LimitStageCost(zbar, gamma, spec, k, t));
        }
      }
    }
  });
  size_t evaluations = 0;
  for (int k = 0; k < num_teams; ++k) evaluations += game.sets[k].size();
  evaluations *= num_points;
  double total = 0.0;
  for (size_t z = 0; z < num_points; ++z) {
    limit.max_projection_error = std::max(limit.max_projection_error, max_err[z]);
    total += sum_err[z];
  }
  if (evaluations > 0) limit.mean_projection_error = total / evaluations;
  return limit;
}

Rollout RolloutInf(const LimitGame& limit, const PolicyTable& psi) {
  const LatticeGame& game = limit.game;
  const GameSpec& spec = game.spec;
  const int num_teams = spec.num_teams();
  Rollout out;
  out.total.assign(num_teams, 0.0);
  MeanField z = InitialMeanField(spec);
  for (int t = 1; t <= spec.horizon; ++t) {
    GridProjection proj = ProjectToGrid(spec, z, game.lattice);
    const StageEquilibrium& eq = psi.at(t, proj.index);
    MeanField next;
    for (int k = 0; k < num_teams; ++k) {
      std::vector<double> flow(spec.teams[k].num_states(), 0.0);
      const std::vector<double>& x = eq.mixture[k];
      for (size_t j = 0; j < x.size(); ++j) {
        if (x[j] == 0.0) continue;
        const Prescription& gamma = game.sets[k].items[j];
        out.total[k] += x[j] * LimitStageCost(z, gamma, spec, k, t);
        simd::Axpy(x[j], TeamFlow(spec, k, z, gamma), flow);
      }
      next.per_team.push_back(std::move(flow));
    }
    out.z.push_back(z);
    out.grid_point.push_back(proj.index);
    out.projection_error.push_back(proj.error);
    out.mixture.push_back(eq.mixture);
    out.cost_so_far.push_back(out.total);
    z = std::move(next);
  }
  return out;
}

PolicyTable ProjectLimitPolicy(const LimitGame& limit, const PolicyTable& psi_bar,
                               const LatticeGame& finite) {
  const LatticeGame& game = limit.game;
  for (int k = 0; k < finite.num_teams(); ++k) {
    if (finite.sets[k].items != game.sets[k].items) {
      throw std::invalid_argument("prescription sets differ for team " +
                                  std::to_string(k));
    }
  }
  const size_t num_points = finite.lattice.size();
  std::vector<size_t> target(num_points);
  for (size_t z = 0; z < num_points; ++z) {
    target[z] = ProjectToGrid(finite.spec, finite.lattice.MeanFieldAt(z),
                              game.lattice).index;
  }
  PolicyTable out;
  for (const auto& stage : psi_bar.stages) {
    std::vector<StageEquilibrium> row;
    row.reserve(num_points);
    for (size_t z = 0; z < num_points; ++z) row.push_back(stage[target[z]]);
    out.stages.push_back(std::move(row));
  }
  return out;
}

}  // namespace mfteams
