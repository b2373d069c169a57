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

#include "mfteams/mpe_finite.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mfteams/count_dynamics.h"
#include "mfteams/errors.h"
#include "mfteams/simd/kernels.h"
#include "mfteams/util.h"

namespace mfteams {
namespace {

std::vector<double> Kron(const std::vector<std::vector<double>>& factors) {
  std::vector<double> out = {1.0};
  for (const auto& f : factors) {
    std::vector<double> next(out.size() * f.size(), 0.0);
    for (size_t i = 0; i < out.size(); ++i) {
      if (out[i] == 0.0) continue;
      simd::Axpy(out[i], f, std::span<double>(next.data() + i * f.size(), f.size()));
    }
    out = std::move(next);
  }
  return out;
}

bool IsDirac(const std::vector<double>& x) {
  return std::count_if(x.begin(), x.end(), [](double v) { return v > 0.0; }) == 1;
}

// Cost-to-go of team k for each item of its set at (t, z), the other teams
// following psi and k continuing with `next_k` (V^(k)_{t+1}; null at t = T).
std::vector<double> DeviationValues(const LatticeGame& game, const PolicyTable& psi,
                                    int k, int t, size_t z,
                                    const std::vector<double>* next_k) {
  std::vector<double> q = game.costs[t - 1][z][k];
  if (next_k == nullptr) return q;
  const StageEquilibrium& eq = psi.at(t, z);
  std::vector<std::vector<std::vector<double>>> factors(game.num_teams());
  for (int i = 0; i < game.num_teams(); ++i) {
    if (i == k) {
      factors[i] = game.kernels[z][k];
    } else {
      factors[i].push_back(MixedKernel(game, z, i, eq.mixture[i]));
    }
  }
  std::vector<size_t> dims = game.team_dims();
  std::vector<double> cont = Contract(*next_k, dims, factors);
  for (size_t j = 0; j < q.size(); ++j) q[j] += cont[j];
  return q;
}

}  // namespace

std::vector<size_t> LatticeGame::team_dims() const {
  std::vector<size_t> dims;
  for (int k = 0; k < lattice.num_teams(); ++k) dims.push_back(lattice.team(k).size());
  return dims;
}

LatticeGame BuildFiniteGame(const GameSpec& spec, std::vector<PrescriptionSet> sets,
                            int workers, size_t entry_cap) {
  LatticeGame game;
  game.spec = spec;
  game.lattice = JointLattice::ForPopulations(spec);
  game.sets = std::move(sets);
  const size_t num_points = game.lattice.size();
  size_t per_point = 0;
  for (int k = 0; k < spec.num_teams(); ++k) {
    per_point += game.sets[k].size() * (game.lattice.team(k).size() + spec.horizon);
  }
  if (per_point != 0 && num_points > entry_cap / per_point) {
    throw CapacityError("finite game tables need more than " +
                        std::to_string(entry_cap) + " entries");
  }
  game.kernels.resize(num_points);
  game.costs.assign(spec.horizon,
                    std::vector<std::vector<std::vector<double>>>(num_points));
  ParallelFor(num_points, workers, [&](size_t z) {
    game.kernels[z].resize(spec.num_teams());
    for (int k = 0; k < spec.num_teams(); ++k) {
      game.kernels[z][k] = TeamKernelsAt(spec, game.lattice, z, k, game.sets[k]);
    }
    for (int t = 1; t <= spec.horizon; ++t) {
      game.costs[t - 1][z].resize(spec.num_teams());
      for (int k = 0; k < spec.num_teams(); ++k) {
        game.costs[t - 1][z][k] =
            StageCostsAt(spec, game.lattice, z, k, t, game.sets[k]);
      }
    }
  });
  return game;
}

StageGame AssembleStageGame(const LatticeGame& game, int t, size_t z,
                            const std::vector<std::vector<double>>* next) {
  std::vector<size_t> dims = game.team_dims();
  static const std::vector<std::vector<double>> kNone;
  return ComposeStageGame(game.costs[t - 1][z], game.kernels[z], dims,
                          next == nullptr ? kNone : *next);
}

double MixedStageCost(const LatticeGame& game, int t, size_t z, int k,
                      const std::vector<double>& mixture) {
  return simd::Dot(game.costs[t - 1][z][k], mixture);
}

std::vector<double> MixedKernel(const LatticeGame& game, size_t z, int k,
                                const std::vector<double>& mixture) {
  const auto& kernels = game.kernels[z][k];
  std::vector<double> out(kernels.front().size(), 0.0);
  for (size_t j = 0; j < mixture.size(); ++j) {
    if (mixture[j] != 0.0) simd::Axpy(mixture[j], kernels[j], out);
  }
  return out;
}

MpeSolution SolveMpe(const LatticeGame& game, const MpeOptions& options) {
  const int horizon = game.horizon();
  const int num_teams = game.num_teams();
  const size_t num_points = game.lattice.size();
  MpeSolution sol;
  sol.policy.stages.assign(horizon, std::vector<StageEquilibrium>(num_points));
  sol.values.assign(horizon, std::vector<std::vector<double>>(
                                 num_teams, std::vector<double>(num_points, 0.0)));
  for (int t = horizon; t >= 1; --t) {
    const auto* next = t == horizon ? nullptr : &sol.values[t];
    ParallelFor(num_points, options.workers, [&](size_t z) {
      StageGame stage = AssembleStageGame(game, t, z, next);
      StageEquilibrium eq =
          SolveStageGame(stage, options.stage, t, game.lattice.Label(z));
      std::vector<double> v = ExpectedCosts(stage, eq.mixture);
      for (int k = 0; k < num_teams; ++k) sol.values[t - 1][k][z] = v[k];
      sol.policy.stages[t - 1][z] = std::move(eq);
    });
  }
  for (const auto& stage : sol.policy.stages) {
    for (const auto& eq : stage) {
      sol.all_pure = sol.all_pure && eq.pure;
      sol.max_stage_epsilon = std::max(sol.max_stage_epsilon, eq.epsilon);
    }
  }
  return sol;
}

ValueTable EvaluatePolicyValues(const LatticeGame& game, const PolicyTable& psi,
                                int workers) {
  const int horizon = game.horizon();
  const int num_teams = game.num_teams();
  const size_t num_points = game.lattice.size();
  std::vector<size_t> dims = game.team_dims();
  ValueTable values(horizon, std::vector<std::vector<double>>(
                                 num_teams, std::vector<double>(num_points, 0.0)));
  for (int t = horizon; t >= 1; --t) {
    ParallelFor(num_points, workers, [&](size_t z) {
      const StageEquilibrium& eq = psi.at(t, z);
      std::vector<std::vector<std::vector<double>>> factors;
      if (t < horizon) {
        for (int i = 0; i < num_teams; ++i) {
          factors.push_back({MixedKernel(game, z, i, eq.mixture[i])});
        }
      }
      for (int k = 0; k < num_teams; ++k) {
        double v = MixedStageCost(game, t, z, k, eq.mixture[k]);
        if (t < horizon) v += Contract(values[t][k], dims, factors)[0];
        values[t - 1][k][z] = v;
      }
    });
  }
  return values;
}

BestResponseResult BestResponse(const LatticeGame& game, const PolicyTable& psi,
                                int k, int workers) {
  const int horizon = game.horizon();
  const size_t num_points = game.lattice.size();
  BestResponseResult br;
  br.choice.assign(horizon, std::vector<int>(num_points, 0));
  br.values.assign(horizon, std::vector<double>(num_points, 0.0));
  for (int t = horizon; t >= 1; --t) {
    const std::vector<double>* next = t == horizon ? nullptr : &br.values[t];
    ParallelFor(num_points, workers, [&](size_t z) {
      std::vector<double> q = DeviationValues(game, psi, k, t, z, next);
      int best = 0;
      for (size_t j = 1; j < q.size(); ++j) {
        if (q[j] < q[best]) best = static_cast<int>(j);
      }
      br.choice[t - 1][z] = best;
      br.values[t - 1][z] = q[best];
    });
  }
  return br;
}

PolicyTable ReplaceTeam(const PolicyTable& psi, int k,
                        const std::vector<std::vector<int>>& choice,
                        const LatticeGame& game) {
  PolicyTable out = psi;
  const int n = static_cast<int>(game.sets[k].size());
  for (size_t t = 0; t < out.stages.size(); ++t) {
    for (size_t z = 0; z < out.stages[t].size(); ++z) {
      StageEquilibrium& eq = out.stages[t][z];
      eq.mixture[k].assign(n, 0.0);
      eq.mixture[k][choice[t][z]] = 1.0;
      eq.pure = std::all_of(eq.mixture.begin(), eq.mixture.end(), IsDirac);
      eq.profile.clear();
      if (eq.pure) {
        for (const auto& x : eq.mixture) {
          eq.profile.push_back(static_cast<int>(
              std::max_element(x.begin(), x.end()) - x.begin()));
        }
      }
      // Not an equilibrium anymore; epsilon is left undefined.
      eq.epsilon = 0.0;
    }
  }
  return out;
}

std::vector<double> InitialCountLaw(const LatticeGame& game) {
  std::vector<std::vector<double>> per_team;
  for (int k = 0; k < game.lattice.num_teams(); ++k) {
    const TeamLattice& team = game.lattice.team(k);
    std::vector<double> law(team.size());
    for (size_t i = 0; i < team.size(); ++i) {
      law[i] = MultinomialPmf(team.counts(i), game.spec.teams[k].initial_law);
    }
    per_team.push_back(std::move(law));
  }
  return Kron(per_team);
}

Certificate VerifyMpe(const LatticeGame& game, const PolicyTable& psi,
                      int workers) {
  const int horizon = game.horizon();
  const int num_teams = game.num_teams();
  const size_t num_points = game.lattice.size();
  ValueTable v = EvaluatePolicyValues(game, psi, workers);
  std::vector<BestResponseResult> br;
  for (int k = 0; k < num_teams; ++k) {
    br.push_back(BestResponse(game, psi, k, workers));
  }
  Certificate cert;
  std::vector<double> initial = InitialCountLaw(game);
  cert.initial_gain.assign(num_teams, 0.0);
  double sum = 0.0;
  for (int t = 1; t <= horizon; ++t) {
    for (size_t z = 0; z < num_points; ++z) {
      const bool mixed = !psi.at(t, z).pure;
      if (mixed) ++cert.mixed_points;
      for (int k = 0; k < num_teams; ++k) {
        const std::vector<double>* next = t == horizon ? nullptr : &v[t][k];
        std::vector<double> q = DeviationValues(game, psi, k, t, z, next);
        CertificateEntry e;
        e.stage = t;
        e.z = z;
        e.team = k;
        e.gain = v[t - 1][k][z] - br[k].values[t - 1][z];
        e.pointwise_gain = v[t - 1][k][z] - *std::min_element(q.begin(), q.end());
        e.mixed = mixed;
        cert.max_gain = std::max(cert.max_gain, e.gain);
        cert.max_pointwise_gain = std::max(cert.max_pointwise_gain, e.pointwise_gain);
        sum += e.gain;
        if (t == 1) cert.initial_gain[k] += initial[z] * e.gain;
        cert.entries.push_back(e);
      }
    }
  }
  if (!cert.entries.empty()) cert.mean_gain = sum / cert.entries.size();
  return cert;
}

TotalCostReport EvaluateTotalCost(const LatticeGame& game, const PolicyTable& psi,
                                  const std::vector<double>& initial) {
  const int horizon = game.horizon();
  const int num_teams = game.num_teams();
  TotalCostReport report;
  report.cost.assign(num_teams, 0.0);
  std::vector<double> law = initial;
  for (int t = 1; t <= horizon; ++t) {
    double mass = 0.0;
    std::vector<double> next(law.size(), 0.0);
    for (size_t z = 0; z < law.size(); ++z) {
      if (law[z] == 0.0) continue;
      mass += law[z];
      const StageEquilibrium& eq = psi.at(t, z);
      for (int k = 0; k < num_teams; ++k) {
        report.cost[k] += law[z] * MixedStageCost(game, t, z, k, eq.mixture[k]);
      }
      if (t == horizon) continue;
      std::vector<std::vector<double>> kernels;
      for (int k = 0; k < num_teams; ++k) {
        kernels.push_back(MixedKernel(game, z, k, eq.mixture[k]));
      }
      simd::Axpy(law[z], Kron(kernels), next);
    }
    report.mass_by_stage.push_back(mass);
    if (std::abs(mass - 1.0) > 1e-10) {
      throw std::logic_error("lattice law lost mass at stage " +
                             std::to_string(t) + ": " + FormatDouble(mass));
    }
    law = std::move(next);
  }
  return report;
}

}  // namespace mfteams
