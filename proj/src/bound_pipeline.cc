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

#include "mfteams/bound_pipeline.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mfteams/mf_limit.h"
#include "mfteams/mpe_finite.h"

namespace mfteams {
namespace {

// Half-grid probe points of the joint simplex, as counts for population n.
std::vector<std::vector<CountVector>> ProbeCounts(const GameSpec& spec, int n) {
  std::vector<TeamLattice> halves;
  for (const TeamModel& team : spec.teams) halves.emplace_back(2, team.num_states());
  JointLattice probes(std::move(halves));
  std::vector<std::vector<CountVector>> out;
  for (size_t i = 0; i < probes.size(); ++i) {
    std::vector<CountVector> counts = probes.CountsAt(i);
    for (CountVector& m : counts) {
      for (int& v : m) v *= n / 2;
    }
    out.push_back(std::move(counts));
  }
  return out;
}

}  // namespace

BoundReport RunBoundPipeline(const GameSpec& spec, const BoundOptions& options) {
  const int num_teams = spec.num_teams();
  std::vector<PrescriptionSet> sets =
      BuildPrescriptionSets(spec, options.mode, options.grid_g);
  BoundReport report;
  report.kappa.assign(num_teams, 0.0);

  // Profiles of pure items; each team's deviation only depends on its own.
  size_t num_profiles = 1;
  for (const auto& set : sets) num_profiles *= set.size();
  std::vector<double> log_n, log_dev;
  for (int n : options.kappa_sweep) {
    if (n < 2 || n % 2 != 0) {
      throw std::invalid_argument("kappa sweep populations must be even");
    }
    GameSpec scaled = WithPopulation(spec, n);
    double envelope = 0.0;
    std::vector<double> per_team(num_teams, 0.0);
    for (const auto& counts : ProbeCounts(scaled, n)) {
      for (size_t p = 0; p < num_profiles; ++p) {
        std::vector<Prescription> gammas(num_teams);
        size_t rest = p;
        for (int k = num_teams - 1; k >= 0; --k) {
          gammas[k] = sets[k].items[rest % sets[k].size()];
          rest /= sets[k].size();
        }
        DeviationEstimate dev = ExpectedDeviation(scaled, counts, gammas);
        envelope = std::max(envelope, dev.total);
        for (int k = 0; k < num_teams; ++k) {
          per_team[k] = std::max(per_team[k], dev.per_team[k]);
          report.kappa[k] = std::max(report.kappa[k], std::sqrt(n) * dev.per_team[k]);
        }
      }
    }
    report.rate.populations.push_back(n);
    report.rate.deviation.push_back(envelope);
    report.rate.stderr.push_back(0.0);
    report.rate.per_team.push_back(per_team);
    if (envelope <= 0.0) report.rate.degenerate = true;
    log_n.push_back(std::log(n));
    log_dev.push_back(envelope > 0.0 ? std::log(envelope) : 0.0);
  }
  report.rate.kappa = report.kappa;
  if (!report.rate.degenerate && log_n.size() >= 2) {
    LineFit line = FitLine(log_n, log_dev);
    report.rate.slope = line.slope;
    report.rate.intercept = line.intercept;
    report.rate.r_squared = line.r_squared;
  } else {
    report.rate.degenerate = true;
    report.rate.slope = std::numeric_limits<double>::quiet_NaN();
    report.rate.intercept = std::numeric_limits<double>::quiet_NaN();
    report.rate.r_squared = std::numeric_limits<double>::quiet_NaN();
  }

  MpeOptions mpe_options;
  mpe_options.stage = options.stage;
  mpe_options.workers = options.workers;
  report.all_within_bound = true;
  for (int n : options.populations) {
    GameSpec scaled = WithPopulation(spec, n);
    BoundRow row;
    row.population = n;
    LimitGame limit =
        BuildLimitGame(scaled, sets, DefaultResolutions(scaled), options.workers);
    MpeSolution limit_sol = SolveMpe(limit.game, mpe_options);
    row.limit_all_pure = limit_sol.all_pure;
    row.max_projection_error = limit.max_projection_error;
    row.lipschitz =
        EstimateLipschitz(scaled, limit.game.lattice, limit_sol.values,
                          kDefaultLipschitzPairCap, scaled.seed);
    row.bound = ApproximationBound(report.kappa, row.lipschitz,
                                   std::vector<int>(num_teams, n));

    LatticeGame finite = BuildFiniteGame(scaled, sets, options.workers);
    PolicyTable psi = ProjectLimitPolicy(limit, limit_sol.policy, finite);
    ValueTable values = EvaluatePolicyValues(finite, psi, options.workers);
    std::vector<double> initial = InitialCountLaw(finite);
    for (int k = 0; k < num_teams; ++k) {
      BestResponseResult br = BestResponse(finite, psi, k, options.workers);
      double gain = 0.0;
      for (size_t z = 0; z < initial.size(); ++z) {
        gain += initial[z] * (values[0][k][z] - br.values[0][z]);
      }
      for (size_t t = 0; t < br.values.size(); ++t) {
        for (size_t z = 0; z < initial.size(); ++z) {
          row.max_state_gain =
              std::max(row.max_state_gain, values[t][k][z] - br.values[t][z]);
        }
      }
      row.team_gain.push_back(gain);
      row.gain = std::max(row.gain, gain);
    }
    row.within_bound = row.gain <= row.bound;
    report.all_within_bound = report.all_within_bound && row.within_bound;
    report.rows.push_back(std::move(row));
  }
  for (size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].gain > report.rows[i - 1].gain + 1e-12) ++report.inversions;
  }
  return report;
}

}  // namespace mfteams
