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

#include "mfteams/simulator.h"

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "mfteams/mpe_finite.h"
#include "oracles.h"

namespace mfteams {
namespace {

struct Solved {
  GameSpec spec;
  LatticeGame game;
  MpeSolution sol;
};

Solved SolveReference() {
  GameSpec spec = oracle::LoadData("reference_2team.json");
  LatticeGame game = BuildFiniteGame(spec, BuildPrescriptionSets(spec, PrescriptionMode::kPure));
  MpeSolution sol = SolveMpe(game);
  return {spec, game, sol};
}

TEST(SimulatorTest, LiftAndProjectRoundTrip) {
  Solved s = SolveReference();
  AgentPolicy pi = LiftPolicy(s.game, s.sol.policy);
  EXPECT_EQ(pi.horizon(), 2);
  PolicyTable back = ProjectPolicy(pi, s.game);
  for (int t = 1; t <= 2; ++t) {
    for (size_t z = 0; z < s.game.lattice.size(); ++z) {
      EXPECT_EQ(back.at(t, z).mixture, s.sol.policy.at(t, z).mixture);
      const int j = s.sol.policy.at(t, z).profile[1];
      std::span<const double> row = pi.Row(t, z, 1, 1);
      EXPECT_EQ(row[0], s.game.sets[1].items[j](1, 0));
    }
  }
}

TEST(SimulatorTest, EpisodesAreReproducible) {
  Solved s = SolveReference();
  AgentPolicy pi = LiftPolicy(s.game, s.sol.policy);
  EpisodeOptions opts;
  opts.record_counts = true;
  EpisodeResult a = SimulateEpisode(s.spec, pi, 42, 7, opts);
  EpisodeResult b = SimulateEpisode(s.spec, pi, 42, 7, opts);
  EXPECT_EQ(a.cost, b.cost);
  EXPECT_EQ(a.counts, b.counts);
  ASSERT_EQ(a.counts.size(), 2u);
  for (const auto& stage : a.counts) {
    for (int k = 0; k < 2; ++k) EXPECT_EQ(std::accumulate(stage[k].begin(), stage[k].end(), 0), 2);
  }
  int differ = 0;
  for (int e = 0; e < 20; ++e) differ += SimulateEpisode(s.spec, pi, 42, e).cost != a.cost;
  EXPECT_GT(differ, 0);
}

TEST(SimulatorTest, WorkersDoNotChangeEstimates) {
  Solved s = SolveReference();
  AgentPolicy pi = LiftPolicy(s.game, s.sol.policy);
  SimResult one = EstimateCost(s.spec, pi, 500, 3, 1);
  SimResult many = EstimateCost(s.spec, pi, 500, 3, 4);
  EXPECT_EQ(one.per_episode, many.per_episode);
  EXPECT_EQ(one.mean, many.mean);
}

TEST(SimulatorTest, EstimateMatchesExactCost) {
  Solved s = SolveReference();
  AgentPolicy pi = LiftPolicy(s.game, s.sol.policy);
  TotalCostReport exact = EvaluateTotalCost(s.game, s.sol.policy, InitialCountLaw(s.game));
  SimResult sim = EstimateCost(s.spec, pi, 20000, 17, 4);
  for (int k = 0; k < 2; ++k) {
    EXPECT_GT(sim.stderr[k], 0.0);
    EXPECT_NEAR(sim.mean[k], exact.cost[k], 4 * sim.stderr[k]);
  }
}

// Exchangeability: relabeling agents leaves the law of the costs unchanged.
TEST(SimulatorTest, AgentRelabelingPreservesMean) {
  Solved s = SolveReference();
  AgentPolicy pi = LiftPolicy(s.game, s.sol.policy);
  EpisodeOptions rotated;
  rotated.agent_label_rotation = 1;
  const int n = 20000;
  std::vector<double> sum(2, 0.0), sq(2, 0.0);
  for (int e = 0; e < n; ++e) {
    EpisodeResult r = SimulateEpisode(s.spec, pi, 5, e, rotated);
    for (int k = 0; k < 2; ++k) {
      sum[k] += r.cost[k];
      sq[k] += r.cost[k] * r.cost[k];
    }
  }
  TotalCostReport exact = EvaluateTotalCost(s.game, s.sol.policy, InitialCountLaw(s.game));
  for (int k = 0; k < 2; ++k) {
    double mean = sum[k] / n;
    double se = std::sqrt((sq[k] / n - mean * mean) / n);
    EXPECT_NEAR(mean, exact.cost[k], 4 * se);
  }
}

TEST(SimulatorTest, MixedPolicyIsRealizedPublicly) {
  Solved s = SolveReference();
  PolicyTable mixed = s.sol.policy;
  for (auto& stage : mixed.stages) {
    for (auto& eq : stage) {
      eq.pure = false;
      eq.profile.clear();
      eq.mixture[0] = {0.5, 0.0, 0.0, 0.5};
      eq.mixture[1] = {0.0, 0.3, 0.7, 0.0};
    }
  }
  AgentPolicy pi = LiftPolicy(s.game, mixed);
  TotalCostReport exact = EvaluateTotalCost(s.game, mixed, InitialCountLaw(s.game));
  SimResult sim = EstimateCost(s.spec, pi, 20000, 23, 4);
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(sim.mean[k], exact.cost[k], 4 * sim.stderr[k]);
}

TEST(SimulatorTest, EmpiricalKernelIsClose) {
  GameSpec spec = oracle::LoadData("reference_2team.json");
  auto sets = BuildPrescriptionSets(spec, PrescriptionMode::kPure);
  KernelCheck check = EmpiricalKernelCheck(spec, {{1, 1}, {2, 0}},
                                           {sets[0].items[1], sets[1].items[2]}, 20000, 9);
  EXPECT_EQ(check.samples, 20000);
  EXPECT_GT(check.support, 1u);
  EXPECT_LE(check.tv, 0.02);
  EXPECT_LE(check.tv, 2 * check.radius);
}

}  // namespace
}  // namespace mfteams
