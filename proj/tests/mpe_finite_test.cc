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

#include <cmath>

#include <gtest/gtest.h>

#include "mfteams/errors.h"
#include "oracles.h"

namespace mfteams {
namespace {

LatticeGame Finite(const GameSpec& spec) {
  return BuildFiniteGame(spec, BuildPrescriptionSets(spec, PrescriptionMode::kPure), 2);
}

TEST(MpeFiniteTest, ReferenceEquilibriumCertifies) {
  LatticeGame game = Finite(oracle::LoadData("reference_2team.json"));
  MpeSolution sol = SolveMpe(game, {{}, 2});
  EXPECT_TRUE(sol.all_pure);
  Certificate cert = VerifyMpe(game, sol.policy, 2);
  EXPECT_LE(cert.max_gain, 1e-9);
  EXPECT_LE(cert.max_pointwise_gain, 1e-9);
  EXPECT_EQ(cert.entries.size(), 2u * 9u * 2u);
  for (const auto& e : cert.entries) EXPECT_GE(e.gain, -1e-12);
  ValueTable eval = EvaluatePolicyValues(game, sol.policy, 2);
  for (int t = 0; t < 2; ++t) {
    for (int k = 0; k < 2; ++k) {
      for (size_t z = 0; z < 9; ++z) {
        EXPECT_NEAR(eval[t][k][z], sol.values[t][k][z], 1e-12);
      }
    }
  }
}

TEST(MpeFiniteTest, WorkerCountDoesNotChangeResults) {
  LatticeGame a = Finite(oracle::LoadData("reference_2team.json"));
  MpeSolution one = SolveMpe(a, {{}, 1});
  MpeSolution four = SolveMpe(a, {{}, 4});
  EXPECT_EQ(one.values, four.values);
}

TEST(MpeFiniteTest, SingleTeamDpEqualsBruteForce) {
  GameSpec spec = oracle::LoadData("single_team.json");
  LatticeGame game = Finite(spec);
  MpeSolution sol = SolveMpe(game);
  for (int from = 1; from <= 2; ++from) {
    std::vector<double> brute = oracle::BruteForceBestValues(
        spec, game.sets, 0, [](int, size_t) { return std::vector<int>{0}; }, from);
    for (size_t z = 0; z < brute.size(); ++z) {
      EXPECT_NEAR(sol.values[from - 1][0][z], brute[z], 1e-10) << "t=" << from;
    }
  }
}

TEST(MpeFiniteTest, BestResponseEqualsBruteForceTwoTeams) {
  GameSpec spec = WithPopulation(oracle::LoadData("reference_2team.json"), 1);
  LatticeGame game = Finite(spec);
  MpeSolution sol = SolveMpe(game);
  ASSERT_TRUE(sol.all_pure);
  // Fixed opponent: the first item everywhere, which is not an equilibrium.
  PolicyTable fixed = sol.policy;
  for (auto& stage : fixed.stages) {
    for (auto& eq : stage) eq = MakePureEquilibrium(AssembleStageGame(game, 1, 0, nullptr), {0, 3});
  }
  for (int k = 0; k < 2; ++k) {
    for (const PolicyTable* psi : {&sol.policy, &fixed}) {
      BestResponseResult br = BestResponse(game, *psi, k);
      std::vector<double> brute = oracle::BruteForceBestValues(
          spec, game.sets, k,
          [&](int t, size_t z) { return psi->at(t, z).profile; });
      for (size_t z = 0; z < brute.size(); ++z) {
        EXPECT_NEAR(br.values[0][z], brute[z], 1e-10);
      }
    }
  }
}

TEST(MpeFiniteTest, BestResponseAgainstEquilibriumHasNoGain) {
  LatticeGame game = Finite(oracle::LoadData("reference_2team.json"));
  MpeSolution sol = SolveMpe(game);
  for (int k = 0; k < 2; ++k) {
    BestResponseResult br = BestResponse(game, sol.policy, k);
    PolicyTable replaced = ReplaceTeam(sol.policy, k, br.choice, game);
    ValueTable v = EvaluatePolicyValues(game, replaced);
    for (int t = 0; t < 2; ++t) {
      for (size_t z = 0; z < 9; ++z) {
        EXPECT_NEAR(v[t][k][z], br.values[t][z], 1e-12);
        EXPECT_LE(br.values[t][z], sol.values[t][k][z] + 1e-12);
      }
    }
  }
}

TEST(MpeFiniteTest, InitialLawAndTotalCost) {
  LatticeGame game = Finite(oracle::LoadData("reference_2team.json"));
  std::vector<double> init = InitialCountLaw(game);
  double sum = 0.0;
  for (double p : init) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-14);
  // P(M1 = (1,1), M2 = (0,2)) = 2 * 0.6 * 0.4 * 0.25.
  EXPECT_NEAR(init[game.lattice.IndexOfCounts({{1, 1}, {0, 2}})], 0.12, 1e-15);
  MpeSolution sol = SolveMpe(game);
  TotalCostReport report = EvaluateTotalCost(game, sol.policy, init);
  for (double m : report.mass_by_stage) EXPECT_NEAR(m, 1.0, 1e-12);
  for (int k = 0; k < 2; ++k) {
    double want = 0.0;
    for (size_t z = 0; z < init.size(); ++z) want += init[z] * sol.values[0][k][z];
    EXPECT_NEAR(report.cost[k], want, 1e-12);
  }
}

TEST(MpeFiniteTest, MixedKernelIsLinear) {
  LatticeGame game = Finite(oracle::LoadData("reference_2team.json"));
  std::vector<double> mix = {0.1, 0.2, 0.3, 0.4};
  for (size_t z = 0; z < 9; ++z) {
    std::vector<double> q = MixedKernel(game, z, 1, mix);
    for (size_t m = 0; m < q.size(); ++m) {
      double want = 0.0;
      for (int j = 0; j < 4; ++j) want += mix[j] * game.kernels[z][1][j][m];
      EXPECT_NEAR(q[m], want, 1e-15);
    }
    double c = 0.0;
    for (int j = 0; j < 4; ++j) c += mix[j] * game.costs[0][z][1][j];
    EXPECT_NEAR(MixedStageCost(game, 1, z, 1, mix), c, 1e-15);
  }
}

TEST(MpeFiniteTest, KernelsAreStochastic) {
  LatticeGame game = Finite(WithPopulation(oracle::LoadData("reference_2team.json"), 3));
  for (const auto& at_z : game.kernels) {
    for (const auto& team : at_z) {
      for (const auto& q : team) {
        double sum = 0.0;
        for (double p : q) {
          EXPECT_GE(p, 0.0);
          sum += p;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
    }
  }
}

TEST(MpeFiniteTest, MatchingPenniesNeedsMixedStage) {
  GameSpec spec = oracle::LoadData("matching_pennies.json");
  LatticeGame game = Finite(spec);
  MpeSolution sol = SolveMpe(game);
  EXPECT_FALSE(sol.all_pure);
  Certificate cert = VerifyMpe(game, sol.policy);
  EXPECT_LE(cert.max_gain, 1e-9);
  EXPECT_GT(cert.mixed_points, 0);
  // Each team wins half the time at the last stage.
  TotalCostReport total = EvaluateTotalCost(game, sol.policy, InitialCountLaw(game));
  EXPECT_NEAR(total.cost[0], 0.5, 1e-9);
  EXPECT_NEAR(total.cost[1], 0.5, 1e-9);
  MpeOptions strict;
  strict.stage.policy = EquilibriumPolicy::kPureOnly;
  EXPECT_THROW(SolveMpe(game, strict), NoPureEquilibriumError);
}

}  // namespace
}  // namespace mfteams
