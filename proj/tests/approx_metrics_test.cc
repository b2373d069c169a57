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

#include "mfteams/approx_metrics.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mfteams/lattice.h"
#include "mfteams/mf_limit.h"
#include "oracles.h"

namespace mfteams {
namespace {

std::vector<double> RandomLaw(int n, std::mt19937_64& gen) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double sum = 0.0;
  for (double& x : p) sum += (x = e(gen));
  for (double& x : p) x /= sum;
  return p;
}

std::vector<double> LineMetric(int n) {
  std::vector<double> d(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) d[i * n + j] = std::abs(i - j);
  }
  return d;
}

TEST(ApproxMetricsTest, DiscreteMetricGivesTotalVariation) {
  std::mt19937_64 gen(1);
  std::vector<double> d = {0, 1, 1, 1, 0, 1, 1, 1, 0};
  for (int i = 0; i < 50; ++i) {
    std::vector<double> p = RandomLaw(3, gen), q = RandomLaw(3, gen);
    double tv = 0.0;
    for (int s = 0; s < 3; ++s) tv += 0.5 * std::abs(p[s] - q[s]);
    EXPECT_NEAR(Wasserstein(p, q, d), tv, 1e-14);
  }
}

TEST(ApproxMetricsTest, LineMetricGivesCdfDistance) {
  std::mt19937_64 gen(2);
  std::vector<double> d = LineMetric(5);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> p = RandomLaw(5, gen), q = RandomLaw(5, gen);
    double cdf = 0.0, want = 0.0;
    for (int s = 0; s < 4; ++s) {
      cdf += p[s] - q[s];
      want += std::abs(cdf);
    }
    EXPECT_NEAR(Wasserstein(p, q, d), want, 1e-12);
  }
}

// Property: metric axioms and the Kantorovich lower bound for a general metric.
TEST(ApproxMetricsTest, GeneralMetricProperties) {
  std::mt19937_64 gen(3);
  const int n = 4;
  std::vector<std::vector<double>> pts = {{0, 0}, {1, 0}, {0, 2}, {3, 1}};
  std::vector<double> d(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      d[i * n + j] = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
    }
  }
  for (int it = 0; it < 100; ++it) {
    std::vector<double> p = RandomLaw(n, gen), q = RandomLaw(n, gen), r = RandomLaw(n, gen);
    const double pq = Wasserstein(p, q, d);
    EXPECT_NEAR(pq, Wasserstein(q, p, d), 1e-12);
    EXPECT_NEAR(Wasserstein(p, p, d), 0.0, 1e-15);
    EXPECT_LE(pq, Wasserstein(p, r, d) + Wasserstein(r, q, d) + 1e-12);
    for (int j = 0; j < n; ++j) {
      double dual = 0.0;
      for (int s = 0; s < n; ++s) dual += d[s * n + j] * (p[s] - q[s]);
      EXPECT_GE(pq, std::abs(dual) - 1e-12);
    }
  }
}

TEST(ApproxMetricsTest, JointDistanceSumsTeams) {
  GameSpec spec = oracle::LoadData("reference_2team.json");
  MeanField a{{{1.0, 0.0}, {0.25, 0.75}}};
  MeanField b{{{0.5, 0.5}, {0.5, 0.5}}};
  EXPECT_NEAR(JointDistance(spec, a, b), 0.5 + 0.25, 1e-15);
}

TEST(ApproxMetricsTest, ExpectedDeviationMatchesAgentOracle) {
  GameSpec spec = WithPopulation(oracle::LoadData("reference_2team.json"), 3);
  JointLattice lattice = JointLattice::ForPopulations(spec);
  auto sets = BuildPrescriptionSets(spec, PrescriptionMode::kPure);
  for (size_t z = 0; z < lattice.size(); ++z) {
    std::vector<CountVector> counts = lattice.CountsAt(z);
    std::vector<Prescription> gammas = {sets[0].items[z % 4], sets[1].items[(z / 4) % 4]};
    MeanField mf = oracle::MeanFieldOf(spec, counts);
    MeanField flow = Flow(spec, mf, gammas);
    double want = 0.0;
    for (const auto& [m, p] : oracle::AgentLevelKernel(spec, counts, gammas)) {
      for (int k = 0; k < 2; ++k) {
        double tv = 0.0;
        for (int s = 0; s < 2; ++s) tv += 0.5 * std::abs(m[k][s] / 3.0 - flow.per_team[k][s]);
        want += p * tv;
      }
    }
    DeviationEstimate est = ExpectedDeviation(spec, counts, gammas);
    EXPECT_FALSE(est.monte_carlo);
    EXPECT_NEAR(est.total, want, 1e-12);
  }
}

TEST(ApproxMetricsTest, MonteCarloAgreesWithExact) {
  GameSpec spec = WithPopulation(oracle::LoadData("reference_2team.json"), 6);
  std::vector<CountVector> counts = {{3, 3}, {2, 4}};
  std::vector<Prescription> gammas = {Prescription::Uniform(2, 2),
                                      Prescription::Deterministic({1, 0}, 2)};
  DeviationEstimate exact = ExpectedDeviation(spec, counts, gammas);
  DeviationEstimate mc = ExpectedDeviation(spec, counts, gammas, 1);
  EXPECT_TRUE(mc.monte_carlo);
  EXPECT_GT(mc.stderr, 0.0);
  EXPECT_NEAR(mc.total, exact.total, 4 * mc.stderr);
}

TEST(ApproxMetricsTest, FitLineRecoversLine) {
  std::vector<double> x = {0, 1, 2, 3}, y = {1, -1, -3, -5};
  LineFit f = FitLine(x, y);
  EXPECT_NEAR(f.slope, -2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
}

TEST(ApproxMetricsTest, IidProbeDecaysAtSquareRootRate) {
  GameSpec spec = oracle::LoadData("iid_probe.json");
  MeanField z{{{0.5, 0.5}}};
  std::vector<Prescription> gammas = {Prescription::Deterministic({0, 0}, 2)};
  RateFit fit = FitRate(spec, z, gammas, {2, 4, 8, 16, 32, 64});
  EXPECT_FALSE(fit.degenerate);
  EXPECT_GE(fit.slope, -0.65);
  EXPECT_LE(fit.slope, -0.35);
  EXPECT_GE(fit.r_squared, 0.95);
  // E|Bin(N,1/2)/N - 1/2| for N = 2 is 1/4.
  EXPECT_NEAR(fit.deviation[0], 0.25, 1e-14);
  EXPECT_THROW(FitRate(spec, z, gammas, {2, 4, 8}), std::invalid_argument);
  EXPECT_THROW(FitRate(spec, MeanField{{{0.3, 0.7}}}, gammas, {2, 4, 8, 16}),
               std::invalid_argument);
}

TEST(ApproxMetricsTest, LipschitzMatchesPairScan) {
  GameSpec spec = oracle::LoadData("reference_2team.json");
  JointLattice grid = JointLattice::ForResolutions(spec, {3, 4});
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  std::vector<std::vector<std::vector<double>>> values(
      2, std::vector<std::vector<double>>(2, std::vector<double>(grid.size())));
  for (auto& t : values) for (auto& k : t) for (double& v : k) v = nd(gen);
  auto lip = EstimateLipschitz(spec, grid, values);
  auto sampled = EstimateLipschitz(spec, grid, values, 10000, 3);
  for (int t = 0; t < 2; ++t) {
    for (int k = 0; k < 2; ++k) {
      double want = 0.0;
      for (size_t a = 0; a < grid.size(); ++a) {
        for (size_t b = 0; b < grid.size(); ++b) {
          if (a == b) continue;
          double d = JointDistance(spec, grid.MeanFieldAt(a), grid.MeanFieldAt(b));
          want = std::max(want, std::abs(values[t][k][a] - values[t][k][b]) / d);
        }
      }
      EXPECT_NEAR(lip[k][t], want, 1e-12);
      EXPECT_LE(sampled[k][t], want + 1e-12);
      EXPECT_GT(sampled[k][t], 0.0);
    }
  }
}

TEST(ApproxMetricsTest, BoundFormula) {
  std::vector<double> kappa = {0.5, 0.25};
  std::vector<std::vector<double>> lip = {{1.0, 2.0}, {4.0, 0.0}};
  EXPECT_NEAR(ApproximationBound(kappa, lip, {4, 16}),
              2 * (0.5 * 3.0 / 2.0 + 0.25 * 4.0 / 4.0), 1e-15);
}

TEST(ApproxMetricsTest, LimitConsistencyCostGapIsZero) {
  GameSpec spec = oracle::LoadData("reference_2team.json");
  JointLattice lattice = JointLattice::ForPopulations(spec);
  auto sets = BuildPrescriptionSets(spec, PrescriptionMode::kPure);
  std::vector<LimitCheckCase> cases;
  for (size_t z = 0; z < lattice.size(); ++z) {
    for (int j = 0; j < 16; ++j) {
      cases.push_back({lattice.CountsAt(z), {sets[0].items[j / 4], sets[1].items[j % 4]}});
    }
  }
  LimitCheckReport report = LimitConsistencyCheck(spec, cases, {10.0, 10.0});
  EXPECT_LE(report.max_cost_gap, 1e-12);
  EXPECT_LE(report.max_deviation_excess, 0.0);
  EXPECT_EQ(report.cost_gap.size(), cases.size());
}

}  // namespace
}  // namespace mfteams
