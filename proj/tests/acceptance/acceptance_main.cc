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

// Acceptance checks: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "mfteams/app.h"
#include "mfteams/approx_metrics.h"
#include "mfteams/bound_pipeline.h"
#include "mfteams/count_dynamics.h"
#include "mfteams/mf_limit.h"
#include "mfteams/mpe_finite.h"
#include "mfteams/simulator.h"
#include "mfteams/static_game.h"
#include "mfteams/util.h"
#include "oracles.h"

namespace mfteams {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string JoinLabels(const StaticGame& g, std::vector<std::vector<int>> set) {
  std::vector<std::string> labels;
  for (const auto& p : set) labels.push_back(g.Label(p));
  std::sort(labels.begin(), labels.end());
  std::string out = "{";
  for (size_t i = 0; i < labels.size(); ++i) out += (i ? "," : "") + labels[i];
  return out + "}";
}

Outcome StaticExample() {
  StaticGame g = LoadStaticGameFile(oracle::DataPath("three_player_teams.json"));
  const std::string ne = JoinLabels(g, PureNashStatic(g));
  const std::string tne = JoinLabels(g, TeamNashStatic(g));
  const bool pass = ne == "{(B,L,II),(B,R,I),(T,L,I),(T,R,II)}" && tne == "{(B,L,II),(T,L,I)}";
  return {pass, "NE=" + ne + " TNE=" + tne +
                    "; note: the printed team set lists (B,R,II), which pays (0,0,0) and "
                    "is not a Nash profile; enumeration gives (B,L,II)"};
}

Outcome KernelExactness() {
  GameSpec spec = oracle::LoadData("reference_2team.json");
  JointLattice lattice = JointLattice::ForPopulations(spec);
  auto sets = BuildPrescriptionSets(spec, PrescriptionMode::kPure);
  double max_err = 0.0, max_sum_err = 0.0;
  int cases = 0;
  for (size_t z = 0; z < lattice.size(); ++z) {
    std::vector<CountVector> counts = lattice.CountsAt(z);
    for (size_t j0 = 0; j0 < sets[0].size(); ++j0) {
      for (size_t j1 = 0; j1 < sets[1].size(); ++j1) {
        std::vector<Prescription> gammas = {sets[0].items[j0], sets[1].items[j1]};
        JointCountDistribution q = JointTransitionKernel(counts, gammas, spec);
        oracle::JointLaw law = oracle::AgentLevelKernel(spec, counts, gammas);
        for (const auto& [m, p] : law) max_err = std::max(max_err, std::abs(q.ProbabilityOf(m) - p));
        for (size_t i = 0; i < q.support.size(); ++i) {
          auto it = law.find(q.support[i]);
          max_err = std::max(max_err, std::abs(q.probs[i] - (it == law.end() ? 0.0 : it->second)));
        }
        max_sum_err = std::max(max_sum_err, std::abs(q.total() - 1.0));
        ++cases;
      }
    }
  }
  return {max_err <= 1e-10 && max_sum_err <= 1e-10,
          std::to_string(cases) + " cases, max entry error " + Fmt(max_err) +
              ", max sum error " + Fmt(max_sum_err)};
}

Outcome SamplingFidelity() {
  GameSpec spec = oracle::LoadData("reference_2team.json");
  auto sets = BuildPrescriptionSets(spec, PrescriptionMode::kPure);
  double worst = 0.0;
  for (size_t j = 0; j < 16; ++j) {
    KernelCheck check = EmpiricalKernelCheck(spec, {{1, 1}, {1, 1}},
                                             {sets[0].items[j / 4], sets[1].items[j % 4]},
                                             100000, spec.seed + j);
    worst = std::max(worst, check.tv);
  }
  return {worst <= 0.01, "max TV over 16 profiles at 1e5 samples " + Fmt(worst)};
}

// Count lattices N = 1..6 of the reference instance, every pure profile.
template <typename Fn>
void ForTestGrid(Fn&& fn) {
  for (int n = 1; n <= 6; ++n) {
    GameSpec spec = WithPopulation(oracle::LoadData("reference_2team.json"), n);
    JointLattice lattice = JointLattice::ForPopulations(spec);
    auto sets = BuildPrescriptionSets(spec, PrescriptionMode::kGridded, 2);
    for (size_t z = 0; z < lattice.size(); ++z) {
      for (const auto& g0 : sets[0].items) {
        for (const auto& g1 : sets[1].items) fn(spec, lattice.CountsAt(z), std::vector{g0, g1});
      }
    }
  }
}

Outcome CostIdentity() {
  double gap = 0.0;
  ForTestGrid([&](const GameSpec& spec, const std::vector<CountVector>& counts,
                  const std::vector<Prescription>& gammas) {
    MeanField z = CountMeanField(counts, spec);
    for (int k = 0; k < 2; ++k) {
      for (int t = 1; t <= spec.horizon; ++t) {
        double agent = oracle::AgentLevelStageCost(spec, counts, gammas[k], k, t);
        gap = std::max(gap, std::abs(StageCost(z, gammas[k], spec, k, t) -
                                     LimitStageCost(z, gammas[k], spec, k, t)));
        gap = std::max(gap, std::abs(agent - LimitStageCost(z, gammas[k], spec, k, t)));
      }
    }
  });
  return {gap <= 1e-12, "max |l - l_bar| " + Fmt(gap)};
}

Outcome FlowConsistency() {
  double gap = 0.0;
  ForTestGrid([&](const GameSpec& spec, const std::vector<CountVector>& counts,
                  const std::vector<Prescription>& gammas) {
    MeanField z = CountMeanField(counts, spec);
    for (int k = 0; k < 2; ++k) {
      CountDistribution q = TeamTransitionKernel(counts[k], z, gammas[k], spec, k);
      std::vector<double> flow = TeamFlow(spec, k, z, gammas[k]);
      const int n = spec.teams[k].population;
      for (int s = 0; s < 2; ++s) {
        double mean = 0.0;
        for (size_t i = 0; i < q.support.size(); ++i) mean += q.probs[i] * q.support[i][s] / n;
        gap = std::max(gap, std::abs(mean - flow[s]));
      }
    }
  });
  return {gap <= 1e-10, "max |E[M'/N] - flow| " + Fmt(gap)};
}

Outcome ConcentrationRate() {
  GameSpec spec = oracle::LoadData("iid_probe.json");
  RateFit fit = FitRate(spec, MeanField{{{0.5, 0.5}}}, {Prescription::Deterministic({0, 0}, 2)},
                        {2, 4, 8, 16, 32, 64});
  const bool pass = !fit.degenerate && fit.slope >= -0.65 && fit.slope <= -0.35 &&
                    fit.r_squared >= 0.95;
  return {pass, "slope " + Fmt(fit.slope) + ", R^2 " + Fmt(fit.r_squared)};
}

struct Reference {
  GameSpec spec;
  LatticeGame game;
  MpeSolution sol;
};

const Reference& SolvedReference() {
  static const Reference* ref = [] {
    GameSpec spec = oracle::LoadData("reference_2team.json");
    LatticeGame game = BuildFiniteGame(spec, BuildPrescriptionSets(spec, PrescriptionMode::kPure));
    MpeOptions opts;
    opts.stage.policy = EquilibriumPolicy::kPureOnly;
    MpeSolution sol = SolveMpe(game, opts);
    return new Reference{spec, std::move(game), std::move(sol)};
  }();
  return *ref;
}

Outcome MpeCertificate() {
  const Reference& ref = SolvedReference();
  Certificate cert = VerifyMpe(ref.game, ref.sol.policy);
  return {ref.sol.all_pure && cert.max_gain <= 1e-9,
          "all pure " + std::string(ref.sol.all_pure ? "yes" : "no") + ", max gain " +
              Fmt(cert.max_gain) + " over " + std::to_string(cert.entries.size()) + " entries"};
}

Outcome ExactVsSimulated() {
  const Reference& ref = SolvedReference();
  TotalCostReport exact = EvaluateTotalCost(ref.game, ref.sol.policy, InitialCountLaw(ref.game));
  SimResult sim = EstimateCost(ref.spec, LiftPolicy(ref.game, ref.sol.policy), 10000,
                               ref.spec.seed, DefaultWorkers());
  bool pass = true;
  std::string detail;
  for (int k = 0; k < 2; ++k) {
    const double z = std::abs(sim.mean[k] - exact.cost[k]) / sim.stderr[k];
    pass = pass && z <= 3.0;
    detail += (k ? "; " : "") + std::string("team ") + std::to_string(k) + " exact " +
              Fmt(exact.cost[k]) + " sim " + Fmt(sim.mean[k]) + " (" + Fmt(z) + " se)";
  }
  return {pass, detail};
}

Outcome SingleTeamReduction() {
  GameSpec spec = oracle::LoadData("single_team.json");
  LatticeGame game = BuildFiniteGame(spec, BuildPrescriptionSets(spec, PrescriptionMode::kPure));
  MpeSolution sol = SolveMpe(game);
  std::vector<double> brute = oracle::BruteForceBestValues(
      spec, game.sets, 0, [](int, size_t) { return std::vector<int>{0}; });
  double gap = 0.0;
  for (size_t z = 0; z < brute.size(); ++z) gap = std::max(gap, std::abs(sol.values[0][0][z] - brute[z]));
  return {gap <= 1e-10, "max |V_dp - V_brute| " + Fmt(gap) + " over 4^6 strategies"};
}

Outcome BoundPipeline() {
  GameSpec spec = oracle::LoadData("reference_2team.json");
  BoundOptions opts;
  opts.workers = DefaultWorkers();
  BoundReport report = RunBoundPipeline(spec, opts);
  std::string detail;
  for (const BoundRow& row : report.rows) {
    detail += "N=" + std::to_string(row.population) + " gain " + Fmt(row.gain) + " <= " +
              Fmt(row.bound) + "; ";
  }
  detail += std::to_string(report.inversions) + " inversion(s)";
  return {report.all_within_bound && report.inversions <= 1, detail};
}

Outcome Reproducibility() {
  std::vector<fs::path> dirs;
  for (const char* tag : {"run_a", "run_b"}) {
    ExperimentConfig c;
    c.mode = "compare";
    c.spec_path = oracle::DataPath("reference_2team.json");
    c.out_dir = (fs::path(MFTEAMS_TEST_TMP) / tag).string();
    c.episodes = 10000;
    std::ostringstream out, err;
    if (Run(c, out, err) != kExitOk) return {false, "compare failed: " + err.str()};
    dirs.push_back(fs::path(c.out_dir) / "compare");
  }
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    const std::string name = entry.path().filename().string();
    if (name == "timing.json") continue;
    if (oracle::ReadFile(entry.path().string()) != oracle::ReadFile((dirs[1] / name).string())) {
      return {false, name + " differs"};
    }
    ++files;
  }
  return {files > 0, std::to_string(files) + " result files byte-identical"};
}

}  // namespace
}  // namespace mfteams

int main() {
  using namespace mfteams;
  struct Criterion {
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {"static_team_example", StaticExample},
      {"kernel_exactness", KernelExactness},
      {"sampling_fidelity", SamplingFidelity},
      {"cost_identity", CostIdentity},
      {"flow_consistency", FlowConsistency},
      {"concentration_rate", ConcentrationRate},
      {"mpe_certificate", MpeCertificate},
      {"exact_vs_simulated", ExactVsSimulated},
      {"single_team_reduction", SingleTeamReduction},
      {"bound_pipeline", BoundPipeline},
      {"reproducibility", Reproducibility},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("[%s] %2zu %-22s %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
