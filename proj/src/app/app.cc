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

#include "mfteams/app.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"
#include "mfteams/approx_metrics.h"
#include "mfteams/bound_pipeline.h"
#include "mfteams/errors.h"
#include "mfteams/game_model.h"
#include "mfteams/lattice.h"
#include "mfteams/mf_limit.h"
#include "mfteams/mpe_finite.h"
#include "mfteams/rng.h"
#include "mfteams/simd/kernels.h"
#include "mfteams/simulator.h"
#include "mfteams/stage_game.h"
#include "mfteams/static_game.h"
#include "mfteams/util.h"

namespace mfteams {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Collects the artifacts of one run before anything touches the disk.
class Artifacts {
 public:
  Artifacts(fs::path dir, std::string spec_hash)
      : dir_(std::move(dir)), spec_hash_(std::move(spec_hash)) {}

  const std::string& spec_hash() const { return spec_hash_; }

  void Json(const std::string& name, json doc) {
    doc["spec_hash"] = spec_hash_;
    files_[name] = doc.dump(2) + "\n";
  }

  // CSV with a leading "# spec_hash=" line.
  void Csv(const std::string& name, const std::string& header,
           const std::vector<std::vector<std::string>>& rows) {
    std::string text = "# spec_hash=" + spec_hash_ + "\n" + header + "\n";
    for (const auto& row : rows) {
      for (size_t i = 0; i < row.size(); ++i) {
        if (i > 0) text += ",";
        text += row[i];
      }
      text += "\n";
    }
    files_[name] = std::move(text);
  }

  void Flush() const {
    fs::create_directories(dir_);
    for (const auto& [name, text] : files_) {
      std::ofstream out(dir_ / name, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
      out << text;
    }
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, text] : files_) out.push_back(name);
    return out;
  }

 private:
  fs::path dir_;
  std::string spec_hash_;
  std::map<std::string, std::string> files_;
};

std::string Num(double v) { return FormatDouble(v); }

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string SpecHash(const GameSpec& spec) {
  return HexDigest(Fnv1a64(SpecToJson(spec).dump()));
}

json ConfigJson(const ExperimentConfig& c, std::uint64_t seed) {
  return json{{"mode", c.mode},
              {"spec", fs::path(c.spec_path).filename().string()},
              {"seed", seed},
              {"episodes", c.episodes},
              {"grid_g", c.grid_g},
              {"simplex_n", c.simplex_n},
              {"n_sweep", c.n_sweep},
              {"kappa_sweep", c.kappa_sweep},
              {"pure_only", c.pure_only}};
}

json RowsJson(const Prescription& gamma) {
  json rows = json::array();
  for (int s = 0; s < gamma.num_states; ++s) {
    rows.push_back(std::vector<double>(gamma.row(s).begin(), gamma.row(s).end()));
  }
  return rows;
}

json TeamPlayJson(const StageEquilibrium& eq, const PrescriptionSet& set, int k) {
  const std::vector<double>& x = eq.mixture[k];
  json out;
  int support = 0;
  for (double v : x) support += v > 0.0;
  if (support == 1) {
    int j = static_cast<int>(std::max_element(x.begin(), x.end()) - x.begin());
    out["index"] = j;
    out["prescription"] = RowsJson(set.items[j]);
  } else {
    json mix = json::array();
    for (size_t j = 0; j < x.size(); ++j) {
      if (x[j] <= 0.0) continue;
      mix.push_back({{"weight", x[j]},
                     {"index", j},
                     {"prescription", RowsJson(set.items[j])}});
    }
    out["mixture"] = std::move(mix);
  }
  return out;
}

json CountsJson(const std::vector<CountVector>& counts) {
  json out = json::array();
  for (const auto& m : counts) out.push_back(m);
  return out;
}

json PolicyJson(const LatticeGame& game, const PolicyTable& psi,
                const ValueTable& values, bool grid) {
  json entries = json::array();
  for (int t = 1; t <= game.horizon(); ++t) {
    for (size_t z = 0; z < game.lattice.size(); ++z) {
      const StageEquilibrium& eq = psi.at(t, z);
      for (int k = 0; k < game.num_teams(); ++k) {
        json e = {{"stage", t}, {"z_id", z}};
        if (grid) {
          e["z"] = game.lattice.RationalLabel(z);
        } else {
          e["z"] = CountsJson(game.lattice.CountsAt(z));
        }
        e["team"] = k;
        e["kind"] = eq.pure ? "pure" : "mixed";
        e.update(TeamPlayJson(eq, game.sets[k], k));
        e["value"] = values[t - 1][k][z];
        e["epsilon"] = eq.epsilon;
        entries.push_back(std::move(e));
      }
    }
  }
  return json{{"entries", std::move(entries)}};
}

std::vector<std::vector<std::string>> ValueRows(const LatticeGame& game,
                                                const ValueTable& values,
                                                bool grid) {
  std::vector<std::vector<std::string>> rows;
  for (int t = 1; t <= game.horizon(); ++t) {
    for (size_t z = 0; z < game.lattice.size(); ++z) {
      for (int k = 0; k < game.num_teams(); ++k) {
        std::string label =
            grid ? game.lattice.RationalLabel(z) : game.lattice.Label(z);
        rows.push_back({std::to_string(t), std::to_string(z), "\"" + label + "\"",
                        std::to_string(k), Num(values[t - 1][k][z])});
      }
    }
  }
  return rows;
}

std::vector<PrescriptionSet> SetsFor(const GameSpec& spec,
                                     const ExperimentConfig& c) {
  if (c.grid_g > 0) {
    return BuildPrescriptionSets(spec, PrescriptionMode::kGridded, c.grid_g);
  }
  return BuildPrescriptionSets(spec, PrescriptionMode::kPure);
}

MpeOptions MpeOptionsFor(const ExperimentConfig& c, int workers) {
  MpeOptions options;
  options.stage.policy =
      c.pure_only ? EquilibriumPolicy::kPureOnly : EquilibriumPolicy::kFallback;
  options.workers = workers;
  return options;
}

struct FiniteRun {
  LatticeGame game;
  MpeSolution sol;
};

FiniteRun SolveFinite(const GameSpec& spec, const ExperimentConfig& c, int workers) {
  FiniteRun run{BuildFiniteGame(spec, SetsFor(spec, c), workers), {}};
  run.sol = SolveMpe(run.game, MpeOptionsFor(c, workers));
  return run;
}

void RunValidate(const GameSpec& spec, Artifacts& art, std::ostream& out) {
  json teams = json::array();
  size_t joint = 1;
  std::vector<LipschitzBounds> lip = ComputeLipschitzBounds(spec);
  for (int k = 0; k < spec.num_teams(); ++k) {
    const TeamModel& team = spec.teams[k];
    size_t size = LatticeSize(team.population, team.num_states());
    joint = joint > SIZE_MAX / std::max<size_t>(size, 1) ? SIZE_MAX : joint * size;
    teams.push_back({{"states", team.num_states()},
                     {"actions", team.num_actions()},
                     {"population", team.population},
                     {"lattice_size", size},
                     {"cost_lipschitz", lip[k].cost},
                     {"transition_lipschitz", lip[k].transition_l1}});
  }
  art.Json("validation.json", {{"valid", true},
                               {"horizon", spec.horizon},
                               {"teams", std::move(teams)},
                               {"joint_lattice_size", joint}});
  out << "valid: " << spec.num_teams() << " teams, horizon " << spec.horizon
      << ", joint lattice " << joint << "\n";
}

void RunSolveFinite(const GameSpec& spec, const ExperimentConfig& c, int workers,
                    Artifacts& art, std::ostream& out) {
  FiniteRun run = SolveFinite(spec, c, workers);
  Certificate cert = VerifyMpe(run.game, run.sol.policy, workers);
  TotalCostReport total =
      EvaluateTotalCost(run.game, run.sol.policy, InitialCountLaw(run.game));
  art.Json("policy.json", PolicyJson(run.game, run.sol.policy, run.sol.values, false));
  art.Csv("values.csv", "stage,z_id,z,team,value",
          ValueRows(run.game, run.sol.values, false));
  std::vector<std::vector<std::string>> rows;
  for (const CertificateEntry& e : cert.entries) {
    rows.push_back({std::to_string(e.stage), std::to_string(e.z),
                    std::to_string(e.team), Num(e.gain)});
  }
  art.Csv("certificate.csv", "stage,z_id,team,gain", rows);
  art.Json("summary.json",
           {{"lattice_size", run.game.lattice.size()},
            {"all_pure", run.sol.all_pure},
            {"mixed_points", cert.mixed_points},
            {"max_stage_epsilon", run.sol.max_stage_epsilon},
            {"max_gain", cert.max_gain},
            {"mean_gain", cert.mean_gain},
            {"max_pointwise_gain", cert.max_pointwise_gain},
            {"initial_gain", cert.initial_gain},
            {"total_cost", total.cost}});
  out << "solved " << run.game.lattice.size() << " points x " << spec.horizon
      << " stages; max gain " << Num(cert.max_gain)
      << (run.sol.all_pure ? "" : " (mixed stages present)") << "\n";
}

void RunSolveInfinite(const GameSpec& spec, const ExperimentConfig& c, int workers,
                      Artifacts& art, std::ostream& out) {
  std::vector<int> res = c.simplex_n.empty() ? DefaultResolutions(spec) : c.simplex_n;
  if (static_cast<int>(res.size()) == 1 && spec.num_teams() > 1) {
    res.assign(spec.num_teams(), res.front());
  }
  if (static_cast<int>(res.size()) != spec.num_teams()) {
    throw ValidationError("--simplex-n needs one value or one per team");
  }
  LimitGame limit = BuildLimitGame(spec, SetsFor(spec, c), res, workers);
  MpeSolution sol = SolveMpe(limit.game, MpeOptionsFor(c, workers));
  Rollout roll = RolloutInf(limit, sol.policy);
  art.Json("limit_policy.json", PolicyJson(limit.game, sol.policy, sol.values, true));
  art.Csv("limit_values.csv", "stage,z_id,z,team,value",
          ValueRows(limit.game, sol.values, true));
  std::vector<std::vector<std::string>> rows;
  for (int t = 1; t <= spec.horizon; ++t) {
    for (int k = 0; k < spec.num_teams(); ++k) {
      for (int s = 0; s < spec.teams[k].num_states(); ++s) {
        rows.push_back({std::to_string(t), std::to_string(k),
                        spec.teams[k].state_labels[s],
                        Num(roll.z[t - 1].per_team[k][s]),
                        Num(roll.cost_so_far[t - 1][k])});
      }
    }
  }
  art.Csv("trajectory.csv", "stage,team,state,mass,cost_so_far", rows);
  art.Json("summary.json", {{"grid_resolutions", res},
                            {"grid_size", limit.game.lattice.size()},
                            {"all_pure", sol.all_pure},
                            {"max_stage_epsilon", sol.max_stage_epsilon},
                            {"max_projection_error", limit.max_projection_error},
                            {"mean_projection_error", limit.mean_projection_error},
                            {"rollout_projection_error", roll.projection_error},
                            {"rollout_cost", roll.total}});
  out << "limit game on " << limit.game.lattice.size() << " grid points; rollout cost";
  for (double v : roll.total) out << " " << Num(v);
  out << "\n";
}

json SimJson(const SimResult& sim, bool mixed) {
  return {{"episodes", sim.episodes},
          {"mean", sim.mean},
          {"stderr", sim.stderr},
          {"mixed_prescriptions_realized_publicly", mixed}};
}

void RunSimulate(const GameSpec& spec, const ExperimentConfig& c, int workers,
                 Artifacts& art, std::ostream& out) {
  FiniteRun run = SolveFinite(spec, c, workers);
  AgentPolicy pi = LiftPolicy(run.game, run.sol.policy);
  SimResult sim = EstimateCost(spec, pi, c.episodes, spec.seed, workers);
  art.Json("sim_result.json", SimJson(sim, !run.sol.all_pure));
  std::vector<std::vector<std::string>> rows;
  for (size_t e = 0; e < sim.per_episode.size(); ++e) {
    for (int k = 0; k < spec.num_teams(); ++k) {
      rows.push_back({std::to_string(e), std::to_string(k), Num(sim.per_episode[e][k])});
    }
  }
  art.Csv("episodes.csv", "episode,team,cost", rows);
  out << "simulated " << sim.episodes << " episodes; mean cost";
  for (double v : sim.mean) out << " " << Num(v);
  out << "\n";
}

void RunCompare(const GameSpec& spec, const ExperimentConfig& c, int workers,
                Artifacts& art, std::ostream& out) {
  FiniteRun run = SolveFinite(spec, c, workers);
  TotalCostReport exact =
      EvaluateTotalCost(run.game, run.sol.policy, InitialCountLaw(run.game));
  AgentPolicy pi = LiftPolicy(run.game, run.sol.policy);
  SimResult sim = EstimateCost(spec, pi, c.episodes, spec.seed, workers);
  json teams = json::array();
  bool all_within = true;
  std::vector<std::vector<std::string>> rows;
  for (int k = 0; k < spec.num_teams(); ++k) {
    const double diff = std::abs(sim.mean[k] - exact.cost[k]);
    const bool within = diff <= 3.0 * sim.stderr[k];
    all_within = all_within && within;
    teams.push_back({{"team", k},
                     {"exact", exact.cost[k]},
                     {"estimate", sim.mean[k]},
                     {"stderr", sim.stderr[k]},
                     {"abs_diff", diff},
                     {"within_3_stderr", within}});
    rows.push_back({std::to_string(k), Num(exact.cost[k]), Num(sim.mean[k]),
                    Num(sim.stderr[k]), Num(diff), within ? "1" : "0"});
  }
  art.Json("compare.json", {{"episodes", sim.episodes},
                            {"all_pure", run.sol.all_pure},
                            {"mass_by_stage", exact.mass_by_stage},
                            {"teams", std::move(teams)},
                            {"all_within_3_stderr", all_within}});
  art.Csv("compare.csv", "team,exact,estimate,stderr,abs_diff,within_3_stderr", rows);
  out << "exact vs simulated cost: " << (all_within ? "agree" : "DISAGREE")
      << " within 3 standard errors\n";
}

void RunBound(const GameSpec& spec, const ExperimentConfig& c, int workers,
              Artifacts& art, std::ostream& out) {
  BoundOptions options;
  options.populations = c.n_sweep;
  options.kappa_sweep = c.kappa_sweep;
  if (c.grid_g > 0) {
    options.mode = PrescriptionMode::kGridded;
    options.grid_g = c.grid_g;
  }
  options.stage = MpeOptionsFor(c, workers).stage;
  options.workers = workers;
  BoundReport report = RunBoundPipeline(spec, options);
  json rows = json::array();
  std::vector<std::vector<std::string>> csv;
  for (const BoundRow& r : report.rows) {
    rows.push_back({{"population", r.population},
                    {"team_gain", r.team_gain},
                    {"gain", r.gain},
                    {"max_state_gain", r.max_state_gain},
                    {"lipschitz", r.lipschitz},
                    {"epsilon_bound", r.bound},
                    {"within_bound", r.within_bound},
                    {"limit_all_pure", r.limit_all_pure},
                    {"max_projection_error", r.max_projection_error}});
    csv.push_back({std::to_string(r.population), Num(r.gain), Num(r.bound)});
  }
  const RateFit& rate = report.rate;
  json fit = {{"populations", rate.populations},
              {"deviation", rate.deviation},
              {"degenerate", rate.degenerate}};
  if (!rate.degenerate) {
    fit["slope"] = rate.slope;
    fit["intercept"] = rate.intercept;
    fit["r_squared"] = rate.r_squared;
  }
  art.Json("bound.json", {{"kappa_kind", "empirical"},
                          {"kappa", report.kappa},
                          {"rate_fit", std::move(fit)},
                          {"rows", std::move(rows)},
                          {"all_within_bound", report.all_within_bound},
                          {"gain_inversions", report.inversions}});
  std::vector<std::vector<std::string>> rate_rows;
  for (size_t i = 0; i < rate.populations.size(); ++i) {
    rate_rows.push_back({std::to_string(rate.populations[i]), Num(rate.deviation[i]),
                         Num(rate.stderr[i])});
  }
  art.Csv("rate_fit.csv", "N,deviation,stderr", rate_rows);
  art.Csv("bound.csv", "N,gain,epsilon_bound", csv);
  for (const BoundRow& r : report.rows) {
    out << "N=" << r.population << " gain " << Num(r.gain) << " bound "
        << Num(r.bound) << "\n";
  }
}

void RunStaticTne(const std::string& document, Artifacts& art, std::ostream& out) {
  StaticGame game = LoadStaticGame(document);
  auto labels = [&](const std::vector<std::vector<int>>& profiles) {
    std::vector<std::string> out;
    for (const auto& p : profiles) out.push_back(game.Label(p));
    return out;
  };
  std::vector<std::string> ne = labels(PureNashStatic(game));
  std::vector<std::string> tne = labels(TeamNashStatic(game));
  art.Json("static_tne.json", {{"nash", ne}, {"team_nash", tne}});
  out << "NE:";
  for (const auto& s : ne) out << " " << s;
  out << "\nTNE:";
  for (const auto& s : tne) out << " " << s;
  out << "\n";
}

int ExitCodeFor(const Error& e) {
  const std::string kind = e.kind();
  if (kind == "validation" || kind == "parse") return kExitValidation;
  if (kind == "capacity") return kExitCapacity;
  if (kind == "no_pure_equilibrium") return kExitNoPureEquilibrium;
  return kExitFailure;
}

void WriteError(const fs::path& dir, const json& record) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream out(dir / "error.json", std::ios::binary);
  out << record.dump(2) << "\n";
}

}  // namespace

int Run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  const fs::path dir = fs::path(config.out_dir) / config.mode;
  const auto start = std::chrono::steady_clock::now();
  const int workers = config.workers > 0 ? config.workers : DefaultWorkers();
  try {
    static const std::vector<std::string> kModes = {
        "validate", "solve-finite", "solve-infinite", "simulate",
        "compare",  "bound",        "static-tne"};
    if (std::find(kModes.begin(), kModes.end(), config.mode) == kModes.end()) {
      throw ValidationError("unknown mode '" + config.mode + "'");
    }
    if (config.spec_path.empty()) throw ValidationError("--spec is required");
    if (config.episodes < 1) throw ValidationError("--episodes must be >= 1");
    const std::string document = ReadFile(config.spec_path);
    std::uint64_t seed = 0;
    std::unique_ptr<Artifacts> art;
    if (config.mode == "static-tne") {
      seed = config.seed.value_or(0);
      art = std::make_unique<Artifacts>(dir, HexDigest(Fnv1a64(document)));
      RunStaticTne(document, *art, out);
    } else {
      GameSpec spec = LoadSpec(document);
      if (config.seed) spec.seed = *config.seed;
      seed = spec.seed;
      art = std::make_unique<Artifacts>(dir, SpecHash(spec));
      if (config.mode == "validate") {
        RunValidate(spec, *art, out);
      } else if (config.mode == "solve-finite") {
        RunSolveFinite(spec, config, workers, *art, out);
      } else if (config.mode == "solve-infinite") {
        RunSolveInfinite(spec, config, workers, *art, out);
      } else if (config.mode == "simulate") {
        RunSimulate(spec, config, workers, *art, out);
      } else if (config.mode == "compare") {
        RunCompare(spec, config, workers, *art, out);
      } else if (config.mode == "bound") {
        RunBound(spec, config, workers, *art, out);
      }
    }
    json cfg = ConfigJson(config, seed);
    std::vector<std::string> files = art->names();
    files.push_back("manifest.json");
    std::sort(files.begin(), files.end());
    art->Json("manifest.json", {{"mode", config.mode},
                                {"version", kVersion},
                                {"seed", seed},
                                {"config", cfg},
                                {"config_hash", HexDigest(Fnv1a64(cfg.dump()))},
                                {"simd", simd::IsaName(simd::ActiveIsa())},
                                {"files", files}});
    art->Flush();
    const double wall = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start).count();
    std::ofstream timing(dir / "timing.json", std::ios::binary);
    timing << json{{"wall_seconds", wall}, {"workers", workers}}.dump(2) << "\n";
    return kExitOk;
  } catch (const NoPureEquilibriumError& e) {
    WriteError(dir, {{"kind", e.kind()}, {"message", e.what()},
                     {"stage", e.stage()}, {"point", e.point()}});
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const Error& e) {
    WriteError(dir, {{"kind", e.kind()}, {"message", e.what()}});
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    WriteError(dir, {{"kind", "error"}, {"message", e.what()}});
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace mfteams
