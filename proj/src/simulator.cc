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

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "mfteams/rng.h"
#include "mfteams/util.h"

namespace mfteams {
namespace {

std::uint64_t Purpose(DrawPurpose p) { return static_cast<std::uint64_t>(p); }

// Transition rows and costs of every (s, a) for one team at a mean field.
struct TeamTables {
  std::vector<std::vector<double>> rows;  // [s * A + a]
  std::vector<double> cost;               // [s * A + a]
};

TeamTables BuildTables(const GameSpec& spec, int k, int t,
                       const std::vector<double>& z_flat) {
  const TeamModel& team = spec.teams[k];
  const int num_states = team.num_states();
  const int num_actions = team.num_actions();
  TeamTables tables;
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      std::vector<double> row(num_states);
      TransitionRow(spec, k, s, a, z_flat, row);
      tables.rows.push_back(std::move(row));
      tables.cost.push_back(t > 0 ? CostAt(spec, k, t, s, a, z_flat) : 0.0);
    }
  }
  return tables;
}

std::vector<CountVector> CountStates(const GameSpec& spec,
                                     const std::vector<std::vector<int>>& states) {
  std::vector<CountVector> counts;
  for (int k = 0; k < spec.num_teams(); ++k) {
    CountVector m(spec.teams[k].num_states(), 0);
    for (int s : states[k]) ++m[s];
    counts.push_back(std::move(m));
  }
  return counts;
}

}  // namespace

std::span<const double> AgentPolicy::Row(int t, size_t z, int k, int s) const {
  const PrescriptionMix& mix = table[t - 1][z][k];
  if (mix.size() != 1) {
    throw std::logic_error("agent row requested under a mixed prescription");
  }
  return mix.front().second.row(s);
}

AgentPolicy LiftPolicy(const LatticeGame& game, const PolicyTable& psi) {
  AgentPolicy pi;
  pi.lattice = game.lattice;
  for (const auto& stage : psi.stages) {
    std::vector<std::vector<PrescriptionMix>> rows;
    for (const StageEquilibrium& eq : stage) {
      std::vector<PrescriptionMix> per_team;
      for (int k = 0; k < game.num_teams(); ++k) {
        PrescriptionMix mix;
        for (size_t j = 0; j < eq.mixture[k].size(); ++j) {
          if (eq.mixture[k][j] > 0.0) {
            mix.emplace_back(eq.mixture[k][j], game.sets[k].items[j]);
          }
        }
        per_team.push_back(std::move(mix));
      }
      rows.push_back(std::move(per_team));
    }
    pi.table.push_back(std::move(rows));
  }
  return pi;
}

PolicyTable ProjectPolicy(const AgentPolicy& pi, const LatticeGame& game) {
  PolicyTable psi;
  for (const auto& stage : pi.table) {
    std::vector<StageEquilibrium> row;
    for (const auto& per_team : stage) {
      StageEquilibrium eq;
      eq.pure = true;
      for (int k = 0; k < game.num_teams(); ++k) {
        const auto& items = game.sets[k].items;
        std::vector<double> x(items.size(), 0.0);
        for (const auto& [w, gamma] : per_team[k]) {
          auto it = std::find(items.begin(), items.end(), gamma);
          if (it == items.end()) {
            throw std::invalid_argument("prescription not in the set of team " +
                                        std::to_string(k));
          }
          x[it - items.begin()] += w;
        }
        if (per_team[k].size() == 1) {
          eq.profile.push_back(static_cast<int>(
              std::max_element(x.begin(), x.end()) - x.begin()));
        } else {
          eq.pure = false;
        }
        eq.mixture.push_back(std::move(x));
      }
      if (!eq.pure) eq.profile.clear();
      row.push_back(std::move(eq));
    }
    psi.stages.push_back(std::move(row));
  }
  return psi;
}

EpisodeResult SimulateEpisode(const GameSpec& spec, const AgentPolicy& pi,
                              std::uint64_t seed, std::uint64_t episode,
                              const EpisodeOptions& options) {
  const int num_teams = spec.num_teams();
  EpisodeResult result;
  result.cost.assign(num_teams, 0.0);
  std::vector<std::vector<int>> states(num_teams);
  auto label = [&](int k, int i) -> std::uint64_t {
    const int n = spec.teams[k].population;
    return static_cast<std::uint64_t>(((i + options.agent_label_rotation) % n + n) % n);
  };
  for (int k = 0; k < num_teams; ++k) {
    for (int i = 0; i < spec.teams[k].population; ++i) {
      RngStream rng = RngStream::Derive(
          seed, {episode, 0, static_cast<std::uint64_t>(k), label(k, i),
                 Purpose(DrawPurpose::kInitialState)});
      states[k].push_back(rng.Categorical(spec.teams[k].initial_law));
    }
  }
  for (int t = 1; t <= spec.horizon; ++t) {
    std::vector<CountVector> counts = CountStates(spec, states);
    const size_t z = pi.lattice.IndexOfCounts(counts);
    std::vector<double> z_flat = Flatten(CountMeanField(counts, spec));
    if (options.record_counts) result.counts.push_back(counts);
    result.points.push_back(z);
    std::vector<std::vector<int>> next(num_teams);
    for (int k = 0; k < num_teams; ++k) {
      const TeamModel& team = spec.teams[k];
      const int num_actions = team.num_actions();
      const PrescriptionMix& mix = pi.table[t - 1][z][k];
      size_t pick = 0;
      if (mix.size() > 1) {
        std::vector<double> w;
        for (const auto& entry : mix) w.push_back(entry.first);
        RngStream rng = RngStream::Derive(
            seed, {episode, static_cast<std::uint64_t>(t),
                   static_cast<std::uint64_t>(k), 0,
                   Purpose(DrawPurpose::kPrescription)});
        pick = rng.Categorical(w);
      }
      const Prescription& gamma = mix[pick].second;
      TeamTables tables = BuildTables(spec, k, t, z_flat);
      double cost = 0.0;
      for (int i = 0; i < team.population; ++i) {
        const int s = states[k][i];
        const std::uint64_t agent = label(k, i);
        RngStream action_rng = RngStream::Derive(
            seed, {episode, static_cast<std::uint64_t>(t),
                   static_cast<std::uint64_t>(k), agent,
                   Purpose(DrawPurpose::kAction)});
        const int a = action_rng.Categorical(gamma.row(s));
        const size_t cell = static_cast<size_t>(s) * num_actions + a;
        cost += tables.cost[cell];
        RngStream move_rng = RngStream::Derive(
            seed, {episode, static_cast<std::uint64_t>(t),
                   static_cast<std::uint64_t>(k), agent,
                   Purpose(DrawPurpose::kTransition)});
        next[k].push_back(move_rng.Categorical(tables.rows[cell]));
      }
      result.cost[k] += cost / team.population;
    }
    states = std::move(next);
  }
  return result;
}

SimResult EstimateCost(const GameSpec& spec, const AgentPolicy& pi, int episodes,
                       std::uint64_t seed, int workers) {
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  const int num_teams = spec.num_teams();
  SimResult result;
  result.episodes = episodes;
  result.per_episode.resize(episodes);
  ParallelFor(episodes, workers, [&](size_t e) {
    result.per_episode[e] = SimulateEpisode(spec, pi, seed, e).cost;
  });
  result.mean.assign(num_teams, 0.0);
  result.stderr.assign(num_teams, 0.0);
  for (int k = 0; k < num_teams; ++k) {
    double sum = 0.0;
    for (const auto& c : result.per_episode) sum += c[k];
    const double mean = sum / episodes;
    double ss = 0.0;
    for (const auto& c : result.per_episode) ss += (c[k] - mean) * (c[k] - mean);
    result.mean[k] = mean;
    result.stderr[k] =
        episodes > 1 ? std::sqrt(ss / (episodes - 1)) / std::sqrt(episodes) : 0.0;
  }
  return result;
}

KernelCheck EmpiricalKernelCheck(const GameSpec& spec,
                                 const std::vector<CountVector>& counts,
                                 const std::vector<Prescription>& gammas,
                                 int samples, std::uint64_t seed) {
  const int num_teams = spec.num_teams();
  JointCountDistribution exact = JointTransitionKernel(counts, gammas, spec);
  std::vector<double> z_flat = Flatten(CountMeanField(counts, spec));
  std::vector<TeamTables> tables;
  std::vector<std::vector<int>> states(num_teams);
  for (int k = 0; k < num_teams; ++k) {
    tables.push_back(BuildTables(spec, k, 0, z_flat));
    for (int s = 0; s < static_cast<int>(counts[k].size()); ++s) {
      states[k].insert(states[k].end(), counts[k][s], s);
    }
  }
  std::map<std::vector<CountVector>, int> tally;
  for (int n = 0; n < samples; ++n) {
    std::vector<CountVector> next;
    for (int k = 0; k < num_teams; ++k) {
      const int num_actions = spec.teams[k].num_actions();
      CountVector m(spec.teams[k].num_states(), 0);
      for (size_t i = 0; i < states[k].size(); ++i) {
        const int s = states[k][i];
        const std::uint64_t key[] = {static_cast<std::uint64_t>(n), 1,
                                     static_cast<std::uint64_t>(k), i};
        RngStream action_rng = RngStream::Derive(
            seed, {key[0], key[1], key[2], key[3], Purpose(DrawPurpose::kAction)});
        const int a = action_rng.Categorical(gammas[k].row(s));
        RngStream move_rng = RngStream::Derive(
            seed, {key[0], key[1], key[2], key[3], Purpose(DrawPurpose::kTransition)});
        ++m[move_rng.Categorical(
            tables[k].rows[static_cast<size_t>(s) * num_actions + a])];
      }
      next.push_back(std::move(m));
    }
    ++tally[next];
  }
  KernelCheck check;
  check.samples = samples;
  check.support = exact.support.size();
  double l1 = 0.0;
  for (size_t i = 0; i < exact.support.size(); ++i) {
    auto it = tally.find(exact.support[i]);
    double freq = it == tally.end() ? 0.0 : static_cast<double>(it->second) / samples;
    if (it != tally.end()) tally.erase(it);
    l1 += std::abs(freq - exact.probs[i]);
    const double p = exact.probs[i];
    check.radius += 0.5 * 1.96 * std::sqrt(p * (1.0 - p) / samples);
  }
  for (const auto& [x, c] : tally) l1 += static_cast<double>(c) / samples;
  check.tv = 0.5 * l1;
  return check;
}

}  // namespace mfteams
