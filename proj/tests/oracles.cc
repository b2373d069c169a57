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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <tuple>

namespace mfteams::oracle {

std::string DataPath(const std::string& name) {
  return std::string(MFTEAMS_DATA_DIR) + "/" + name;
}

GameSpec LoadData(const std::string& name) { return LoadSpecFile(DataPath(name)); }

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MeanField RandomMeanField(const GameSpec& spec, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::exponential_distribution<double> exp1(1.0);
  MeanField z;
  for (const auto& team : spec.teams) {
    std::vector<double> v(team.num_states());
    double sum = 0.0;
    for (double& x : v) sum += (x = exp1(gen));
    for (double& x : v) x /= sum;
    z.per_team.push_back(v);
  }
  return z;
}

double Transition(const GameSpec& spec, int k, int s, int a, const MeanField& z,
                  int s_next) {
  const TeamModel& team = spec.teams[k];
  const size_t S = team.num_states();
  const size_t A = team.num_actions();
  const size_t W = spec.coupling_width();
  double p = team.transition_base[(s * A + a) * S + s_next];
  size_t col = 0;
  for (const auto& zk : z.per_team) {
    for (double v : zk) {
      p += team.transition_coupling[((s * A + a) * S + s_next) * W + col] * v;
      ++col;
    }
  }
  return p;
}

double Cost(const GameSpec& spec, int k, int t, int s, int a, const MeanField& z) {
  const TeamModel& team = spec.teams[k];
  const size_t S = team.num_states();
  const size_t A = team.num_actions();
  const size_t W = spec.coupling_width();
  const size_t cell = (static_cast<size_t>(t - 1) * S + s) * A + a;
  double c = team.cost_base[cell];
  size_t col = 0;
  for (const auto& zk : z.per_team) {
    for (double v : zk) {
      c += team.cost_coupling[cell * W + col] * v;
      ++col;
    }
  }
  return c;
}

MeanField MeanFieldOf(const GameSpec& spec, const std::vector<CountVector>& counts) {
  MeanField z;
  for (size_t k = 0; k < counts.size(); ++k) {
    std::vector<double> v;
    for (int m : counts[k]) v.push_back(static_cast<double>(m) / spec.teams[k].population);
    z.per_team.push_back(v);
  }
  return z;
}

namespace {

struct Agent {
  int team;
  int state;
};

std::vector<Agent> AgentsOf(const std::vector<CountVector>& counts) {
  std::vector<Agent> agents;
  for (size_t k = 0; k < counts.size(); ++k) {
    for (size_t s = 0; s < counts[k].size(); ++s) {
      for (int i = 0; i < counts[k][s]; ++i) {
        agents.push_back({static_cast<int>(k), static_cast<int>(s)});
      }
    }
  }
  return agents;
}

}  // namespace

JointLaw AgentLevelKernel(const GameSpec& spec, const std::vector<CountVector>& counts,
                          const std::vector<Prescription>& gammas) {
  const MeanField z = MeanFieldOf(spec, counts);
  const std::vector<Agent> agents = AgentsOf(counts);
  JointLaw law;
  std::vector<CountVector> next;
  for (const auto& m : counts) next.emplace_back(m.size(), 0);
  std::function<void(size_t, double)> recurse = [&](size_t i, double prob) {
    if (prob == 0.0) return;
    if (i == agents.size()) {
      law[next] += prob;
      return;
    }
    const Agent& ag = agents[i];
    const TeamModel& team = spec.teams[ag.team];
    for (int a = 0; a < team.num_actions(); ++a) {
      const double pa = gammas[ag.team](ag.state, a);
      for (int s2 = 0; s2 < team.num_states(); ++s2) {
        const double ps = Transition(spec, ag.team, ag.state, a, z, s2);
        ++next[ag.team][s2];
        recurse(i + 1, prob * pa * ps);
        --next[ag.team][s2];
      }
    }
  };
  recurse(0, 1.0);
  return law;
}

double AgentLevelStageCost(const GameSpec& spec, const std::vector<CountVector>& counts,
                           const Prescription& gamma, int k, int t) {
  const MeanField z = MeanFieldOf(spec, counts);
  std::vector<int> states;
  for (size_t s = 0; s < counts[k].size(); ++s) {
    for (int i = 0; i < counts[k][s]; ++i) states.push_back(static_cast<int>(s));
  }
  const int n = spec.teams[k].population;
  double expected = 0.0;
  std::function<void(size_t, double, double)> recurse = [&](size_t i, double prob,
                                                            double total) {
    if (prob == 0.0) return;
    if (i == states.size()) {
      expected += prob * total / n;
      return;
    }
    for (int a = 0; a < spec.teams[k].num_actions(); ++a) {
      recurse(i + 1, prob * gamma(states[i], a),
              total + Cost(spec, k, t, states[i], a, z));
    }
  };
  recurse(0, 1.0, 0.0);
  return expected;
}

std::vector<double> BruteForceBestValues(
    const GameSpec& spec, const std::vector<PrescriptionSet>& sets, int k,
    const std::function<std::vector<int>(int, size_t)>& others, int from) {
  const JointLattice lattice = JointLattice::ForPopulations(spec);
  const size_t num_points = lattice.size();
  const int horizon = spec.horizon;
  const int stages = horizon - from + 1;
  const size_t choices = sets[k].size();
  // Cache of (t, z, own item) -> (stage cost, next-point law).
  struct Step {
    double cost;
    std::vector<std::pair<size_t, double>> next;
  };
  std::map<std::tuple<int, size_t, size_t>, Step> cache;
  auto step = [&](int t, size_t z, size_t j) -> const Step& {
    auto key = std::make_tuple(t, z, j);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<int> profile = others(t, z);
    profile[k] = static_cast<int>(j);
    std::vector<Prescription> gammas;
    for (int i = 0; i < spec.num_teams(); ++i) gammas.push_back(sets[i].items[profile[i]]);
    const std::vector<CountVector> counts = lattice.CountsAt(z);
    Step s;
    s.cost = AgentLevelStageCost(spec, counts, gammas[k], k, t);
    for (const auto& [m, p] : AgentLevelKernel(spec, counts, gammas)) {
      s.next.emplace_back(lattice.IndexOfCounts(m), p);
    }
    return cache.emplace(key, std::move(s)).first->second;
  };
  std::vector<double> best(num_points, INFINITY);
  const size_t slots = num_points * stages;
  size_t total = 1;
  for (size_t i = 0; i < slots; ++i) total *= choices;
  std::vector<size_t> digit(slots, 0);
  std::vector<double> value(slots);
  for (size_t n = 0; n < total; ++n) {
    // Backward evaluation of this Markov strategy.
    for (int t = horizon; t >= from; --t) {
      for (size_t z = 0; z < num_points; ++z) {
        const size_t slot = (t - from) * num_points + z;
        const Step& s = step(t, z, digit[slot]);
        double v = s.cost;
        if (t < horizon) {
          for (const auto& [z2, p] : s.next) v += p * value[(t + 1 - from) * num_points + z2];
        }
        value[slot] = v;
      }
    }
    for (size_t z = 0; z < num_points; ++z) best[z] = std::min(best[z], value[z]);
    for (size_t i = 0; i < slots; ++i) {
      if (++digit[i] < choices) break;
      digit[i] = 0;
    }
  }
  return best;
}

std::vector<std::vector<int>> BruteForcePureNash(const StageGame& game) {
  std::vector<std::vector<int>> out;
  for (size_t p = 0; p < game.num_profiles(); ++p) {
    std::vector<int> prof = game.Decompose(p);
    bool ok = true;
    for (int k = 0; k < game.num_teams() && ok; ++k) {
      std::vector<int> dev = prof;
      for (int j = 0; j < game.shape[k]; ++j) {
        dev[k] = j;
        if (game.cost[k][game.Compose(dev)] < game.cost[k][p] - 1e-12) ok = false;
      }
    }
    if (ok) out.push_back(prof);
  }
  return out;
}

}  // namespace mfteams::oracle
