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

#include "mfteams/count_dynamics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "mfteams/errors.h"

namespace mfteams {
namespace {

constexpr double kPruneBelow = 1e-15;
constexpr int kLogFactorialTable = 4096;

struct Block {
  int n;
  std::vector<double> p;
};

// Pruned, renormalized distribution from an ordered map.
CountDistribution Finish(const std::map<std::vector<int>, double>& atoms) {
  CountDistribution out;
  double kept = 0.0;
  for (const auto& [x, p] : atoms) {
    if (p < kPruneBelow) continue;
    out.support.push_back(x);
    out.probs.push_back(p);
    kept += p;
  }
  for (double& p : out.probs) p /= kept;
  return out;
}

// Law of the concatenation of independent multinomial blocks.
CountDistribution ProductOfMultinomials(const std::vector<Block>& blocks,
                                        size_t cap) {
  std::map<std::vector<int>, double> cur{{{}, 1.0}};
  for (const Block& b : blocks) {
    const int d = static_cast<int>(b.p.size());
    const auto outcomes = EnumerateCounts(b.n, d, cap);
    std::vector<std::pair<const CountVector*, double>> weighted;
    for (const auto& x : outcomes) {
      const double w = MultinomialPmf(x, b.p);
      if (w > 0.0) weighted.emplace_back(&x, w);
    }
    std::map<std::vector<int>, double> next;
    for (const auto& [prefix, p] : cur) {
      for (const auto& [x, w] : weighted) {
        std::vector<int> key = prefix;
        key.insert(key.end(), x->begin(), x->end());
        next[std::move(key)] += p * w;
      }
      if (next.size() > cap) {
        throw CapacityError("count distribution support exceeds cap " +
                            std::to_string(cap));
      }
    }
    cur = std::move(next);
  }
  return Finish(cur);
}

}  // namespace

Prescription Prescription::Deterministic(const std::vector<int>& actions,
                                         int num_actions) {
  Prescription g;
  g.num_states = static_cast<int>(actions.size());
  g.num_actions = num_actions;
  g.rows.assign(actions.size() * num_actions, 0.0);
  for (size_t s = 0; s < actions.size(); ++s) {
    g.rows[s * num_actions + actions[s]] = 1.0;
  }
  return g;
}

Prescription Prescription::Uniform(int num_states, int num_actions) {
  Prescription g;
  g.num_states = num_states;
  g.num_actions = num_actions;
  g.rows.assign(static_cast<size_t>(num_states) * num_actions, 1.0 / num_actions);
  return g;
}

void ValidatePrescription(const Prescription& gamma) {
  if (gamma.rows.size() !=
      static_cast<size_t>(gamma.num_states) * gamma.num_actions) {
    throw std::invalid_argument("prescription shape mismatch");
  }
  for (int s = 0; s < gamma.num_states; ++s) {
    double sum = 0.0;
    for (double p : gamma.row(s)) {
      if (p < 0.0) throw std::invalid_argument("prescription negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("prescription row does not sum to 1");
    }
  }
}

double CountDistribution::total() const {
  double t = 0.0;
  for (double p : probs) t += p;
  return t;
}

double CountDistribution::ProbabilityOf(const std::vector<int>& x) const {
  auto it = std::lower_bound(support.begin(), support.end(), x);
  if (it == support.end() || *it != x) return 0.0;
  return probs[it - support.begin()];
}

double JointCountDistribution::total() const {
  double t = 0.0;
  for (double p : probs) t += p;
  return t;
}

double JointCountDistribution::ProbabilityOf(
    const std::vector<CountVector>& x) const {
  auto it = std::lower_bound(support.begin(), support.end(), x);
  if (it == support.end() || *it != x) return 0.0;
  return probs[it - support.begin()];
}

double LogFactorial(int n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(kLogFactorialTable + 1, 0.0);
    for (int i = 2; i <= kLogFactorialTable; ++i) t[i] = t[i - 1] + std::log(i);
    return t;
  }();
  if (n <= kLogFactorialTable) return table[n];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double MultinomialPmf(std::span<const int> x, std::span<const double> p) {
  int n = 0;
  double log_pmf = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0) continue;
    if (p[i] <= 0.0) return 0.0;
    n += x[i];
    log_pmf += x[i] * std::log(p[i]) - LogFactorial(x[i]);
  }
  return std::exp(log_pmf + LogFactorial(n));
}

CountDistribution ActionCountDist(const CountVector& m, const Prescription& gamma,
                                  size_t cap) {
  if (static_cast<int>(m.size()) != gamma.num_states) {
    throw std::invalid_argument("count vector and prescription disagree on |S|");
  }
  std::vector<Block> blocks;
  for (int s = 0; s < gamma.num_states; ++s) {
    auto row = gamma.row(s);
    blocks.push_back({m[s], std::vector<double>(row.begin(), row.end())});
  }
  return ProductOfMultinomials(blocks, cap);
}

CountDistribution NextStateCountDist(const std::vector<int>& mbar,
                                     const MeanField& z, const GameSpec& spec,
                                     int k, size_t cap) {
  const int S = spec.teams[k].num_states();
  const int A = spec.teams[k].num_actions();
  if (static_cast<int>(mbar.size()) != S * A) {
    throw std::invalid_argument("state-action counts have wrong shape");
  }
  const auto z_flat = Flatten(z);
  std::vector<Block> blocks;
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      Block b{mbar[s * A + a], std::vector<double>(S)};
      TransitionRow(spec, k, s, a, z_flat, b.p);
      blocks.push_back(std::move(b));
    }
  }
  return ProductOfMultinomials(blocks, cap);
}

CountVector MarginalizeCounts(const std::vector<int>& mhat, int num_states,
                              int num_actions) {
  if (mhat.size() != static_cast<size_t>(num_states) * num_actions * num_states) {
    throw std::invalid_argument("triple counts have wrong shape");
  }
  CountVector next(num_states, 0);
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a)
      for (int s2 = 0; s2 < num_states; ++s2)
        next[s2] += mhat[(s * num_actions + a) * num_states + s2];
  return next;
}

CountDistribution TeamTransitionKernel(const CountVector& m, const MeanField& z,
                                       const Prescription& gamma,
                                       const GameSpec& spec, int k, size_t cap) {
  const int S = spec.teams[k].num_states();
  const int A = spec.teams[k].num_actions();
  if (static_cast<int>(m.size()) != S || gamma.num_states != S ||
      gamma.num_actions != A) {
    throw std::invalid_argument("team kernel inputs have inconsistent shapes");
  }
  const auto z_flat = Flatten(z);
  std::vector<double> p_row(S);
  std::map<std::vector<int>, double> cur{{CountVector(S, 0), 1.0}};
  for (int s = 0; s < S; ++s) {
    if (m[s] == 0) continue;
    // One agent's next-state law from s under gamma.
    std::vector<double> r(S, 0.0);
    for (int a = 0; a < A; ++a) {
      const double w = gamma(s, a);
      if (w == 0.0) continue;
      TransitionRow(spec, k, s, a, z_flat, p_row);
      for (int s2 = 0; s2 < S; ++s2) r[s2] += w * p_row[s2];
    }
    std::vector<std::pair<CountVector, double>> moves;
    for (auto& x : EnumerateCounts(m[s], S, cap)) {
      const double w = MultinomialPmf(x, r);
      if (w > 0.0) moves.emplace_back(std::move(x), w);
    }
    std::map<std::vector<int>, double> next;
    for (const auto& [partial, p] : cur) {
      for (const auto& [x, w] : moves) {
        CountVector key = partial;
        for (int i = 0; i < S; ++i) key[i] += x[i];
        next[std::move(key)] += p * w;
      }
      if (next.size() > cap) {
        throw CapacityError("team kernel support exceeds cap " +
                            std::to_string(cap));
      }
    }
    cur = std::move(next);
  }
  return Finish(cur);
}

CountDistribution TeamTransitionKernelByComposition(
    const CountVector& m, const MeanField& z, const Prescription& gamma,
    const GameSpec& spec, int k, size_t cap) {
  const int S = spec.teams[k].num_states();
  const int A = spec.teams[k].num_actions();
  std::map<std::vector<int>, double> acc;
  const CountDistribution mbar_law = ActionCountDist(m, gamma, cap);
  for (size_t i = 0; i < mbar_law.support.size(); ++i) {
    const CountDistribution mhat_law =
        NextStateCountDist(mbar_law.support[i], z, spec, k, cap);
    for (size_t j = 0; j < mhat_law.support.size(); ++j) {
      acc[MarginalizeCounts(mhat_law.support[j], S, A)] +=
          mbar_law.probs[i] * mhat_law.probs[j];
    }
  }
  return Finish(acc);
}

std::vector<double> TeamKernelOnLattice(const GameSpec& spec, int k,
                                        const MeanField& z,
                                        const CountVector& m,
                                        const Prescription& gamma,
                                        const TeamLattice& lattice) {
  const CountDistribution law = TeamTransitionKernel(m, z, gamma, spec, k);
  std::vector<double> dense(lattice.size(), 0.0);
  for (size_t i = 0; i < law.support.size(); ++i) {
    dense[lattice.IndexOf(law.support[i])] = law.probs[i];
  }
  return dense;
}

MeanField CountMeanField(const std::vector<CountVector>& counts,
                         const GameSpec& spec) {
  MeanField z;
  for (size_t k = 0; k < counts.size(); ++k) {
    const double n = spec.teams[k].population;
    std::vector<double> v(counts[k].size());
    for (size_t s = 0; s < v.size(); ++s) v[s] = counts[k][s] / n;
    z.per_team.push_back(std::move(v));
  }
  return z;
}

JointCountDistribution JointTransitionKernel(
    const std::vector<CountVector>& counts,
    const std::vector<Prescription>& gammas, const GameSpec& spec, size_t cap) {
  if (counts.size() != spec.teams.size() || gammas.size() != spec.teams.size()) {
    throw std::invalid_argument("joint kernel needs every team");
  }
  const MeanField z = CountMeanField(counts, spec);
  JointCountDistribution out;
  out.support.push_back({});
  out.probs.push_back(1.0);
  for (int k = 0; k < spec.num_teams(); ++k) {
    const CountDistribution team =
        TeamTransitionKernel(counts[k], z, gammas[k], spec, k, cap);
    if (out.support.size() * team.support.size() > cap) {
      throw CapacityError("joint kernel support exceeds cap " +
                          std::to_string(cap));
    }
    JointCountDistribution next;
    for (size_t i = 0; i < out.support.size(); ++i) {
      for (size_t j = 0; j < team.support.size(); ++j) {
        auto key = out.support[i];
        key.push_back(team.support[j]);
        next.support.push_back(std::move(key));
        next.probs.push_back(out.probs[i] * team.probs[j]);
      }
    }
    out = std::move(next);
  }
  return out;
}

namespace {

// Multinomial(n, p) by conditional binomials.
void SampleMultinomial(int n, std::span<const double> p, RngStream& rng,
                       std::span<int> out) {
  double remaining_mass = 1.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (i + 1 == p.size()) {
      out[i] = n;
      break;
    }
    if (n == 0) {
      out[i] = 0;
      continue;
    }
    double q = remaining_mass > 0.0 ? p[i] / remaining_mass : 0.0;
    q = std::clamp(q, 0.0, 1.0);
    std::binomial_distribution<int> binom(n, q);
    out[i] = binom(rng);
    n -= out[i];
    remaining_mass -= p[i];
  }
}

}  // namespace

std::vector<CountVector> SampleNextCounts(const std::vector<CountVector>& counts,
                                          const std::vector<Prescription>& gammas,
                                          const GameSpec& spec, RngStream& rng) {
  const MeanField z = CountMeanField(counts, spec);
  const auto z_flat = Flatten(z);
  std::vector<CountVector> next;
  for (int k = 0; k < spec.num_teams(); ++k) {
    const int S = spec.teams[k].num_states();
    const int A = spec.teams[k].num_actions();
    std::vector<int> mbar(S * A, 0);
    for (int s = 0; s < S; ++s) {
      SampleMultinomial(counts[k][s], gammas[k].row(s), rng,
                        std::span<int>(mbar.data() + s * A, A));
    }
    CountVector m_next(S, 0);
    std::vector<double> p_row(S);
    std::vector<int> split(S);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        if (mbar[s * A + a] == 0) continue;
        TransitionRow(spec, k, s, a, z_flat, p_row);
        SampleMultinomial(mbar[s * A + a], p_row, rng, split);
        for (int s2 = 0; s2 < S; ++s2) m_next[s2] += split[s2];
      }
    }
    next.push_back(std::move(m_next));
  }
  return next;
}

double StageCost(const MeanField& z, const Prescription& gamma,
                 const GameSpec& spec, int k, int t) {
  const auto z_flat = Flatten(z);
  const int S = spec.teams[k].num_states();
  const int A = spec.teams[k].num_actions();
  double total = 0.0;
  for (int s = 0; s < S; ++s) {
    const double mass = z.per_team[k][s];
    if (mass == 0.0) continue;
    double row = 0.0;
    for (int a = 0; a < A; ++a) {
      const double w = gamma(s, a);
      if (w != 0.0) row += w * CostAt(spec, k, t, s, a, z_flat);
    }
    total += mass * row;
  }
  return total;
}

}  // namespace mfteams
