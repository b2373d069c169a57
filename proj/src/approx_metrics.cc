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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mfteams/mf_limit.h"
#include "mfteams/rng.h"
#include "mfteams/simd/kernels.h"

namespace mfteams {
namespace {

constexpr double kMassEps = 1e-15;

std::vector<double> Scaled(const CountVector& m, int n) {
  std::vector<double> out(m.size());
  for (size_t i = 0; i < m.size(); ++i) out[i] = static_cast<double>(m[i]) / n;
  return out;
}

}  // namespace

double Wasserstein(std::span<const double> p, std::span<const double> q,
                   std::span<const double> d) {
  const size_t n = p.size();
  if (q.size() != n || d.size() != n * n) {
    throw std::invalid_argument("Wasserstein: size mismatch");
  }
  std::vector<double> supply(n), demand(n);
  for (size_t i = 0; i < n; ++i) {
    supply[i] = std::max(p[i] - q[i], 0.0);
    demand[i] = std::max(q[i] - p[i], 0.0);
  }
  std::vector<double> flow(n * n, 0.0);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n);
  std::vector<int> pred(n);
  const size_t max_rounds = 4 * n * n + 16;
  for (size_t round = 0; round < max_rounds; ++round) {
    // Bellman-Ford on the residual graph: forward arcs i -> j from surplus to
    // deficit states, backward arcs j -> i wherever flow was sent.
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(pred.begin(), pred.end(), -1);
    for (size_t i = 0; i < n; ++i) {
      if (supply[i] > kMassEps) dist[i] = 0.0;
    }
    for (size_t pass = 0; pass < n; ++pass) {
      bool changed = false;
      for (size_t i = 0; i < n; ++i) {
        if (p[i] <= q[i] || dist[i] == inf) continue;
        for (size_t j = 0; j < n; ++j) {
          if (q[j] <= p[j]) continue;
          if (dist[i] + d[i * n + j] < dist[j] - 1e-15) {
            dist[j] = dist[i] + d[i * n + j];
            pred[j] = static_cast<int>(i);
            changed = true;
          }
        }
      }
      for (size_t j = 0; j < n; ++j) {
        if (q[j] <= p[j] || dist[j] == inf) continue;
        for (size_t i = 0; i < n; ++i) {
          if (flow[i * n + j] <= kMassEps) continue;
          if (dist[j] - d[i * n + j] < dist[i] - 1e-15) {
            dist[i] = dist[j] - d[i * n + j];
            pred[i] = static_cast<int>(j);
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    int sink = -1;
    for (size_t j = 0; j < n; ++j) {
      if (demand[j] > kMassEps && dist[j] < inf &&
          (sink < 0 || dist[j] < dist[sink])) {
        sink = static_cast<int>(j);
      }
    }
    if (sink < 0) break;
    // Walk back to the surplus state that started the path.
    std::vector<int> path = {sink};
    while (pred[path.back()] >= 0 && path.size() <= 2 * n) {
      path.push_back(pred[path.back()]);
    }
    const int source = path.back();
    double amount = std::min(supply[source], demand[sink]);
    for (size_t e = 0; e + 1 < path.size(); ++e) {
      const int to = path[e];
      const int from = path[e + 1];
      if (p[from] > q[from]) continue;  // forward arc, uncapacitated
      amount = std::min(amount, flow[to * n + from]);
    }
    if (amount <= kMassEps) break;
    for (size_t e = 0; e + 1 < path.size(); ++e) {
      const int to = path[e];
      const int from = path[e + 1];
      if (p[from] > q[from]) {
        flow[from * n + to] += amount;
      } else {
        flow[to * n + from] -= amount;
      }
    }
    supply[source] -= amount;
    demand[sink] -= amount;
  }
  return simd::Dot(flow, d);
}

double JointDistance(const GameSpec& spec, const MeanField& z,
                     const MeanField& z_hat) {
  if (z.num_teams() != spec.num_teams() || z_hat.num_teams() != spec.num_teams()) {
    throw std::invalid_argument("JointDistance: team count mismatch");
  }
  double total = 0.0;
  for (int k = 0; k < spec.num_teams(); ++k) {
    total += Wasserstein(z.per_team[k], z_hat.per_team[k],
                         spec.teams[k].state_metric);
  }
  return total;
}

DeviationEstimate ExpectedDeviation(const GameSpec& spec,
                                    const std::vector<CountVector>& counts,
                                    const std::vector<Prescription>& gammas,
                                    size_t atom_cap) {
  const int num_teams = spec.num_teams();
  MeanField z = CountMeanField(counts, spec);
  std::vector<std::vector<double>> target;
  bool exact = true;
  for (int k = 0; k < num_teams; ++k) {
    target.push_back(TeamFlow(spec, k, z, gammas[k]));
    exact = exact && LatticeSize(spec.teams[k].population,
                                 spec.teams[k].num_states()) <= atom_cap;
  }
  DeviationEstimate est;
  est.per_team.assign(num_teams, 0.0);
  if (exact) {
    for (int k = 0; k < num_teams; ++k) {
      const TeamModel& team = spec.teams[k];
      CountDistribution q = TeamTransitionKernel(counts[k], z, gammas[k], spec, k);
      for (size_t i = 0; i < q.support.size(); ++i) {
        est.per_team[k] += q.probs[i] * Wasserstein(Scaled(q.support[i], team.population),
                                                    target[k], team.state_metric);
      }
      est.total += est.per_team[k];
    }
    return est;
  }
  est.monte_carlo = true;
  RngStream rng = RngStream::Derive(
      spec.seed, {static_cast<std::uint64_t>(DrawPurpose::kCountSampling),
                  Fnv1a64("expected_deviation")});
  double sum = 0.0, sum_sq = 0.0;
  for (int n = 0; n < kDeviationSamples; ++n) {
    std::vector<CountVector> next = SampleNextCounts(counts, gammas, spec, rng);
    double total = 0.0;
    for (int k = 0; k < num_teams; ++k) {
      const TeamModel& team = spec.teams[k];
      double w = Wasserstein(Scaled(next[k], team.population), target[k],
                             team.state_metric);
      est.per_team[k] += w / kDeviationSamples;
      total += w;
    }
    sum += total;
    sum_sq += total * total;
  }
  est.total = sum / kDeviationSamples;
  double var = std::max(sum_sq / kDeviationSamples - est.total * est.total, 0.0);
  est.stderr = std::sqrt(var * kDeviationSamples / (kDeviationSamples - 1) /
                         kDeviationSamples);
  return est;
}

LineFit FitLine(std::span<const double> x, std::span<const double> y) {
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

RateFit FitRate(const GameSpec& spec, const MeanField& z,
                const std::vector<Prescription>& gammas,
                const std::vector<int>& populations) {
  std::vector<int> distinct = populations;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 4) {
    throw std::invalid_argument("FitRate needs at least 4 distinct populations");
  }
  const int num_teams = spec.num_teams();
  RateFit fit;
  fit.kappa.assign(num_teams, 0.0);
  std::vector<double> log_n, log_dev;
  for (int n : populations) {
    std::vector<CountVector> counts;
    for (int k = 0; k < num_teams; ++k) {
      CountVector m;
      for (double v : z.per_team[k]) {
        double scaled = v * n;
        double rounded = std::round(scaled);
        if (std::abs(scaled - rounded) > 1e-9) {
          throw std::invalid_argument("mean field is not a multiple of 1/" +
                                      std::to_string(n));
        }
        m.push_back(static_cast<int>(rounded));
      }
      counts.push_back(std::move(m));
    }
    DeviationEstimate dev = ExpectedDeviation(WithPopulation(spec, n), counts, gammas);
    fit.populations.push_back(n);
    fit.deviation.push_back(dev.total);
    fit.stderr.push_back(dev.stderr);
    fit.per_team.push_back(dev.per_team);
    for (int k = 0; k < num_teams; ++k) {
      fit.kappa[k] = std::max(fit.kappa[k], std::sqrt(n) * dev.per_team[k]);
    }
    if (dev.total <= 0.0) fit.degenerate = true;
    log_n.push_back(std::log(n));
    log_dev.push_back(dev.total > 0.0 ? std::log(dev.total) : 0.0);
  }
  if (!fit.degenerate) {
    LineFit line = FitLine(log_n, log_dev);
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.r_squared = line.r_squared;
  } else {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.intercept = std::numeric_limits<double>::quiet_NaN();
    fit.r_squared = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

std::vector<std::vector<double>> EstimateLipschitz(
    const GameSpec& spec, const JointLattice& points,
    const std::vector<std::vector<std::vector<double>>>& values,
    size_t pair_cap, std::uint64_t seed) {
  const size_t num_points = points.size();
  if (num_points < 2) {
    throw std::invalid_argument("Lipschitz estimate needs at least two points");
  }
  const int num_teams = points.num_teams();
  const int horizon = static_cast<int>(values.size());
  // Per-team distances between grid points.
  std::vector<std::vector<double>> team_dist(num_teams);
  for (int k = 0; k < num_teams; ++k) {
    const TeamLattice& team = points.team(k);
    team_dist[k].resize(team.size() * team.size());
    for (size_t a = 0; a < team.size(); ++a) {
      for (size_t b = 0; b < team.size(); ++b) {
        team_dist[k][a * team.size() + b] = Wasserstein(
            team.mean_field(a), team.mean_field(b), spec.teams[k].state_metric);
      }
    }
  }
  std::vector<std::vector<size_t>> parts(num_points);
  for (size_t z = 0; z < num_points; ++z) parts[z] = points.Decompose(z);
  auto distance = [&](size_t a, size_t b) {
    double d = 0.0;
    for (int k = 0; k < num_teams; ++k) {
      d += team_dist[k][parts[a][k] * points.team(k).size() + parts[b][k]];
    }
    return d;
  };
  std::vector<std::vector<double>> out(num_teams, std::vector<double>(horizon, 0.0));
  const size_t num_pairs = num_points * (num_points - 1) / 2;
  if (num_pairs <= pair_cap) {
    std::vector<double> weights(num_points);
    for (size_t a = 0; a + 1 < num_points; ++a) {
      const size_t rest = num_points - a - 1;
      for (size_t b = a + 1; b < num_points; ++b) {
        double d = distance(a, b);
        weights[b - a - 1] = d > 1e-15 ? 1.0 / d : 0.0;
      }
      std::span<const double> w(weights.data(), rest);
      for (int t = 0; t < horizon; ++t) {
        for (int k = 0; k < num_teams; ++k) {
          const std::vector<double>& v = values[t][k];
          out[k][t] = std::max(
              out[k][t],
              simd::MaxScaledAbsDiff(std::span<const double>(v.data() + a + 1, rest),
                                     v[a], w));
        }
      }
    }
    return out;
  }
  RngStream rng = RngStream::Derive(seed, {Fnv1a64("lipschitz_pairs")});
  for (size_t n = 0; n < pair_cap; ++n) {
    size_t a = rng() % num_points;
    size_t b = rng() % num_points;
    if (a == b) continue;
    double d = distance(a, b);
    if (d <= 1e-15) continue;
    for (int t = 0; t < horizon; ++t) {
      for (int k = 0; k < num_teams; ++k) {
        out[k][t] = std::max(out[k][t],
                             std::abs(values[t][k][a] - values[t][k][b]) / d);
      }
    }
  }
  return out;
}

double ApproximationBound(const std::vector<double>& kappa,
                          const std::vector<std::vector<double>>& lipschitz,
                          const std::vector<int>& populations) {
  double total = 0.0;
  for (size_t k = 0; k < kappa.size(); ++k) {
    if (kappa[k] < 0.0 || populations[k] <= 0) {
      throw std::invalid_argument("bound inputs must be nonnegative");
    }
    for (double l : lipschitz[k]) {
      if (l < 0.0) throw std::invalid_argument("bound inputs must be nonnegative");
      total += kappa[k] * l / std::sqrt(static_cast<double>(populations[k]));
    }
  }
  return 2.0 * total;
}

LimitCheckReport LimitConsistencyCheck(const GameSpec& spec,
                                       const std::vector<LimitCheckCase>& cases,
                                       const std::vector<double>& kappa) {
  LimitCheckReport report;
  report.max_deviation_excess = -std::numeric_limits<double>::infinity();
  double envelope = 0.0;
  for (int k = 0; k < spec.num_teams(); ++k) {
    envelope += kappa[k] / std::sqrt(static_cast<double>(spec.teams[k].population));
  }
  for (const LimitCheckCase& c : cases) {
    MeanField z = CountMeanField(c.counts, spec);
    double gap = 0.0;
    for (int k = 0; k < spec.num_teams(); ++k) {
      for (int t = 1; t <= spec.horizon; ++t) {
        gap = std::max(gap, std::abs(StageCost(z, c.gammas[k], spec, k, t) -
                                     LimitStageCost(z, c.gammas[k], spec, k, t)));
      }
    }
    double excess = ExpectedDeviation(spec, c.counts, c.gammas).total - envelope;
    report.cost_gap.push_back(gap);
    report.deviation_excess.push_back(excess);
    report.max_cost_gap = std::max(report.max_cost_gap, gap);
    report.max_deviation_excess = std::max(report.max_deviation_excess, excess);
  }
  if (cases.empty()) report.max_deviation_excess = 0.0;
  return report;
}

}  // namespace mfteams
