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

#include "mfteams/stage_game.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "mfteams/errors.h"
#include "mfteams/simd/kernels.h"
#include "mfteams/util.h"

namespace mfteams {
namespace {

// Lexicographic enumeration of k-subsets of {0..n-1}. Returns false once
// `idx` was the last subset.
bool NextCombination(std::vector<int>& idx, int n) {
  int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::vector<int> SupportOf(const std::vector<double>& x) {
  std::vector<int> out;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<double> Dirac(int n, int i) {
  std::vector<double> e(n, 0.0);
  e[i] = 1.0;
  return e;
}

int ArgMin(const std::vector<double>& v) {
  return static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
}

// Solves [A; 1^T] w = [u 1; 1] for (w, u): the opponent mixture w on its
// support making every row of A (own support x opponent support) equal.
// Returns false if the system is inconsistent.
bool SolveIndifference(const Eigen::MatrixXd& a, std::vector<double>& w,
                       double tol) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows + 1, cols + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows + 1);
  m.topLeftCorner(rows, cols) = a;
  m.topRightCorner(rows, 1).setConstant(-1.0);
  m.bottomLeftCorner(1, cols).setOnes();
  rhs(rows) = 1.0;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
  Eigen::VectorXd sol = cod.solve(rhs);
  if (!sol.allFinite()) return false;
  if ((m * sol - rhs).cwiseAbs().maxCoeff() > tol) return false;
  w.assign(cols, 0.0);
  double total = 0.0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (sol(j) < -tol) return false;
    w[j] = std::max(sol(j), 0.0);
    total += w[j];
  }
  if (total <= 0.0) return false;
  for (double& v : w) v /= total;
  return true;
}

}  // namespace

PrescriptionSet BuildPrescriptionSet(const GameSpec& spec, int k,
                                     PrescriptionMode mode, int g, size_t cap) {
  if (k < 0 || k >= spec.num_teams()) {
    throw std::out_of_range("team index " + std::to_string(k));
  }
  if (mode == PrescriptionMode::kPure) g = 1;
  if (g < 1) throw std::invalid_argument("grid resolution must be >= 1");
  const TeamModel& team = spec.teams[k];
  const int num_states = team.num_states();
  const int num_actions = team.num_actions();
  std::vector<CountVector> rows = EnumerateCounts(g, num_actions, cap);
  size_t total = 1;
  for (int s = 0; s < num_states; ++s) {
    if (total > cap / rows.size()) {
      throw CapacityError("prescription set of team " + std::to_string(k) +
                          " exceeds cap " + std::to_string(cap));
    }
    total *= rows.size();
  }
  PrescriptionSet set;
  set.team = k;
  set.mode = mode;
  set.grid_resolution = g;
  set.items.reserve(total);
  std::vector<size_t> digit(num_states, 0);
  for (size_t n = 0; n < total; ++n) {
    Prescription gamma;
    gamma.num_states = num_states;
    gamma.num_actions = num_actions;
    gamma.rows.resize(static_cast<size_t>(num_states) * num_actions);
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        gamma.rows[static_cast<size_t>(s) * num_actions + a] =
            static_cast<double>(rows[digit[s]][a]) / g;
      }
    }
    set.items.push_back(std::move(gamma));
    for (int s = num_states - 1; s >= 0; --s) {
      if (++digit[s] < rows.size()) break;
      digit[s] = 0;
    }
  }
  return set;
}

std::vector<PrescriptionSet> BuildPrescriptionSets(const GameSpec& spec,
                                                   PrescriptionMode mode, int g,
                                                   size_t cap) {
  std::vector<PrescriptionSet> sets;
  for (int k = 0; k < spec.num_teams(); ++k) {
    sets.push_back(BuildPrescriptionSet(spec, k, mode, g, cap));
  }
  return sets;
}

size_t StageGame::num_profiles() const {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  return n;
}

std::vector<int> StageGame::Decompose(size_t joint) const {
  std::vector<int> profile(shape.size());
  for (int k = num_teams() - 1; k >= 0; --k) {
    profile[k] = static_cast<int>(joint % shape[k]);
    joint /= shape[k];
  }
  return profile;
}

size_t StageGame::Compose(std::span<const int> profile) const {
  size_t joint = 0;
  for (int k = 0; k < num_teams(); ++k) joint = joint * shape[k] + profile[k];
  return joint;
}

std::vector<double> Contract(
    std::span<const double> tensor, std::span<const size_t> dims,
    const std::vector<std::vector<std::vector<double>>>& factors) {
  const int num_axes = static_cast<int>(dims.size());
  if (static_cast<int>(factors.size()) != num_axes) {
    throw std::invalid_argument("Contract: one factor list per axis");
  }
  std::vector<double> current(tensor.begin(), tensor.end());
  // Axes > k are already contracted; `inner` is their combined output size.
  size_t inner = 1;
  for (int k = num_axes - 1; k >= 0; --k) {
    const size_t d = dims[k];
    const size_t outputs = factors[k].size();
    const size_t outer = current.size() / (d * inner);
    std::vector<double> next(outer * outputs * inner, 0.0);
    for (size_t o = 0; o < outer; ++o) {
      for (size_t j = 0; j < outputs; ++j) {
        const std::vector<double>& f = factors[k][j];
        if (inner == 1) {
          next[o * outputs + j] = simd::Dot(
              f, std::span<const double>(current.data() + o * d, d));
          continue;
        }
        std::span<double> dst(next.data() + (o * outputs + j) * inner, inner);
        for (size_t m = 0; m < d; ++m) {
          if (f[m] == 0.0) continue;
          simd::Axpy(f[m],
                     std::span<const double>(
                         current.data() + (o * d + m) * inner, inner),
                     dst);
        }
      }
    }
    current = std::move(next);
    inner *= outputs;
  }
  return current;
}

std::vector<double> StageCostsAt(const GameSpec& spec, const JointLattice& lattice,
                                 size_t z_index, int k, int t,
                                 const PrescriptionSet& set) {
  MeanField z = lattice.MeanFieldAt(z_index);
  std::vector<double> out;
  out.reserve(set.size());
  for (const Prescription& gamma : set.items) {
    out.push_back(StageCost(z, gamma, spec, k, t));
  }
  return out;
}

std::vector<std::vector<double>> TeamKernelsAt(const GameSpec& spec,
                                               const JointLattice& lattice,
                                               size_t z_index, int k,
                                               const PrescriptionSet& set) {
  MeanField z = lattice.MeanFieldAt(z_index);
  std::vector<CountVector> counts = lattice.CountsAt(z_index);
  std::vector<std::vector<double>> out;
  out.reserve(set.size());
  for (const Prescription& gamma : set.items) {
    out.push_back(
        TeamKernelOnLattice(spec, k, z, counts[k], gamma, lattice.team(k)));
  }
  return out;
}

StageGame ComposeStageGame(
    const std::vector<std::vector<double>>& stage_costs,
    const std::vector<std::vector<std::vector<double>>>& kernels,
    std::span<const size_t> dims,
    const std::vector<std::vector<double>>& continuation) {
  const int num_teams = static_cast<int>(stage_costs.size());
  StageGame game;
  for (const auto& c : stage_costs) game.shape.push_back(static_cast<int>(c.size()));
  const size_t num_profiles = game.num_profiles();
  game.cost.resize(num_teams);
  for (int i = 0; i < num_teams; ++i) {
    std::vector<double> cost(num_profiles, 0.0);
    if (!continuation.empty()) cost = Contract(continuation[i], dims, kernels);
    size_t stride = 1;
    for (int k = num_teams - 1; k > i; --k) stride *= game.shape[k];
    for (size_t p = 0; p < num_profiles; ++p) {
      cost[p] += stage_costs[i][(p / stride) % game.shape[i]];
    }
    game.cost[i] = std::move(cost);
  }
  return game;
}

StageGame BuildStageGame(const GameSpec& spec, const JointLattice& lattice,
                         size_t z_index, int t,
                         const std::vector<std::vector<double>>& continuation,
                         const std::vector<PrescriptionSet>& sets) {
  const int num_teams = spec.num_teams();
  std::vector<std::vector<double>> stage_costs;
  std::vector<std::vector<std::vector<double>>> kernels;
  std::vector<size_t> dims;
  for (int k = 0; k < num_teams; ++k) {
    stage_costs.push_back(StageCostsAt(spec, lattice, z_index, k, t, sets[k]));
    if (!continuation.empty()) {
      kernels.push_back(TeamKernelsAt(spec, lattice, z_index, k, sets[k]));
    }
    dims.push_back(lattice.team(k).size());
  }
  return ComposeStageGame(stage_costs, kernels, dims, continuation);
}

size_t StageEquilibrium::support_size() const {
  size_t n = 0;
  for (const auto& x : mixture) n += SupportOf(x).size();
  return n;
}

std::vector<double> ExpectedCostVector(
    const StageGame& game, int k, const std::vector<std::vector<double>>& mixture) {
  std::vector<size_t> dims(game.shape.begin(), game.shape.end());
  std::vector<std::vector<std::vector<double>>> factors(game.num_teams());
  for (int i = 0; i < game.num_teams(); ++i) {
    if (i == k) {
      for (int j = 0; j < game.shape[i]; ++j) {
        factors[i].push_back(Dirac(game.shape[i], j));
      }
    } else {
      factors[i].push_back(mixture[i]);
    }
  }
  return Contract(game.cost[k], dims, factors);
}

std::vector<double> ExpectedCosts(const StageGame& game,
                                  const std::vector<std::vector<double>>& mixture) {
  std::vector<size_t> dims(game.shape.begin(), game.shape.end());
  std::vector<std::vector<std::vector<double>>> factors;
  for (const auto& x : mixture) factors.push_back({x});
  std::vector<double> out;
  for (int k = 0; k < game.num_teams(); ++k) {
    out.push_back(Contract(game.cost[k], dims, factors)[0]);
  }
  return out;
}

double CertifyEpsilon(const StageGame& game,
                      const std::vector<std::vector<double>>& mixture) {
  double eps = 0.0;
  for (int k = 0; k < game.num_teams(); ++k) {
    std::vector<double> v = ExpectedCostVector(game, k, mixture);
    double expected = simd::Dot(v, mixture[k]);
    double best = *std::min_element(v.begin(), v.end());
    eps = std::max(eps, expected - best);
  }
  return eps;
}

StageEquilibrium MakePureEquilibrium(const StageGame& game,
                                     const std::vector<int>& profile) {
  StageEquilibrium eq;
  eq.pure = true;
  eq.profile = profile;
  for (int k = 0; k < game.num_teams(); ++k) {
    eq.mixture.push_back(Dirac(game.shape[k], profile[k]));
  }
  eq.epsilon = CertifyEpsilon(game, eq.mixture);
  return eq;
}

std::vector<std::vector<int>> PureNash(const StageGame& game, double tol) {
  const int num_teams = game.num_teams();
  const size_t num_profiles = game.num_profiles();
  std::vector<size_t> strides(num_teams, 1);
  for (int k = num_teams - 2; k >= 0; --k) {
    strides[k] = strides[k + 1] * game.shape[k + 1];
  }
  std::vector<std::vector<int>> out;
  for (size_t p = 0; p < num_profiles; ++p) {
    bool stable = true;
    for (int k = 0; k < num_teams && stable; ++k) {
      const std::vector<double>& c = game.cost[k];
      const size_t own = (p / strides[k]) % game.shape[k];
      const size_t base = p - own * strides[k];
      for (int j = 0; j < game.shape[k]; ++j) {
        if (c[base + j * strides[k]] < c[p] - tol) {
          stable = false;
          break;
        }
      }
    }
    if (stable) out.push_back(game.Decompose(p));
  }
  return out;
}

StageEquilibrium MixedNash2Team(const StageGame& game,
                                const MixedNashOptions& options) {
  if (game.num_teams() != 2) {
    throw std::invalid_argument("MixedNash2Team needs exactly two teams");
  }
  const int n0 = game.shape[0];
  const int n1 = game.shape[1];
  auto c = [&](int k, int i, int j) {
    return game.cost[k][static_cast<size_t>(i) * n1 + j];
  };
  const int max0 = std::min(options.support_bound, n0);
  const int max1 = std::min(options.support_bound, n1);
  std::vector<std::pair<int, int>> sizes;
  for (int s0 = 1; s0 <= max0; ++s0) {
    for (int s1 = 1; s1 <= max1; ++s1) sizes.emplace_back(s0, s1);
  }
  std::stable_sort(sizes.begin(), sizes.end(), [](auto a, auto b) {
    auto key = [](std::pair<int, int> p) {
      return std::make_tuple(p.first + p.second, std::abs(p.first - p.second),
                             p.first);
    };
    return key(a) < key(b);
  });
  size_t visited = 0;
  for (auto [s0, s1] : sizes) {
    std::vector<int> sup0(s0);
    std::iota(sup0.begin(), sup0.end(), 0);
    do {
      std::vector<int> sup1(s1);
      std::iota(sup1.begin(), sup1.end(), 0);
      do {
        if (++visited > options.max_support_pairs) {
          throw NotFoundError("support enumeration hit its cap of " +
                              std::to_string(options.max_support_pairs) +
                              " support pairs");
        }
        // Team 1's mixture makes team 0 indifferent over sup0, and vice versa.
        Eigen::MatrixXd a0(s0, s1), a1(s1, s0);
        for (int i = 0; i < s0; ++i) {
          for (int j = 0; j < s1; ++j) {
            a0(i, j) = c(0, sup0[i], sup1[j]);
            a1(j, i) = c(1, sup0[i], sup1[j]);
          }
        }
        std::vector<double> y, x;
        if (!SolveIndifference(a0, y, options.tol)) continue;
        if (!SolveIndifference(a1, x, options.tol)) continue;
        std::vector<std::vector<double>> mixture = {std::vector<double>(n0, 0.0),
                                                    std::vector<double>(n1, 0.0)};
        for (int i = 0; i < s0; ++i) mixture[0][sup0[i]] = x[i];
        for (int j = 0; j < s1; ++j) mixture[1][sup1[j]] = y[j];
        double eps = CertifyEpsilon(game, mixture);
        if (eps > options.tol) continue;
        StageEquilibrium eq;
        eq.pure = SupportOf(mixture[0]).size() == 1 &&
                  SupportOf(mixture[1]).size() == 1;
        if (eq.pure) {
          eq.profile = {static_cast<int>(SupportOf(mixture[0])[0]),
                        static_cast<int>(SupportOf(mixture[1])[0])};
        }
        eq.mixture = std::move(mixture);
        eq.epsilon = eps;
        return eq;
      } while (NextCombination(sup1, n1));
    } while (NextCombination(sup0, n0));
  }
  throw NotFoundError("no equilibrium with support size <= " +
                      std::to_string(options.support_bound) + " certified to " +
                      FormatDouble(options.tol));
}

StageEquilibrium BrIteration(const StageGame& game, int max_iters, double tol) {
  const int num_teams = game.num_teams();
  std::vector<std::vector<double>> mixture;
  for (int k = 0; k < num_teams; ++k) mixture.push_back(Dirac(game.shape[k], 0));
  StageEquilibrium best;
  best.epsilon = std::numeric_limits<double>::infinity();
  auto consider = [&](StageEquilibrium candidate) {
    if (candidate.epsilon < best.epsilon) best = std::move(candidate);
  };
  for (int it = 1; it <= max_iters; ++it) {
    std::vector<int> response(num_teams);
    for (int k = 0; k < num_teams; ++k) {
      response[k] = ArgMin(ExpectedCostVector(game, k, mixture));
    }
    consider(MakePureEquilibrium(game, response));
    StageEquilibrium mixed;
    mixed.pure = false;
    mixed.mixture = mixture;
    mixed.epsilon = CertifyEpsilon(game, mixture);
    consider(std::move(mixed));
    if (best.epsilon <= tol) break;
    const double alpha = 1.0 / (it + 1);
    for (int k = 0; k < num_teams; ++k) {
      for (double& v : mixture[k]) v *= 1.0 - alpha;
      mixture[k][response[k]] += alpha;
    }
  }
  return best;
}

StageEquilibrium SelectEquilibrium(const std::vector<StageEquilibrium>& candidates) {
  if (candidates.empty()) throw NotFoundError("no equilibrium candidates");
  auto supports = [](const StageEquilibrium& eq) {
    std::vector<std::vector<int>> out;
    for (const auto& x : eq.mixture) out.push_back(SupportOf(x));
    return out;
  };
  size_t best = 0;
  for (size_t i = 1; i < candidates.size(); ++i) {
    const StageEquilibrium& a = candidates[i];
    const StageEquilibrium& b = candidates[best];
    bool better = false;
    if (a.pure != b.pure) {
      better = a.pure;
    } else if (a.pure) {
      better = a.profile < b.profile;
    } else if (a.support_size() != b.support_size()) {
      better = a.support_size() < b.support_size();
    } else {
      better = supports(a) < supports(b);
    }
    if (better) best = i;
  }
  return candidates[best];
}

StageEquilibrium SolveStageGame(const StageGame& game,
                                const StageSolveOptions& options, int stage,
                                const std::string& point_label) {
  std::vector<std::vector<int>> pure = PureNash(game);
  if (!pure.empty()) {
    std::vector<StageEquilibrium> candidates;
    for (const auto& profile : pure) {
      candidates.push_back(MakePureEquilibrium(game, profile));
    }
    return SelectEquilibrium(candidates);
  }
  if (options.policy == EquilibriumPolicy::kPureOnly) {
    throw NoPureEquilibriumError(
        stage, point_label,
        "no pure equilibrium at stage " + std::to_string(stage) + ", point " +
            point_label);
  }
  if (game.num_teams() == 2) {
    try {
      return MixedNash2Team(game, options.mixed);
    } catch (const NotFoundError&) {
    }
  }
  return BrIteration(game, options.br_max_iters, options.br_tol);
}

}  // namespace mfteams
