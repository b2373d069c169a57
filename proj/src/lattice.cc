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

#include "mfteams/lattice.h"

#include <limits>
#include <numeric>
#include <stdexcept>

#include "mfteams/errors.h"

namespace mfteams {
namespace {

void Enumerate(int remaining, int pos, CountVector& cur,
               std::vector<CountVector>& out) {
  const int d = static_cast<int>(cur.size());
  if (pos == d - 1) {
    cur[pos] = remaining;
    out.push_back(cur);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    cur[pos] = v;
    Enumerate(remaining - v, pos + 1, cur, out);
  }
}

}  // namespace

size_t LatticeSize(int n, int d) {
  if (n < 0 || d < 1) return 0;
  // C(n+d-1, d-1) built incrementally: C(n+i, i) = C(n+i-1, i-1) * (n+i) / i.
  unsigned __int128 c = 1;
  for (int i = 1; i <= d - 1; ++i) {
    c = c * static_cast<unsigned>(n + i) / static_cast<unsigned>(i);
    if (c > std::numeric_limits<size_t>::max()) {
      return std::numeric_limits<size_t>::max();
    }
  }
  return static_cast<size_t>(c);
}

std::vector<CountVector> EnumerateCounts(int n, int d, size_t cap) {
  if (n < 0 || d < 1) throw std::invalid_argument("EnumerateCounts: n>=0, d>=1");
  const size_t size = LatticeSize(n, d);
  if (size > cap) {
    throw CapacityError("count lattice of N=" + std::to_string(n) + ", d=" +
                        std::to_string(d) + " has " + std::to_string(size) +
                        " points, above cap " + std::to_string(cap));
  }
  std::vector<CountVector> out;
  out.reserve(size);
  CountVector cur(d, 0);
  Enumerate(n, 0, cur, out);
  return out;
}

std::string CountLabel(const CountVector& m) {
  std::string s;
  for (size_t i = 0; i < m.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(m[i]);
  }
  return s;
}

TeamLattice::TeamLattice(int denominator, int num_states, size_t cap)
    : denominator_(denominator),
      num_states_(num_states),
      points_(EnumerateCounts(denominator, num_states, cap)) {
  for (size_t i = 0; i < points_.size(); ++i) index_.emplace(points_[i], i);
}

std::vector<double> TeamLattice::mean_field(size_t i) const {
  std::vector<double> z(num_states_);
  for (int s = 0; s < num_states_; ++s) {
    z[s] = static_cast<double>(points_[i][s]) / denominator_;
  }
  return z;
}

size_t TeamLattice::IndexOf(const CountVector& m) const {
  auto it = index_.find(m);
  if (it == index_.end()) {
    throw std::out_of_range("count vector " + CountLabel(m) + " not on lattice");
  }
  return it->second;
}

JointLattice::JointLattice(std::vector<TeamLattice> teams, size_t cap)
    : teams_(std::move(teams)) {
  strides_.assign(teams_.size(), 1);
  size_ = 1;
  for (int k = static_cast<int>(teams_.size()) - 1; k >= 0; --k) {
    strides_[k] = size_;
    if (teams_[k].size() != 0 && size_ > cap / teams_[k].size()) {
      throw CapacityError("joint lattice exceeds cap " + std::to_string(cap));
    }
    size_ *= teams_[k].size();
  }
  if (size_ > cap) {
    throw CapacityError("joint lattice exceeds cap " + std::to_string(cap));
  }
}

JointLattice JointLattice::ForPopulations(const GameSpec& spec, size_t cap) {
  std::vector<TeamLattice> teams;
  for (const auto& t : spec.teams) {
    teams.emplace_back(t.population, t.num_states(), cap);
  }
  return JointLattice(std::move(teams), cap);
}

JointLattice JointLattice::ForResolutions(const GameSpec& spec,
                                          const std::vector<int>& resolutions,
                                          size_t cap) {
  if (resolutions.size() != spec.teams.size()) {
    throw std::invalid_argument("one grid resolution per team required");
  }
  std::vector<TeamLattice> teams;
  for (size_t k = 0; k < spec.teams.size(); ++k) {
    if (resolutions[k] < 1) {
      throw std::invalid_argument("grid resolution must be positive");
    }
    teams.emplace_back(resolutions[k], spec.teams[k].num_states(), cap);
  }
  return JointLattice(std::move(teams), cap);
}

std::vector<size_t> JointLattice::Decompose(size_t joint) const {
  std::vector<size_t> idx(teams_.size());
  for (size_t k = 0; k < teams_.size(); ++k) {
    idx[k] = joint / strides_[k];
    joint %= strides_[k];
  }
  return idx;
}

size_t JointLattice::Compose(std::span<const size_t> per_team) const {
  size_t joint = 0;
  for (size_t k = 0; k < teams_.size(); ++k) joint += per_team[k] * strides_[k];
  return joint;
}

MeanField JointLattice::MeanFieldAt(size_t joint) const {
  MeanField z;
  const auto idx = Decompose(joint);
  for (size_t k = 0; k < teams_.size(); ++k) {
    z.per_team.push_back(teams_[k].mean_field(idx[k]));
  }
  return z;
}

std::vector<CountVector> JointLattice::CountsAt(size_t joint) const {
  std::vector<CountVector> out;
  const auto idx = Decompose(joint);
  for (size_t k = 0; k < teams_.size(); ++k) out.push_back(teams_[k].counts(idx[k]));
  return out;
}

size_t JointLattice::IndexOfCounts(const std::vector<CountVector>& counts) const {
  if (counts.size() != teams_.size()) {
    throw std::out_of_range("joint count has wrong number of teams");
  }
  std::vector<size_t> idx(teams_.size());
  for (size_t k = 0; k < teams_.size(); ++k) idx[k] = teams_[k].IndexOf(counts[k]);
  return Compose(idx);
}

std::string JointLattice::Label(size_t joint) const {
  std::string s;
  const auto idx = Decompose(joint);
  for (size_t k = 0; k < teams_.size(); ++k) {
    if (k) s += '|';
    s += CountLabel(teams_[k].counts(idx[k]));
  }
  return s;
}

std::string JointLattice::RationalLabel(size_t joint) const {
  std::string s;
  const auto idx = Decompose(joint);
  for (size_t k = 0; k < teams_.size(); ++k) {
    if (k) s += '|';
    const CountVector& m = teams_[k].counts(idx[k]);
    const int n = teams_[k].denominator();
    for (size_t i = 0; i < m.size(); ++i) {
      if (i) s += ',';
      const int g = std::gcd(m[i], n);
      const int num = m[i] / g, den = n / g;
      s += std::to_string(num);
      if (den != 1) s += "/" + std::to_string(den);
    }
  }
  return s;
}

}  // namespace mfteams
