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

#ifndef MFTEAMS_LATTICE_H_
#define MFTEAMS_LATTICE_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mfteams/game_model.h"

namespace mfteams {

// Occupancy of each local state; entries sum to the team population.
using CountVector = std::vector<int>;

inline constexpr size_t kDefaultLatticeCap = 10'000'000;

// C(n+d-1, d-1), saturating at SIZE_MAX.
size_t LatticeSize(int n, int d);

// All length-d nonnegative integer vectors summing to n, ordered
// lexicographically from the top: (n,0,..), (n-1,1,..), ..., (..,0,n).
// Throws CapacityError above `cap` points.
std::vector<CountVector> EnumerateCounts(int n, int d,
                                         size_t cap = kDefaultLatticeCap);

// "2-0-1"
std::string CountLabel(const CountVector& m);

// Points {m / denominator} for one team. Serves both as the count lattice of
// a population (denominator = N) and as the uniform simplex grid (n).
class TeamLattice {
 public:
  TeamLattice(int denominator, int num_states, size_t cap = kDefaultLatticeCap);

  int denominator() const { return denominator_; }
  int num_states() const { return num_states_; }
  size_t size() const { return points_.size(); }
  const CountVector& counts(size_t i) const { return points_[i]; }
  std::vector<double> mean_field(size_t i) const;
  // Throws std::out_of_range for vectors not on the lattice.
  size_t IndexOf(const CountVector& m) const;

 private:
  int denominator_;
  int num_states_;
  std::vector<CountVector> points_;
  std::map<CountVector, size_t> index_;
};

// Cartesian product of team lattices, flattened in mixed radix with team 0
// most significant.
class JointLattice {
 public:
  JointLattice() = default;
  explicit JointLattice(std::vector<TeamLattice> teams,
                        size_t cap = kDefaultLatticeCap);

  // Count lattice of the spec populations.
  static JointLattice ForPopulations(const GameSpec& spec,
                                     size_t cap = kDefaultLatticeCap);
  // Simplex grid with per-team resolutions.
  static JointLattice ForResolutions(const GameSpec& spec,
                                     const std::vector<int>& resolutions,
                                     size_t cap = kDefaultLatticeCap);

  int num_teams() const { return static_cast<int>(teams_.size()); }
  size_t size() const { return size_; }
  const TeamLattice& team(int k) const { return teams_[k]; }

  std::vector<size_t> Decompose(size_t joint) const;
  size_t Compose(std::span<const size_t> per_team) const;
  size_t stride(int k) const { return strides_[k]; }

  MeanField MeanFieldAt(size_t joint) const;
  std::vector<CountVector> CountsAt(size_t joint) const;
  size_t IndexOfCounts(const std::vector<CountVector>& counts) const;
  // "2-0|1-1" for counts.
  std::string Label(size_t joint) const;
  // "1/2,1/2|1,0" for grid points (reduced fractions).
  std::string RationalLabel(size_t joint) const;

 private:
  std::vector<TeamLattice> teams_;
  std::vector<size_t> strides_;
  size_t size_ = 0;
};

}  // namespace mfteams

#endif  // MFTEAMS_LATTICE_H_
