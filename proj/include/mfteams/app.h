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

#ifndef MFTEAMS_APP_H_
#define MFTEAMS_APP_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mfteams {

inline constexpr char kVersion[] = "0.1.0";

struct ExperimentConfig {
  // validate | solve-finite | solve-infinite | simulate | compare | bound |
  // static-tne
  std::string mode;
  std::string spec_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;  // overrides the spec seed
  int episodes = 10000;
  int grid_g = 0;  // 0 selects pure prescriptions
  std::vector<int> simplex_n;  // per team; empty means 2 N^(k)
  std::vector<int> n_sweep = {4, 8, 16};
  std::vector<int> kappa_sweep = {2, 4, 8, 16, 32, 64};
  bool pure_only = false;
  int workers = 0;  // 0 means hardware concurrency
};

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitCapacity = 3;
inline constexpr int kExitNoPureEquilibrium = 4;

// Runs one mode and writes its artifacts under <out_dir>/<mode>/. Errors are
// reported as error.json there and mapped onto the exit codes above.
int Run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

}  // namespace mfteams

#endif  // MFTEAMS_APP_H_
