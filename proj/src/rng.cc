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

#include "mfteams/rng.h"

namespace mfteams {

RngStream RngStream::Derive(std::uint64_t master_seed,
                            std::initializer_list<std::uint64_t> labels) {
  std::uint64_t key = Mix64(master_seed ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t label : labels) {
    key = Mix64(key ^ Mix64(label + 0x9e3779b97f4a7c15ULL));
  }
  return RngStream(key);
}

int RngStream::Categorical(std::span<const double> probs) {
  const double u = Uniform();
  double cum = 0.0;
  int last_positive = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    cum += probs[i];
    if (u < cum) return last_positive;
  }
  // Rounding left u beyond the accumulated mass.
  return last_positive;
}

}  // namespace mfteams
