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

#ifndef MFTEAMS_UTIL_H_
#define MFTEAMS_UTIL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

namespace mfteams {

// Runs fn(i) for i in [0, n) on up to `workers` threads with static
// contiguous chunks. Each index is handled exactly once; callers write to
// disjoint slots so results do not depend on scheduling. The first exception
// (lowest chunk) is rethrown after all threads join.
void ParallelFor(size_t n, int workers, const std::function<void(size_t)>& fn);

// std::thread::hardware_concurrency with a floor of 1.
int DefaultWorkers();

std::string HexDigest(std::uint64_t h);

// Shortest decimal text that round-trips the double.
std::string FormatDouble(double v);

}  // namespace mfteams

#endif  // MFTEAMS_UTIL_H_
