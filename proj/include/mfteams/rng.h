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

#ifndef MFTEAMS_RNG_H_
#define MFTEAMS_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string_view>

namespace mfteams {

// splitmix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// FNV-1a over bytes; used for purpose labels and content hashes.
constexpr std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Counter-based random stream: draw i is Mix64(key + i * golden), so a stream
// is fully determined by its key and any number of streams can be derived
// independently (e.g. one per episode/stage/team/agent/purpose) without
// sharing state between workers. Models UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t key) : key_(key) {}

  // Key from a master seed and an ordered list of labels.
  static RngStream Derive(std::uint64_t master_seed,
                          std::initializer_list<std::uint64_t> labels);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    ++counter_;
    return Mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Inverse-CDF draw; entries must be nonnegative and sum to ~1.
  int Categorical(std::span<const double> probs);

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Draw purposes used to key simulator streams.
enum class DrawPurpose : std::uint64_t {
  kInitialState = 1,
  kPrescription = 2,
  kAction = 3,
  kTransition = 4,
  kCountSampling = 5,
};

}  // namespace mfteams

#endif  // MFTEAMS_RNG_H_
