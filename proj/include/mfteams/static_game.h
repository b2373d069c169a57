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

#ifndef MFTEAMS_STATIC_GAME_H_
#define MFTEAMS_STATIC_GAME_H_

#include <string>
#include <string_view>
#include <vector>

namespace mfteams {

// Normal-form game with payoffs (maximized) and a partition of the players
// into teams. Profiles are flattened with player 0 most significant.
struct StaticGame {
  std::vector<std::string> player_names;
  std::vector<std::vector<std::string>> action_labels;  // per player
  std::vector<std::vector<double>> payoff;               // [player][profile]
  std::vector<std::vector<int>> teams;

  int num_players() const { return static_cast<int>(action_labels.size()); }
  size_t num_profiles() const;
  std::vector<int> Decompose(size_t profile) const;
  size_t Compose(const std::vector<int>& actions) const;
  // "(T,L,I)"
  std::string Label(const std::vector<int>& actions) const;
};

// Document: {"players": [{"name", "actions": [...]}],
//            "outcomes": [{"profile": [labels], "payoffs": [...]}],
//            "teams": [[player indices]]}. Missing teams = singletons.
// Throws ParseError / ValidationError.
StaticGame LoadStaticGame(std::string_view document);
StaticGame LoadStaticGameFile(const std::string& path);

// Profiles where no player strictly gains by a unilateral change.
std::vector<std::vector<int>> PureNashStatic(const StaticGame& game);

// Profiles where no team has a joint reassignment of its members' actions
// that strictly raises the team's summed payoff.
std::vector<std::vector<int>> TeamNashStatic(const StaticGame& game);

}  // namespace mfteams

#endif  // MFTEAMS_STATIC_GAME_H_
