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

#include "mfteams/static_game.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mfteams/errors.h"

namespace mfteams {
namespace {

using nlohmann::json;

int ActionIndex(const StaticGame& game, int player, const json& v) {
  if (v.is_number_integer()) return v.get<int>();
  const auto& labels = game.action_labels[player];
  for (size_t a = 0; a < labels.size(); ++a) {
    if (labels[a] == v.get<std::string>()) return static_cast<int>(a);
  }
  throw ValidationError("unknown action '" + v.get<std::string>() +
                        "' for player " + std::to_string(player));
}

// Enumerates every joint action of `members`, others held at `base`.
template <typename Fn>
void ForEachJointDeviation(const StaticGame& game, const std::vector<int>& members,
                           std::vector<int> base, Fn&& fn) {
  for (int p : members) base[p] = 0;
  while (true) {
    fn(base);
    int i = static_cast<int>(members.size()) - 1;
    for (; i >= 0; --i) {
      int p = members[i];
      if (++base[p] < static_cast<int>(game.action_labels[p].size())) break;
      base[p] = 0;
    }
    if (i < 0) return;
  }
}

}  // namespace

size_t StaticGame::num_profiles() const {
  size_t n = 1;
  for (const auto& a : action_labels) n *= a.size();
  return n;
}

std::vector<int> StaticGame::Decompose(size_t profile) const {
  std::vector<int> out(num_players());
  for (int p = num_players() - 1; p >= 0; --p) {
    out[p] = static_cast<int>(profile % action_labels[p].size());
    profile /= action_labels[p].size();
  }
  return out;
}

size_t StaticGame::Compose(const std::vector<int>& actions) const {
  size_t idx = 0;
  for (int p = 0; p < num_players(); ++p) idx = idx * action_labels[p].size() + actions[p];
  return idx;
}

std::string StaticGame::Label(const std::vector<int>& actions) const {
  std::string out = "(";
  for (int p = 0; p < num_players(); ++p) {
    if (p > 0) out += ",";
    out += action_labels[p][actions[p]];
  }
  return out + ")";
}

StaticGame LoadStaticGame(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("static game: ") + e.what());
  }
  StaticGame game;
  try {
    for (const auto& p : doc.at("players")) {
      game.player_names.push_back(p.value("name", ""));
      game.action_labels.push_back(p.at("actions").get<std::vector<std::string>>());
    }
    const int n = game.num_players();
    if (n == 0) throw ValidationError("static game has no players");
    game.payoff.assign(n, std::vector<double>(game.num_profiles(), 0.0));
    std::vector<bool> seen(game.num_profiles(), false);
    for (const auto& o : doc.at("outcomes")) {
      const auto& prof = o.at("profile");
      const auto& pay = o.at("payoffs");
      if (static_cast<int>(prof.size()) != n || static_cast<int>(pay.size()) != n) {
        throw ValidationError("outcome arity differs from the number of players");
      }
      std::vector<int> actions;
      for (int p = 0; p < n; ++p) actions.push_back(ActionIndex(game, p, prof[p]));
      for (int p = 0; p < n; ++p) {
        if (actions[p] < 0 ||
            actions[p] >= static_cast<int>(game.action_labels[p].size())) {
          throw ValidationError("action index out of range");
        }
      }
      size_t idx = game.Compose(actions);
      if (seen[idx]) throw ValidationError("duplicate outcome " + game.Label(actions));
      seen[idx] = true;
      for (int p = 0; p < n; ++p) game.payoff[p][idx] = pay[p].get<double>();
    }
    for (size_t i = 0; i < seen.size(); ++i) {
      if (!seen[i]) {
        throw ValidationError("missing outcome " + game.Label(game.Decompose(i)));
      }
    }
    if (doc.contains("teams")) {
      game.teams = doc.at("teams").get<std::vector<std::vector<int>>>();
    } else {
      for (int p = 0; p < n; ++p) game.teams.push_back({p});
    }
    std::vector<int> cover(n, 0);
    for (const auto& team : game.teams) {
      for (int p : team) {
        if (p < 0 || p >= n) throw ValidationError("team member out of range");
        ++cover[p];
      }
    }
    for (int p = 0; p < n; ++p) {
      if (cover[p] != 1) {
        throw ValidationError("teams must cover player " + std::to_string(p) +
                              " exactly once");
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("static game: ") + e.what());
  }
  return game;
}

StaticGame LoadStaticGameFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return LoadStaticGame(buf.str());
}

std::vector<std::vector<int>> PureNashStatic(const StaticGame& game) {
  std::vector<std::vector<int>> out;
  for (size_t i = 0; i < game.num_profiles(); ++i) {
    std::vector<int> prof = game.Decompose(i);
    bool stable = true;
    for (int p = 0; p < game.num_players() && stable; ++p) {
      std::vector<int> dev = prof;
      for (size_t a = 0; a < game.action_labels[p].size(); ++a) {
        dev[p] = static_cast<int>(a);
        if (game.payoff[p][game.Compose(dev)] > game.payoff[p][i]) {
          stable = false;
          break;
        }
      }
    }
    if (stable) out.push_back(prof);
  }
  return out;
}

std::vector<std::vector<int>> TeamNashStatic(const StaticGame& game) {
  std::vector<std::vector<int>> out;
  for (size_t i = 0; i < game.num_profiles(); ++i) {
    std::vector<int> prof = game.Decompose(i);
    bool stable = true;
    for (const auto& team : game.teams) {
      auto team_payoff = [&](size_t idx) {
        double sum = 0.0;
        for (int p : team) sum += game.payoff[p][idx];
        return sum;
      };
      const double current = team_payoff(i);
      ForEachJointDeviation(game, team, prof, [&](const std::vector<int>& dev) {
        if (team_payoff(game.Compose(dev)) > current) stable = false;
      });
      if (!stable) break;
    }
    if (stable) out.push_back(prof);
  }
  return out;
}

}  // namespace mfteams
