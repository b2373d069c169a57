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

#include "mfteams/game_model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mfteams/errors.h"

namespace mfteams {
namespace {

constexpr double kStochasticTol = 1e-12;

using nlohmann::json;

std::string Where(int k) { return "team " + std::to_string(k); }

std::vector<std::string> ReadLabels(const json& team, const char* key, int k) {
  if (!team.contains(key) || !team[key].is_array() || team[key].empty()) {
    throw ParseError(Where(k) + ": '" + key + "' must be a nonempty array");
  }
  std::vector<std::string> labels;
  for (const auto& v : team[key]) {
    if (!v.is_string()) {
      throw ParseError(Where(k) + ": '" + key + "' entries must be strings");
    }
    labels.push_back(v.get<std::string>());
  }
  return labels;
}

double ReadNumber(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

// Resolves an index field given as integer position or as a label.
int ReadIndex(const json& rec, const char* key,
              const std::vector<std::string>& labels, const std::string& where) {
  if (!rec.contains(key)) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  const json& v = rec[key];
  int idx = -1;
  if (v.is_number_integer()) {
    idx = v.get<int>();
  } else if (v.is_string()) {
    auto it = std::find(labels.begin(), labels.end(), v.get<std::string>());
    if (it == labels.end()) {
      throw ValidationError(where + ": unknown label '" + v.get<std::string>() +
                            "' for field '" + key + "'");
    }
    idx = static_cast<int>(it - labels.begin());
  } else {
    throw ParseError(where + ": field '" + key + "' must be an index or label");
  }
  if (idx < 0 || idx >= static_cast<int>(labels.size())) {
    throw ValidationError(where + ": field '" + key + "' index " +
                          std::to_string(idx) + " out of range");
  }
  return idx;
}

// Reads a dense nested array with the given extents into a flat vector.
void ReadDense(const json& v, std::span<const size_t> extents,
               const std::string& where, std::vector<double>& out) {
  if (extents.empty()) {
    out.push_back(ReadNumber(v, where));
    return;
  }
  if (!v.is_array() || v.size() != extents[0]) {
    throw ParseError(where + ": expected an array of length " +
                     std::to_string(extents[0]));
  }
  for (size_t i = 0; i < extents[0]; ++i) {
    ReadDense(v[i], extents.subspan(1), where + "[" + std::to_string(i) + "]",
              out);
  }
}

size_t ArrayDepth(const json& v) {
  size_t depth = 0;
  const json* cur = &v;
  while (cur->is_array() && !cur->empty()) {
    ++depth;
    cur = &(*cur)[0];
  }
  return depth;
}

GameSpec ParseSpec(const json& doc) {
  if (!doc.is_object()) throw ParseError("spec: top level must be an object");
  for (const char* key : {"horizon", "teams"}) {
    if (!doc.contains(key)) {
      throw ParseError(std::string("spec: missing key '") + key + "'");
    }
  }
  GameSpec spec;
  if (!doc["horizon"].is_number_integer()) {
    throw ParseError("spec: 'horizon' must be an integer");
  }
  spec.horizon = doc["horizon"].get<int>();
  if (spec.horizon < 1) throw ValidationError("horizon: must be >= 1");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) {
      throw ParseError("spec: 'seed' must be a nonnegative integer");
    }
    spec.seed = doc["seed"].get<std::uint64_t>();
  }
  const json& teams = doc["teams"];
  if (!teams.is_array() || teams.empty()) {
    throw ParseError("spec: 'teams' must be a nonempty array");
  }
  const int num_teams = static_cast<int>(teams.size());

  // Labels first: coupling records may reference other teams' states.
  spec.teams.resize(num_teams);
  for (int k = 0; k < num_teams; ++k) {
    if (!teams[k].is_object()) throw ParseError(Where(k) + ": must be an object");
    spec.teams[k].state_labels = ReadLabels(teams[k], "states", k);
    spec.teams[k].action_labels = ReadLabels(teams[k], "actions", k);
  }
  const size_t width = spec.coupling_width();
  const size_t T = spec.horizon;

  for (int k = 0; k < num_teams; ++k) {
    const json& jt = teams[k];
    TeamModel& team = spec.teams[k];
    const size_t S = team.num_states();
    const size_t A = team.num_actions();
    const std::string where = Where(k);

    if (!jt.contains("population") || !jt["population"].is_number_integer()) {
      throw ParseError(where + ": 'population' must be an integer");
    }
    team.population = jt["population"].get<int>();

    if (!jt.contains("initial_law")) {
      throw ParseError(where + ": missing 'initial_law'");
    }
    const size_t law_extent[] = {S};
    ReadDense(jt["initial_law"], law_extent, where + ".initial_law",
              team.initial_law);

    if (jt.contains("metric")) {
      const size_t metric_extent[] = {S, S};
      ReadDense(jt["metric"], metric_extent, where + ".metric",
                team.state_metric);
    } else {
      team.state_metric.assign(S * S, 1.0);
      for (size_t i = 0; i < S; ++i) team.state_metric[i * S + i] = 0.0;
    }

    for (const char* key : {"transition", "cost"}) {
      if (!jt.contains(key) || !jt[key].is_object() ||
          !jt[key].contains("base")) {
        throw ParseError(where + ": '" + key + "' must be an object with 'base'");
      }
    }
    const size_t trans_extent[] = {S, A, S};
    ReadDense(jt["transition"]["base"], trans_extent, where + ".transition.base",
              team.transition_base);

    // Cost base is [T][S][A], or [S][A] for stage-independent costs.
    const json& cost_base = jt["cost"]["base"];
    if (ArrayDepth(cost_base) == 2) {
      std::vector<double> stationary;
      const size_t extent[] = {S, A};
      ReadDense(cost_base, extent, where + ".cost.base", stationary);
      for (size_t t = 0; t < T; ++t) {
        team.cost_base.insert(team.cost_base.end(), stationary.begin(),
                              stationary.end());
      }
    } else {
      const size_t extent[] = {T, S, A};
      ReadDense(cost_base, extent, where + ".cost.base", team.cost_base);
    }

    team.transition_coupling.assign(S * A * S * width, 0.0);
    if (jt["transition"].contains("coupling")) {
      const json& recs = jt["transition"]["coupling"];
      if (!recs.is_array()) {
        throw ParseError(where + ".transition.coupling: must be an array");
      }
      for (size_t r = 0; r < recs.size(); ++r) {
        const std::string rw =
            where + ".transition.coupling[" + std::to_string(r) + "]";
        const json& rec = recs[r];
        if (!rec.is_object()) throw ParseError(rw + ": must be an object");
        const int s = ReadIndex(rec, "s", team.state_labels, rw);
        const int a = ReadIndex(rec, "a", team.action_labels, rw);
        const int s2 = ReadIndex(rec, "s'", team.state_labels, rw);
        if (!rec.contains("team") || !rec["team"].is_number_integer()) {
          throw ParseError(rw + ": 'team' must be an integer");
        }
        const int other = rec["team"].get<int>();
        if (other < 0 || other >= num_teams) {
          throw ValidationError(rw + ": coupling team " + std::to_string(other) +
                                " out of range");
        }
        const int sigma =
            ReadIndex(rec, "sigma", spec.teams[other].state_labels, rw);
        if (!rec.contains("value")) throw ParseError(rw + ": missing 'value'");
        const double value = ReadNumber(rec["value"], rw + ".value");
        team.transition_coupling[((s * A + a) * S + s2) * width +
                                 spec.coupling_offset(other) + sigma] += value;
      }
    }

    team.cost_coupling.assign(T * S * A * width, 0.0);
    if (jt["cost"].contains("coupling")) {
      const json& recs = jt["cost"]["coupling"];
      if (!recs.is_array()) {
        throw ParseError(where + ".cost.coupling: must be an array");
      }
      for (size_t r = 0; r < recs.size(); ++r) {
        const std::string rw = where + ".cost.coupling[" + std::to_string(r) + "]";
        const json& rec = recs[r];
        if (!rec.is_object()) throw ParseError(rw + ": must be an object");
        const int s = ReadIndex(rec, "s", team.state_labels, rw);
        const int a = ReadIndex(rec, "a", team.action_labels, rw);
        if (!rec.contains("team") || !rec["team"].is_number_integer()) {
          throw ParseError(rw + ": 'team' must be an integer");
        }
        const int other = rec["team"].get<int>();
        if (other < 0 || other >= num_teams) {
          throw ValidationError(rw + ": coupling team " + std::to_string(other) +
                                " out of range");
        }
        const int sigma =
            ReadIndex(rec, "sigma", spec.teams[other].state_labels, rw);
        if (!rec.contains("value")) throw ParseError(rw + ": missing 'value'");
        const double value = ReadNumber(rec["value"], rw + ".value");
        // 't' is a 1-based stage; absent means every stage.
        size_t t_lo = 0, t_hi = T;
        if (rec.contains("t")) {
          if (!rec["t"].is_number_integer()) {
            throw ParseError(rw + ": 't' must be an integer");
          }
          const int t = rec["t"].get<int>();
          if (t < 1 || t > static_cast<int>(T)) {
            throw ValidationError(rw + ": stage t=" + std::to_string(t) +
                                  " outside 1.." + std::to_string(T));
          }
          t_lo = t - 1;
          t_hi = t;
        }
        for (size_t t = t_lo; t < t_hi; ++t) {
          team.cost_coupling[((t * S + s) * A + a) * width +
                             spec.coupling_offset(other) + sigma] += value;
        }
      }
    }
  }
  return spec;
}

void RequireFinite(const std::vector<double>& v, const std::string& what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ValidationError(what + ": non-finite entry");
  }
}

}  // namespace

size_t GameSpec::coupling_width() const {
  size_t w = 0;
  for (const auto& t : teams) w += t.state_labels.size();
  return w;
}

size_t GameSpec::coupling_offset(int k) const {
  size_t off = 0;
  for (int i = 0; i < k; ++i) off += teams[i].state_labels.size();
  return off;
}

GameSpec LoadSpec(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::exception& e) {
    throw ParseError(std::string("spec: malformed JSON: ") + e.what());
  }
  GameSpec spec;
  try {
    spec = ParseSpec(doc);
  } catch (const json::exception& e) {
    throw ParseError(std::string("spec: ") + e.what());
  }
  ValidateSpec(spec);
  return spec;
}

GameSpec LoadSpecFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("spec: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return LoadSpec(buf.str());
}

nlohmann::json SpecToJson(const GameSpec& spec) {
  json doc;
  doc["horizon"] = spec.horizon;
  doc["seed"] = spec.seed;
  doc["teams"] = json::array();
  const size_t width = spec.coupling_width();
  for (int k = 0; k < spec.num_teams(); ++k) {
    const TeamModel& team = spec.teams[k];
    const size_t S = team.num_states(), A = team.num_actions();
    json jt;
    jt["states"] = team.state_labels;
    jt["actions"] = team.action_labels;
    jt["population"] = team.population;
    jt["initial_law"] = team.initial_law;
    json metric = json::array();
    for (size_t i = 0; i < S; ++i) {
      metric.push_back(std::vector<double>(
          team.state_metric.begin() + i * S, team.state_metric.begin() + (i + 1) * S));
    }
    jt["metric"] = metric;

    json tb = json::array();
    for (size_t s = 0; s < S; ++s) {
      json row = json::array();
      for (size_t a = 0; a < A; ++a) {
        auto it = team.transition_base.begin() + (s * A + a) * S;
        row.push_back(std::vector<double>(it, it + S));
      }
      tb.push_back(row);
    }
    json tc = json::array();
    for (size_t s = 0; s < S; ++s)
      for (size_t a = 0; a < A; ++a)
        for (size_t s2 = 0; s2 < S; ++s2)
          for (int o = 0; o < spec.num_teams(); ++o)
            for (int sig = 0; sig < spec.teams[o].num_states(); ++sig) {
              double v = team.transition_coupling[((s * A + a) * S + s2) * width +
                                                  spec.coupling_offset(o) + sig];
              if (v != 0.0) {
                tc.push_back({{"s", s}, {"a", a}, {"s'", s2}, {"team", o},
                              {"sigma", sig}, {"value", v}});
              }
            }
    jt["transition"] = {{"base", tb}, {"coupling", tc}};

    json cb = json::array();
    for (int t = 0; t < spec.horizon; ++t) {
      json stage = json::array();
      for (size_t s = 0; s < S; ++s) {
        auto it = team.cost_base.begin() + (t * S + s) * A;
        stage.push_back(std::vector<double>(it, it + A));
      }
      cb.push_back(stage);
    }
    json cc = json::array();
    for (int t = 0; t < spec.horizon; ++t)
      for (size_t s = 0; s < S; ++s)
        for (size_t a = 0; a < A; ++a)
          for (int o = 0; o < spec.num_teams(); ++o)
            for (int sig = 0; sig < spec.teams[o].num_states(); ++sig) {
              double v = team.cost_coupling[((t * S + s) * A + a) * width +
                                            spec.coupling_offset(o) + sig];
              if (v != 0.0) {
                cc.push_back({{"t", t + 1}, {"s", s}, {"a", a}, {"team", o},
                              {"sigma", sig}, {"value", v}});
              }
            }
    jt["cost"] = {{"base", cb}, {"coupling", cc}};
    doc["teams"].push_back(jt);
  }
  return doc;
}

void ValidateSpec(const GameSpec& spec) {
  if (spec.horizon < 1) throw ValidationError("horizon: must be >= 1");
  if (spec.teams.empty()) throw ValidationError("teams: need at least one team");
  const size_t width = spec.coupling_width();
  const size_t T = spec.horizon;
  for (int k = 0; k < spec.num_teams(); ++k) {
    const TeamModel& team = spec.teams[k];
    const std::string where = Where(k);
    const size_t S = team.num_states(), A = team.num_actions();
    if (S == 0 || A == 0) {
      throw ValidationError(where + ": state and action sets must be nonempty");
    }
    if (team.population < 1) {
      throw ValidationError(where + ": population must be positive");
    }
    if (team.initial_law.size() != S || team.state_metric.size() != S * S ||
        team.transition_base.size() != S * A * S ||
        team.transition_coupling.size() != S * A * S * width ||
        team.cost_base.size() != T * S * A ||
        team.cost_coupling.size() != T * S * A * width) {
      throw ValidationError(where + ": tensor shapes inconsistent with labels");
    }
    RequireFinite(team.initial_law, where + " initial_law");
    RequireFinite(team.state_metric, where + " metric");
    RequireFinite(team.transition_base, where + " transition_base");
    RequireFinite(team.transition_coupling, where + " transition_coupling");
    RequireFinite(team.cost_base, where + " cost_base");
    RequireFinite(team.cost_coupling, where + " cost_coupling");

    double law_sum = 0.0;
    for (size_t s = 0; s < S; ++s) {
      if (team.initial_law[s] < 0.0) {
        throw ValidationError("initial_law negative entry: " + where + ", s=" +
                              std::to_string(s));
      }
      law_sum += team.initial_law[s];
    }
    if (std::abs(law_sum - 1.0) > kStochasticTol) {
      throw ValidationError("initial_law sum: " + where + " sums to " +
                            std::to_string(law_sum));
    }

    for (size_t i = 0; i < S; ++i) {
      for (size_t j = 0; j < S; ++j) {
        const double dij = team.metric(i, j);
        if (i == j && dij != 0.0) {
          throw ValidationError("metric diagonal: " + where + ", d(" +
                                std::to_string(i) + "," + std::to_string(i) +
                                ") must be 0");
        }
        if (i != j && !(dij > 0.0)) {
          throw ValidationError("metric identity of indiscernibles: " + where +
                                ", d(" + std::to_string(i) + "," +
                                std::to_string(j) + ") must be positive");
        }
        if (dij != team.metric(j, i)) {
          throw ValidationError("metric symmetry: " + where + ", d(" +
                                std::to_string(i) + "," + std::to_string(j) +
                                ") != d(" + std::to_string(j) + "," +
                                std::to_string(i) + ")");
        }
        for (size_t m = 0; m < S; ++m) {
          if (dij > team.metric(i, m) + team.metric(m, j) + kStochasticTol) {
            throw ValidationError("metric triangle inequality: " + where +
                                  ", via state " + std::to_string(m));
          }
        }
      }
    }

    for (size_t s = 0; s < S; ++s) {
      for (size_t a = 0; a < A; ++a) {
        const std::string cell = where + ", s=" + std::to_string(s) +
                                 ", a=" + std::to_string(a);
        double row = 0.0;
        for (size_t s2 = 0; s2 < S; ++s2) {
          row += team.transition_base[(s * A + a) * S + s2];
        }
        if (std::abs(row - 1.0) > kStochasticTol) {
          throw ValidationError("transition_base row sum: " + cell +
                                " sums to " + std::to_string(row));
        }
        for (size_t c = 0; c < width; ++c) {
          double coupling_row = 0.0;
          for (size_t s2 = 0; s2 < S; ++s2) {
            coupling_row +=
                team.transition_coupling[((s * A + a) * S + s2) * width + c];
          }
          if (std::abs(coupling_row) > kStochasticTol) {
            throw ValidationError("transition_coupling row sum: " + cell +
                                  ", coupling column " + std::to_string(c) +
                                  " sums to " + std::to_string(coupling_row));
          }
        }
        // An affine function attains its minimum over a product of simplices
        // at a vertex, and the coupling is separable across teams, so the
        // minimum is the base plus each team's smallest coefficient.
        for (size_t s2 = 0; s2 < S; ++s2) {
          const size_t base = (s * A + a) * S + s2;
          double lowest = team.transition_base[base];
          for (int o = 0; o < spec.num_teams(); ++o) {
            const size_t off = spec.coupling_offset(o);
            double m = team.transition_coupling[base * width + off];
            for (int sig = 1; sig < spec.teams[o].num_states(); ++sig) {
              m = std::min(m, team.transition_coupling[base * width + off + sig]);
            }
            lowest += m;
          }
          if (lowest < -kStochasticTol) {
            throw ValidationError("nonnegativity at vertex: " + cell + ", s'=" +
                                  std::to_string(s2) + " reaches " +
                                  std::to_string(lowest));
          }
        }
      }
    }
  }
}

std::vector<double> Flatten(const MeanField& z) {
  std::vector<double> flat;
  for (const auto& v : z.per_team) flat.insert(flat.end(), v.begin(), v.end());
  return flat;
}

bool InSimplexProduct(const GameSpec& spec, const MeanField& z, double tol) {
  if (z.num_teams() != spec.num_teams()) return false;
  for (int k = 0; k < spec.num_teams(); ++k) {
    const auto& v = z.per_team[k];
    if (static_cast<int>(v.size()) != spec.teams[k].num_states()) return false;
    double sum = 0.0;
    for (double x : v) {
      if (!(x >= -tol)) return false;
      sum += x;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

MeanField InitialMeanField(const GameSpec& spec) {
  MeanField z;
  for (const auto& team : spec.teams) z.per_team.push_back(team.initial_law);
  return z;
}

void TransitionRow(const GameSpec& spec, int k, int s, int a,
                   std::span<const double> z_flat, std::span<double> out) {
  const TeamModel& team = spec.teams[k];
  const size_t S = team.num_states(), A = team.num_actions();
  const size_t width = z_flat.size();
  for (size_t s2 = 0; s2 < S; ++s2) {
    const size_t base = (s * A + a) * S + s2;
    double p = team.transition_base[base];
    const double* coeff = team.transition_coupling.data() + base * width;
    for (size_t c = 0; c < width; ++c) p += coeff[c] * z_flat[c];
    // Vertex validation guarantees p >= -1e-12; drop rounding residue.
    out[s2] = p < 0.0 ? 0.0 : p;
  }
}

double CostAt(const GameSpec& spec, int k, int t, int s, int a,
              std::span<const double> z_flat) {
  const TeamModel& team = spec.teams[k];
  const size_t S = team.num_states(), A = team.num_actions();
  const size_t width = z_flat.size();
  const size_t base = ((static_cast<size_t>(t - 1) * S + s) * A + a);
  double c = team.cost_base[base];
  const double* coeff = team.cost_coupling.data() + base * width;
  for (size_t i = 0; i < width; ++i) c += coeff[i] * z_flat[i];
  return c;
}

namespace {
void CheckIndices(const GameSpec& spec, int k, int s, int a) {
  if (k < 0 || k >= spec.num_teams()) throw std::out_of_range("team index");
  if (s < 0 || s >= spec.teams[k].num_states()) {
    throw std::out_of_range("state index");
  }
  if (a < 0 || a >= spec.teams[k].num_actions()) {
    throw std::out_of_range("action index");
  }
}
}  // namespace

std::vector<double> EvalTransition(const GameSpec& spec, int k, int s, int a,
                                   const MeanField& z) {
  CheckIndices(spec, k, s, a);
  if (!InSimplexProduct(spec, z)) {
    throw std::invalid_argument("mean field outside the simplex product");
  }
  std::vector<double> out(spec.teams[k].num_states());
  TransitionRow(spec, k, s, a, Flatten(z), out);
  return out;
}

double EvalCost(const GameSpec& spec, int k, int t, int s, int a,
                const MeanField& z) {
  CheckIndices(spec, k, s, a);
  if (t < 1 || t > spec.horizon) throw std::out_of_range("stage index");
  if (!InSimplexProduct(spec, z)) {
    throw std::invalid_argument("mean field outside the simplex product");
  }
  return CostAt(spec, k, t, s, a, Flatten(z));
}

namespace {
// Kantorovich-Rubinstein constant of sigma -> coeff[sigma] under metric d.
double FunctionalLipschitz(const double* coeff, const TeamModel& team) {
  double best = 0.0;
  for (int i = 0; i < team.num_states(); ++i) {
    for (int j = i + 1; j < team.num_states(); ++j) {
      best = std::max(best, std::abs(coeff[i] - coeff[j]) / team.metric(i, j));
    }
  }
  return best;
}
}  // namespace

std::vector<LipschitzBounds> ComputeLipschitzBounds(const GameSpec& spec) {
  const size_t width = spec.coupling_width();
  std::vector<LipschitzBounds> out(spec.num_teams());
  for (int k = 0; k < spec.num_teams(); ++k) {
    const TeamModel& team = spec.teams[k];
    const size_t S = team.num_states(), A = team.num_actions();
    // W = sum_k W_k, so a sum of per-team terms is bounded by the largest
    // per-team constant times W.
    auto joint_constant = [&](const double* row) {
      double c = 0.0;
      for (int o = 0; o < spec.num_teams(); ++o) {
        c = std::max(c, FunctionalLipschitz(row + spec.coupling_offset(o),
                                            spec.teams[o]));
      }
      return c;
    };
    for (int t = 0; t < spec.horizon; ++t)
      for (size_t s = 0; s < S; ++s)
        for (size_t a = 0; a < A; ++a) {
          const double* row =
              team.cost_coupling.data() + ((t * S + s) * A + a) * width;
          out[k].cost = std::max(out[k].cost, joint_constant(row));
        }
    for (size_t s = 0; s < S; ++s)
      for (size_t a = 0; a < A; ++a) {
        double l1 = 0.0;
        for (size_t s2 = 0; s2 < S; ++s2) {
          const double* row =
              team.transition_coupling.data() + ((s * A + a) * S + s2) * width;
          l1 += joint_constant(row);
        }
        out[k].transition_l1 = std::max(out[k].transition_l1, l1);
      }
  }
  return out;
}

GameSpec WithPopulation(const GameSpec& spec, int n) {
  GameSpec out = spec;
  for (auto& team : out.teams) team.population = n;
  return out;
}

}  // namespace mfteams
