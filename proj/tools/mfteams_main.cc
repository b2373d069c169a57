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

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mfteams/app.h"

int main(int argc, char** argv) {
  mfteams::ExperimentConfig config;
  std::uint64_t seed = 0;
  CLI::App app{"Equilibrium solver and simulator for mean-field games among teams"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mfteams::kVersion);

  const std::vector<std::pair<std::string, std::string>> modes = {
      {"validate", "Check a game spec"},
      {"solve-finite", "Equilibrium of the finite-population coordinator game"},
      {"solve-infinite", "Equilibrium of the infinite-population limit on a simplex grid"},
      {"simulate", "Agent-level simulation of the lifted equilibrium"},
      {"compare", "Exact equilibrium cost against agent-level simulation"},
      {"bound", "Deviation gain of the limit policy against the approximation bound"},
      {"static-tne", "Pure Nash and team-Nash equilibria of a static game"},
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts;
  for (const auto& [name, help] : modes) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--spec", config.spec_path, "Spec (or static game) JSON file")
        ->required();
    sub->add_option("--out", config.out_dir, "Output root directory");
    seed_opts.push_back(sub->add_option("--seed", seed, "Override the spec seed"));
    sub->add_option("--episodes", config.episodes, "Simulation episodes");
    sub->add_option("--grid-g", config.grid_g,
                    "Gridded prescriptions with resolution g (0: pure)");
    sub->add_option("--simplex-n", config.simplex_n,
                    "Simplex grid resolution, one value or one per team")
        ->delimiter(',');
    sub->add_option("--n-sweep", config.n_sweep,
                    "Populations for the bound pipeline")
        ->delimiter(',');
    sub->add_option("--kappa-sweep", config.kappa_sweep,
                    "Populations probed for the concentration constant")
        ->delimiter(',');
    sub->add_flag("--pure-only", config.pure_only,
                  "Fail when a stage game has no pure equilibrium");
    sub->add_option("--workers", config.workers, "Worker threads (0: all cores)");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : mfteams::kExitValidation;
  }
  for (size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) {
      config.mode = subs[i]->get_name();
      if (seed_opts[i]->count() > 0) config.seed = seed;
    }
  }
  return mfteams::Run(config, std::cout, std::cerr);
}
