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

#include "mfteams/app.h"

#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.h"

namespace mfteams {
namespace {

namespace fs = std::filesystem;

class AppTest : public ::testing::Test {
 protected:
  ExperimentConfig Config(const std::string& mode, const std::string& data,
                          const std::string& sub) {
    ExperimentConfig c;
    c.mode = mode;
    c.spec_path = oracle::DataPath(data);
    c.out_dir = (fs::path(MFTEAMS_TEST_TMP) / sub).string();
    c.workers = 2;
    c.episodes = 2000;
    return c;
  }
  int RunMode(const ExperimentConfig& c) {
    out_.str("");
    err_.str("");
    return mfteams::Run(c, out_, err_);
  }
  nlohmann::json ReadJson(const ExperimentConfig& c, const std::string& file) {
    return nlohmann::json::parse(oracle::ReadFile((fs::path(c.out_dir) / c.mode / file).string()));
  }
  std::ostringstream out_, err_;
};

TEST_F(AppTest, ValidateSucceedsAndWritesManifest) {
  ExperimentConfig c = Config("validate", "reference_2team.json", "validate_ok");
  ASSERT_EQ(RunMode(c), kExitOk) << err_.str();
  nlohmann::json v = ReadJson(c, "validation.json");
  EXPECT_TRUE(v["valid"].get<bool>());
  EXPECT_TRUE(v.contains("spec_hash"));
  nlohmann::json m = ReadJson(c, "manifest.json");
  EXPECT_EQ(m["mode"], "validate");
  EXPECT_EQ(m["seed"], 20261018u);
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "validate" / "timing.json"));
}

TEST_F(AppTest, ExitCodes) {
  ExperimentConfig bad = Config("validate", "malformed_row_sum.json", "bad");
  EXPECT_EQ(RunMode(bad), kExitValidation);
  nlohmann::json e = ReadJson(bad, "error.json");
  EXPECT_EQ(e["kind"], "validation");
  EXPECT_NE(err_.str().find("row sum"), std::string::npos);

  ExperimentConfig missing = Config("validate", "does_not_exist.json", "missing");
  EXPECT_EQ(RunMode(missing), kExitValidation);

  ExperimentConfig strict = Config("solve-finite", "matching_pennies.json", "strict");
  strict.pure_only = true;
  EXPECT_EQ(RunMode(strict), kExitNoPureEquilibrium);
  e = ReadJson(strict, "error.json");
  EXPECT_EQ(e["kind"], "no_pure_equilibrium");
  EXPECT_EQ(e["stage"], 1);

  ExperimentConfig cap = Config("solve-finite", "reference_2team.json", "cap");
  cap.grid_g = 2000;
  EXPECT_EQ(RunMode(cap), kExitCapacity);

  ExperimentConfig mode = Config("nonsense", "reference_2team.json", "mode");
  EXPECT_EQ(RunMode(mode), kExitValidation);
}

TEST_F(AppTest, SolveFiniteArtifacts) {
  ExperimentConfig c = Config("solve-finite", "reference_2team.json", "finite");
  ASSERT_EQ(RunMode(c), kExitOk) << err_.str();
  nlohmann::json s = ReadJson(c, "summary.json");
  EXPECT_LE(s["max_gain"].get<double>(), 1e-9);
  for (const char* f : {"policy.json", "values.csv", "certificate.csv"}) {
    EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / c.mode / f)) << f;
  }
  std::string csv = oracle::ReadFile((fs::path(c.out_dir) / c.mode / "values.csv").string());
  EXPECT_EQ(csv.rfind("# spec_hash=", 0), 0u);
}

TEST_F(AppTest, OtherModesRun) {
  for (const char* mode : {"solve-infinite", "simulate", "bound"}) {
    ExperimentConfig c = Config(mode, "reference_2team.json", "modes");
    c.n_sweep = {2, 4};
    EXPECT_EQ(RunMode(c), kExitOk) << mode << ": " << err_.str();
  }
  ExperimentConfig tne = Config("static-tne", "three_player_teams.json", "modes");
  ASSERT_EQ(RunMode(tne), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("TNE: (T,L,I) (B,L,II)"), std::string::npos) << out_.str();
}

TEST_F(AppTest, CompareIsReproducible) {
  ExperimentConfig a = Config("compare", "reference_2team.json", "rep_a");
  ExperimentConfig b = Config("compare", "reference_2team.json", "rep_b");
  b.workers = 3;
  ASSERT_EQ(RunMode(a), kExitOk);
  ASSERT_EQ(RunMode(b), kExitOk);
  for (const char* f : {"compare.json", "compare.csv"}) {
    EXPECT_EQ(oracle::ReadFile((fs::path(a.out_dir) / "compare" / f).string()),
              oracle::ReadFile((fs::path(b.out_dir) / "compare" / f).string()))
        << f;
  }
  ExperimentConfig c = Config("compare", "reference_2team.json", "rep_c");
  c.seed = 1;
  ASSERT_EQ(RunMode(c), kExitOk);
  EXPECT_NE(oracle::ReadFile((fs::path(a.out_dir) / "compare" / "compare.csv").string()),
            oracle::ReadFile((fs::path(c.out_dir) / "compare" / "compare.csv").string()));
}

}  // namespace
}  // namespace mfteams
