// Copyright 2026 The dpchisq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPCHISQ_HARNESS_H_
#define DPCHISQ_HARNESS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpchisq/hypothesis_tests.h"
#include "dpchisq/model.h"
#include "dpchisq/privacy.h"
#include "json.hpp"

namespace dpchisq {

enum class TestKind {
  kGofClassical,
  kMcGof,
  kPrivGof,
  kIndepClassical,
  kMcIndep,
  kPrivIndep,
};

// "gof_classical", "mc_gof", "priv_gof", "indep_classical", "mc_indep",
// "priv_indep".
std::string TestKindName(TestKind kind);
absl::StatusOr<TestKind> ParseTestKind(const std::string& name);
bool IsGofTest(TestKind kind);

inline constexpr int kConfigSchemaVersion = 1;

// Environment variable holding the default worker count.
inline constexpr char kWorkersEnv[] = "DPCHISQ_WORKERS";

struct ExperimentConfig {
  TestKind test = TestKind::kPrivGof;
  PrivacyParams privacy;
  double alpha = 0.05;

  // Goodness of fit: p0 if given, otherwise uniform of dimension d.
  int d = 4;
  std::vector<double> p0;
  GofAlternate alternate;

  // Independence: null marginals and the 2 x 2 covariance alternative.
  std::vector<double> pi1 = {0.5, 0.5};
  std::vector<double> pi2 = {0.5, 0.5};
  double indep_delta = 0.0;
  bool literal_indep_pattern = false;

  std::vector<int64_t> n_grid;
  int trials = 1000;
  // Monte Carlo replica count.
  int k = 100;
  // Elastic-net mix for denoising; defaults by mechanism when absent.
  std::optional<double> gamma;
  // Classical tests only: apply the test to noised counts.
  bool noisy_input = false;
  uint64_t seed = 0;
  // 0 selects $DPCHISQ_WORKERS, falling back to the hardware concurrency.
  int workers = 0;
  // Count numeric failures per row instead of aborting the sweep.
  bool skip_failures = false;

  absl::Status Validate() const;
  absl::StatusOr<ProbabilityVector> NullGofProbability() const;
  ProjectionConfig Projection() const;
};

// Reads a config object. "schema_version" must equal kConfigSchemaVersion and
// unknown keys are rejected.
absl::StatusOr<ExperimentConfig> ParseExperimentConfig(const nlohmann::json& json);
absl::StatusOr<ExperimentConfig> ReadExperimentConfigFile(const std::string& path);
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& config);

struct ExperimentRow {
  int64_t n = 0;
  TestKind test = TestKind::kPrivGof;
  // Fail-to-reject rate for significance runs, rejection rate for power runs,
  // over the completed trials.
  double rate = 0.0;
  double se = 0.0;
  // Mean over trials that produced a critical value; NaN if none did.
  double mean_critical_value = 0.0;
  int trials = 0;
  int rejections = 0;
  int failures = 0;
};

struct ExperimentResult {
  enum class Measure { kSignificance, kPower };
  Measure measure = Measure::kSignificance;
  bool report_failures = false;
  std::vector<ExperimentRow> rows;
};

// sqrt(rate (1 - rate) / trials).
double BinomialStandardError(double rate, int trials);

// Outcome of trial `trial` at grid point `grid_index`. Data are drawn under
// the null (power = false) or the alternative (power = true).
absl::StatusOr<TestOutcome> RunTrial(const ExperimentConfig& config, bool power,
                                     int grid_index, int trial);

// Sweeps over the n grid. Output depends only on the config: every trial has
// its own stream derived from (seed, grid index, trial index) and results are
// reduced in trial order.
absl::StatusOr<ExperimentResult> RunSignificance(const ExperimentConfig& config);
absl::StatusOr<ExperimentResult> RunPower(const ExperimentConfig& config);

// Header n,test,significance|power,se,mean_critical_value[,failures].
void WriteExperimentCsv(const ExperimentResult& result, std::ostream& out);

int ResolveWorkerCount(int requested);

}  // namespace dpchisq

#endif  // DPCHISQ_HARNESS_H_
