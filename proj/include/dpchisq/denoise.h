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

#ifndef DPCHISQ_DENOISE_H_
#define DPCHISQ_DENOISE_H_

#include <optional>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpchisq/model.h"
#include "dpchisq/privacy.h"
#include "dpchisq/stats.h"

namespace dpchisq {

// Elastic-net projection settings. The objective is
//   (1 - gamma) * ||w - x||_1 + gamma * ||w - x||_2^2
// over {x >= 0, sum x = n}.
struct ProjectionConfig {
  double gamma = 1.0;
  // Stop once the largest pairwise optimality violation is below this value.
  double tolerance = 1e-9;
  int max_iterations = 50'000;

  absl::Status Validate() const;

  // gamma = 1 for Gaussian noise and 0.01 for Laplace noise.
  static ProjectionConfig ForMechanism(Mechanism mechanism);
};

// Euclidean projection of w onto {x >= 0, sum x = total} by sorting.
std::vector<double> ProjectOntoSimplex(std::span<const double> w, double total);

double ElasticNetObjective(std::span<const double> w, std::span<const double> x,
                           double gamma);

// Minimizes the elastic-net objective. gamma = 1 is solved in closed form;
// otherwise pairwise exact descent starts from the Euclidean projection. When
// `objective_trace` is given it receives the objective after every iteration.
absl::StatusOr<std::vector<double>> ProjectCounts(std::span<const double> w, double total,
                                                  const ProjectionConfig& config,
                                                  std::vector<double>* objective_trace =
                                                      nullptr);

// Table form of ProjectCounts with total w.n.
absl::StatusOr<RealTable> ProjectTable(const NoisyTable& w, const ProjectionConfig& config,
                                       std::vector<double>* objective_trace = nullptr);

// Cell value below which the denoised table is treated as too sparse.
inline constexpr double kMinDenoisedCell = 5.0;

// Projects w and returns the marginal MLE of the projected table, or nullopt
// when any projected cell is below kMinDenoisedCell.
absl::StatusOr<std::optional<MarginalEstimate>> TwoStepMle(const NoisyTable& w,
                                                           const ProjectionConfig& config);

}  // namespace dpchisq

#endif  // DPCHISQ_DENOISE_H_
