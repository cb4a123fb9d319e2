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

#ifndef DPCHISQ_STATS_H_
#define DPCHISQ_STATS_H_

#include <cstdint>
#include <span>

#include "absl/status/statusor.h"
#include "dpchisq/model.h"
#include "dpchisq/privacy.h"

namespace dpchisq {

// Smallest expected-cell probability accepted in a denominator.
inline constexpr double kExpectedProbabilityFloor = 1e-12;

struct ChiSquaredValue {
  double value = 0.0;
  ProbabilityVector expected;
  int64_t n = 0;
};

// sum_i (x_i - n p_i)^2 / (n p_i). Real-valued so that classical counts and
// noisy counts share one formula; with noisy input this is the private
// statistic.
absl::StatusOr<ChiSquaredValue> GofStatistic(std::span<const double> x, int64_t n,
                                             const ProbabilityVector& p0);
absl::StatusOr<ChiSquaredValue> GofStatistic(const CountTable& x,
                                             const ProbabilityVector& p0);
absl::StatusOr<ChiSquaredValue> GofStatistic(const NoisyTable& w,
                                             const ProbabilityVector& p0);

// Row-major products pi1_i * pi2_j.
absl::StatusOr<ProbabilityVector> ProductProbability(const ProbabilityVector& pi1,
                                                     const ProbabilityVector& pi2);

struct MarginalEstimate {
  ProbabilityVector row;
  ProbabilityVector col;
};

// Independence-null MLE: row and column sums divided by the table total.
// Accepts real-valued tables with nonnegative cells (e.g. denoised tables).
absl::StatusOr<MarginalEstimate> IndepMle(const RealTable& x);
absl::StatusOr<MarginalEstimate> IndepMle(const CountTable& x);

// Pearson statistic of x against n * p_hat; n is the public total.
absl::StatusOr<ChiSquaredValue> IndepStatistic(const RealTable& x, int64_t n,
                                               const ProbabilityVector& p_hat);
absl::StatusOr<ChiSquaredValue> IndepStatistic(const CountTable& x,
                                               const ProbabilityVector& p_hat);
absl::StatusOr<ChiSquaredValue> IndepStatistic(const NoisyTable& w,
                                               const ProbabilityVector& p_hat);

}  // namespace dpchisq

#endif  // DPCHISQ_STATS_H_
