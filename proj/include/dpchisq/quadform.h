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

#ifndef DPCHISQ_QUADFORM_H_
#define DPCHISQ_QUADFORM_H_

#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpchisq/random.h"

namespace dpchisq {

// Law of
//   sum_j weights[j] * chi2_1(noncentralities[j]) + N(offset, gaussian_variance)
// with independent one-degree-of-freedom components.
struct QuadFormDistribution {
  std::vector<double> weights;
  std::vector<double> noncentralities;
  double gaussian_variance = 0.0;
  double offset = 0.0;

  static QuadFormDistribution Central(std::vector<double> weights);

  absl::Status Validate() const;
  double Mean() const;
  double Variance() const;
};

struct ImhofOptions {
  // Target absolute error on the tail probability.
  double tolerance = 1e-8;
  // Hard cap on integration panels before reporting non-convergence.
  int max_panels = 2'000'000;
};

// P(Q >= t) by numerical inversion of the characteristic function (Imhof).
// Weights below 1e-10 * max|weight| are dropped before integrating.
absl::StatusOr<double> TailProbability(const QuadFormDistribution& dist, double t,
                                       const ImhofOptions& options = {});

// Smallest tau with TailProbability(dist, tau) = alpha, found by bisection to
// 1e-8 relative precision.
absl::StatusOr<double> CriticalValue(const QuadFormDistribution& dist, double alpha,
                                     const ImhofOptions& options = {});

// One draw: sum_j w_j (N_j + sqrt(nu_j))^2 + offset + s * N_0.
double Sample(const QuadFormDistribution& dist, RandomStream& rng);

}  // namespace dpchisq

#endif  // DPCHISQ_QUADFORM_H_
