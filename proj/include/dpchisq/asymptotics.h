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

#ifndef DPCHISQ_ASYMPTOTICS_H_
#define DPCHISQ_ASYMPTOTICS_H_

#include <cstdint>

#include <Eigen/Dense>

#include "absl/status/statusor.h"
#include "dpchisq/model.h"
#include "dpchisq/privacy.h"
#include "dpchisq/quadform.h"
#include "json.hpp"

namespace dpchisq {

// Idempotent covariance with its orthonormal factor: factor * factor^T equals
// sigma and factor^T * factor is the rank x rank identity.
struct CovarianceModel {
  Eigen::MatrixXd sigma;
  int rank = 0;
  Eigen::MatrixXd factor;
};

// Weight matrix of the noisy statistic, [I, L; L, L^2] with
// L = diag(sigma_noise / sqrt(n p_i)).
struct WeightMatrix {
  Eigen::MatrixXd a;
  Eigen::VectorXd lambda;
};

// Factors an idempotent symmetric matrix. Eigenvalues within 1e-6 of 1 are
// treated as 1, within 1e-6 of 0 as 0; any other eigenvalue is an error.
absl::StatusOr<CovarianceModel> FactorIdempotent(const Eigen::MatrixXd& sigma);

// I_d - sqrt(p0) sqrt(p0)^T, rank d - 1.
absl::StatusOr<CovarianceModel> BuildGofSigma(const ProbabilityVector& p0);

// Jacobian of f(pi1, pi2)_{ij} = pi1_i pi2_j in the free parameters
// (pi1_1..pi1_{r-1}, pi2_1..pi2_{c-1}); rows follow the row-major cell order.
Eigen::MatrixXd ProductJacobian(const ProbabilityVector& pi1, const ProbabilityVector& pi2);

// I - sqrt(p) sqrt(p)^T - G (G^T G)^{-1} G^T with G = diag(sqrt(p))^{-1} J and
// p = pi1 (x) pi2. Rank (r - 1)(c - 1).
absl::StatusOr<CovarianceModel> BuildIndepSigma(const ProbabilityVector& pi1,
                                                const ProbabilityVector& pi2);

// diag(sigma, I_d) and its factor.
CovarianceModel AugmentWithNoise(const CovarianceModel& model);

absl::StatusOr<WeightMatrix> BuildWeightMatrix(const ProbabilityVector& p, int64_t n,
                                               const PrivacyParams& params);

// Central law sum_j lambda_j chi2_1 of the noisy goodness-of-fit statistic
// under H0, with lambda the eigenvalues of B^T A B.
absl::StatusOr<QuadFormDistribution> GofNullDistribution(const ProbabilityVector& p0,
                                                         int64_t n,
                                                         const PrivacyParams& params);

// Law of the noisy goodness-of-fit statistic under the sqrt(n)-scaled local
// alternative (mean shift mu' = (mu, 0) with mu_i = delta * s_i / sqrt(p0_i)).
// Zero eigenvalues are split off into the Gaussian term; the offset is
// mu'^T A mu' - sum_j b_j^2 / lambda_j.
absl::StatusOr<QuadFormDistribution> GofAlternateDistribution(const ProbabilityVector& p0,
                                                              const GofAlternate& alt,
                                                              int64_t n,
                                                              const PrivacyParams& params);

// Central law used for the private independence threshold, built from the
// estimated marginals. Rank rc + (r - 1)(c - 1).
absl::StatusOr<QuadFormDistribution> IndepNullDistribution(const ProbabilityVector& pi1,
                                                           const ProbabilityVector& pi2,
                                                           int64_t n,
                                                           const PrivacyParams& params);

// Debug dump of the goodness-of-fit construction: {"sigma", "a", "weights"}.
absl::StatusOr<nlohmann::json> GofDiagnostics(const ProbabilityVector& p0, int64_t n,
                                              const PrivacyParams& params);

}  // namespace dpchisq

#endif  // DPCHISQ_ASYMPTOTICS_H_
