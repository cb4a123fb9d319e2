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

#include "dpchisq/asymptotics.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "absl/strings/str_cat.h"
#include "dpchisq/stats.h"
#include "dpchisq/status_macros.h"

namespace dpchisq {
namespace {

constexpr double kEigenClassTolerance = 1e-6;
constexpr double kRelativeWeightCutoff = 1e-10;
constexpr double kMaxConditionNumber = 1e12;

Eigen::VectorXd SqrtVector(const ProbabilityVector& p) {
  Eigen::VectorXd s(p.size());
  for (int i = 0; i < p.size(); ++i) s[i] = std::sqrt(p[i]);
  return s;
}

// Eigen-decomposition of B^T A B with eigenvalues sorted in decreasing order
// and values below the relative cutoff set to exactly zero.
struct ProjectedSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

ProjectedSpectrum ProjectedEigen(const Eigen::MatrixXd& factor, const Eigen::MatrixXd& a) {
  Eigen::MatrixXd m = factor.transpose() * a * factor;
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  const Eigen::Index k = m.rows();
  ProjectedSpectrum out{Eigen::VectorXd(k), Eigen::MatrixXd(k, k)};
  for (Eigen::Index j = 0; j < k; ++j) {
    out.values[j] = solver.eigenvalues()[k - 1 - j];
    out.vectors.col(j) = solver.eigenvectors().col(k - 1 - j);
  }
  const double max_abs = out.values.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (std::abs(out.values[j]) <= kRelativeWeightCutoff * max_abs) out.values[j] = 0.0;
  }
  return out;
}

absl::Status RequireGaussian(const PrivacyParams& params) {
  if (params.mechanism != Mechanism::kGaussian) {
    return absl::UnimplementedError(
        "asymptotic distributions are only available for the Gaussian mechanism; "
        "use the Monte Carlo tests for Laplace noise");
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<CovarianceModel> FactorIdempotent(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    return absl::InvalidArgumentError("covariance must be a nonempty square matrix");
  }
  const Eigen::MatrixXd symmetric = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    return NumericError("eigendecomposition of the covariance failed");
  }
  std::vector<Eigen::Index> unit_columns;
  for (Eigen::Index j = 0; j < symmetric.rows(); ++j) {
    const double value = solver.eigenvalues()[j];
    if (std::abs(value - 1.0) <= kEigenClassTolerance) {
      unit_columns.push_back(j);
    } else if (std::abs(value) > kEigenClassTolerance) {
      return absl::InvalidArgumentError(absl::StrCat(
          "covariance is not idempotent: eigenvalue ", value, " is neither 0 nor 1"));
    }
  }
  CovarianceModel model;
  model.sigma = sigma;
  model.rank = static_cast<int>(unit_columns.size());
  model.factor.resize(sigma.rows(), model.rank);
  // Highest eigenvalues last in Eigen's ordering; keep them in that order.
  for (int k = 0; k < model.rank; ++k) {
    model.factor.col(k) = solver.eigenvectors().col(unit_columns[k]);
  }
  return model;
}

absl::StatusOr<CovarianceModel> BuildGofSigma(const ProbabilityVector& p0) {
  DPCHISQ_RETURN_IF_ERROR(p0.RequireAtLeast(kExpectedProbabilityFloor));
  const Eigen::VectorXd s = SqrtVector(p0);
  const Eigen::MatrixXd sigma =
      Eigen::MatrixXd::Identity(p0.size(), p0.size()) - s * s.transpose();
  return FactorIdempotent(sigma);
}

Eigen::MatrixXd ProductJacobian(const ProbabilityVector& pi1, const ProbabilityVector& pi2) {
  const int r = pi1.size();
  const int c = pi2.size();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(r * c, (r - 1) + (c - 1));
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      const int cell = i * c + j;
      for (int a = 0; a + 1 < r; ++a) {
        const double di = (i == a ? 1.0 : 0.0) - (i == r - 1 ? 1.0 : 0.0);
        jac(cell, a) = pi2[j] * di;
      }
      for (int b = 0; b + 1 < c; ++b) {
        const double dj = (j == b ? 1.0 : 0.0) - (j == c - 1 ? 1.0 : 0.0);
        jac(cell, (r - 1) + b) = pi1[i] * dj;
      }
    }
  }
  return jac;
}

absl::StatusOr<CovarianceModel> BuildIndepSigma(const ProbabilityVector& pi1,
                                                const ProbabilityVector& pi2) {
  if (pi1.size() < 2 || pi2.size() < 2) {
    return absl::InvalidArgumentError("independence needs at least 2 rows and 2 columns");
  }
  for (const ProbabilityVector* pi : {&pi1, &pi2}) {
    for (int i = 0; i < pi->size(); ++i) {
      const double v = (*pi)[i];
      if (!(v > 0.0 && v < 1.0)) {
        return absl::InvalidArgumentError(
            absl::StrCat("marginal probability ", v, " is degenerate (not in (0, 1))"));
      }
    }
  }
  DPCHISQ_ASSIGN_OR_RETURN(const ProbabilityVector p, ProductProbability(pi1, pi2));
  DPCHISQ_RETURN_IF_ERROR(p.RequireAtLeast(kExpectedProbabilityFloor));
  const Eigen::VectorXd s = SqrtVector(p);
  const Eigen::MatrixXd gamma = s.cwiseInverse().asDiagonal() * ProductJacobian(pi1, pi2);
  const Eigen::MatrixXd gram = gamma.transpose() * gamma;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() * kMaxConditionNumber < 1.0) {
    return NumericError(absl::StrCat("Gamma^T Gamma is too ill-conditioned (rcond ",
                                     ldlt.rcond(), ")"));
  }
  const Eigen::MatrixXd projection = gamma * ldlt.solve(gamma.transpose());
  const Eigen::Index dim = p.size();
  const Eigen::MatrixXd sigma =
      Eigen::MatrixXd::Identity(dim, dim) - s * s.transpose() - projection;
  return FactorIdempotent(sigma);
}

CovarianceModel AugmentWithNoise(const CovarianceModel& model) {
  const Eigen::Index d = model.sigma.rows();
  CovarianceModel out;
  out.sigma = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  out.sigma.topLeftCorner(d, d) = model.sigma;
  out.sigma.bottomRightCorner(d, d).setIdentity();
  out.rank = model.rank + static_cast<int>(d);
  out.factor = Eigen::MatrixXd::Zero(2 * d, out.rank);
  out.factor.topLeftCorner(d, model.rank) = model.factor;
  out.factor.bottomRightCorner(d, d).setIdentity();
  return out;
}

absl::StatusOr<WeightMatrix> BuildWeightMatrix(const ProbabilityVector& p, int64_t n,
                                               const PrivacyParams& params) {
  DPCHISQ_RETURN_IF_ERROR(RequireGaussian(params));
  DPCHISQ_RETURN_IF_ERROR(p.RequireAtLeast(kExpectedProbabilityFloor));
  if (n < 1) return absl::InvalidArgumentError("sample size must be positive");
  DPCHISQ_ASSIGN_OR_RETURN(const double sigma, NoiseScale(params));
  const int d = p.size();
  WeightMatrix w;
  w.lambda.resize(d);
  for (int i = 0; i < d; ++i) {
    w.lambda[i] = sigma / std::sqrt(static_cast<double>(n) * p[i]);
  }
  w.a = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  w.a.topLeftCorner(d, d).setIdentity();
  w.a.topRightCorner(d, d) = w.lambda.asDiagonal();
  w.a.bottomLeftCorner(d, d) = w.lambda.asDiagonal();
  w.a.bottomRightCorner(d, d) = w.lambda.cwiseAbs2().asDiagonal();
  return w;
}

absl::StatusOr<QuadFormDistribution> GofNullDistribution(const ProbabilityVector& p0,
                                                         int64_t n,
                                                         const PrivacyParams& params) {
  DPCHISQ_ASSIGN_OR_RETURN(const WeightMatrix weight, BuildWeightMatrix(p0, n, params));
  DPCHISQ_ASSIGN_OR_RETURN(const CovarianceModel sigma, BuildGofSigma(p0));
  const CovarianceModel augmented = AugmentWithNoise(sigma);
  const ProjectedSpectrum spectrum = ProjectedEigen(augmented.factor, weight.a);
  return QuadFormDistribution::Central(
      std::vector<double>(spectrum.values.begin(), spectrum.values.end()));
}

absl::StatusOr<QuadFormDistribution> GofAlternateDistribution(const ProbabilityVector& p0,
                                                              const GofAlternate& alt,
                                                              int64_t n,
                                                              const PrivacyParams& params) {
  const int d = p0.size();
  if (!(alt.delta >= 0.0)) return absl::InvalidArgumentError("delta must be >= 0");
  std::vector<int> pattern = alt.sign_pattern;
  if (pattern.empty()) {
    DPCHISQ_ASSIGN_OR_RETURN(pattern, DefaultSignPattern(alt.form, d));
  }
  if (static_cast<int>(pattern.size()) != d) {
    return absl::InvalidArgumentError("sign pattern length differs from dimension");
  }
  DPCHISQ_ASSIGN_OR_RETURN(const WeightMatrix weight, BuildWeightMatrix(p0, n, params));
  DPCHISQ_ASSIGN_OR_RETURN(const CovarianceModel sigma, BuildGofSigma(p0));
  const CovarianceModel augmented = AugmentWithNoise(sigma);

  // A fixed perturbation is the local alternative with delta_tilde = delta sqrt(n).
  const double scaled_delta = alt.form == GofAlternate::Form::kFixed
                                  ? alt.delta * std::sqrt(static_cast<double>(n))
                                  : alt.delta;
  Eigen::VectorXd mean_shift = Eigen::VectorXd::Zero(2 * d);
  for (int i = 0; i < d; ++i) mean_shift[i] = scaled_delta * pattern[i] / std::sqrt(p0[i]);

  const ProjectedSpectrum spectrum = ProjectedEigen(augmented.factor, weight.a);
  const Eigen::VectorXd b =
      spectrum.vectors.transpose() * (augmented.factor.transpose() * (weight.a * mean_shift));

  QuadFormDistribution dist;
  double absorbed = 0.0;
  for (Eigen::Index j = 0; j < spectrum.values.size(); ++j) {
    const double lambda = spectrum.values[j];
    if (lambda > 0.0) {
      dist.weights.push_back(lambda);
      dist.noncentralities.push_back((b[j] / lambda) * (b[j] / lambda));
      absorbed += b[j] * b[j] / lambda;
    } else {
      dist.gaussian_variance += 4.0 * b[j] * b[j];
    }
  }
  dist.offset = mean_shift.dot(weight.a * mean_shift) - absorbed;
  return dist;
}

absl::StatusOr<QuadFormDistribution> IndepNullDistribution(const ProbabilityVector& pi1,
                                                           const ProbabilityVector& pi2,
                                                           int64_t n,
                                                           const PrivacyParams& params) {
  DPCHISQ_RETURN_IF_ERROR(RequireGaussian(params));
  DPCHISQ_ASSIGN_OR_RETURN(const CovarianceModel sigma, BuildIndepSigma(pi1, pi2));
  const int r = pi1.size();
  const int c = pi2.size();
  if (sigma.rank != (r - 1) * (c - 1)) {
    return NumericError(absl::StrCat("independence covariance has rank ", sigma.rank,
                                     ", expected ", (r - 1) * (c - 1)));
  }
  DPCHISQ_ASSIGN_OR_RETURN(const ProbabilityVector p, ProductProbability(pi1, pi2));
  DPCHISQ_ASSIGN_OR_RETURN(const WeightMatrix weight, BuildWeightMatrix(p, n, params));
  const CovarianceModel augmented = AugmentWithNoise(sigma);
  const ProjectedSpectrum spectrum = ProjectedEigen(augmented.factor, weight.a);
  return QuadFormDistribution::Central(
      std::vector<double>(spectrum.values.begin(), spectrum.values.end()));
}

absl::StatusOr<nlohmann::json> GofDiagnostics(const ProbabilityVector& p0, int64_t n,
                                              const PrivacyParams& params) {
  DPCHISQ_ASSIGN_OR_RETURN(const WeightMatrix weight, BuildWeightMatrix(p0, n, params));
  DPCHISQ_ASSIGN_OR_RETURN(const CovarianceModel sigma, BuildGofSigma(p0));
  DPCHISQ_ASSIGN_OR_RETURN(const QuadFormDistribution dist,
                           GofNullDistribution(p0, n, params));
  auto to_rows = [](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  nlohmann::json out;
  out["sigma"] = to_rows(sigma.sigma);
  out["rank"] = sigma.rank;
  out["a"] = to_rows(weight.a);
  out["weights"] = dist.weights;
  return out;
}

}  // namespace dpchisq
