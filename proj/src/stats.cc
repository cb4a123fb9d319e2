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

#include "dpchisq/stats.h"

#include <cmath>
#include <vector>

#include "absl/strings/str_cat.h"
#include "dpchisq/status_macros.h"

namespace dpchisq {

absl::StatusOr<ChiSquaredValue> GofStatistic(std::span<const double> x, int64_t n,
                                             const ProbabilityVector& p0) {
  if (static_cast<int>(x.size()) != p0.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "data has ", x.size(), " cells but the null has ", p0.size()));
  }
  if (n < 1) return absl::InvalidArgumentError("sample size must be positive");
  DPCHISQ_RETURN_IF_ERROR(p0.RequireAtLeast(kExpectedProbabilityFloor));
  const double total = static_cast<double>(n);
  double q = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double expected = total * p0[static_cast<int>(i)];
    const double diff = x[i] - expected;
    q += diff * diff / expected;
  }
  return ChiSquaredValue{q, p0, n};
}

absl::StatusOr<ChiSquaredValue> GofStatistic(const CountTable& x,
                                             const ProbabilityVector& p0) {
  const RealTable real = x.AsReal();
  return GofStatistic(real.flat(), x.n(), p0);
}

absl::StatusOr<ChiSquaredValue> GofStatistic(const NoisyTable& w,
                                             const ProbabilityVector& p0) {
  return GofStatistic(w.values.flat(), w.n, p0);
}

absl::StatusOr<ProbabilityVector> ProductProbability(const ProbabilityVector& pi1,
                                                     const ProbabilityVector& pi2) {
  std::vector<double> f;
  f.reserve(static_cast<size_t>(pi1.size()) * pi2.size());
  for (int i = 0; i < pi1.size(); ++i) {
    for (int j = 0; j < pi2.size(); ++j) f.push_back(pi1[i] * pi2[j]);
  }
  // Each factor may be off by rounding; renormalize the product.
  double total = 0.0;
  for (double v : f) total += v;
  for (double& v : f) v /= total;
  return ProbabilityVector::Create(std::move(f));
}

absl::StatusOr<MarginalEstimate> IndepMle(const RealTable& x) {
  std::vector<double> row(x.rows(), 0.0);
  std::vector<double> col(x.cols(), 0.0);
  double total = 0.0;
  for (int i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < x.cols(); ++j) {
      const double v = x(i, j);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        return absl::InvalidArgumentError(
            absl::StrCat("cell (", i, ",", j, ") = ", v, " is not a nonnegative count"));
      }
      row[i] += v;
      col[j] += v;
      total += v;
    }
  }
  if (!(total > 0.0)) return absl::InvalidArgumentError("table total must be positive");
  for (double& r : row) r /= total;
  for (double& c : col) c /= total;
  DPCHISQ_ASSIGN_OR_RETURN(ProbabilityVector pi1, ProbabilityVector::Create(std::move(row)));
  DPCHISQ_ASSIGN_OR_RETURN(ProbabilityVector pi2, ProbabilityVector::Create(std::move(col)));
  return MarginalEstimate{std::move(pi1), std::move(pi2)};
}

absl::StatusOr<MarginalEstimate> IndepMle(const CountTable& x) {
  return IndepMle(x.AsReal());
}

absl::StatusOr<ChiSquaredValue> IndepStatistic(const RealTable& x, int64_t n,
                                               const ProbabilityVector& p_hat) {
  // Same formula as goodness of fit, with the estimated cell probabilities.
  return GofStatistic(x.flat(), n, p_hat);
}

absl::StatusOr<ChiSquaredValue> IndepStatistic(const CountTable& x,
                                               const ProbabilityVector& p_hat) {
  return IndepStatistic(x.AsReal(), x.n(), p_hat);
}

absl::StatusOr<ChiSquaredValue> IndepStatistic(const NoisyTable& w,
                                               const ProbabilityVector& p_hat) {
  return IndepStatistic(w.values, w.n, p_hat);
}

}  // namespace dpchisq
