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

#include "dpchisq/denoise.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "dpchisq/status_macros.h"

namespace dpchisq {
namespace {

constexpr double kClampTolerance = 1e-10;
constexpr double kSumTolerance = 1e-8;

// One-sided derivatives of g(x) = (1 - gamma)|x - w| + gamma (x - w)^2.
double RightDerivative(double x, double w, double gamma) {
  return 2.0 * gamma * (x - w) + (1.0 - gamma) * (x >= w ? 1.0 : -1.0);
}
double LeftDerivative(double x, double w, double gamma) {
  return 2.0 * gamma * (x - w) + (1.0 - gamma) * (x > w ? 1.0 : -1.0);
}

// Exact minimizer over t in [0, x_j] of g_i(x_i + t) + g_j(x_j - t), given
// that the right derivative at t = 0 is negative.
double PairStep(double xi, double wi, double xj, double wj, double gamma) {
  const double bi = wi - xi;  // x_i reaches w_i
  const double bj = xj - wj;  // x_j reaches w_j
  const double limit = xj;
  double stops[3];
  int count = 0;
  if (bi > 0.0 && bi < limit) stops[count++] = bi;
  if (bj > 0.0 && bj < limit) stops[count++] = bj;
  stops[count++] = limit;
  std::sort(stops, stops + count);
  const double base = 2.0 * gamma * ((xi - wi) - (xj - wj));
  const double slope = 4.0 * gamma;
  double start = 0.0;
  for (int k = 0; k < count; ++k) {
    const double sign_i = start >= bi ? 1.0 : -1.0;
    const double sign_j = start < bj ? 1.0 : -1.0;
    const double g = base + slope * start + (1.0 - gamma) * (sign_i - sign_j);
    if (g >= 0.0) return start;
    const double root = start - g / slope;
    if (root < stops[k]) return root;
    start = stops[k];
  }
  return limit;
}

absl::Status CheckInput(std::span<const double> w, double total) {
  if (w.empty()) return absl::InvalidArgumentError("cannot project an empty table");
  if (!(total >= 0.0) || !std::isfinite(total)) {
    return absl::InvalidArgumentError("projection total must be finite and nonnegative");
  }
  for (double v : w) {
    if (!std::isfinite(v)) return absl::InvalidArgumentError("noisy table has non-finite cells");
  }
  return absl::OkStatus();
}

absl::Status Finalize(std::vector<double>& x, double total) {
  double sum = 0.0;
  for (double& v : x) {
    if (v < 0.0) {
      if (v < -kClampTolerance) {
        return NumericError(absl::StrCat("projected cell ", v, " is negative"));
      }
      v = 0.0;
    }
    sum += v;
  }
  if (std::abs(sum - total) > kSumTolerance * std::max(total, 1.0)) {
    return NumericError(absl::StrCat("projected table sums to ", sum, ", expected ", total));
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status ProjectionConfig::Validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat("gamma must lie in (0, 1], got ", gamma));
  }
  if (!(tolerance > 0.0)) return absl::InvalidArgumentError("tolerance must be positive");
  if (max_iterations < 1) return absl::InvalidArgumentError("max_iterations must be positive");
  return absl::OkStatus();
}

ProjectionConfig ProjectionConfig::ForMechanism(Mechanism mechanism) {
  ProjectionConfig config;
  config.gamma = mechanism == Mechanism::kGaussian ? 1.0 : 0.01;
  return config;
}

std::vector<double> ProjectOntoSimplex(std::span<const double> w, double total) {
  std::vector<double> sorted(w.begin(), w.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - total) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  std::vector<double> x(w.size());
  for (size_t i = 0; i < w.size(); ++i) x[i] = std::max(w[i] - theta, 0.0);
  return x;
}

double ElasticNetObjective(std::span<const double> w, std::span<const double> x,
                           double gamma) {
  double l1 = 0.0;
  double l2 = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    const double r = w[i] - x[i];
    l1 += std::abs(r);
    l2 += r * r;
  }
  return (1.0 - gamma) * l1 + gamma * l2;
}

absl::StatusOr<std::vector<double>> ProjectCounts(std::span<const double> w, double total,
                                                  const ProjectionConfig& config,
                                                  std::vector<double>* objective_trace) {
  DPCHISQ_RETURN_IF_ERROR(config.Validate());
  DPCHISQ_RETURN_IF_ERROR(CheckInput(w, total));
  std::vector<double> x = ProjectOntoSimplex(w, total);
  const double gamma = config.gamma;
  if (objective_trace != nullptr) {
    objective_trace->clear();
    objective_trace->push_back(ElasticNetObjective(w, x, gamma));
  }
  if (gamma < 1.0) {
    const size_t d = x.size();
    bool converged = false;
    double violation = 0.0;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
      size_t up = 0;
      size_t down = d;
      double best_up = 0.0;
      double best_down = 0.0;
      for (size_t k = 0; k < d; ++k) {
        const double r = RightDerivative(x[k], w[k], gamma);
        if (k == 0 || r < best_up) {
          best_up = r;
          up = k;
        }
        if (x[k] > 0.0) {
          const double l = LeftDerivative(x[k], w[k], gamma);
          if (down == d || l > best_down) {
            best_down = l;
            down = k;
          }
        }
      }
      violation = down == d ? 0.0 : best_down - best_up;
      if (violation <= config.tolerance) {
        converged = true;
        break;
      }
      const double t = PairStep(x[up], w[up], x[down], w[down], gamma);
      const double xi = x[up];
      const double xj = x[down];
      x[up] = t == w[up] - xi ? w[up] : xi + t;
      if (t == xj) {
        x[down] = 0.0;
      } else if (t == xj - w[down]) {
        x[down] = w[down];
      } else {
        x[down] = xj - t;
      }
      if (objective_trace != nullptr) {
        objective_trace->push_back(ElasticNetObjective(w, x, gamma));
      }
    }
    if (!converged) {
      return NumericError(absl::StrCat("elastic-net projection did not converge in ",
                                       config.max_iterations,
                                       " iterations; optimality violation ", violation));
    }
  }
  DPCHISQ_RETURN_IF_ERROR(Finalize(x, total));
  return x;
}

absl::StatusOr<RealTable> ProjectTable(const NoisyTable& w, const ProjectionConfig& config,
                                       std::vector<double>* objective_trace) {
  DPCHISQ_ASSIGN_OR_RETURN(
      std::vector<double> x,
      ProjectCounts(w.values.flat(), static_cast<double>(w.n), config, objective_trace));
  return RealTable(w.rows(), w.cols(), std::move(x));
}

absl::StatusOr<std::optional<MarginalEstimate>> TwoStepMle(const NoisyTable& w,
                                                           const ProjectionConfig& config) {
  DPCHISQ_ASSIGN_OR_RETURN(const RealTable x, ProjectTable(w, config));
  for (double v : x.flat()) {
    if (v < kMinDenoisedCell) return std::optional<MarginalEstimate>();
  }
  DPCHISQ_ASSIGN_OR_RETURN(MarginalEstimate mle, IndepMle(x));
  return std::optional<MarginalEstimate>(std::move(mle));
}

}  // namespace dpchisq
