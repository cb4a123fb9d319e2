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

#include "dpchisq/quadform.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "absl/strings/str_cat.h"
#include "dpchisq/status_macros.h"

namespace dpchisq {
namespace {

constexpr double kRelativeWeightCutoff = 1e-10;
constexpr double kPi = std::numbers::pi;

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Weights and noncentralities that survive the cutoff, plus the scalar terms.
struct PreparedForm {
  std::vector<double> lambda;
  std::vector<double> nu;
  double gaussian_variance = 0.0;
  double offset = 0.0;
  double max_abs_lambda = 0.0;
  double min_abs_lambda = 0.0;
  bool all_positive = true;
  bool all_negative = true;
};

PreparedForm Prepare(const QuadFormDistribution& dist) {
  PreparedForm form;
  form.gaussian_variance = dist.gaussian_variance;
  form.offset = dist.offset;
  double max_abs = 0.0;
  for (double w : dist.weights) max_abs = std::max(max_abs, std::abs(w));
  form.min_abs_lambda = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < dist.weights.size(); ++j) {
    const double w = dist.weights[j];
    if (std::abs(w) <= kRelativeWeightCutoff * max_abs || w == 0.0) continue;
    form.lambda.push_back(w);
    form.nu.push_back(dist.noncentralities[j]);
    form.min_abs_lambda = std::min(form.min_abs_lambda, std::abs(w));
    form.all_positive = form.all_positive && w > 0.0;
    form.all_negative = form.all_negative && w < 0.0;
  }
  form.max_abs_lambda = max_abs;
  return form;
}

// sin(theta(u)) / (u rho(u)) for the tail of Q at t.
class ImhofIntegrand {
 public:
  ImhofIntegrand(const PreparedForm& form, double t)
      : form_(form), shift_(t - form.offset) {}

  double operator()(double u) const {
    double theta = -0.5 * shift_ * u;
    double log_rho = 0.125 * form_.gaussian_variance * u * u;
    for (size_t j = 0; j < form_.lambda.size(); ++j) {
      const double lu = form_.lambda[j] * u;
      const double lu2 = lu * lu;
      const double q = 1.0 + lu2;
      theta += 0.5 * (std::atan(lu) + form_.nu[j] * lu / q);
      log_rho += 0.25 * std::log1p(lu2) + 0.5 * form_.nu[j] * lu2 / q;
    }
    return std::sin(theta) * std::exp(-log_rho) / u;
  }

  // Log of Imhof's bound on |integral from U to infinity|.
  double LogTruncationBound(double upper) const {
    const double k = 0.5 * static_cast<double>(form_.lambda.size());
    double log_bound = -std::log(kPi * k) - k * std::log(upper);
    for (size_t j = 0; j < form_.lambda.size(); ++j) {
      const double lu = form_.lambda[j] * upper;
      log_bound -= 0.5 * std::log(std::abs(form_.lambda[j]));
      log_bound -= 0.5 * form_.nu[j] * lu * lu / (1.0 + lu * lu);
    }
    log_bound -= 0.125 * form_.gaussian_variance * upper * upper;
    return log_bound;
  }

  double shift() const { return shift_; }

 private:
  const PreparedForm& form_;
  double shift_;
};

struct PanelEstimate {
  double value;
  double error;
};

template <typename F>
PanelEstimate Kronrod15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

template <typename F>
double AdaptiveIntegrate(const F& f, double a, double b, double abs_tol, int depth,
                         bool& ok) {
  const PanelEstimate whole = Kronrod15(f, a, b);
  if (whole.error <= std::max(abs_tol, 1e-14 * std::abs(whole.value)) || depth <= 0) {
    if (depth <= 0 && whole.error > abs_tol) ok = false;
    return whole.value;
  }
  const double mid = 0.5 * (a + b);
  return AdaptiveIntegrate(f, a, mid, 0.5 * abs_tol, depth - 1, ok) +
         AdaptiveIntegrate(f, mid, b, 0.5 * abs_tol, depth - 1, ok);
}

// Wynn's epsilon algorithm applied to a sequence of partial sums; returns the
// deepest even-column estimate.
double WynnEpsilon(const std::vector<double>& sums) {
  const size_t m = sums.size();
  std::vector<double> previous(m + 1, 0.0);
  std::vector<double> current(sums.begin(), sums.end());
  double estimate = sums.back();
  for (size_t k = 1; k < m; ++k) {
    std::vector<double> next(m - k);
    for (size_t i = 0; i + 1 < current.size(); ++i) {
      const double diff = current[i + 1] - current[i];
      if (std::abs(diff) < 1e-300) return estimate;
      next[i] = previous[i + 1] + 1.0 / diff;
    }
    if (k % 2 == 0) estimate = next.back();
    previous = std::move(current);
    current = std::move(next);
  }
  return estimate;
}

absl::StatusOr<double> ImhofTail(const PreparedForm& form, double t,
                                 const ImhofOptions& options) {
  const ImhofIntegrand integrand(form, t);
  // Integral tolerance, in units of the integral (the tail is 1/2 + I / pi).
  const double tolerance = options.tolerance * kPi;

  // Truncation point from the analytic bound.
  double upper_bound = 1.0 / form.max_abs_lambda;
  const double log_target = std::log(0.1 * tolerance);
  int doublings = 0;
  while (integrand.LogTruncationBound(upper_bound) > log_target && doublings < 400) {
    upper_bound *= 2.0;
    ++doublings;
  }
  if (!std::isfinite(upper_bound)) upper_bound = std::numeric_limits<double>::max();

  const double frequency = 0.5 * std::abs(integrand.shift());
  const double half_period =
      frequency > 0.0 ? kPi / frequency : std::numeric_limits<double>::infinity();
  double base_width = std::min(half_period, 1.0 / form.max_abs_lambda);
  if (form.gaussian_variance > 0.0) {
    base_width = std::min(base_width, 1.0 / std::sqrt(form.gaussian_variance));
  }
  base_width *= 0.5;
  // Past this point every arctan term is close to saturation and successive
  // half-period panels form a smooth alternating sequence.
  const double asymptotic_start = 10.0 / form.min_abs_lambda;

  double u = 0.0;
  double total = 0.0;
  std::vector<double> partial_sums;
  double last_estimate = std::numeric_limits<double>::quiet_NaN();
  int stable_steps = 0;
  bool quadrature_ok = true;
  const double panel_tolerance = 1e-3 * tolerance;
  for (int panel = 0; panel < options.max_panels; ++panel) {
    double width = std::min(half_period, std::max(base_width, 0.5 * u));
    const bool last = u + width >= upper_bound;
    if (last) width = upper_bound - u;
    total += AdaptiveIntegrate(integrand, u, u + width, panel_tolerance, 30,
                               quadrature_ok);
    u += width;
    if (last) {
      if (!quadrature_ok) return NumericError("Imhof quadrature did not converge");
      return total;
    }
    if (width == half_period && u >= asymptotic_start) {
      partial_sums.push_back(total);
      if (partial_sums.size() > 40) partial_sums.erase(partial_sums.begin());
      if (partial_sums.size() >= 6) {
        const double estimate = WynnEpsilon(partial_sums);
        if (std::abs(estimate - last_estimate) < 1e-3 * tolerance) {
          if (++stable_steps >= 3) {
            if (!quadrature_ok) return NumericError("Imhof quadrature did not converge");
            return estimate;
          }
        } else {
          stable_steps = 0;
        }
        last_estimate = estimate;
      }
    }
  }
  return NumericError(absl::StrCat("Imhof integration did not converge within ",
                                   options.max_panels, " panels (t = ", t,
                                   ", reached u = ", u, ")"));
}

}  // namespace

QuadFormDistribution QuadFormDistribution::Central(std::vector<double> weights) {
  QuadFormDistribution dist;
  dist.noncentralities.assign(weights.size(), 0.0);
  dist.weights = std::move(weights);
  return dist;
}

absl::Status QuadFormDistribution::Validate() const {
  if (weights.size() != noncentralities.size()) {
    return absl::InvalidArgumentError("weights and noncentralities differ in length");
  }
  for (size_t j = 0; j < weights.size(); ++j) {
    if (!std::isfinite(weights[j])) {
      return absl::InvalidArgumentError("weights must be finite");
    }
    if (!(noncentralities[j] >= 0.0) || !std::isfinite(noncentralities[j])) {
      return absl::InvalidArgumentError("noncentralities must be finite and >= 0");
    }
  }
  if (!(gaussian_variance >= 0.0) || !std::isfinite(gaussian_variance) ||
      !std::isfinite(offset)) {
    return absl::InvalidArgumentError("invalid Gaussian term");
  }
  const bool any_weight = std::any_of(weights.begin(), weights.end(),
                                      [](double w) { return w != 0.0; });
  if (!any_weight && gaussian_variance == 0.0) {
    return absl::InvalidArgumentError(
        "distribution is degenerate (no nonzero weight and no Gaussian term)");
  }
  return absl::OkStatus();
}

double QuadFormDistribution::Mean() const {
  double mean = offset;
  for (size_t j = 0; j < weights.size(); ++j) {
    mean += weights[j] * (1.0 + noncentralities[j]);
  }
  return mean;
}

double QuadFormDistribution::Variance() const {
  double variance = gaussian_variance;
  for (size_t j = 0; j < weights.size(); ++j) {
    variance += 2.0 * weights[j] * weights[j] * (1.0 + 2.0 * noncentralities[j]);
  }
  return variance;
}

absl::StatusOr<double> TailProbability(const QuadFormDistribution& dist, double t,
                                       const ImhofOptions& options) {
  DPCHISQ_RETURN_IF_ERROR(dist.Validate());
  if (std::isnan(t)) return absl::InvalidArgumentError("threshold is NaN");
  if (t == std::numeric_limits<double>::infinity()) return 0.0;
  if (t == -std::numeric_limits<double>::infinity()) return 1.0;

  const PreparedForm form = Prepare(dist);
  if (form.lambda.empty()) {
    return 0.5 * std::erfc((t - form.offset) /
                           std::sqrt(2.0 * form.gaussian_variance));
  }
  if (form.gaussian_variance == 0.0) {
    if (form.all_positive && t <= form.offset) return 1.0;
    if (form.all_negative && t >= form.offset) return 0.0;
  }
  DPCHISQ_ASSIGN_OR_RETURN(const double integral, ImhofTail(form, t, options));
  return std::clamp(0.5 + integral / kPi, 0.0, 1.0);
}

absl::StatusOr<double> CriticalValue(const QuadFormDistribution& dist, double alpha,
                                     const ImhofOptions& options) {
  DPCHISQ_RETURN_IF_ERROR(dist.Validate());
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat("alpha must lie in (0, 1), got ", alpha));
  }
  const double mean = dist.Mean();
  const double sd = std::sqrt(dist.Variance());
  const PreparedForm form = Prepare(dist);
  const bool bounded_below = form.gaussian_variance == 0.0 && form.all_positive;

  double lo = bounded_below ? form.offset : mean - 20.0 * sd;
  double hi = mean + 20.0 * sd;
  DPCHISQ_ASSIGN_OR_RETURN(double tail_hi, TailProbability(dist, hi, options));
  for (int i = 0; tail_hi > alpha; ++i) {
    if (i >= 60) return NumericError("could not bracket the critical value from above");
    hi = mean + 2.0 * (hi - mean);
    DPCHISQ_ASSIGN_OR_RETURN(tail_hi, TailProbability(dist, hi, options));
  }
  DPCHISQ_ASSIGN_OR_RETURN(double tail_lo, TailProbability(dist, lo, options));
  for (int i = 0; tail_lo < alpha; ++i) {
    if (i >= 60) return NumericError("could not bracket the critical value from below");
    lo = mean - 2.0 * (mean - lo);
    DPCHISQ_ASSIGN_OR_RETURN(tail_lo, TailProbability(dist, lo, options));
  }
  for (int iter = 0; iter < 300; ++iter) {
    const double scale = std::max({std::abs(lo), std::abs(hi), 1e-300});
    if (hi - lo <= 1e-8 * scale) break;
    const double mid = 0.5 * (lo + hi);
    DPCHISQ_ASSIGN_OR_RETURN(const double tail_mid, TailProbability(dist, mid, options));
    if (tail_mid > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double Sample(const QuadFormDistribution& dist, RandomStream& rng) {
  double value = dist.offset;
  for (size_t j = 0; j < dist.weights.size(); ++j) {
    const double z = rng.StandardNormal() + std::sqrt(dist.noncentralities[j]);
    value += dist.weights[j] * z * z;
  }
  if (dist.gaussian_variance > 0.0) {
    value += std::sqrt(dist.gaussian_variance) * rng.StandardNormal();
  }
  return value;
}

}  // namespace dpchisq
