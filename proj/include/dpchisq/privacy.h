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

#ifndef DPCHISQ_PRIVACY_H_
#define DPCHISQ_PRIVACY_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpchisq/model.h"
#include "dpchisq/random.h"

namespace dpchisq {

enum class Mechanism { kLaplace, kGaussian };

std::string MechanismName(Mechanism mechanism);
absl::StatusOr<Mechanism> ParseMechanism(const std::string& name);

// Histogram release parameters. Moving one person between cells changes the
// count vector by 2 in l1 and sqrt(2) in l2, which fixes the calibrations
// below.
struct PrivacyParams {
  Mechanism mechanism = Mechanism::kGaussian;
  double epsilon = 0.1;
  // Only used by the Gaussian mechanism.
  double delta = 1e-6;
  // Test hook: when set, replaces the calibrated noise scale (Laplace b or
  // Gaussian sigma) everywhere it is consumed. Zero gives noise-free runs.
  std::optional<double> noise_scale_override;

  absl::Status Validate() const;

  static PrivacyParams Laplace(double epsilon) {
    return PrivacyParams{Mechanism::kLaplace, epsilon, 0.0, std::nullopt};
  }
  static PrivacyParams Gaussian(double epsilon, double delta) {
    return PrivacyParams{Mechanism::kGaussian, epsilon, delta, std::nullopt};
  }
  PrivacyParams WithNoiseScale(double scale) const {
    PrivacyParams copy = *this;
    copy.noise_scale_override = scale;
    return copy;
  }
};

// Laplace scale 2 / epsilon.
absl::StatusOr<double> LaplaceScale(const PrivacyParams& params);

// Gaussian standard deviation 2 * sqrt(ln(2 / delta)) / epsilon.
absl::StatusOr<double> GaussianSigma(const PrivacyParams& params);

// Scale actually used when adding noise: the override if present, otherwise
// the calibrated scale of the configured mechanism.
absl::StatusOr<double> NoiseScale(const PrivacyParams& params);

// Variance of one noise draw (2 b^2 for Laplace, sigma^2 for Gaussian).
absl::StatusOr<double> NoiseVariance(const PrivacyParams& params);

// Real-valued counts after noise. n is public and never perturbed. Cells may
// be negative.
struct NoisyTable {
  RealTable values;
  int64_t n = 0;
  PrivacyParams params;

  int rows() const { return values.rows(); }
  int cols() const { return values.cols(); }
  int size() const { return values.size(); }
};

// One zero-mean noise draw. Laplace uses one uniform (inverse CDF), Gaussian
// two (Box-Muller), regardless of the scale.
double SampleNoise(Mechanism mechanism, double scale, RandomStream& rng);

// values[i][j] = counts[i][j] + Z_ij with Z_ij i.i.d.
absl::StatusOr<NoisyTable> AddNoise(const CountTable& x, const PrivacyParams& params,
                                    RandomStream& rng);

// CSV with 17 significant digits per cell.
void WriteNoisyTableCsv(const NoisyTable& table, std::ostream& out);
absl::StatusOr<RealTable> ReadRealTableCsv(std::istream& in);

}  // namespace dpchisq

#endif  // DPCHISQ_PRIVACY_H_
