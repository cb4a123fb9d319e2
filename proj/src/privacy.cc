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

#include "dpchisq/privacy.h"

#include <cmath>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "dpchisq/status_macros.h"

namespace dpchisq {

std::string MechanismName(Mechanism mechanism) {
  return mechanism == Mechanism::kLaplace ? "laplace" : "gauss";
}

absl::StatusOr<Mechanism> ParseMechanism(const std::string& name) {
  if (name == "laplace" || name == "lap") return Mechanism::kLaplace;
  if (name == "gauss" || name == "gaussian") return Mechanism::kGaussian;
  return absl::InvalidArgumentError(absl::StrCat("unknown mechanism '", name, "'"));
}

absl::Status PrivacyParams::Validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  if (mechanism == Mechanism::kGaussian && !(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  if (noise_scale_override.has_value() &&
      !(*noise_scale_override >= 0.0 && std::isfinite(*noise_scale_override))) {
    return absl::InvalidArgumentError("noise scale override must be >= 0");
  }
  return absl::OkStatus();
}

absl::StatusOr<double> LaplaceScale(const PrivacyParams& params) {
  DPCHISQ_RETURN_IF_ERROR(params.Validate());
  if (params.mechanism != Mechanism::kLaplace) {
    return absl::InvalidArgumentError("Laplace scale requested for a non-Laplace mechanism");
  }
  return 2.0 / params.epsilon;
}

absl::StatusOr<double> GaussianSigma(const PrivacyParams& params) {
  DPCHISQ_RETURN_IF_ERROR(params.Validate());
  if (params.mechanism != Mechanism::kGaussian) {
    return absl::InvalidArgumentError("Gaussian sigma requested for a non-Gaussian mechanism");
  }
  return 2.0 * std::sqrt(std::log(2.0 / params.delta)) / params.epsilon;
}

absl::StatusOr<double> NoiseScale(const PrivacyParams& params) {
  DPCHISQ_RETURN_IF_ERROR(params.Validate());
  if (params.noise_scale_override.has_value()) return *params.noise_scale_override;
  return params.mechanism == Mechanism::kLaplace ? LaplaceScale(params)
                                                 : GaussianSigma(params);
}

absl::StatusOr<double> NoiseVariance(const PrivacyParams& params) {
  DPCHISQ_ASSIGN_OR_RETURN(const double scale, NoiseScale(params));
  return params.mechanism == Mechanism::kLaplace ? 2.0 * scale * scale : scale * scale;
}

double SampleNoise(Mechanism mechanism, double scale, RandomStream& rng) {
  if (mechanism == Mechanism::kLaplace) {
    const double u = rng.Uniform() - 0.5;
    const double magnitude = -scale * std::log1p(-2.0 * std::abs(u));
    return u < 0.0 ? -magnitude : magnitude;
  }
  return scale * rng.StandardNormal();
}

absl::StatusOr<NoisyTable> AddNoise(const CountTable& x, const PrivacyParams& params,
                                    RandomStream& rng) {
  DPCHISQ_ASSIGN_OR_RETURN(const double scale, NoiseScale(params));
  NoisyTable out{x.AsReal(), x.n(), params};
  for (int k = 0; k < out.size(); ++k) {
    out.values[k] += SampleNoise(params.mechanism, scale, rng);
  }
  return out;
}

void WriteNoisyTableCsv(const NoisyTable& table, std::ostream& out) {
  for (int i = 0; i < table.rows(); ++i) {
    for (int j = 0; j < table.cols(); ++j) {
      if (j > 0) out << ',';
      out << absl::StrFormat("%.17g", table.values(i, j));
    }
    out << '\n';
  }
}

absl::StatusOr<RealTable> ReadRealTableCsv(std::istream& in) {
  std::string line;
  std::vector<double> cells;
  int rows = 0;
  int cols = -1;
  bool first = true;
  while (std::getline(in, line)) {
    absl::string_view view = absl::StripAsciiWhitespace(line);
    if (view.empty()) continue;
    std::vector<double> row;
    bool numeric = true;
    for (absl::string_view field : absl::StrSplit(view, ',')) {
      double value = 0.0;
      if (!absl::SimpleAtod(absl::StripAsciiWhitespace(field), &value)) {
        numeric = false;
        break;
      }
      row.push_back(value);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      return absl::InvalidArgumentError("expected real-valued cells");
    }
    first = false;
    if (cols < 0) cols = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != cols) {
      return absl::InvalidArgumentError("ragged CSV rows");
    }
    cells.insert(cells.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) return absl::InvalidArgumentError("CSV contains no table rows");
  return RealTable(rows, cols, std::move(cells));
}

}  // namespace dpchisq
