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

#include "dpchisq/model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "absl/strings/numbers.h"
#include "dpchisq/status_macros.h"

namespace dpchisq {

absl::StatusOr<ProbabilityVector> ProbabilityVector::Create(
    std::vector<double> entries) {
  if (entries.empty()) {
    return absl::InvalidArgumentError("probability vector is empty");
  }
  double sum = 0.0;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!std::isfinite(entries[i]) || entries[i] < 0.0) {
      return absl::InvalidArgumentError(
          absl::StrCat("probability entry ", i, " is invalid: ", entries[i]));
    }
    sum += entries[i];
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    return absl::InvalidArgumentError(
        absl::StrCat("probabilities sum to ", sum, ", expected 1"));
  }
  return ProbabilityVector(std::move(entries));
}

ProbabilityVector ProbabilityVector::Uniform(int d) {
  return ProbabilityVector(std::vector<double>(d, 1.0 / d));
}

absl::Status ProbabilityVector::RequireAtLeast(double floor) const {
  for (int i = 0; i < size(); ++i) {
    if (entries_[i] < floor) {
      return absl::InvalidArgumentError(absl::StrCat(
          "probability entry ", i, " = ", entries_[i], " is below ", floor));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<CountTable> CountTable::Create(int rows, int cols,
                                              std::vector<int64_t> counts) {
  if (rows < 1 || cols < 1 ||
      counts.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "table shape ", rows, "x", cols, " does not match ", counts.size(), " cells"));
  }
  int64_t n = 0;
  for (int64_t c : counts) {
    if (c < 0) {
      return absl::InvalidArgumentError(absl::StrCat("negative count ", c));
    }
    n += c;
  }
  return CountTable(Grid<int64_t>(rows, cols, std::move(counts)), n);
}

absl::StatusOr<CountTable> CountTable::Reshape(int rows, int cols) const {
  return Create(rows, cols, grid_.data());
}

RealTable CountTable::AsReal() const {
  std::vector<double> values(grid_.data().begin(), grid_.data().end());
  return RealTable(rows(), cols(), std::move(values));
}

absl::StatusOr<std::vector<int>> DefaultSignPattern(GofAlternate::Form form, int d) {
  if (d < 2 || d % 2 != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("the alternating sign pattern needs an even dimension, got ", d));
  }
  std::vector<int> pattern(d);
  for (int i = 0; i < d; ++i) pattern[i] = (i % 2 == 0) ? 1 : -1;
  if (form == GofAlternate::Form::kScaled) {
    pattern[d - 2] = -1;
    pattern[d - 1] = 1;
  }
  return pattern;
}

absl::StatusOr<CountTable> SampleMultinomial(int64_t n, const ProbabilityVector& p,
                                             RandomStream& rng) {
  if (n < 1) {
    return absl::InvalidArgumentError(absl::StrCat("sample size must be >= 1, got ", n));
  }
  const int d = p.size();
  std::vector<int64_t> counts(d, 0);
  int64_t remaining = n;
  double remaining_mass = 1.0;
  for (int i = 0; i + 1 < d && remaining > 0; ++i) {
    const double pi = p[i];
    if (pi <= 0.0) continue;
    const double q = std::clamp(pi / remaining_mass, 0.0, 1.0);
    int64_t draw = remaining;
    if (q < 1.0) {
      std::binomial_distribution<int64_t> binomial(remaining, q);
      draw = binomial(rng.engine());
    }
    counts[i] = draw;
    remaining -= draw;
    remaining_mass -= pi;
  }
  counts[d - 1] += remaining;
  return CountTable::FromVector(std::move(counts));
}

absl::StatusOr<ProbabilityVector> GofAlternateProbability(const ProbabilityVector& p0,
                                                          const GofAlternate& alt,
                                                          int64_t n) {
  const int d = p0.size();
  if (!(alt.delta >= 0.0) || !std::isfinite(alt.delta)) {
    return absl::InvalidArgumentError(
        absl::StrCat("perturbation must be nonnegative, got ", alt.delta));
  }
  std::vector<int> pattern = alt.sign_pattern;
  if (pattern.empty()) {
    DPCHISQ_ASSIGN_OR_RETURN(pattern, DefaultSignPattern(alt.form, d));
  }
  if (static_cast<int>(pattern.size()) != d) {
    return absl::InvalidArgumentError("sign pattern length differs from dimension");
  }
  int balance = 0;
  for (int s : pattern) {
    if (s != 1 && s != -1) {
      return absl::InvalidArgumentError("sign pattern entries must be +1 or -1");
    }
    balance += s;
  }
  if (balance != 0) {
    return absl::InvalidArgumentError("sign pattern must sum to zero");
  }
  double step = alt.delta;
  if (alt.form == GofAlternate::Form::kScaled) {
    if (n < 1) {
      return absl::InvalidArgumentError("scaled alternative needs n >= 1");
    }
    step /= std::sqrt(static_cast<double>(n));
  }
  std::vector<double> p1(d);
  for (int i = 0; i < d; ++i) {
    p1[i] = p0[i] + step * pattern[i];
    if (step > 0.0 && !(p1[i] > 0.0 && p1[i] < 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("alternative cell ", i, " = ", p1[i], " leaves (0, 1)"));
    }
  }
  return ProbabilityVector::Create(std::move(p1));
}

absl::StatusOr<ProbabilityVector> IndepAlternateProbability(double delta,
                                                            bool literal_pattern) {
  if (!(delta >= 0.0 && delta < 0.25)) {
    return absl::InvalidArgumentError(
        absl::StrCat("covariance must lie in [0, 1/4), got ", delta));
  }
  const double q = 0.25;
  if (literal_pattern) {
    return ProbabilityVector::Create({q + delta, q - delta, q + delta, q - delta});
  }
  return ProbabilityVector::Create({q + delta, q - delta, q - delta, q + delta});
}

namespace {

bool ParseRow(absl::string_view line, std::vector<int64_t>& out, bool& numeric) {
  out.clear();
  numeric = true;
  for (absl::string_view field : absl::StrSplit(line, ',')) {
    field = absl::StripAsciiWhitespace(field);
    int64_t value = 0;
    if (!absl::SimpleAtoi(field, &value)) {
      numeric = false;
      return false;
    }
    out.push_back(value);
  }
  return true;
}

}  // namespace

absl::StatusOr<CountTable> ReadCountTableCsv(std::istream& in) {
  std::string line;
  std::vector<int64_t> cells;
  std::vector<int64_t> row;
  int rows = 0;
  int cols = -1;
  bool first = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view view = absl::StripAsciiWhitespace(line);
    if (view.empty()) continue;
    bool numeric = true;
    ParseRow(view, row, numeric);
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected integer cells"));
    }
    first = false;
    if (cols < 0) cols = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != cols) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_no, ": expected ", cols, " cells, got ", row.size()));
    }
    cells.insert(cells.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) {
    return absl::InvalidArgumentError("CSV contains no table rows");
  }
  return CountTable::Create(rows, cols, std::move(cells));
}

absl::StatusOr<CountTable> ReadCountTableCsvFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::InvalidArgumentError(absl::StrCat("cannot open ", path));
  }
  return ReadCountTableCsv(in);
}

void WriteCountTableCsv(const CountTable& table, std::ostream& out) {
  for (int i = 0; i < table.rows(); ++i) {
    for (int j = 0; j < table.cols(); ++j) {
      if (j > 0) out << ',';
      out << table(i, j);
    }
    out << '\n';
  }
}

}  // namespace dpchisq
