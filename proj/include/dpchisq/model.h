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

#ifndef DPCHISQ_MODEL_H_
#define DPCHISQ_MODEL_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpchisq/random.h"

namespace dpchisq {

// Tolerance on |sum - 1| for a valid probability vector.
inline constexpr double kProbabilitySumTolerance = 1e-12;

// Row-major r x c grid. A flat d-vector is stored as a 1 x d grid; cell
// (i, j) lives at index i * cols + j ("top row first, left to right").
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}
  Grid(int rows, int cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return static_cast<int>(data_.size()); }

  T& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  const T& operator()(int i, int j) const {
    return data_[static_cast<size_t>(i) * cols_ + j];
  }
  T& operator[](int k) { return data_[k]; }
  const T& operator[](int k) const { return data_[k]; }

  std::span<const T> flat() const { return data_; }
  std::span<T> flat() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool SameShape(int rows, int cols) const { return rows_ == rows && cols_ == cols; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using RealTable = Grid<double>;

// Nonnegative entries summing to one.
class ProbabilityVector {
 public:
  static absl::StatusOr<ProbabilityVector> Create(std::vector<double> entries);
  static ProbabilityVector Uniform(int d);

  int size() const { return static_cast<int>(entries_.size()); }
  double operator[](int i) const { return entries_[i]; }
  std::span<const double> entries() const { return entries_; }

  // Error unless every entry is at least `floor` (strictly positive cells are
  // required wherever the vector appears in a denominator).
  absl::Status RequireAtLeast(double floor) const;

 private:
  explicit ProbabilityVector(std::vector<double> entries)
      : entries_(std::move(entries)) {}

  std::vector<double> entries_;
};

// Nonnegative integer counts; n is the sum of all cells.
class CountTable {
 public:
  static absl::StatusOr<CountTable> Create(int rows, int cols,
                                           std::vector<int64_t> counts);
  static absl::StatusOr<CountTable> FromVector(std::vector<int64_t> counts) {
    const int d = static_cast<int>(counts.size());
    return Create(1, d, std::move(counts));
  }

  int rows() const { return grid_.rows(); }
  int cols() const { return grid_.cols(); }
  int size() const { return grid_.size(); }
  int64_t n() const { return n_; }
  int64_t operator()(int i, int j) const { return grid_(i, j); }
  int64_t operator[](int k) const { return grid_[k]; }
  const Grid<int64_t>& grid() const { return grid_; }

  // Same cells viewed with a different shape (rows * cols must match).
  absl::StatusOr<CountTable> Reshape(int rows, int cols) const;

  RealTable AsReal() const;

  friend bool operator==(const CountTable&, const CountTable&) = default;

 private:
  CountTable(Grid<int64_t> grid, int64_t n) : grid_(std::move(grid)), n_(n) {}

  Grid<int64_t> grid_;
  int64_t n_ = 0;
};

// Goodness-of-fit null H0: p = p0.
struct GofNull {
  ProbabilityVector p0;
};

// Perturbation of p0 used as a goodness-of-fit alternative.
//   kScaled: p1 = p0 + (delta / sqrt(n)) * pattern
//   kFixed:  p1 = p0 + delta * pattern
// An empty sign pattern selects the default for the form:
//   kScaled: (1, -1, 1, -1, ..., 1, -1, -1, 1), i.e. alternating signs over
//            the first d - 2 cells followed by (-1, 1);
//   kFixed:  (1, -1, 1, -1, ...).
struct GofAlternate {
  enum class Form { kScaled, kFixed };
  Form form = Form::kScaled;
  double delta = 0.0;
  std::vector<int> sign_pattern;
};

// Default sign pattern for `form` in dimension d (d must be even).
absl::StatusOr<std::vector<int>> DefaultSignPattern(GofAlternate::Form form, int d);

// Draws a 1 x d table from Multinomial(n, p) by sequential conditional
// binomials.
absl::StatusOr<CountTable> SampleMultinomial(int64_t n, const ProbabilityVector& p,
                                             RandomStream& rng);

absl::StatusOr<ProbabilityVector> GofAlternateProbability(const ProbabilityVector& p0,
                                                          const GofAlternate& alt,
                                                          int64_t n);

// Joint 2 x 2 cell probabilities (row-major) for two Bernoulli(1/2) variables
// with covariance `delta`: (1/4 + d, 1/4 - d, 1/4 - d, 1/4 + d). With
// `literal_pattern` the (1, -1, 1, -1) perturbation is used instead; that
// variant shifts the column marginals and has zero covariance. It exists for
// comparison runs only.
absl::StatusOr<ProbabilityVector> IndepAlternateProbability(double delta,
                                                            bool literal_pattern = false);

// CSV: one line per table row, integer cells. A first line that does not
// parse as numbers is treated as a header and skipped.
absl::StatusOr<CountTable> ReadCountTableCsv(std::istream& in);
absl::StatusOr<CountTable> ReadCountTableCsvFile(const std::string& path);
void WriteCountTableCsv(const CountTable& table, std::ostream& out);

}  // namespace dpchisq

#endif  // DPCHISQ_MODEL_H_
