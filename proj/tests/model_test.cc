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

#include <cmath>
#include <sstream>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "span_util.h"

namespace dpchisq {
namespace {

using ::testing::DoubleNear;
using ::testing::ElementsAre;
using ::testing::Pointwise;

TEST(ProbabilityVectorTest, AcceptsValidVectors) {
  absl::StatusOr<ProbabilityVector> p = ProbabilityVector::Create({0.2, 0.3, 0.5});
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p->size(), 3);
  EXPECT_DOUBLE_EQ((*p)[2], 0.5);
  EXPECT_THAT(ToVector(ProbabilityVector::Uniform(4).entries()),
              ElementsAre(0.25, 0.25, 0.25, 0.25));
}

TEST(ProbabilityVectorTest, RejectsInvalidVectors) {
  EXPECT_EQ(ProbabilityVector::Create({}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ProbabilityVector::Create({0.5, 0.6}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ProbabilityVector::Create({1.5, -0.5}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ProbabilityVector::Create({NAN, 1.0}).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(ProbabilityVectorTest, RequireAtLeast) {
  absl::StatusOr<ProbabilityVector> p = ProbabilityVector::Create({0.0, 1.0});
  ASSERT_TRUE(p.ok());
  EXPECT_FALSE(p->RequireAtLeast(1e-12).ok());
  EXPECT_TRUE(ProbabilityVector::Uniform(3).RequireAtLeast(1e-12).ok());
}

TEST(CountTableTest, CreateAndReshape) {
  absl::StatusOr<CountTable> x = CountTable::Create(2, 3, {1, 2, 3, 4, 5, 6});
  ASSERT_TRUE(x.ok());
  EXPECT_EQ(x->n(), 21);
  EXPECT_EQ((*x)(1, 0), 4);
  EXPECT_EQ((*x)[5], 6);
  absl::StatusOr<CountTable> flat = x->Reshape(1, 6);
  ASSERT_TRUE(flat.ok());
  EXPECT_EQ(flat->rows(), 1);
  EXPECT_EQ(flat->n(), 21);
  EXPECT_FALSE(x->Reshape(4, 2).ok());
  EXPECT_THAT(x->AsReal().data(), ElementsAre(1, 2, 3, 4, 5, 6));
}

TEST(CountTableTest, RejectsBadInput) {
  EXPECT_FALSE(CountTable::Create(2, 2, {1, 2, 3}).ok());
  EXPECT_FALSE(CountTable::Create(1, 2, {1, -2}).ok());
  EXPECT_FALSE(CountTable::Create(0, 0, {}).ok());
}

TEST(SignPatternTest, Defaults) {
  EXPECT_THAT(*DefaultSignPattern(GofAlternate::Form::kFixed, 4), ElementsAre(1, -1, 1, -1));
  EXPECT_THAT(*DefaultSignPattern(GofAlternate::Form::kScaled, 4), ElementsAre(1, -1, -1, 1));
  EXPECT_THAT(*DefaultSignPattern(GofAlternate::Form::kScaled, 6),
              ElementsAre(1, -1, 1, -1, -1, 1));
  EXPECT_FALSE(DefaultSignPattern(GofAlternate::Form::kFixed, 5).ok());
}

TEST(SignPatternTest, BalancedForEveryEvenDimension) {
  for (int d = 2; d <= 200; d += 2) {
    for (GofAlternate::Form form : {GofAlternate::Form::kFixed, GofAlternate::Form::kScaled}) {
      absl::StatusOr<std::vector<int>> pattern = DefaultSignPattern(form, d);
      ASSERT_TRUE(pattern.ok());
      int sum = 0;
      for (int s : *pattern) sum += s;
      EXPECT_EQ(sum, 0) << "d = " << d;
    }
  }
}

TEST(SampleMultinomialTest, SumsToNAndIsReproducible) {
  const ProbabilityVector p = *ProbabilityVector::Create({0.1, 0.2, 0.3, 0.4});
  RandomStream a(11);
  RandomStream b(11);
  for (int rep = 0; rep < 50; ++rep) {
    absl::StatusOr<CountTable> x = SampleMultinomial(1000, p, a);
    absl::StatusOr<CountTable> y = SampleMultinomial(1000, p, b);
    ASSERT_TRUE(x.ok());
    EXPECT_EQ(x->n(), 1000);
    EXPECT_EQ(*x, *y);
  }
}

TEST(SampleMultinomialTest, CellMeansMatchExpectation) {
  const ProbabilityVector p = *ProbabilityVector::Create({0.05, 0.15, 0.3, 0.5});
  RandomStream rng(12);
  constexpr int kReps = 4000;
  constexpr int64_t kN = 500;
  std::vector<double> mean(4, 0.0);
  for (int rep = 0; rep < kReps; ++rep) {
    const CountTable x = *SampleMultinomial(kN, p, rng);
    for (int i = 0; i < 4; ++i) mean[i] += static_cast<double>(x[i]) / kReps;
  }
  for (int i = 0; i < 4; ++i) {
    const double sd = std::sqrt(kN * p[i] * (1 - p[i]) / kReps);
    EXPECT_NEAR(mean[i], kN * p[i], 5 * sd) << "cell " << i;
  }
}

TEST(SampleMultinomialTest, ZeroProbabilityCellStaysEmpty) {
  const ProbabilityVector p = *ProbabilityVector::Create({0.5, 0.0, 0.5});
  RandomStream rng(13);
  for (int rep = 0; rep < 100; ++rep) EXPECT_EQ((*SampleMultinomial(100, p, rng))[1], 0);
  EXPECT_FALSE(SampleMultinomial(0, p, rng).ok());
}

TEST(GofAlternateTest, ScaledAndFixedForms) {
  const ProbabilityVector p0 = ProbabilityVector::Uniform(4);
  GofAlternate scaled{GofAlternate::Form::kScaled, 0.1, {}};
  EXPECT_THAT(ToVector(GofAlternateProbability(p0, scaled, 100)->entries()),
              Pointwise(DoubleNear(1e-15), {0.26, 0.24, 0.24, 0.26}));
  GofAlternate fixed{GofAlternate::Form::kFixed, 0.01, {}};
  EXPECT_THAT(ToVector(GofAlternateProbability(p0, fixed, 100)->entries()),
              Pointwise(DoubleNear(1e-15), {0.26, 0.24, 0.26, 0.24}));
  GofAlternate zero{GofAlternate::Form::kScaled, 0.0, {}};
  EXPECT_THAT(ToVector(GofAlternateProbability(p0, zero, 100)->entries()),
              ElementsAre(0.25, 0.25, 0.25, 0.25));
}

TEST(GofAlternateTest, RejectsInvalidPerturbations) {
  const ProbabilityVector p0 = ProbabilityVector::Uniform(4);
  EXPECT_FALSE(
      GofAlternateProbability(p0, {GofAlternate::Form::kFixed, 0.3, {}}, 100).ok());
  EXPECT_FALSE(
      GofAlternateProbability(p0, {GofAlternate::Form::kFixed, 0.01, {1, 1, -1, 1}}, 100).ok());
  EXPECT_FALSE(
      GofAlternateProbability(p0, {GofAlternate::Form::kFixed, 0.01, {1, -1}}, 100).ok());
  EXPECT_FALSE(
      GofAlternateProbability(p0, {GofAlternate::Form::kFixed, -0.01, {}}, 100).ok());
}

TEST(IndepAlternateTest, CovarianceModel) {
  const ProbabilityVector p = *IndepAlternateProbability(0.01);
  EXPECT_THAT(ToVector(p.entries()), Pointwise(DoubleNear(1e-15), {0.26, 0.24, 0.24, 0.26}));
  // Bernoulli(1/2) marginals and covariance delta.
  EXPECT_NEAR(p[0] + p[1], 0.5, 1e-15);
  EXPECT_NEAR(p[0] + p[2], 0.5, 1e-15);
  EXPECT_NEAR(p[0] - 0.25, 0.01, 1e-15);

  const ProbabilityVector literal = *IndepAlternateProbability(0.01, true);
  EXPECT_THAT(ToVector(literal.entries()),
              Pointwise(DoubleNear(1e-15), {0.26, 0.24, 0.26, 0.24}));
  EXPECT_FALSE(IndepAlternateProbability(0.25).ok());
  EXPECT_FALSE(IndepAlternateProbability(-0.1).ok());
}

TEST(CsvTest, ReadsWithAndWithoutHeader) {
  std::istringstream plain("1,2\n3,4\n");
  absl::StatusOr<CountTable> a = ReadCountTableCsv(plain);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(a->rows(), 2);
  EXPECT_EQ(a->n(), 10);

  std::istringstream header("yes,no\n 5 , 6\n\n7,8\n");
  absl::StatusOr<CountTable> b = ReadCountTableCsv(header);
  ASSERT_TRUE(b.ok());
  EXPECT_THAT(b->grid().data(), ElementsAre(5, 6, 7, 8));
}

TEST(CsvTest, RejectsMalformedTables) {
  std::istringstream ragged("1,2\n3\n");
  EXPECT_FALSE(ReadCountTableCsv(ragged).ok());
  std::istringstream words("a,b\nc,d\n");
  EXPECT_FALSE(ReadCountTableCsv(words).ok());
  std::istringstream empty("");
  EXPECT_FALSE(ReadCountTableCsv(empty).ok());
  std::istringstream negative("1,-2\n");
  EXPECT_FALSE(ReadCountTableCsv(negative).ok());
  EXPECT_FALSE(ReadCountTableCsvFile("/nonexistent/table.csv").ok());
}

TEST(CsvTest, RoundTrip) {
  const CountTable x = *CountTable::Create(2, 3, {0, 7, 3, 12, 5, 1});
  std::ostringstream out;
  WriteCountTableCsv(x, out);
  EXPECT_EQ(out.str(), "0,7,3\n12,5,1\n");
  std::istringstream in(out.str());
  EXPECT_EQ(*ReadCountTableCsv(in), x);
}

}  // namespace
}  // namespace dpchisq
