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
#include <numeric>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "span_util.h"
#include "oracles.h"

namespace dpchisq {
namespace {

using ::testing::DoubleNear;
using ::testing::Pointwise;

NoisyTable MakeNoisy(int rows, int cols, std::vector<double> values, int64_t n) {
  return NoisyTable{RealTable(rows, cols, std::move(values)), n, PrivacyParams::Laplace(0.1)};
}

std::vector<double> RandomNoisyCounts(RandomStream& rng, int d, double n, double scale) {
  std::vector<double> w(d);
  for (double& v : w) v = n / d + scale * (2.0 * rng.Uniform() - 1.0) * 3.0;
  return w;
}

TEST(ProjectionConfigTest, Validation) {
  EXPECT_TRUE(ProjectionConfig{}.Validate().ok());
  EXPECT_FALSE((ProjectionConfig{0.0}).Validate().ok());
  EXPECT_FALSE((ProjectionConfig{1.5}).Validate().ok());
  EXPECT_FALSE((ProjectionConfig{0.5, 0.0}).Validate().ok());
  EXPECT_FALSE((ProjectionConfig{0.5, 1e-9, 0}).Validate().ok());
  EXPECT_EQ(ProjectionConfig::ForMechanism(Mechanism::kGaussian).gamma, 1.0);
  EXPECT_EQ(ProjectionConfig::ForMechanism(Mechanism::kLaplace).gamma, 0.01);
}

TEST(SimplexProjectionTest, Examples) {
  EXPECT_THAT(ProjectOntoSimplex(std::vector<double>{30, 30, -10, -10}, 40),
              Pointwise(DoubleNear(1e-12), {20, 20, 0, 0}));
  const std::vector<double> feasible = {1, 2, 3, 4};
  EXPECT_EQ(ProjectOntoSimplex(feasible, 10), feasible);
}

TEST(SimplexProjectionTest, MatchesMichelotOracle) {
  RandomStream rng(1);
  for (int rep = 0; rep < 1000; ++rep) {
    const int d = rep % 2 == 0 ? 4 : 12;
    const double n = 10.0 + 1000.0 * rng.Uniform();
    const std::vector<double> w = RandomNoisyCounts(rng, d, n, n / 3.0);
    const std::vector<double> x = *ProjectCounts(w, n, ProjectionConfig{1.0});
    EXPECT_THAT(x, Pointwise(DoubleNear(1e-8 * n), oracle::MichelotProjection(w, n)));
  }
}

TEST(ProjectCountsTest, FeasibilityAndIdempotence) {
  RandomStream rng(2);
  for (double gamma : {1.0, 0.3, 0.01}) {
    for (int rep = 0; rep < 200; ++rep) {
      const int d = 2 + rep % 11;
      const double n = 50.0 + 500.0 * rng.Uniform();
      const std::vector<double> w = RandomNoisyCounts(rng, d, n, 40.0);
      absl::StatusOr<std::vector<double>> x = ProjectCounts(w, n, ProjectionConfig{gamma});
      ASSERT_TRUE(x.ok()) << x.status();
      EXPECT_NEAR(std::accumulate(x->begin(), x->end(), 0.0), n, 1e-8 * n);
      EXPECT_GE(*std::min_element(x->begin(), x->end()), 0.0);
      const std::vector<double> again = *ProjectCounts(*x, n, ProjectionConfig{gamma});
      EXPECT_THAT(again, Pointwise(DoubleNear(1e-8 * n), *x));
    }
  }
}

TEST(ProjectCountsTest, ElasticNetMatchesLagrangianOracle) {
  RandomStream rng(3);
  for (int rep = 0; rep < 400; ++rep) {
    const int d = rep % 2 == 0 ? 4 : 6;
    const double gamma = rep % 3 == 0 ? 0.01 : (rep % 3 == 1 ? 0.2 : 0.7);
    const double n = 20.0 + 300.0 * rng.Uniform();
    const std::vector<double> w = RandomNoisyCounts(rng, d, n, 30.0);
    const std::vector<double> x = *ProjectCounts(w, n, ProjectionConfig{gamma});
    const std::vector<double> reference = oracle::ElasticNetLagrangianOracle(w, n, gamma);
    EXPECT_NEAR(ElasticNetObjective(w, x, gamma), oracle::ElasticNetValue(w, reference, gamma),
                1e-6)
        << "rep " << rep;
    EXPECT_THAT(x, Pointwise(DoubleNear(1e-6 * n), reference));
  }
}

TEST(ProjectCountsTest, ElasticNetMatchesSplitVariableOracle) {
  RandomStream rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    const int d = rep % 2 == 0 ? 4 : 6;
    const double n = 10.0 + 200.0 * rng.Uniform();
    const std::vector<double> w = RandomNoisyCounts(rng, d, n, 40.0);
    const std::vector<double> x = *ProjectCounts(w, n, ProjectionConfig{0.01});
    const std::vector<double> exact = oracle::ElasticNetSplitOracle(w, n, 0.01);
    ASSERT_EQ(exact.size(), w.size());
    EXPECT_NEAR(ElasticNetObjective(w, x, 0.01), oracle::ElasticNetValue(w, exact, 0.01), 1e-6);
  }
}

TEST(ProjectCountsTest, ObjectiveIsMonotoneAcrossIterations) {
  RandomStream rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const std::vector<double> w = RandomNoisyCounts(rng, 9, 200.0, 60.0);
    std::vector<double> trace;
    ASSERT_TRUE(ProjectCounts(w, 200.0, ProjectionConfig{0.01}, &trace).ok());
    ASSERT_FALSE(trace.empty());
    for (size_t i = 1; i < trace.size(); ++i) {
      EXPECT_LE(trace[i], trace[i - 1] + 1e-9 * std::max(1.0, trace[i - 1]));
    }
  }
}

TEST(ProjectCountsTest, Errors) {
  const std::vector<double> w = {1.0, NAN};
  EXPECT_EQ(ProjectCounts(w, 1.0, ProjectionConfig{}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(ProjectCounts(std::vector<double>{}, 1.0, ProjectionConfig{}).ok());
  EXPECT_FALSE(ProjectCounts(std::vector<double>{1.0}, 1.0, ProjectionConfig{0.0}).ok());
}

TEST(ProjectCountsTest, ElasticNetMatchesEuclideanProjection) {
  const std::vector<double> w = {100, -40, 70, 3, -20, 55, 12, 7, -3, 31, 64, 2};
  for (double total : {20.0, 150.0, 400.0, 900.0}) {
    const auto x = ProjectCounts(w, total, ProjectionConfig{0.01, 1e-9, 1});
    ASSERT_TRUE(x.ok()) << x.status();
    EXPECT_THAT(*x, Pointwise(DoubleNear(1e-9 * total), ProjectOntoSimplex(w, total)));
  }
}

TEST(ProjectTableTest, FeasibleInputIsUnchanged) {
  const NoisyTable w = MakeNoisy(2, 2, {10, 20, 30, 40}, 100);
  for (double gamma : {1.0, 0.01}) {
    const RealTable x = *ProjectTable(w, ProjectionConfig{gamma});
    EXPECT_THAT(x.data(), Pointwise(DoubleNear(1e-9), {10, 20, 30, 40}));
    EXPECT_EQ(x.rows(), 2);
  }
}

TEST(TwoStepMleTest, FeasibleTable) {
  const NoisyTable w = MakeNoisy(2, 2, {10, 20, 30, 40}, 100);
  absl::StatusOr<std::optional<MarginalEstimate>> mle = TwoStepMle(w, ProjectionConfig{1.0});
  ASSERT_TRUE(mle.ok());
  ASSERT_TRUE(mle->has_value());
  EXPECT_THAT(ToVector((*mle)->row.entries()), Pointwise(DoubleNear(1e-12), {0.3, 0.7}));
  EXPECT_THAT(ToVector((*mle)->col.entries()), Pointwise(DoubleNear(1e-12), {0.4, 0.6}));
}

TEST(TwoStepMleTest, SparseTableIsNull) {
  const NoisyTable w = MakeNoisy(2, 2, {4.9, 20, 30, 45.1}, 100);
  absl::StatusOr<std::optional<MarginalEstimate>> mle = TwoStepMle(w, ProjectionConfig{1.0});
  ASSERT_TRUE(mle.ok());
  EXPECT_FALSE(mle->has_value());
  const NoisyTable boundary = MakeNoisy(2, 2, {5, 20, 30, 45}, 100);
  EXPECT_TRUE(TwoStepMle(boundary, ProjectionConfig{1.0})->has_value());
}

TEST(TwoStepMleTest, ZeroNoiseRecoversClassicalMle) {
  const CountTable x = *CountTable::Create(2, 3, {12, 30, 8, 25, 9, 16});
  RandomStream rng(5);
  const NoisyTable w = *AddNoise(x, PrivacyParams::Laplace(0.1).WithNoiseScale(0.0), rng);
  const MarginalEstimate classical = *IndepMle(x);
  for (double gamma : {1.0, 0.01}) {
    const std::optional<MarginalEstimate> mle = *TwoStepMle(w, ProjectionConfig{gamma});
    ASSERT_TRUE(mle.has_value());
    EXPECT_THAT(ToVector(mle->row.entries()),
                Pointwise(DoubleNear(1e-12), ToVector(classical.row.entries())));
    EXPECT_THAT(ToVector(mle->col.entries()),
                Pointwise(DoubleNear(1e-12), ToVector(classical.col.entries())));
  }
}

}  // namespace
}  // namespace dpchisq
