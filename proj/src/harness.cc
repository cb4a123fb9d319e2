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

#include "dpchisq/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dpchisq/denoise.h"
#include "dpchisq/stats.h"
#include "dpchisq/status_macros.h"

namespace dpchisq {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool IsMcTest(TestKind kind) { return kind == TestKind::kMcGof || kind == TestKind::kMcIndep; }

bool IsClassicalTest(TestKind kind) {
  return kind == TestKind::kGofClassical || kind == TestKind::kIndepClassical;
}

uint64_t GridSeed(uint64_t seed, int grid_index) {
  return MixSeed(seed ^ MixSeed(static_cast<uint64_t>(grid_index) + 1));
}

// Everything a trial needs at one grid point, built once.
class TrialContext {
 public:
  static absl::StatusOr<TrialContext> Create(const ExperimentConfig& config, bool power,
                                             int64_t n) {
    TrialContext ctx(config, n);
    if (IsGofTest(config.test)) {
      DPCHISQ_ASSIGN_OR_RETURN(ProbabilityVector p0, config.NullGofProbability());
      if (power) {
        DPCHISQ_ASSIGN_OR_RETURN(ctx.law_, GofAlternateProbability(p0, config.alternate, n));
      } else {
        ctx.law_ = p0;
      }
      ctx.rows_ = 1;
      ctx.cols_ = p0.size();
      if (config.test == TestKind::kGofClassical) {
        DPCHISQ_ASSIGN_OR_RETURN(GofClassicalTest test,
                                 GofClassicalTest::Create(p0, config.alpha));
        ctx.gof_classical_.emplace(std::move(test));
      } else if (config.test == TestKind::kPrivGof) {
        DPCHISQ_ASSIGN_OR_RETURN(PrivGofTest test,
                                 PrivGofTest::Create(p0, n, config.privacy, config.alpha));
        ctx.priv_gof_.emplace(std::move(test));
      }
      ctx.p0_.emplace(std::move(p0));
    } else {
      if (power) {
        DPCHISQ_ASSIGN_OR_RETURN(
            ctx.law_,
            IndepAlternateProbability(config.indep_delta, config.literal_indep_pattern));
        ctx.rows_ = 2;
        ctx.cols_ = 2;
      } else {
        DPCHISQ_ASSIGN_OR_RETURN(const ProbabilityVector pi1,
                                 ProbabilityVector::Create(config.pi1));
        DPCHISQ_ASSIGN_OR_RETURN(const ProbabilityVector pi2,
                                 ProbabilityVector::Create(config.pi2));
        DPCHISQ_ASSIGN_OR_RETURN(ctx.law_, ProductProbability(pi1, pi2));
        ctx.rows_ = pi1.size();
        ctx.cols_ = pi2.size();
      }
      if (config.test == TestKind::kIndepClassical) {
        DPCHISQ_ASSIGN_OR_RETURN(IndepClassicalTest test,
                                 IndepClassicalTest::Create(ctx.rows_, ctx.cols_, config.alpha));
        ctx.indep_classical_.emplace(std::move(test));
      }
    }
    return ctx;
  }

  absl::StatusOr<TestOutcome> Run(RandomStream& rng) const {
    DPCHISQ_ASSIGN_OR_RETURN(const CountTable flat, SampleMultinomial(n_, law_, rng));
    DPCHISQ_ASSIGN_OR_RETURN(const CountTable x, flat.Reshape(rows_, cols_));
    const ExperimentConfig& c = config_;
    switch (c.test) {
      case TestKind::kGofClassical:
        if (c.noisy_input) {
          DPCHISQ_ASSIGN_OR_RETURN(const NoisyTable w, AddNoise(x, c.privacy, rng));
          return gof_classical_->Run(w);
        }
        return gof_classical_->Run(x);
      case TestKind::kMcGof:
        return McGof(x, c.privacy, c.alpha, *p0_, c.k, rng);
      case TestKind::kPrivGof:
        return priv_gof_->Run(x, rng);
      case TestKind::kIndepClassical:
        if (c.noisy_input) {
          DPCHISQ_ASSIGN_OR_RETURN(const NoisyTable w, AddNoise(x, c.privacy, rng));
          return indep_classical_->Run(w);
        }
        return indep_classical_->Run(x);
      case TestKind::kMcIndep:
        return McIndep(x, c.privacy, c.alpha, c.k, c.Projection(), rng);
      case TestKind::kPrivIndep:
        return PrivIndep(x, c.privacy, c.alpha, rng);
    }
    return absl::InternalError("unknown test kind");
  }

 private:
  TrialContext(const ExperimentConfig& config, int64_t n) : config_(config), n_(n) {}

  const ExperimentConfig& config_;
  int64_t n_;
  ProbabilityVector law_ = ProbabilityVector::Uniform(1);
  int rows_ = 1;
  int cols_ = 1;
  std::optional<ProbabilityVector> p0_;
  std::optional<GofClassicalTest> gof_classical_;
  std::optional<PrivGofTest> priv_gof_;
  std::optional<IndepClassicalTest> indep_classical_;
};

absl::StatusOr<ExperimentRow> RunGridPoint(const ExperimentConfig& config, bool power,
                                           int grid_index, int workers) {
  const int64_t n = config.n_grid[grid_index];
  DPCHISQ_ASSIGN_OR_RETURN(const TrialContext ctx, TrialContext::Create(config, power, n));
  const uint64_t grid_seed = GridSeed(config.seed, grid_index);

  std::vector<std::optional<absl::StatusOr<TestOutcome>>> outcomes(config.trials);
  std::atomic<int> next{0};
  std::atomic<bool> abort{false};
  auto work = [&] {
    while (!abort.load(std::memory_order_relaxed)) {
      const int t = next.fetch_add(1);
      if (t >= config.trials) break;
      RandomStream rng = RandomStream::Derive(grid_seed, static_cast<uint64_t>(t));
      absl::StatusOr<TestOutcome> outcome = ctx.Run(rng);
      if (!outcome.ok() && !(config.skip_failures && IsNumericError(outcome.status()))) {
        abort.store(true);
      }
      outcomes[t].emplace(std::move(outcome));
    }
  };
  const int pool = std::max(1, std::min(workers, config.trials));
  if (pool == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (int i = 0; i < pool; ++i) threads.emplace_back(work);
    for (std::thread& thread : threads) thread.join();
  }

  ExperimentRow row;
  row.n = n;
  row.test = config.test;
  double critical_sum = 0.0;
  int critical_count = 0;
  int completed = 0;
  for (int t = 0; t < config.trials; ++t) {
    if (!outcomes[t].has_value()) continue;
    const absl::StatusOr<TestOutcome>& outcome = *outcomes[t];
    if (!outcome.ok()) {
      if (config.skip_failures && IsNumericError(outcome.status())) {
        ++row.failures;
        continue;
      }
      return absl::Status(outcome.status().code(),
                          absl::StrCat("trial ", t, " at n = ", n, ": ",
                                       outcome.status().message()));
    }
    ++completed;
    if (outcome->rejected()) ++row.rejections;
    if (outcome->critical_value.has_value()) {
      critical_sum += *outcome->critical_value;
      ++critical_count;
    }
  }
  if (completed == 0) {
    return NumericError(absl::StrCat("every trial failed at n = ", n));
  }
  const double reject_rate = static_cast<double>(row.rejections) / completed;
  row.trials = completed;
  row.rate = power ? reject_rate : 1.0 - reject_rate;
  row.se = BinomialStandardError(row.rate, completed);
  row.mean_critical_value = critical_count > 0 ? critical_sum / critical_count : kNaN;
  return row;
}

absl::StatusOr<ExperimentResult> RunSweep(const ExperimentConfig& config, bool power) {
  DPCHISQ_RETURN_IF_ERROR(config.Validate());
  ExperimentResult result;
  result.measure =
      power ? ExperimentResult::Measure::kPower : ExperimentResult::Measure::kSignificance;
  result.report_failures = config.skip_failures;
  const int workers = ResolveWorkerCount(config.workers);
  for (int g = 0; g < static_cast<int>(config.n_grid.size()); ++g) {
    DPCHISQ_ASSIGN_OR_RETURN(ExperimentRow row, RunGridPoint(config, power, g, workers));
    result.rows.push_back(row);
  }
  return result;
}

std::string FormFromEnum(GofAlternate::Form form) {
  return form == GofAlternate::Form::kScaled ? "scaled" : "fixed";
}

}  // namespace

std::string TestKindName(TestKind kind) {
  switch (kind) {
    case TestKind::kGofClassical:
      return "gof_classical";
    case TestKind::kMcGof:
      return "mc_gof";
    case TestKind::kPrivGof:
      return "priv_gof";
    case TestKind::kIndepClassical:
      return "indep_classical";
    case TestKind::kMcIndep:
      return "mc_indep";
    case TestKind::kPrivIndep:
      return "priv_indep";
  }
  return "unknown";
}

absl::StatusOr<TestKind> ParseTestKind(const std::string& name) {
  for (TestKind kind : {TestKind::kGofClassical, TestKind::kMcGof, TestKind::kPrivGof,
                        TestKind::kIndepClassical, TestKind::kMcIndep, TestKind::kPrivIndep}) {
    if (TestKindName(kind) == name) return kind;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown test '", name, "'"));
}

bool IsGofTest(TestKind kind) {
  return kind == TestKind::kGofClassical || kind == TestKind::kMcGof ||
         kind == TestKind::kPrivGof;
}

absl::Status ExperimentConfig::Validate() const {
  DPCHISQ_RETURN_IF_ERROR(privacy.Validate());
  DPCHISQ_RETURN_IF_ERROR(ValidateAlpha(alpha));
  if (trials < 1) return absl::InvalidArgumentError("trials must be at least 1");
  if (n_grid.empty()) return absl::InvalidArgumentError("the n grid is empty");
  for (int64_t n : n_grid) {
    if (n < 1) return absl::InvalidArgumentError(absl::StrCat("grid size n = ", n, " < 1"));
  }
  if (workers < 0) return absl::InvalidArgumentError("workers must be nonnegative");
  if (IsMcTest(test)) DPCHISQ_RETURN_IF_ERROR(McThresholdRank(k, alpha).status());
  if (gamma.has_value()) DPCHISQ_RETURN_IF_ERROR(Projection().Validate());
  if (noisy_input && !IsClassicalTest(test)) {
    return absl::InvalidArgumentError("noisy_input applies to the classical tests only");
  }
  if ((test == TestKind::kPrivGof || test == TestKind::kPrivIndep) &&
      privacy.mechanism != Mechanism::kGaussian) {
    return absl::UnimplementedError(
        absl::StrCat(TestKindName(test), " supports only the Gaussian mechanism"));
  }
  if (IsGofTest(test)) {
    DPCHISQ_ASSIGN_OR_RETURN(const ProbabilityVector p0, NullGofProbability());
    if (p0.size() < 2) return absl::InvalidArgumentError("goodness of fit needs d >= 2");
  } else {
    DPCHISQ_RETURN_IF_ERROR(ProbabilityVector::Create(pi1).status());
    DPCHISQ_RETURN_IF_ERROR(ProbabilityVector::Create(pi2).status());
    if (pi1.size() < 2 || pi2.size() < 2) {
      return absl::InvalidArgumentError("independence marginals need at least 2 entries");
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<ProbabilityVector> ExperimentConfig::NullGofProbability() const {
  if (!p0.empty()) return ProbabilityVector::Create(p0);
  if (d < 1) return absl::InvalidArgumentError("dimension d must be positive");
  return ProbabilityVector::Uniform(d);
}

ProjectionConfig ExperimentConfig::Projection() const {
  ProjectionConfig projection = ProjectionConfig::ForMechanism(privacy.mechanism);
  if (gamma.has_value()) projection.gamma = *gamma;
  return projection;
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(const nlohmann::json& json) {
  static const std::set<std::string> kKnownKeys = {
      "schema_version", "test",        "mechanism",   "epsilon",       "delta",
      "noise_scale",    "alpha",       "d",           "p0",            "alternate",
      "pi1",            "pi2",         "indep_delta", "literal_indep_pattern",
      "n_grid",         "trials",      "k",           "gamma",         "noisy_input",
      "seed",           "workers",     "skip_failures"};
  if (!json.is_object()) return absl::InvalidArgumentError("config must be a JSON object");
  for (const auto& [key, value] : json.items()) {
    if (!kKnownKeys.contains(key)) {
      return absl::InvalidArgumentError(absl::StrCat("unknown config key '", key, "'"));
    }
  }
  if (!json.contains("schema_version") || json["schema_version"] != kConfigSchemaVersion) {
    return absl::InvalidArgumentError(
        absl::StrCat("config needs \"schema_version\": ", kConfigSchemaVersion));
  }
  ExperimentConfig config;
  try {
    if (json.contains("test")) {
      DPCHISQ_ASSIGN_OR_RETURN(config.test, ParseTestKind(json["test"].get<std::string>()));
    }
    if (json.contains("mechanism")) {
      DPCHISQ_ASSIGN_OR_RETURN(config.privacy.mechanism,
                               ParseMechanism(json["mechanism"].get<std::string>()));
    }
    config.privacy.epsilon = json.value("epsilon", config.privacy.epsilon);
    config.privacy.delta = json.value("delta", config.privacy.delta);
    if (json.contains("noise_scale")) {
      config.privacy.noise_scale_override = json["noise_scale"].get<double>();
    }
    config.alpha = json.value("alpha", config.alpha);
    config.d = json.value("d", config.d);
    config.p0 = json.value("p0", config.p0);
    if (json.contains("alternate")) {
      const nlohmann::json& alt = json["alternate"];
      const std::string form = alt.value("form", std::string("scaled"));
      if (form == "scaled") {
        config.alternate.form = GofAlternate::Form::kScaled;
      } else if (form == "fixed") {
        config.alternate.form = GofAlternate::Form::kFixed;
      } else {
        return absl::InvalidArgumentError(absl::StrCat("unknown alternate form '", form, "'"));
      }
      config.alternate.delta = alt.value("delta", 0.0);
      config.alternate.sign_pattern = alt.value("sign_pattern", std::vector<int>{});
    }
    config.pi1 = json.value("pi1", config.pi1);
    config.pi2 = json.value("pi2", config.pi2);
    config.indep_delta = json.value("indep_delta", config.indep_delta);
    config.literal_indep_pattern =
        json.value("literal_indep_pattern", config.literal_indep_pattern);
    config.n_grid = json.value("n_grid", config.n_grid);
    config.trials = json.value("trials", config.trials);
    config.k = json.value("k", config.k);
    if (json.contains("gamma")) config.gamma = json["gamma"].get<double>();
    config.noisy_input = json.value("noisy_input", config.noisy_input);
    config.seed = json.value("seed", config.seed);
    config.workers = json.value("workers", config.workers);
    config.skip_failures = json.value("skip_failures", config.skip_failures);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed config: ", e.what()));
  }
  return config;
}

absl::StatusOr<ExperimentConfig> ReadExperimentConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::InvalidArgumentError(absl::StrCat("cannot open config ", path));
  nlohmann::json json = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (json.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat("config ", path, " is not valid JSON"));
  }
  return ParseExperimentConfig(json);
}

nlohmann::json ExperimentConfigToJson(const ExperimentConfig& config) {
  nlohmann::json json;
  json["schema_version"] = kConfigSchemaVersion;
  json["test"] = TestKindName(config.test);
  json["mechanism"] = MechanismName(config.privacy.mechanism);
  json["epsilon"] = config.privacy.epsilon;
  json["delta"] = config.privacy.delta;
  if (config.privacy.noise_scale_override.has_value()) {
    json["noise_scale"] = *config.privacy.noise_scale_override;
  }
  json["alpha"] = config.alpha;
  json["d"] = config.d;
  json["p0"] = config.p0;
  json["alternate"] = {{"form", FormFromEnum(config.alternate.form)},
                       {"delta", config.alternate.delta},
                       {"sign_pattern", config.alternate.sign_pattern}};
  json["pi1"] = config.pi1;
  json["pi2"] = config.pi2;
  json["indep_delta"] = config.indep_delta;
  json["literal_indep_pattern"] = config.literal_indep_pattern;
  json["n_grid"] = config.n_grid;
  json["trials"] = config.trials;
  json["k"] = config.k;
  if (config.gamma.has_value()) json["gamma"] = *config.gamma;
  json["noisy_input"] = config.noisy_input;
  json["seed"] = config.seed;
  json["workers"] = config.workers;
  json["skip_failures"] = config.skip_failures;
  return json;
}

double BinomialStandardError(double rate, int trials) {
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
}

absl::StatusOr<TestOutcome> RunTrial(const ExperimentConfig& config, bool power,
                                     int grid_index, int trial) {
  DPCHISQ_RETURN_IF_ERROR(config.Validate());
  if (grid_index < 0 || grid_index >= static_cast<int>(config.n_grid.size())) {
    return absl::InvalidArgumentError("grid index out of range");
  }
  DPCHISQ_ASSIGN_OR_RETURN(const TrialContext ctx,
                           TrialContext::Create(config, power, config.n_grid[grid_index]));
  RandomStream rng =
      RandomStream::Derive(GridSeed(config.seed, grid_index), static_cast<uint64_t>(trial));
  return ctx.Run(rng);
}

absl::StatusOr<ExperimentResult> RunSignificance(const ExperimentConfig& config) {
  return RunSweep(config, /*power=*/false);
}

absl::StatusOr<ExperimentResult> RunPower(const ExperimentConfig& config) {
  return RunSweep(config, /*power=*/true);
}

void WriteExperimentCsv(const ExperimentResult& result, std::ostream& out) {
  const bool power = result.measure == ExperimentResult::Measure::kPower;
  out << "n,test," << (power ? "power" : "significance") << ",se,mean_critical_value";
  if (result.report_failures) out << ",failures";
  out << "\n";
  for (const ExperimentRow& row : result.rows) {
    out << absl::StrFormat("%d,%s,%.6f,%.6f,%.10g", row.n, TestKindName(row.test), row.rate,
                           row.se, row.mean_critical_value);
    if (result.report_failures) out << "," << row.failures;
    out << "\n";
  }
}

int ResolveWorkerCount(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kWorkersEnv); env != nullptr) {
    int parsed = 0;
    if (absl::SimpleAtoi(env, &parsed) && parsed > 0) return parsed;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace dpchisq
