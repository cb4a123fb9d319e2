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

#include "dpchisq/cli.h"

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "dpchisq/asymptotics.h"
#include "dpchisq/denoise.h"
#include "dpchisq/harness.h"
#include "dpchisq/hypothesis_tests.h"
#include "dpchisq/model.h"
#include "dpchisq/privacy.h"
#include "dpchisq/quadform.h"
#include "dpchisq/status_macros.h"
#include "json.hpp"

namespace dpchisq {
namespace {

int ExitCodeFor(const absl::Status& status) {
  if (status.ok()) return kExitOk;
  return IsNumericError(status) ? kExitNumeric : kExitInvalid;
}

template <typename T>
absl::StatusOr<std::vector<T>> ParseList(const std::string& text) {
  std::vector<T> values;
  for (absl::string_view piece : absl::StrSplit(text, ',', absl::SkipWhitespace())) {
    T value{};
    bool ok = false;
    if constexpr (std::is_floating_point_v<T>) {
      ok = absl::SimpleAtod(absl::StripAsciiWhitespace(piece), &value);
    } else {
      ok = absl::SimpleAtoi(absl::StripAsciiWhitespace(piece), &value);
    }
    if (!ok) return absl::InvalidArgumentError(absl::StrCat("cannot parse '", piece, "'"));
    values.push_back(value);
  }
  if (values.empty()) return absl::InvalidArgumentError("empty list");
  return values;
}

absl::StatusOr<ProbabilityVector> ParseP0(const std::string& spec, int d) {
  if (spec == "uniform") return ProbabilityVector::Uniform(d);
  DPCHISQ_ASSIGN_OR_RETURN(std::vector<double> entries, ParseList<double>(spec));
  if (static_cast<int>(entries.size()) != d) {
    return absl::InvalidArgumentError(
        absl::StrCat("p0 has ", entries.size(), " entries but the table has ", d, " cells"));
  }
  return ProbabilityVector::Create(std::move(entries));
}

struct PrivacyFlags {
  std::string mechanism = "gauss";
  double epsilon = 0.1;
  double delta = 1e-6;
  std::optional<double> noise_scale;

  void Register(CLI::App* app) {
    app->add_option("--mech", mechanism, "Noise mechanism: gauss or laplace");
    app->add_option("--eps", epsilon, "Privacy parameter epsilon");
    app->add_option("--delta", delta, "Privacy parameter delta (Gaussian only)");
    app->add_option("--noise-scale", noise_scale,
                    "Override the calibrated noise scale (0 disables noise)");
  }

  absl::StatusOr<PrivacyParams> Build() const {
    PrivacyParams params;
    DPCHISQ_ASSIGN_OR_RETURN(params.mechanism, ParseMechanism(mechanism));
    params.epsilon = epsilon;
    params.delta = delta;
    params.noise_scale_override = noise_scale;
    DPCHISQ_RETURN_IF_ERROR(params.Validate());
    return params;
  }
};

nlohmann::json OutcomeJson(const std::string& test, const TestOutcome& outcome, int64_t n,
                           const PrivacyParams& params, double alpha, uint64_t seed) {
  nlohmann::json json;
  json["test"] = test;
  json["decision"] = DecisionName(outcome.decision);
  json["reason"] = ReasonName(outcome.reason);
  json["statistic"] = outcome.statistic;
  json["critical_value"] = outcome.critical_value.has_value()
                               ? nlohmann::json(*outcome.critical_value)
                               : nlohmann::json(nullptr);
  json["n"] = n;
  json["alpha"] = alpha;
  json["mechanism"] = MechanismName(params.mechanism);
  json["epsilon"] = params.epsilon;
  if (params.mechanism == Mechanism::kGaussian) json["delta"] = params.delta;
  json["seed"] = seed;
  return json;
}

struct TestFlags {
  std::string table;
  std::string p0 = "uniform";
  double alpha = 0.05;
  PrivacyFlags privacy;
  uint64_t seed = 0;
  std::string method;
  int k = 100;
  std::optional<double> gamma;
};

std::string ResolveMethod(const TestFlags& flags, Mechanism mechanism) {
  if (!flags.method.empty()) return flags.method;
  return mechanism == Mechanism::kGaussian ? "private" : "mc";
}

absl::StatusOr<nlohmann::json> RunGof(const TestFlags& flags) {
  DPCHISQ_ASSIGN_OR_RETURN(const CountTable table, ReadCountTableCsvFile(flags.table));
  DPCHISQ_ASSIGN_OR_RETURN(const CountTable x, table.Reshape(1, table.size()));
  DPCHISQ_ASSIGN_OR_RETURN(const ProbabilityVector p0, ParseP0(flags.p0, x.size()));
  DPCHISQ_ASSIGN_OR_RETURN(const PrivacyParams params, flags.privacy.Build());
  RandomStream rng(flags.seed);
  const std::string method = ResolveMethod(flags, params.mechanism);
  TestKind kind;
  absl::StatusOr<TestOutcome> outcome;
  if (method == "classical") {
    kind = TestKind::kGofClassical;
    outcome = GofClassical(x, flags.alpha, p0);
  } else if (method == "mc") {
    kind = TestKind::kMcGof;
    outcome = McGof(x, params, flags.alpha, p0, flags.k, rng);
  } else if (method == "private") {
    kind = TestKind::kPrivGof;
    outcome = PrivGof(x, params, flags.alpha, p0, rng);
  } else {
    return absl::InvalidArgumentError(absl::StrCat("unknown method '", method, "'"));
  }
  DPCHISQ_RETURN_IF_ERROR(outcome.status());
  return OutcomeJson(TestKindName(kind), *outcome, x.n(), params, flags.alpha, flags.seed);
}

absl::StatusOr<nlohmann::json> RunIndep(const TestFlags& flags) {
  DPCHISQ_ASSIGN_OR_RETURN(const CountTable x, ReadCountTableCsvFile(flags.table));
  DPCHISQ_ASSIGN_OR_RETURN(const PrivacyParams params, flags.privacy.Build());
  RandomStream rng(flags.seed);
  const std::string method = ResolveMethod(flags, params.mechanism);
  TestKind kind;
  absl::StatusOr<TestOutcome> outcome;
  if (method == "classical") {
    kind = TestKind::kIndepClassical;
    outcome = IndepClassical(x, flags.alpha);
  } else if (method == "mc") {
    kind = TestKind::kMcIndep;
    ProjectionConfig projection = ProjectionConfig::ForMechanism(params.mechanism);
    if (flags.gamma.has_value()) projection.gamma = *flags.gamma;
    outcome = McIndep(x, params, flags.alpha, flags.k, projection, rng);
  } else if (method == "private") {
    kind = TestKind::kPrivIndep;
    outcome = PrivIndep(x, params, flags.alpha, rng);
  } else {
    return absl::InvalidArgumentError(absl::StrCat("unknown method '", method, "'"));
  }
  DPCHISQ_RETURN_IF_ERROR(outcome.status());
  return OutcomeJson(TestKindName(kind), *outcome, x.n(), params, flags.alpha, flags.seed);
}

struct CriticalValueFlags {
  int d = 0;
  bool uniform = false;
  std::string p0;
  int64_t n = 0;
  PrivacyFlags privacy;
  double alpha = 0.05;
  std::string dump_json;
};

absl::StatusOr<double> RunCriticalValue(const CriticalValueFlags& flags) {
  if (flags.uniform == !flags.p0.empty()) {
    return absl::InvalidArgumentError("give exactly one of --uniform and --p0");
  }
  if (flags.d < 2) return absl::InvalidArgumentError("--d must be at least 2");
  DPCHISQ_ASSIGN_OR_RETURN(const ProbabilityVector p0,
                           ParseP0(flags.uniform ? "uniform" : flags.p0, flags.d));
  DPCHISQ_ASSIGN_OR_RETURN(const PrivacyParams params, flags.privacy.Build());
  DPCHISQ_RETURN_IF_ERROR(ValidateAlpha(flags.alpha));
  DPCHISQ_ASSIGN_OR_RETURN(const QuadFormDistribution law,
                           GofNullDistribution(p0, flags.n, params));
  if (!flags.dump_json.empty()) {
    DPCHISQ_ASSIGN_OR_RETURN(const nlohmann::json diagnostics,
                             GofDiagnostics(p0, flags.n, params));
    std::ofstream dump(flags.dump_json);
    if (!dump) {
      return absl::InvalidArgumentError(absl::StrCat("cannot write ", flags.dump_json));
    }
    dump << diagnostics.dump(1) << "\n";
  }
  return CriticalValue(law, flags.alpha);
}

struct SimulationFlags {
  std::string config;
  std::optional<std::string> test;
  std::optional<std::string> mechanism;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<double> noise_scale;
  std::optional<double> alpha;
  std::optional<std::string> n_grid;
  std::optional<int> trials;
  std::optional<int> k;
  std::optional<double> gamma;
  std::optional<uint64_t> seed;
  std::optional<int> workers;
  bool skip_failures = false;
  std::string output;
};

absl::StatusOr<ExperimentConfig> BuildSimulationConfig(const SimulationFlags& flags) {
  DPCHISQ_ASSIGN_OR_RETURN(ExperimentConfig config, ReadExperimentConfigFile(flags.config));
  if (flags.test) {
    DPCHISQ_ASSIGN_OR_RETURN(config.test, ParseTestKind(*flags.test));
  }
  if (flags.mechanism) {
    DPCHISQ_ASSIGN_OR_RETURN(config.privacy.mechanism, ParseMechanism(*flags.mechanism));
  }
  if (flags.epsilon) config.privacy.epsilon = *flags.epsilon;
  if (flags.delta) config.privacy.delta = *flags.delta;
  if (flags.noise_scale) config.privacy.noise_scale_override = *flags.noise_scale;
  if (flags.alpha) config.alpha = *flags.alpha;
  if (flags.n_grid) {
    DPCHISQ_ASSIGN_OR_RETURN(config.n_grid, ParseList<int64_t>(*flags.n_grid));
  }
  if (flags.trials) config.trials = *flags.trials;
  if (flags.k) config.k = *flags.k;
  if (flags.gamma) config.gamma = *flags.gamma;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.workers) config.workers = *flags.workers;
  if (flags.skip_failures) config.skip_failures = true;
  return config;
}

void RegisterSimulation(CLI::App* app, SimulationFlags& flags) {
  app->add_option("--config", flags.config, "Experiment config (JSON)")->required();
  app->add_option("--test", flags.test, "Test to run");
  app->add_option("--mech", flags.mechanism, "Noise mechanism");
  app->add_option("--eps", flags.epsilon, "Privacy parameter epsilon");
  app->add_option("--delta", flags.delta, "Privacy parameter delta");
  app->add_option("--noise-scale", flags.noise_scale, "Override the noise scale");
  app->add_option("--alpha", flags.alpha, "Significance level");
  app->add_option("--n-grid", flags.n_grid, "Comma-separated sample sizes");
  app->add_option("--trials", flags.trials, "Trials per grid point");
  app->add_option("--k", flags.k, "Monte Carlo replicas");
  app->add_option("--gamma", flags.gamma, "Elastic-net mix for denoising");
  app->add_option("--seed", flags.seed, "Master seed");
  app->add_option("--workers", flags.workers, "Worker threads");
  app->add_flag("--skip-failures", flags.skip_failures,
                "Record numeric failures instead of aborting");
  app->add_option("--output", flags.output, "Write CSV here instead of stdout");
}

absl::Status RunSimulation(const SimulationFlags& flags, bool power, std::ostream& out) {
  DPCHISQ_ASSIGN_OR_RETURN(const ExperimentConfig config, BuildSimulationConfig(flags));
  DPCHISQ_ASSIGN_OR_RETURN(const ExperimentResult result,
                           power ? RunPower(config) : RunSignificance(config));
  if (flags.output.empty()) {
    WriteExperimentCsv(result, out);
    return absl::OkStatus();
  }
  std::ofstream file(flags.output);
  if (!file) return absl::InvalidArgumentError(absl::StrCat("cannot write ", flags.output));
  WriteExperimentCsv(result, file);
  return absl::OkStatus();
}

void RegisterTest(CLI::App* app, TestFlags& flags, bool gof) {
  app->add_option("--table", flags.table, "CSV count table")->required();
  if (gof) app->add_option("--p0", flags.p0, "Null probabilities: 'uniform' or a,b,c,...");
  app->add_option("--alpha", flags.alpha, "Significance level");
  flags.privacy.Register(app);
  app->add_option("--seed", flags.seed, "Random seed");
  app->add_option("--method", flags.method, "classical, mc or private");
  app->add_option("--k", flags.k, "Monte Carlo replicas");
  if (!gof) app->add_option("--gamma", flags.gamma, "Elastic-net mix for denoising");
}

}  // namespace

int CliMain(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Differentially private chi-squared hypothesis tests", "dpchisq");
  app.require_subcommand(1);

  TestFlags gof_flags;
  CLI::App* gof = app.add_subcommand("gof", "Goodness-of-fit test on a count table");
  RegisterTest(gof, gof_flags, /*gof=*/true);

  TestFlags indep_flags;
  CLI::App* indep = app.add_subcommand("indep", "Independence test on a contingency table");
  RegisterTest(indep, indep_flags, /*gof=*/false);

  CriticalValueFlags cv_flags;
  CLI::App* cv = app.add_subcommand("critical-value",
                                    "Private goodness-of-fit critical value (Gaussian noise)");
  cv->add_option("--d", cv_flags.d, "Number of cells")->required();
  cv->add_flag("--uniform", cv_flags.uniform, "Uniform null");
  cv->add_option("--p0", cv_flags.p0, "Null probabilities a,b,c,...");
  cv->add_option("--n", cv_flags.n, "Sample size")->required();
  cv_flags.privacy.Register(cv);
  cv->add_option("--alpha", cv_flags.alpha, "Significance level");
  cv->add_option("--dump-json", cv_flags.dump_json, "Write Sigma, A and weights as JSON");

  SimulationFlags sig_flags;
  CLI::App* sig = app.add_subcommand("simulate-significance", "Significance sweep (CSV)");
  RegisterSimulation(sig, sig_flags);

  SimulationFlags pow_flags;
  CLI::App* pow = app.add_subcommand("simulate-power", "Power sweep (CSV)");
  RegisterSimulation(pow, pow_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  absl::Status status;
  if (gof->parsed() || indep->parsed()) {
    absl::StatusOr<nlohmann::json> json =
        gof->parsed() ? RunGof(gof_flags) : RunIndep(indep_flags);
    status = json.status();
    if (json.ok()) out << json->dump(2) << "\n";
  } else if (cv->parsed()) {
    absl::StatusOr<double> tau = RunCriticalValue(cv_flags);
    status = tau.status();
    if (tau.ok()) out << absl::StrFormat("%.6f\n", *tau);
  } else if (sig->parsed()) {
    status = RunSimulation(sig_flags, /*power=*/false, out);
  } else if (pow->parsed()) {
    status = RunSimulation(pow_flags, /*power=*/true, out);
  }
  if (!status.ok()) err << "error: " << status.message() << "\n";
  return ExitCodeFor(status);
}

}  // namespace dpchisq
