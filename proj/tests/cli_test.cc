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
#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace dpchisq {
namespace {

using ::testing::HasSubstr;
using ::testing::StartsWith;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult RunCli(std::vector<std::string> args) {
  args.insert(args.begin(), "dpchisq");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = CliMain(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string WriteFile(const std::string& name, const std::string& contents) {
  const std::string path = ::testing::TempDir() + "/" + name;
  std::ofstream(path) << contents;
  return path;
}

TEST(CliTest, CriticalValueForHundredCells) {
  const CliResult r = RunCli({"critical-value", "--d", "100", "--uniform", "--n", "1500", "--eps",
                           "0.1", "--delta", "1e-6", "--alpha", "0.05"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(r.out), 48231, 482.31);
}

TEST(CliTest, CriticalValueDumpsDiagnostics) {
  const std::string dump = ::testing::TempDir() + "/diag.json";
  const CliResult r = RunCli({"critical-value", "--d", "3", "--p0", "0.2,0.3,0.5", "--n", "100",
                           "--dump-json", dump});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dump);
  const nlohmann::json json = nlohmann::json::parse(in);
  EXPECT_EQ(json["weights"].size(), 5u);
}

TEST(CliTest, CriticalValueErrors) {
  EXPECT_EQ(RunCli({"critical-value", "--d", "4", "--n", "100"}).code, 1);
  EXPECT_EQ(RunCli({"critical-value", "--d", "4", "--uniform", "--n", "100", "--mech", "laplace"})
                .code,
            1);
  EXPECT_EQ(RunCli({"critical-value", "--d", "4", "--uniform", "--n", "0"}).code, 1);
  EXPECT_EQ(RunCli({"critical-value", "--d", "3", "--p0", "0.5,0.5", "--n", "10"}).code, 1);
}

TEST(CliTest, GofIsDeterministic) {
  const std::string table = WriteFile("gof.csv", "30,20,25,25\n");
  const std::vector<std::string> args = {"gof",   "--table", table,  "--p0",   "uniform",
                                         "--alpha", "0.05",  "--mech", "gauss", "--eps",
                                         "0.1",   "--delta", "1e-6", "--seed", "7"};
  const CliResult first = RunCli(args);
  const CliResult second = RunCli(args);
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_EQ(first.out, second.out);
  const nlohmann::json json = nlohmann::json::parse(first.out);
  EXPECT_EQ(json["test"], "priv_gof");
  EXPECT_EQ(json["n"], 100);
  EXPECT_TRUE(json["critical_value"].is_number());
}

TEST(CliTest, GofMethods) {
  const std::string table = WriteFile("gof_methods.csv", "30,20,25,25\n");
  const CliResult classical = RunCli({"gof", "--table", table, "--method", "classical"});
  ASSERT_EQ(classical.code, 0) << classical.err;
  const nlohmann::json json = nlohmann::json::parse(classical.out);
  EXPECT_EQ(json["statistic"], 2.0);
  EXPECT_EQ(json["decision"], "fail_to_reject");

  const CliResult mc = RunCli({"gof", "--table", table, "--mech", "laplace", "--k", "50"});
  ASSERT_EQ(mc.code, 0) << mc.err;
  EXPECT_EQ(nlohmann::json::parse(mc.out)["test"], "mc_gof");

  EXPECT_EQ(RunCli({"gof", "--table", table, "--mech", "laplace", "--method", "private"}).code, 1);
  EXPECT_EQ(RunCli({"gof", "--table", table, "--method", "bogus"}).code, 1);
  EXPECT_EQ(RunCli({"gof", "--table", table, "--mech", "laplace", "--k", "5"}).code, 1);
}

TEST(CliTest, IndepMethods) {
  const std::string table = WriteFile("indep.csv", "a,b\n400,100\n100,400\n");
  const CliResult classical = RunCli({"indep", "--table", table, "--method", "classical"});
  ASSERT_EQ(classical.code, 0) << classical.err;
  EXPECT_EQ(nlohmann::json::parse(classical.out)["decision"], "reject");

  const CliResult priv = RunCli({"indep", "--table", table, "--seed", "3"});
  ASSERT_EQ(priv.code, 0) << priv.err;
  EXPECT_EQ(nlohmann::json::parse(priv.out)["test"], "priv_indep");

  const CliResult mc =
      RunCli({"indep", "--table", table, "--mech", "laplace", "--k", "40", "--gamma", "0.05"});
  ASSERT_EQ(mc.code, 0) << mc.err;
  EXPECT_EQ(nlohmann::json::parse(mc.out)["test"], "mc_indep");
}

TEST(CliTest, InputErrors) {
  EXPECT_EQ(RunCli({}).code, 1);
  EXPECT_EQ(RunCli({"gof"}).code, 1);
  EXPECT_EQ(RunCli({"gof", "--table", "/nonexistent.csv"}).code, 1);
  EXPECT_EQ(RunCli({"gof", "--table", WriteFile("bad.csv", "1,x\n2,y\n")}).code, 1);
  EXPECT_EQ(RunCli({"frobnicate"}).code, 1);
  EXPECT_EQ(RunCli({"--help"}).code, 0);
  const CliResult r = RunCli({"gof", "--table", "/nonexistent.csv"});
  EXPECT_THAT(r.err, HasSubstr("error:"));
}

TEST(CliTest, SimulationsWriteCsv) {
  const std::string config = WriteFile(
      "sim.json",
      R"({"schema_version": 1, "test": "mc_gof", "mechanism": "laplace", "d": 4,
          "n_grid": [500], "trials": 30, "k": 40, "seed": 1})");
  const CliResult sig = RunCli({"simulate-significance", "--config", config});
  ASSERT_EQ(sig.code, 0) << sig.err;
  EXPECT_THAT(sig.out, StartsWith("n,test,significance,se,mean_critical_value\n500,mc_gof,"));
  EXPECT_EQ(RunCli({"simulate-significance", "--config", config, "--workers", "2"}).out, sig.out);

  const CliResult power = RunCli({"simulate-power", "--config", config, "--n-grid", "100,200",
                               "--trials", "20", "--skip-failures"});
  ASSERT_EQ(power.code, 0) << power.err;
  EXPECT_THAT(power.out, StartsWith("n,test,power,se,mean_critical_value,failures\n100,"));

  const std::string output = ::testing::TempDir() + "/sim_out.csv";
  ASSERT_EQ(RunCli({"simulate-significance", "--config", config, "--output", output}).code, 0);
  std::ifstream in(output);
  std::stringstream contents;
  contents << in.rdbuf();
  EXPECT_EQ(contents.str(), sig.out);

  EXPECT_EQ(RunCli({"simulate-significance", "--config", config, "--test", "priv_gof"}).code, 1);
  EXPECT_EQ(RunCli({"simulate-significance", "--config", WriteFile("bad.json", "{")}).code, 1);
  EXPECT_EQ(RunCli({"simulate-significance", "--config", config, "--n-grid", "x"}).code, 1);
}

}  // namespace
}  // namespace dpchisq
