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

#ifndef DPCHISQ_CLI_H_
#define DPCHISQ_CLI_H_

#include <ostream>

namespace dpchisq {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNumeric = 2;

// Entry point of the dpchisq command line tool. Subcommands:
//   gof, indep               run one test on a CSV table, JSON on `out`
//   critical-value           print the private goodness-of-fit threshold
//   simulate-significance    CSV sweep under the null
//   simulate-power           CSV sweep under the alternative
int CliMain(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dpchisq

#endif  // DPCHISQ_CLI_H_
