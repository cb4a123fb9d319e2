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

#ifndef DPCHISQ_STATUS_MACROS_H_
#define DPCHISQ_STATUS_MACROS_H_

#include <string_view>
#include <utility>

#include "absl/status/status.h"

namespace dpchisq {

// Numeric failures (non-convergence, bracketing failure) are reported with
// kInternal so callers can tell them apart from input validation errors.
inline absl::Status NumericError(std::string_view message) {
  return absl::InternalError(absl::string_view(message.data(), message.size()));
}

inline bool IsNumericError(const absl::Status& status) {
  return status.code() == absl::StatusCode::kInternal;
}

}  // namespace dpchisq

#define DPCHISQ_RETURN_IF_ERROR(expr)        \
  do {                                       \
    absl::Status dpchisq_status_ = (expr);   \
    if (!dpchisq_status_.ok()) {             \
      return dpchisq_status_;                \
    }                                        \
  } while (0)

#define DPCHISQ_CONCAT_INNER_(a, b) a##b
#define DPCHISQ_CONCAT_(a, b) DPCHISQ_CONCAT_INNER_(a, b)

#define DPCHISQ_ASSIGN_OR_RETURN(lhs, rexpr) \
  DPCHISQ_ASSIGN_OR_RETURN_IMPL_(            \
      DPCHISQ_CONCAT_(dpchisq_statusor_, __LINE__), lhs, rexpr)

#define DPCHISQ_ASSIGN_OR_RETURN_IMPL_(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                                   \
  if (!statusor.ok()) {                                      \
    return statusor.status();                                \
  }                                                          \
  lhs = std::move(*statusor)

#endif  // DPCHISQ_STATUS_MACROS_H_
