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

#ifndef DPCHISQ_TESTS_SPAN_UTIL_H_
#define DPCHISQ_TESTS_SPAN_UTIL_H_

#include <span>
#include <vector>

namespace dpchisq {

// Copies a span so that gmock container matchers accept it.
template <typename T>
std::vector<T> ToVector(std::span<const T> values) {
  return std::vector<T>(values.begin(), values.end());
}

}  // namespace dpchisq

#endif  // DPCHISQ_TESTS_SPAN_UTIL_H_
