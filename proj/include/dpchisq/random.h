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

#ifndef DPCHISQ_RANDOM_H_
#define DPCHISQ_RANDOM_H_

#include <cstdint>
#include <random>

namespace dpchisq {

// Seeded random stream. All randomness in the library flows through an
// explicit RandomStream so that results are reproducible from a seed.
//
// Uniform() consumes exactly one engine output and StandardNormal() exactly
// two, which keeps noise draws aligned with the seed independently of the
// standard library's distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : engine_(seed) {}

  // Independent stream for the `index`-th unit of work under `master_seed`.
  static RandomStream Derive(uint64_t master_seed, uint64_t index);

  // Uniform on the open interval (0, 1).
  double Uniform();

  // Box-Muller transform of two uniforms.
  double StandardNormal();

  uint64_t NextU64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used to derive well-separated seeds.
uint64_t MixSeed(uint64_t x);

}  // namespace dpchisq

#endif  // DPCHISQ_RANDOM_H_
