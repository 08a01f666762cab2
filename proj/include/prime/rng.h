// Copyright 2026 The Prime Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Portable random streams. The generator is xoshiro256** (Blackman and
// Vigna), seeded by four outputs of splitmix64. Normal samples use the basic
// Box-Muller transform, one pair per two uniforms with the second value
// cached, so any implementation of the same three algorithms reproduces the
// stream exactly.

#ifndef PRIME_RNG_H_
#define PRIME_RNG_H_

#include <array>
#include <cstdint>

namespace prime {

inline constexpr const char* kRngAlgorithm =
    "xoshiro256**/splitmix64/box-muller";

class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Uniform on (0, 1].
  double UniformPositive();
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }

 private:
  std::array<uint64_t, 4> s_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace prime

#endif  // PRIME_RNG_H_
