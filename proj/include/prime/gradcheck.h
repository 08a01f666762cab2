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

// Central-difference audit of the analytic step and inertia-map derivatives
// at random states with the contacts engaged.

#ifndef PRIME_GRADCHECK_H_
#define PRIME_GRADCHECK_H_

#include <cstdint>
#include <optional>

#include "prime/contact.h"
#include "prime/model.h"

namespace prime {

struct GradCheckOptions {
  int samples = 100;
  uint64_t seed = 1;
  double dt = 0.025;
  SmoothingConfig smoothing;
  double step = 1e-6;  // finite-difference step
  // Samples whose smallest cone slack is below this are resampled.
  double min_slack = 1e-9;
  // Nominal configuration; defaults to zero with the base lifted so the
  // lowest contact touches the ground.
  std::optional<State> reference;
};

// Largest relative error max|a - b| / max(1, max|b|) over all samples.
struct GradCheckReport {
  int samples = 0;
  int resampled = 0;
  double a = 0.0;        // d x+ / d x
  double b_u = 0.0;      // d x+ / d u
  double b_theta = 0.0;  // d x+ / d theta, every link and coordinate
  double inertia_2d = 0.0;
  double inertia_3d = 0.0;

  double worst_step() const;
  double worst_inertia() const;
};

// Throws InvalidArgument if samples < 1, and SolverError if more than
// 100 * samples draws are rejected.
GradCheckReport RunGradCheck(const PlanarModel& model,
                             const GradCheckOptions& options);

}  // namespace prime

#endif  // PRIME_GRADCHECK_H_
