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

// Estimation machinery shared by the smoothed-contact estimator and the
// fixed-contact baseline.

#ifndef PRIME_SRC_ESTIMATOR_IMPL_H_
#define PRIME_SRC_ESTIMATOR_IMPL_H_

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "prime/contact.h"
#include "prime/estimator.h"
#include "prime/model.h"

namespace prime::internal {

// One transition without the disturbance: v+ = F_v(x_k, u_k; model).
struct TransitionResult {
  Eigen::VectorXd v_plus;
  Eigen::VectorXd lambda_n;
  Eigen::VectorXd lambda_t;
  // Filled only when derivatives are requested.
  Eigen::MatrixXd dv_dq;
  Eigen::MatrixXd dv_dv;
  Eigen::MatrixXd dv_dpi;  // nv x 4L, stacked pi2 per link
  int cone_violations = 0;
  bool pseudo_inverse = false;
};

using Transition = std::function<TransitionResult(
    int k, const PlanarModel& model, const State& x, bool derivatives)>;

Transition SmoothedTransition(const EstimationProblem& problem);

// Per-link Log-Cholesky vectors of the model's inertias.
std::vector<LogCholeskyParams2D> ModelThetas(const PlanarModel& model);

// Model with every link's inertia set from `theta`.
PlanarModel ModelWithThetas(const PlanarModel& model,
                            const std::vector<LogCholeskyParams2D>& theta);

CostBreakdown ObjectiveWith(const EstimationProblem& problem,
                            const Transition& transition,
                            const std::vector<State>& states,
                            const std::vector<LogCholeskyParams2D>& theta);

// Augmented-state trajectory used to warm-start a solve.
struct WarmStart {
  std::vector<Eigen::VectorXd> xs;
  std::vector<Eigen::VectorXd> ws;
};

// Runs SolveDdp on the estimation problem under `transition` and assembles
// the solution. Starts from `warm` if given, else from the measurement
// seeds. The problem must already be validated.
EstimationSolution Solve(const EstimationProblem& problem,
                         const Transition& transition, bool feasibility_driven,
                         const std::vector<ThetaIndex>& identify,
                         const WarmStart* warm = nullptr,
                         WarmStart* final_iterate = nullptr);

}  // namespace prime::internal

#endif  // PRIME_SRC_ESTIMATOR_IMPL_H_
