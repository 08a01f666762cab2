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

// Velocity-level contact time-steppers for point-on-ground contact.
//
// For contact i with signed distance phi_i, normal/tangent Jacobian rows
// J_n, J_t and step dt, the post-step quantities are
//   w_i = phi_i / dt + J_n v+      (normal gap rate)
//   t_i = J_t v+                   (slip velocity)
//   s_i = w_i^2 / mu^2 - t_i^2     (cone slack)
// Three steppers compute v+:
//   * SolveLcp: exact complementarity with Coulomb friction, by mode
//     enumeration.
//   * SolveSocp: the convex relaxation min 1/2 |v+ - v_free|_M^2 subject to
//     w_i >= mu |t_i|.
//   * SolveSmoothed: the same objective with the cone replaced by the barrier
//     -(1/kappa) sum log s_i, solved by Newton's method.

#ifndef PRIME_CONTACT_H_
#define PRIME_CONTACT_H_

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "prime/dynamics.h"
#include "prime/model.h"

namespace prime {

struct SmoothingConfig {
  double kappa = 500.0;
  // Newton stops when |grad| <= tolerance * (1 + |v_free|).
  double tolerance = 1e-10;
  int max_iterations = 100;
  double feasibility_margin = 1e-8;
};

struct ContactStepResult {
  Eigen::VectorXd v_plus;
  Eigen::VectorXd q_plus;
  Eigen::VectorXd v_free;
  // Impulses per contact (N s).
  Eigen::VectorXd lambda_n;
  Eigen::VectorXd lambda_t;
  Eigen::VectorXd gap_rate;  // w
  Eigen::VectorXd slip;      // t
  Eigen::VectorXd slack;     // s
  int newton_iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

enum class Stepper { kLcp, kSocp, kSmoothed };

// "lcp", "socp" or "smoothed". Throws InvalidArgument otherwise.
Stepper ParseStepper(const std::string& name);
std::string StepperName(Stepper stepper);

// Limit of the mode enumeration used by SolveLcp and SolveSocp.
inline constexpr int kMaxEnumeratedContacts = 6;

ContactStepResult SolveLcp(const PlanarModel& model, const Eigen::VectorXd& q,
                           const Eigen::VectorXd& v, const Eigen::VectorXd& u,
                           double dt);

ContactStepResult SolveSocp(const PlanarModel& model, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& v, const Eigen::VectorXd& u,
                            double dt);

// `warm_start`, if non-null, is the previous step's v+ and seeds the
// feasibility initializer instead of v_free.
ContactStepResult SolveSmoothed(const PlanarModel& model,
                                const Eigen::VectorXd& q,
                                const Eigen::VectorXd& v,
                                const Eigen::VectorXd& u, double dt,
                                const SmoothingConfig& config,
                                const Eigen::VectorXd* warm_start = nullptr);

// Barrier impulses (lambda_n, lambda_t) at gap rate w and slip t. Throws
// InvalidArgument if the cone slack is not strictly positive.
std::pair<double, double> RecoverImpulses(double w, double t, double kappa,
                                          double mu);

struct StepOptions {
  Stepper stepper = Stepper::kSmoothed;
  SmoothingConfig smoothing;
};

// One time step; q+ = q + dt v+.
State Step(const PlanarModel& model, const State& x, const Eigen::VectorXd& u,
           double dt, const StepOptions& options,
           ContactStepResult* result = nullptr,
           const Eigen::VectorXd* warm_start = nullptr);

struct StepJacobians {
  ContactStepResult result;
  Eigen::MatrixXd A;     // d x+ / d x          (2nv x 2nv)
  Eigen::MatrixXd B_u;   // d x+ / d u          (2nv x nu)
  Eigen::MatrixXd B_pi;  // d x+ / d pi2 stack  (2nv x 4L)
  Eigen::VectorXd dx_dkappa;
};

// Derivatives of the smoothed step by implicit differentiation of its
// stationarity condition. Throws SolverError if the solve fails.
StepJacobians StepDerivatives(const PlanarModel& model, const State& x,
                              const Eigen::VectorXd& u, double dt,
                              const SmoothingConfig& config,
                              const Eigen::VectorXd* warm_start = nullptr);

// One identified Log-Cholesky coordinate: link and index in [0, 6).
struct ThetaIndex {
  int link = 0;
  int param = 0;

  bool operator==(const ThetaIndex&) const = default;
};

// Chains d x+/d pi2 to the selected Log-Cholesky coordinates, each link's
// map evaluated at `thetas[link]`.
Eigen::MatrixXd ThetaJacobian(const Eigen::MatrixXd& B_pi,
                              const std::vector<LogCholeskyParams2D>& thetas,
                              const std::vector<ThetaIndex>& selection);

}  // namespace prime

#endif  // PRIME_CONTACT_H_
