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

// Full-information trajectory estimation with optional inertial-parameter
// identification.
//
// The decision variables are x_0, the velocity disturbances delta_k and the
// selected Log-Cholesky coordinates theta. States follow
//   v_{k+1} = F_v(x_k, u_k, theta) + delta_k,   q_{k+1} = q_k + dt v_{k+1},
// where F_v is the smoothed contact step, and the objective is
//   |theta - theta_prior|^2_Wp + |x_0 - x_prior|^2_W0
//     + sum_k |delta_k|^2_Wd + sum_k |y_k - x_k|^2_Wy.
// Identification appends theta to the state with theta_{k+1} = theta_k, so
// the DDP initial-node step updates it together with x_0.

#ifndef PRIME_ESTIMATOR_H_
#define PRIME_ESTIMATOR_H_

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "prime/contact.h"
#include "prime/ddp.h"
#include "prime/inertia.h"
#include "prime/model.h"

namespace prime {

struct MeasurementMask {
  bool base_position = true;
  bool base_angle = true;
  bool base_velocity = true;
  bool base_angular_velocity = true;
  bool joint_positions = true;
  bool joint_velocities = true;

  bool operator==(const MeasurementMask&) const = default;
};

struct MeasurementSample {
  Eigen::Vector2d base_position = Eigen::Vector2d::Zero();
  double base_angle = 0.0;
  Eigen::Vector2d base_velocity = Eigen::Vector2d::Zero();
  double base_angular_velocity = 0.0;
  Eigen::VectorXd joint_positions;
  Eigen::VectorXd joint_velocities;
  MeasurementMask mask;

  // Values in state order [q; v]. Masked entries keep their stored values.
  Eigen::VectorXd Stacked() const;
  // Inverse of Stacked with all channels present.
  static MeasurementSample FromStacked(const Eigen::VectorXd& y, int nv);

  bool operator==(const MeasurementSample&) const = default;
};

// Pure selection of the measured channels from the state.
MeasurementSample Measure(const PlanarModel& model, const State& x);

// Diagonal inverse-covariance weights. Measurement and initial-prior weights
// are per channel; process weights apply to the velocity disturbance.
struct WeightConfig {
  double base_position = 4e2;
  double base_angle = 3e1;
  double base_velocity = 1e1;
  double base_angular_velocity = 1.5e2;
  double joint_position = 2e2;
  double joint_velocity = 4e1;

  double process_base_linear = 1e4;
  double process_base_angular = 1e4;
  double process_joint = 1e3;

  double parameter = 4e-2;

  // Initial-state prior, same channel layout as the measurements.
  double prior_base_position = 4e2;
  double prior_base_angle = 3e1;
  double prior_base_velocity = 1e1;
  double prior_base_angular_velocity = 1.5e2;
  double prior_joint_position = 2e2;
  double prior_joint_velocity = 4e1;

  // Throws InvalidArgument if a weight is negative or a process weight is
  // not positive.
  void Validate() const;

  bool operator==(const WeightConfig&) const = default;
};

// Per-entry weights over [q; v] for a sample's mask (zero where masked).
Eigen::VectorXd MeasurementWeights(const WeightConfig& weights,
                                   const MeasurementMask& mask, int nv);
Eigen::VectorXd PriorWeights(const WeightConfig& weights, int nv);
Eigen::VectorXd ProcessWeights(const WeightConfig& weights, int nv);

struct EstimatorOptions {
  // Per annealing stage.
  int max_iterations = 200;
  double tolerance = 1e-9;
  double stationarity_tolerance = 1e-8;
  bool fddp = true;
  int threads = 1;
  // Geometric kappa annealing: when kappa_final exceeds the smoothing kappa,
  // the problem is re-solved at kappa, kappa * kappa_growth, ... up to
  // kappa_final, each stage warm-started from the previous one.
  double kappa_final = 0.0;
  double kappa_growth = 10.0;
};

struct EstimationProblem {
  // Nominal model; its link inertias are the parameter prior.
  PlanarModel model;
  double dt = 0.025;
  std::vector<MeasurementSample> measurements;  // y_0 .. y_T
  std::vector<Eigen::VectorXd> inputs;          // u_0 .. u_{T-1}
  WeightConfig weights;
  // Defaults to the first measurement-seeded state.
  std::optional<State> initial_prior;
  // Identified Log-Cholesky coordinates; empty for pure state estimation.
  std::vector<ThetaIndex> identify;
  SmoothingConfig smoothing;
  EstimatorOptions solver;

  int horizon() const { return static_cast<int>(inputs.size()); }

  // Throws InvalidArgument describing the first violated invariant.
  void Validate() const;
};

struct CostBreakdown {
  double process = 0.0;
  double measurement = 0.0;
  double prior = 0.0;
  double parameter = 0.0;

  double total() const { return process + measurement + prior + parameter; }
};

struct EstimationSolution {
  std::vector<State> states;                  // x_0 .. x_T
  std::vector<Eigen::VectorXd> disturbances;  // delta_0 .. delta_{T-1}
  // Full Log-Cholesky vector of every link and the matching model.
  std::vector<LogCholeskyParams2D> theta;
  PlanarModel model;
  // Impulses of the transition k -> k+1 (N s), one entry per contact.
  std::vector<Eigen::VectorXd> lambda_n;
  std::vector<Eigen::VectorXd> lambda_t;
  // Objective at the final kappa.
  CostBreakdown cost;
  double kappa = 0.0;
  double gap_norm = 0.0;
  // Concatenated over annealing stages; trace_kappa[i] is the kappa of
  // trace[i]. Costs are comparable only within one kappa.
  std::vector<DdpIteration> trace;
  std::vector<double> trace_kappa;
  bool converged = false;
  int iterations = 0;
  std::string message;

  // Fixed-contact baseline diagnostics: per-node contact flags, impulses
  // outside the friction cone (clamped in lambda_n / lambda_t) and nodes
  // that needed the pseudo-inverse.
  std::vector<std::vector<bool>> contact_flags;
  int cone_violations = 0;
  int pseudo_inverse_fallbacks = 0;
};

// States seeded from measurements: measured channels are copied; unmeasured
// positions are held from the previous node (zero at node 0) and unmeasured
// velocities are finite differences of the seeded positions.
std::vector<State> SeedStates(const EstimationProblem& problem);

// The objective at a state trajectory and full per-link theta, with
// delta_k recovered as v_{k+1} minus the smoothed step's v+ from x_k.
CostBreakdown Objective(const EstimationProblem& problem,
                        const std::vector<State>& states,
                        const std::vector<LogCholeskyParams2D>& theta);

// Single-shooting DDP from the rollout that tracks the seeded velocities.
EstimationSolution DdpSolve(const EstimationProblem& problem);

// Feasibility-driven DDP from the measurement-seeded states with delta = 0.
EstimationSolution FddpSolve(const EstimationProblem& problem);

// DdpSolve or FddpSolve per problem.solver.fddp. Identification happens
// whenever problem.identify is non-empty.
EstimationSolution PfieEstimate(const EstimationProblem& problem);

// Same objective and solver on rigid fixed-contact dynamics: contact i is
// active at node k iff its height at the measured configuration is below
// `height_threshold`, and active contacts satisfy J v+ = 0. Parameters are
// not identified.
EstimationSolution BaselineFixedContactEstimate(
    const EstimationProblem& problem, double height_threshold);

}  // namespace prime

#endif  // PRIME_ESTIMATOR_H_
