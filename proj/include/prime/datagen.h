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

// Synthetic ground truth, measurement corruption and evaluation metrics.

#ifndef PRIME_DATAGEN_H_
#define PRIME_DATAGEN_H_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "prime/contact.h"
#include "prime/estimator.h"
#include "prime/model.h"

namespace prime {

// Planar hopper: a 5 kg body on a floating base and an actuated prismatic
// leg with a point foot.
PlanarModel HopperModel();
std::string HopperModelJson();

// Body 0.55 m above ground with the leg at its rest length.
State HopperInitialState();

// Leg force u = k (L0 - L) - d L' + max(0, A sin(2 pi f t + phase)), clipped
// to [-u_max, u_max]. The spring holds the leg during flight and the
// clipped sinusoid adds thrust once per period.
struct HopperPolicy {
  double rest_length = 0.45;
  double stiffness = 400.0;
  double damping = 8.0;
  double amplitude = 130.0;
  double frequency = 1.6;
  double phase = 0.0;
  double max_force = 150.0;

  Eigen::VectorXd operator()(double t, const State& x) const;
};

using Policy = std::function<Eigen::VectorXd(int k, const State& x)>;

struct Trajectory {
  double dt = 0.0;
  std::vector<State> states;            // x_0 .. x_T
  std::vector<Eigen::VectorXd> inputs;  // u_0 .. u_{T-1}
  // Impulses of transition k -> k+1.
  std::vector<Eigen::VectorXd> lambda_n;
  std::vector<Eigen::VectorXd> lambda_t;
  std::vector<int> solver_iterations;

  int horizon() const { return static_cast<int>(inputs.size()); }
};

// Deterministic rollout. Throws SolverError naming the failing step.
Trajectory Simulate(const PlanarModel& model, const State& x0,
                    const Policy& policy, double dt, int steps,
                    const StepOptions& options);

// Open-loop variant with a precomputed schedule of `steps` inputs.
Trajectory Simulate(const PlanarModel& model, const State& x0,
                    const std::vector<Eigen::VectorXd>& schedule, double dt,
                    const StepOptions& options);

struct NoiseConfig {
  double base_position = 0.002;
  double base_angle = 0.01;
  double base_angle_bias = 0.0;
  double base_velocity = 0.05;
  double base_angular_velocity = 0.05;
  double joint_position = 0.002;
  double joint_velocity = 0.02;
  uint64_t seed = 1;

  // Throws InvalidArgument if a standard deviation is negative.
  void Validate() const;

  bool operator==(const NoiseConfig&) const = default;
};

// y_k = Measure(x_k) plus independent Gaussian noise per entry and a
// constant base-angle bias. Draw order: per node, q entries then v entries.
std::vector<MeasurementSample> Corrupt(const PlanarModel& model,
                                       const std::vector<State>& states,
                                       const NoiseConfig& noise);

struct Metrics {
  // Root-mean-square errors over nodes.
  double base_position_rmse = 0.0;  // over both coordinates
  double base_angle_rmse = 0.0;
  double joint_position_rmse = 0.0;
  double velocity_rmse = 0.0;
  // Base pose and joints together.
  double pose_rmse = 0.0;
  // Normal contact force lambda_n / dt over transitions and contacts.
  double force_rmse = 0.0;
  // Fraction of transitions whose active set {i : lambda_n,i >
  // kContactImpulseThreshold} equals the truth's.
  double contact_timing_accuracy = 0.0;
};

inline constexpr double kContactImpulseThreshold = 1e-3;

// Compares an estimate against the truth. `lambda_n` may be empty, in which
// case force metrics are reported against zero force. Throws
// InvalidArgument on length mismatch.
Metrics ComputeMetrics(const std::vector<State>& states,
                       const std::vector<Eigen::VectorXd>& lambda_n,
                       const Trajectory& truth);

// Number of flight-to-stance transitions in the truth impulses.
int CountTouchdowns(const std::vector<Eigen::VectorXd>& lambda_n);

// Transitions with at least one contact above kContactImpulseThreshold.
std::vector<int> StanceNodes(const std::vector<Eigen::VectorXd>& lambda_n);

// Mean over states of |v+_smoothed - v+_socp|_inf for one step from each
// (state, input) pair. Throws InvalidArgument on empty or mismatched input
// and SolverError if a step fails.
double MeanSocpGap(const PlanarModel& model, const std::vector<State>& states,
                   const std::vector<Eigen::VectorXd>& inputs, double dt,
                   const SmoothingConfig& smoothing);

}  // namespace prime

#endif  // PRIME_DATAGEN_H_
