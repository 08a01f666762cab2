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

#include "prime/estimator.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "estimator_impl.h"
#include "prime/dynamics.h"
#include "prime/errors.h"

namespace prime {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::VectorXd MeasurementSample::Stacked() const {
  const int nj = static_cast<int>(joint_positions.size());
  const int nv = 3 + nj;
  VectorXd y(2 * nv);
  y.head<2>() = base_position;
  y[2] = base_angle;
  y.segment(3, nj) = joint_positions;
  y.segment<2>(nv) = base_velocity;
  y[nv + 2] = base_angular_velocity;
  y.tail(nj) = joint_velocities;
  return y;
}

MeasurementSample MeasurementSample::FromStacked(const Eigen::VectorXd& y,
                                                 int nv) {
  if (nv < 3 || y.size() != 2 * nv) {
    throw InvalidArgument("MeasurementSample::FromStacked: bad dimension");
  }
  const int nj = nv - 3;
  MeasurementSample s;
  s.base_position = y.head<2>();
  s.base_angle = y[2];
  s.joint_positions = y.segment(3, nj);
  s.base_velocity = y.segment<2>(nv);
  s.base_angular_velocity = y[nv + 2];
  s.joint_velocities = y.tail(nj);
  return s;
}

MeasurementSample Measure(const PlanarModel& model, const State& x) {
  if (x.q.size() != model.nq() || x.v.size() != model.nv()) {
    throw InvalidArgument("Measure: state dimension does not match model");
  }
  return MeasurementSample::FromStacked(x.Stacked(), model.nv());
}

void WeightConfig::Validate() const {
  const double all[] = {base_position,
                        base_angle,
                        base_velocity,
                        base_angular_velocity,
                        joint_position,
                        joint_velocity,
                        parameter,
                        prior_base_position,
                        prior_base_angle,
                        prior_base_velocity,
                        prior_base_angular_velocity,
                        prior_joint_position,
                        prior_joint_velocity};
  for (double w : all) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("WeightConfig: weights must be finite and >= 0");
    }
  }
  for (double w : {process_base_linear, process_base_angular, process_joint}) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("WeightConfig: process weights must be > 0");
    }
  }
}

namespace {

VectorXd ChannelWeights(int nv, double pos, double angle, double vel,
                        double omega, double joint_pos, double joint_vel) {
  VectorXd w(2 * nv);
  w.head<2>().setConstant(pos);
  w[2] = angle;
  w.segment(3, nv - 3).setConstant(joint_pos);
  w.segment<2>(nv).setConstant(vel);
  w[nv + 2] = omega;
  w.tail(nv - 3).setConstant(joint_vel);
  return w;
}

}  // namespace

Eigen::VectorXd MeasurementWeights(const WeightConfig& weights,
                                   const MeasurementMask& mask, int nv) {
  auto on = [](bool present, double w) { return present ? w : 0.0; };
  return ChannelWeights(
      nv, on(mask.base_position, weights.base_position),
      on(mask.base_angle, weights.base_angle),
      on(mask.base_velocity, weights.base_velocity),
      on(mask.base_angular_velocity, weights.base_angular_velocity),
      on(mask.joint_positions, weights.joint_position),
      on(mask.joint_velocities, weights.joint_velocity));
}

Eigen::VectorXd PriorWeights(const WeightConfig& weights, int nv) {
  return ChannelWeights(
      nv, weights.prior_base_position, weights.prior_base_angle,
      weights.prior_base_velocity, weights.prior_base_angular_velocity,
      weights.prior_joint_position, weights.prior_joint_velocity);
}

Eigen::VectorXd ProcessWeights(const WeightConfig& weights, int nv) {
  VectorXd w(nv);
  w.head<2>().setConstant(weights.process_base_linear);
  w[2] = weights.process_base_angular;
  w.tail(nv - 3).setConstant(weights.process_joint);
  return w;
}

void EstimationProblem::Validate() const {
  model.Validate();
  const int T = horizon();
  if (T < 1) throw InvalidArgument("EstimationProblem: horizon must be >= 1");
  if (static_cast<int>(measurements.size()) != T + 1) {
    throw InvalidArgument("EstimationProblem: expected " +
                          std::to_string(T + 1) + " measurements, got " +
                          std::to_string(measurements.size()));
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidArgument("EstimationProblem: dt must be positive");
  }
  const int nj = model.num_joints();
  for (size_t k = 0; k < measurements.size(); ++k) {
    const MeasurementSample& y = measurements[k];
    if (y.joint_positions.size() != nj || y.joint_velocities.size() != nj) {
      throw InvalidArgument("EstimationProblem: measurement " +
                            std::to_string(k) + " has wrong joint count");
    }
    if (!y.Stacked().allFinite()) {
      throw InvalidArgument("EstimationProblem: measurement " +
                            std::to_string(k) + " is not finite");
    }
  }
  for (size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k].size() != model.nu() || !inputs[k].allFinite()) {
      throw InvalidArgument("EstimationProblem: input " + std::to_string(k) +
                            " has wrong size or is not finite");
    }
  }
  if (initial_prior && (initial_prior->q.size() != model.nq() ||
                        initial_prior->v.size() != model.nv())) {
    throw InvalidArgument("EstimationProblem: initial prior dimension");
  }
  for (const ThetaIndex& idx : identify) {
    if (idx.link < 0 || idx.link >= model.num_links() || idx.param < 0 ||
        idx.param >= 6) {
      throw InvalidArgument(
          "EstimationProblem: identification index out of "
          "range");
    }
  }
  for (size_t i = 0; i < identify.size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (identify[i] == identify[j]) {
        throw InvalidArgument(
            "EstimationProblem: duplicate identification "
            "index");
      }
    }
  }
  weights.Validate();
  if (!(smoothing.kappa > 0.0)) {
    throw InvalidArgument("EstimationProblem: kappa must be positive");
  }
  if (solver.max_iterations < 0 || solver.threads < 1) {
    throw InvalidArgument("EstimationProblem: invalid solver options");
  }
}

std::vector<State> SeedStates(const EstimationProblem& problem) {
  const int nv = problem.model.nv();
  const int T = static_cast<int>(problem.measurements.size()) - 1;
  std::vector<State> states(T + 1);
  // Positions first.
  for (int k = 0; k <= T; ++k) {
    const MeasurementSample& y = problem.measurements[k];
    const VectorXd values = y.Stacked();
    const VectorXd present = MeasurementWeights(WeightConfig{}, y.mask, nv);
    State& x = states[k];
    x.q = k > 0 ? states[k - 1].q : VectorXd::Zero(nv);
    for (int i = 0; i < nv; ++i) {
      if (present[i] > 0.0) x.q[i] = values[i];
    }
  }
  // Then velocities, differencing positions where unmeasured.
  for (int k = 0; k <= T; ++k) {
    const MeasurementSample& y = problem.measurements[k];
    const VectorXd values = y.Stacked();
    const VectorXd present = MeasurementWeights(WeightConfig{}, y.mask, nv);
    VectorXd diff = VectorXd::Zero(nv);
    if (T > 0) {
      diff = k > 0 ? VectorXd((states[k].q - states[k - 1].q) / problem.dt)
                   : VectorXd((states[1].q - states[0].q) / problem.dt);
    }
    states[k].v.resize(nv);
    for (int i = 0; i < nv; ++i) {
      states[k].v[i] = present[nv + i] > 0.0 ? values[nv + i] : diff[i];
    }
  }
  return states;
}

CostBreakdown Objective(const EstimationProblem& problem,
                        const std::vector<State>& states,
                        const std::vector<LogCholeskyParams2D>& theta) {
  const internal::Transition transition = internal::SmoothedTransition(problem);
  return internal::ObjectiveWith(problem, transition, states, theta);
}

namespace {

// Solves at the problem's kappa, then along the annealing schedule.
EstimationSolution SolveAnnealed(const EstimationProblem& problem,
                                 bool feasibility_driven) {
  problem.Validate();
  const double growth = problem.solver.kappa_growth;
  if (problem.solver.kappa_final > problem.smoothing.kappa && !(growth > 1.0)) {
    throw InvalidArgument("EstimatorOptions: kappa_growth must exceed 1");
  }
  EstimationProblem stage = problem;
  internal::WarmStart iterate;
  EstimationSolution out;
  std::vector<DdpIteration> trace;
  std::vector<double> trace_kappa;
  int iterations = 0;
  for (bool first = true;; first = false) {
    const internal::Transition transition = internal::SmoothedTransition(stage);
    out = internal::Solve(stage, transition, feasibility_driven, stage.identify,
                          first ? nullptr : &iterate, &iterate);
    iterations += out.iterations;
    trace.insert(trace.end(), out.trace.begin(), out.trace.end());
    trace_kappa.insert(trace_kappa.end(), out.trace_kappa.begin(),
                       out.trace_kappa.end());
    const double kappa = stage.smoothing.kappa;
    if (!(problem.solver.kappa_final > kappa)) break;
    stage.smoothing.kappa =
        std::min(kappa * growth, problem.solver.kappa_final);
  }
  out.iterations = iterations;
  out.trace = std::move(trace);
  out.trace_kappa = std::move(trace_kappa);
  return out;
}

}  // namespace

EstimationSolution DdpSolve(const EstimationProblem& problem) {
  return SolveAnnealed(problem, /*feasibility_driven=*/false);
}

EstimationSolution FddpSolve(const EstimationProblem& problem) {
  return SolveAnnealed(problem, /*feasibility_driven=*/true);
}

EstimationSolution PfieEstimate(const EstimationProblem& problem) {
  return problem.solver.fddp ? FddpSolve(problem) : DdpSolve(problem);
}

}  // namespace prime
