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

#include "prime/datagen.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "prime/errors.h"
#include "prime/rng.h"

namespace prime {

using Eigen::VectorXd;

std::string HopperModelJson() {
  return R"({
  "links": [
    {"name": "body", "parent": -1,
     "inertia": {"m": 5.0, "hx": 0.0, "hy": 0.0, "Iz": 0.1}},
    {"name": "leg", "parent": 0,
     "joint": {"type": "prismatic", "axis": [0, -1]},
     "inertia": {"m": 0.5, "hx": 0.0, "hy": 0.0, "Iz": 0.01}}
  ],
  "contacts": [{"link": 1, "point": [0, 0], "mu": 0.7}],
  "gravity": [0, -9.81],
  "actuated": [true]
}
)";
}

PlanarModel HopperModel() { return LoadModel(HopperModelJson()); }

State HopperInitialState() {
  State x = State::Zero(HopperModel());
  x.q << 0.0, 0.55, 0.0, 0.45;
  return x;
}

Eigen::VectorXd HopperPolicy::operator()(double t, const State& x) const {
  const double length = x.q[3];
  const double rate = x.v[3];
  const double thrust = std::max(
      0.0,
      amplitude * std::sin(2.0 * std::numbers::pi * frequency * t + phase));
  const double u = stiffness * (rest_length - length) - damping * rate + thrust;
  return VectorXd::Constant(1, std::clamp(u, -max_force, max_force));
}

Trajectory Simulate(const PlanarModel& model, const State& x0,
                    const Policy& policy, double dt, int steps,
                    const StepOptions& options) {
  if (steps < 0) throw InvalidArgument("Simulate: steps must be >= 0");
  if (!(dt > 0.0)) throw InvalidArgument("Simulate: dt must be positive");
  if (x0.q.size() != model.nq() || x0.v.size() != model.nv()) {
    throw InvalidArgument("Simulate: initial state dimension");
  }
  Trajectory traj;
  traj.dt = dt;
  traj.states.push_back(x0);
  for (int k = 0; k < steps; ++k) {
    const State& x = traj.states.back();
    VectorXd u = policy(k, x);
    if (u.size() != model.nu() || !u.allFinite()) {
      throw InvalidArgument("Simulate: bad input at step " + std::to_string(k));
    }
    ContactStepResult result;
    State next;
    try {
      next = Step(model, x, u, dt, options, &result);
    } catch (const SolverError& e) {
      throw SolverError(
          "Simulate: step " + std::to_string(k) + " failed: " + e.what(),
          e.diagnostics());
    }
    if (options.stepper == Stepper::kSmoothed && !result.converged) {
      throw SolverError("Simulate: step " + std::to_string(k) +
                        " did not converge");
    }
    traj.inputs.push_back(std::move(u));
    traj.lambda_n.push_back(result.lambda_n);
    traj.lambda_t.push_back(result.lambda_t);
    traj.solver_iterations.push_back(result.newton_iterations);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

Trajectory Simulate(const PlanarModel& model, const State& x0,
                    const std::vector<Eigen::VectorXd>& schedule, double dt,
                    const StepOptions& options) {
  const Policy policy = [&schedule](int k, const State&) {
    return schedule[k];
  };
  return Simulate(model, x0, policy, dt, static_cast<int>(schedule.size()),
                  options);
}

void NoiseConfig::Validate() const {
  for (double s : {base_position, base_angle, base_velocity,
                   base_angular_velocity, joint_position, joint_velocity}) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw InvalidArgument("NoiseConfig: standard deviations must be >= 0");
    }
  }
  if (!std::isfinite(base_angle_bias)) {
    throw InvalidArgument("NoiseConfig: bias must be finite");
  }
}

std::vector<MeasurementSample> Corrupt(const PlanarModel& model,
                                       const std::vector<State>& states,
                                       const NoiseConfig& noise) {
  noise.Validate();
  const int nv = model.nv();
  VectorXd sigma(2 * nv);
  sigma.head<2>().setConstant(noise.base_position);
  sigma[2] = noise.base_angle;
  sigma.segment(3, nv - 3).setConstant(noise.joint_position);
  sigma.segment<2>(nv).setConstant(noise.base_velocity);
  sigma[nv + 2] = noise.base_angular_velocity;
  sigma.tail(nv - 3).setConstant(noise.joint_velocity);

  Rng rng(noise.seed);
  std::vector<MeasurementSample> out;
  for (const State& x : states) {
    VectorXd y = Measure(model, x).Stacked();
    for (int i = 0; i < y.size(); ++i) y[i] += sigma[i] * rng.Normal();
    y[2] += noise.base_angle_bias;
    out.push_back(MeasurementSample::FromStacked(y, nv));
  }
  return out;
}

namespace {

double Rms(double sum_sq, double count) {
  return count > 0 ? std::sqrt(sum_sq / count) : 0.0;
}

}  // namespace

Metrics ComputeMetrics(const std::vector<State>& states,
                       const std::vector<Eigen::VectorXd>& lambda_n,
                       const Trajectory& truth) {
  const int T = truth.horizon();
  if (static_cast<int>(states.size()) != T + 1 ||
      static_cast<int>(truth.states.size()) != T + 1) {
    throw InvalidArgument("ComputeMetrics: state count mismatch");
  }
  if (!lambda_n.empty() && static_cast<int>(lambda_n.size()) != T) {
    throw InvalidArgument("ComputeMetrics: impulse count mismatch");
  }
  const int nv = static_cast<int>(truth.states[0].v.size());
  double base_pos = 0.0, angle = 0.0, joints = 0.0, vel = 0.0;
  for (int k = 0; k <= T; ++k) {
    if (states[k].q.size() != nv || states[k].v.size() != nv) {
      throw InvalidArgument("ComputeMetrics: state dimension mismatch");
    }
    const VectorXd dq = states[k].q - truth.states[k].q;
    base_pos += dq.head<2>().squaredNorm();
    angle += dq[2] * dq[2];
    joints += dq.tail(nv - 3).squaredNorm();
    vel += (states[k].v - truth.states[k].v).squaredNorm();
  }
  const double nodes = T + 1;
  Metrics m;
  m.base_position_rmse = Rms(base_pos, 2 * nodes);
  m.base_angle_rmse = Rms(angle, nodes);
  m.joint_position_rmse = Rms(joints, (nv - 3) * nodes);
  m.velocity_rmse = Rms(vel, nv * nodes);
  m.pose_rmse = Rms(base_pos + angle + joints, nv * nodes);

  double force = 0.0;
  int pairs = 0;
  int matches = 0;
  for (int k = 0; k < T; ++k) {
    const VectorXd& truth_n = truth.lambda_n[k];
    const VectorXd est_n = lambda_n.empty()
                               ? VectorXd(VectorXd::Zero(truth_n.size()))
                               : lambda_n[k];
    if (est_n.size() != truth_n.size()) {
      throw InvalidArgument("ComputeMetrics: contact count mismatch");
    }
    force += ((est_n - truth_n) / truth.dt).squaredNorm();
    pairs += static_cast<int>(truth_n.size());
    bool agree = true;
    for (int i = 0; i < truth_n.size(); ++i) {
      agree &= (est_n[i] > kContactImpulseThreshold) ==
               (truth_n[i] > kContactImpulseThreshold);
    }
    matches += agree ? 1 : 0;
  }
  m.force_rmse = Rms(force, pairs);
  m.contact_timing_accuracy = T > 0 ? static_cast<double>(matches) / T : 1.0;
  return m;
}

int CountTouchdowns(const std::vector<Eigen::VectorXd>& lambda_n) {
  int count = 0;
  bool was_active = false;
  for (const VectorXd& l : lambda_n) {
    const bool active = (l.array() > kContactImpulseThreshold).any();
    if (active && !was_active) ++count;
    was_active = active;
  }
  return count;
}

std::vector<int> StanceNodes(const std::vector<Eigen::VectorXd>& lambda_n) {
  std::vector<int> nodes;
  for (size_t k = 0; k < lambda_n.size(); ++k) {
    if ((lambda_n[k].array() > kContactImpulseThreshold).any()) {
      nodes.push_back(static_cast<int>(k));
    }
  }
  return nodes;
}

double MeanSocpGap(const PlanarModel& model, const std::vector<State>& states,
                   const std::vector<Eigen::VectorXd>& inputs, double dt,
                   const SmoothingConfig& smoothing) {
  if (states.empty() || states.size() != inputs.size()) {
    throw InvalidArgument(
        "MeanSocpGap: need matching, non-empty states and inputs");
  }
  double sum = 0.0;
  for (size_t i = 0; i < states.size(); ++i) {
    const State& x = states[i];
    const ContactStepResult smooth =
        SolveSmoothed(model, x.q, x.v, inputs[i], dt, smoothing);
    const ContactStepResult socp = SolveSocp(model, x.q, x.v, inputs[i], dt);
    sum += (smooth.v_plus - socp.v_plus).cwiseAbs().maxCoeff();
  }
  return sum / static_cast<double>(states.size());
}

}  // namespace prime
