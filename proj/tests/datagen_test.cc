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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "prime/errors.h"
#include "prime/rng.h"

namespace prime {
namespace {

using Eigen::VectorXd;

constexpr double kDt = 0.025;

Trajectory HopperRun(int steps, Stepper stepper, double kappa = 500.0) {
  const HopperPolicy policy;
  StepOptions options;
  options.stepper = stepper;
  options.smoothing.kappa = kappa;
  return Simulate(
      HopperModel(), HopperInitialState(),
      [&policy](int k, const State& x) { return policy(k * kDt, x); }, kDt,
      steps, options);
}

TEST(RngTest, MatchesReferenceStream) {
  // Reference values from an independent implementation of splitmix64
  // seeding and xoshiro256**.
  Rng rng(42);
  EXPECT_EQ(rng.NextU64(), 0x15780b2e0c2ec716ULL);
  EXPECT_EQ(rng.NextU64(), 0x6104d9866d113a7eULL);
  EXPECT_EQ(rng.NextU64(), 0xae17533239e499a1ULL);
}

TEST(RngTest, DistributionsHaveExpectedMoments) {
  Rng rng(7);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0, umin = 1.0, umax = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    const double z = rng.Normal();
    sum += z;
    sum_sq += z * z;
  }
  EXPECT_GE(umin, 0.0);
  EXPECT_LT(umax, 1.0);
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum_sq / n, 1.0, 0.01);
}

TEST(SimulateTest, BallisticFlightMatchesClosedForm) {
  const PlanarModel model = HopperModel();
  State x0 = HopperInitialState();
  x0.q[1] = 5.0;
  x0.v[0] = 0.3;
  x0.v[1] = 1.0;
  const int steps = 30;
  const std::vector<VectorXd> zero(steps, VectorXd::Zero(1));
  for (Stepper stepper : {Stepper::kLcp, Stepper::kSocp}) {
    StepOptions options;
    options.stepper = stepper;
    const Trajectory traj = Simulate(model, x0, zero, kDt, options);
    const double g = 9.81;
    for (int k = 0; k <= steps; ++k) {
      // Semi-implicit Euler: v_k = v0 - g k dt, z_k = z0 + dt sum_{j<=k} v_j.
      const double z = 5.0 + k * kDt * 1.0 - g * kDt * kDt * k * (k + 1) / 2.0;
      EXPECT_NEAR(traj.states[k].q[1], z, 1e-9) << "step " << k;
      EXPECT_NEAR(traj.states[k].q[0], 0.3 * k * kDt, 1e-9);
      EXPECT_NEAR(traj.states[k].q[3], 0.45, 1e-9);
    }
    for (const VectorXd& l : traj.lambda_n) EXPECT_EQ(l[0], 0.0);
  }
}

TEST(SimulateTest, HopperCyclesThroughStanceAndFlight) {
  const Trajectory traj = HopperRun(100, Stepper::kLcp);
  ASSERT_EQ(traj.horizon(), 100);
  EXPECT_GE(CountTouchdowns(traj.lambda_n), 3);
  int flight = 0;
  for (const VectorXd& l : traj.lambda_n) flight += l[0] == 0.0 ? 1 : 0;
  EXPECT_GT(flight, 20);
  EXPECT_LT(flight, 90);
}

TEST(SimulateTest, LcpTruthSatisfiesContactConditions) {
  const PlanarModel model = HopperModel();
  const Trajectory traj = HopperRun(100, Stepper::kLcp);
  for (int k = 0; k < traj.horizon(); ++k) {
    const State& x = traj.states[k];
    const ContactStepResult r = SolveLcp(model, x.q, x.v, traj.inputs[k], kDt);
    EXPECT_EQ(r.lambda_n, traj.lambda_n[k]);
    for (int i = 0; i < r.lambda_n.size(); ++i) {
      EXPECT_GE(r.lambda_n[i], 0.0);
      EXPECT_GE(r.gap_rate[i], -1e-10);
      EXPECT_LE(std::abs(r.gap_rate[i] * r.lambda_n[i]), 1e-10);
      EXPECT_LE(std::abs(r.lambda_t[i]), 0.7 * r.lambda_n[i] + 1e-15);
    }
  }
}

TEST(SimulateTest, SmoothedStepperTracksLcpOverOneSecond) {
  const Trajectory lcp = HopperRun(40, Stepper::kLcp);
  auto gaps = [&lcp](double kappa) {
    StepOptions options;
    options.smoothing.kappa = kappa;
    const Trajectory smooth =
        Simulate(HopperModel(), HopperInitialState(), lcp.inputs, kDt, options);
    double q = 0.0, v = 0.0;
    for (int k = 0; k <= 40; ++k) {
      const State& a = smooth.states[k];
      const State& b = lcp.states[k];
      q = std::max(q, (a.q - b.q).cwiseAbs().maxCoeff());
      v = std::max(v, (a.v - b.v).cwiseAbs().maxCoeff());
    }
    return std::pair{q, v};
  };
  const auto [q5k, v5k] = gaps(5000.0);
  EXPECT_LE(q5k, 1e-2);
  // Touchdown velocities carry the barrier's O(1/kappa) relaxation.
  const auto [q50k, v50k] = gaps(50000.0);
  EXPECT_LT(q50k, q5k);
  EXPECT_LT(v50k, 0.25 * v5k);
  EXPECT_LE(v50k, 1e-2);
}

TEST(SimulateTest, IsDeterministic) {
  const Trajectory a = HopperRun(60, Stepper::kSmoothed);
  const Trajectory b = HopperRun(60, Stepper::kSmoothed);
  for (int k = 0; k <= 60; ++k) {
    EXPECT_EQ(a.states[k].Stacked(), b.states[k].Stacked());
  }
}

TEST(SimulateTest, RejectsBadArgumentsAndNamesFailingStep) {
  const PlanarModel model = HopperModel();
  const State x0 = HopperInitialState();
  const Policy zero = [](int, const State&) { return VectorXd::Zero(1); };
  StepOptions options;
  EXPECT_THROW(Simulate(model, x0, zero, kDt, -1, options), InvalidArgument);
  EXPECT_THROW(Simulate(model, x0, zero, 0.0, 5, options), InvalidArgument);
  const Policy wrong = [](int, const State&) { return VectorXd::Zero(2); };
  EXPECT_THROW(Simulate(model, x0, wrong, kDt, 5, options), InvalidArgument);

  // Starting in stance with one Newton iteration allowed fails at step 0.
  State stance = x0;
  stance.q[1] = 0.45;
  stance.v[1] = -1.0;
  options.smoothing.max_iterations = 1;
  options.smoothing.tolerance = 1e-300;
  try {
    Simulate(model, stance, zero, kDt, 5, options);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("step 0"), std::string::npos)
        << e.what();
  }
}

TEST(CorruptTest, ZeroNoiseReproducesMeasurement) {
  const PlanarModel model = HopperModel();
  const Trajectory traj = HopperRun(20, Stepper::kLcp);
  NoiseConfig noise;
  noise.base_position = noise.base_angle = noise.base_velocity = 0.0;
  noise.base_angular_velocity = noise.joint_position = 0.0;
  noise.joint_velocity = 0.0;
  const std::vector<MeasurementSample> ys = Corrupt(model, traj.states, noise);
  ASSERT_EQ(ys.size(), traj.states.size());
  for (size_t k = 0; k < ys.size(); ++k) {
    EXPECT_EQ(ys[k], Measure(model, traj.states[k]));
  }
}

TEST(CorruptTest, BiasShiftsBaseAngleMean) {
  const PlanarModel model = HopperModel();
  const Trajectory traj = HopperRun(100, Stepper::kLcp);
  NoiseConfig noise;
  noise.base_angle_bias = 0.05;
  const std::vector<MeasurementSample> ys = Corrupt(model, traj.states, noise);
  double mean = 0.0;
  for (size_t k = 0; k < ys.size(); ++k) {
    mean += ys[k].base_angle - traj.states[k].q[2];
  }
  mean /= static_cast<double>(ys.size());
  // sigma / sqrt(101) is about 1e-3.
  EXPECT_NEAR(mean, 0.05, 5e-3);
}

TEST(CorruptTest, EmpiricalStdMatchesSigma) {
  const PlanarModel model = HopperModel();
  const std::vector<State> states(10000, HopperInitialState());
  NoiseConfig noise;
  noise.joint_position = 0.01;
  noise.seed = 2026;
  const std::vector<MeasurementSample> ys = Corrupt(model, states, noise);
  double sum = 0.0, sum_sq = 0.0;
  for (const MeasurementSample& y : ys) {
    const double e = y.joint_positions[0] - 0.45;
    sum += e;
    sum_sq += e * e;
  }
  const double n = static_cast<double>(ys.size());
  const double std = std::sqrt(sum_sq / n - (sum / n) * (sum / n));
  EXPECT_NEAR(std, 0.01, 0.05 * 0.01);
}

TEST(CorruptTest, SeedControlsStream) {
  const PlanarModel model = HopperModel();
  const Trajectory traj = HopperRun(20, Stepper::kLcp);
  NoiseConfig noise;
  const auto a = Corrupt(model, traj.states, noise);
  const auto b = Corrupt(model, traj.states, noise);
  noise.seed = 2;
  const auto c = Corrupt(model, traj.states, noise);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  noise.joint_velocity = -1.0;
  EXPECT_THROW(Corrupt(model, traj.states, noise), InvalidArgument);
}

TEST(MetricsTest, TruthScoresPerfectly) {
  const Trajectory traj = HopperRun(100, Stepper::kLcp);
  const Metrics m = ComputeMetrics(traj.states, traj.lambda_n, traj);
  EXPECT_EQ(m.pose_rmse, 0.0);
  EXPECT_EQ(m.velocity_rmse, 0.0);
  EXPECT_EQ(m.force_rmse, 0.0);
  EXPECT_EQ(m.contact_timing_accuracy, 1.0);
}

TEST(MetricsTest, DroppedContactCostsOneStep) {
  const Trajectory traj = HopperRun(100, Stepper::kLcp);
  std::vector<VectorXd> lambda = traj.lambda_n;
  int k = 0;
  while (traj.lambda_n[k][0] <= kContactImpulseThreshold) ++k;
  lambda[k][0] = 0.0;
  const Metrics m = ComputeMetrics(traj.states, lambda, traj);
  EXPECT_DOUBLE_EQ(m.contact_timing_accuracy, 1.0 - 1.0 / 100.0);
  EXPECT_DOUBLE_EQ(m.force_rmse, traj.lambda_n[k][0] / kDt / std::sqrt(100.0));
}

TEST(MetricsTest, PoseErrorsAreRootMeanSquare) {
  const Trajectory traj = HopperRun(10, Stepper::kLcp);
  std::vector<State> states = traj.states;
  for (State& x : states) x.q[1] += 0.02;
  const Metrics m = ComputeMetrics(states, traj.lambda_n, traj);
  EXPECT_NEAR(m.base_position_rmse, 0.02 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(m.pose_rmse, 0.02 / 2.0, 1e-15);
  EXPECT_EQ(m.base_angle_rmse, 0.0);
  EXPECT_EQ(m.joint_position_rmse, 0.0);
}

TEST(MetricsTest, RejectsLengthMismatch) {
  const Trajectory traj = HopperRun(10, Stepper::kLcp);
  std::vector<State> states = traj.states;
  states.pop_back();
  EXPECT_THROW(ComputeMetrics(states, {}, traj), InvalidArgument);
  std::vector<VectorXd> lambda = traj.lambda_n;
  lambda.pop_back();
  EXPECT_THROW(ComputeMetrics(traj.states, lambda, traj), InvalidArgument);
}

TEST(MetricsTest, CountsTouchdowns) {
  const std::vector<VectorXd> lambda = {
      VectorXd::Zero(1), VectorXd::Ones(1), VectorXd::Ones(1),
      VectorXd::Zero(1), VectorXd::Ones(1), VectorXd::Constant(1, 1e-4)};
  EXPECT_EQ(CountTouchdowns(lambda), 2);
  EXPECT_EQ(StanceNodes(lambda), (std::vector<int>{1, 2, 4}));
}

TEST(SocpGapTest, ShrinksWithKappaOnStanceStates) {
  const Trajectory traj = HopperRun(100, Stepper::kLcp);
  std::vector<State> states;
  std::vector<VectorXd> inputs;
  for (int k : StanceNodes(traj.lambda_n)) {
    states.push_back(traj.states[k]);
    inputs.push_back(traj.inputs[k]);
  }
  ASSERT_GE(states.size(), 10u);
  SmoothingConfig smoothing;
  double previous = std::numeric_limits<double>::infinity();
  for (double kappa : {50.0, 500.0, 5000.0}) {
    smoothing.kappa = kappa;
    const double gap =
        MeanSocpGap(HopperModel(), states, inputs, kDt, smoothing);
    EXPECT_LT(gap, previous) << "kappa " << kappa;
    previous = gap;
  }
  EXPECT_LE(previous, 1e-3);
  EXPECT_THROW(MeanSocpGap(HopperModel(), {}, {}, kDt, smoothing),
               InvalidArgument);
}

}  // namespace
}  // namespace prime
