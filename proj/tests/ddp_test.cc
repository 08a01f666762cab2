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

#include "prime/ddp.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lq_problem.h"
#include "prime/errors.h"

namespace prime {
namespace {

using testing::LinearProblem;
using testing::RandomLinearProblem;
using testing::ScalarRandomWalk;

std::vector<Eigen::VectorXd> Zeros(int count, int n) {
  return std::vector<Eigen::VectorXd>(count, Eigen::VectorXd::Zero(n));
}

DdpOptions Options(bool fddp) {
  DdpOptions o;
  o.feasibility_driven = fddp;
  return o;
}

double MaxDiff(const std::vector<Eigen::VectorXd>& a,
               const std::vector<Eigen::VectorXd>& b) {
  double d = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    d = std::max(d, (a[k] - b[k]).lpNorm<Eigen::Infinity>());
  }
  return d;
}

void ExpectMonotone(const DdpResult& r) {
  double last = INFINITY;
  for (const auto& row : r.trace) {
    if (!row.accepted || row.gap_norm > 1e-6) continue;
    EXPECT_LE(row.cost, last + 1e-12 * std::abs(last)) << row.iteration;
    last = row.cost;
  }
}

TEST(DdpTest, ScalarRandomWalkClosedForm) {
  const LinearProblem p = ScalarRandomWalk();
  for (bool fddp : {false, true}) {
    const DdpResult r = SolveDdp(p, Zeros(2, 1), Zeros(1, 1), Options(fddp));
    ASSERT_TRUE(r.converged) << r.message;
    EXPECT_NEAR(r.xs[0][0], 2.0 / 3.0, 1e-9);
    EXPECT_NEAR(r.ws[0][0], 2.0 / 3.0, 1e-9);
    EXPECT_NEAR(r.xs[1][0], 4.0 / 3.0, 1e-9);
    EXPECT_NEAR(r.cost, 4.0 / 3.0, 1e-12);
  }
}

TEST(DdpTest, ScalarFddpFromInfeasibleGuessMatchesDdp) {
  const LinearProblem p = ScalarRandomWalk();
  std::vector<Eigen::VectorXd> xs = {Eigen::VectorXd::Constant(1, 5.0),
                                     Eigen::VectorXd::Constant(1, -3.0)};
  const DdpResult fddp = SolveDdp(p, xs, Zeros(1, 1), Options(true));
  const DdpResult ddp = SolveDdp(p, xs, Zeros(1, 1), Options(false));
  ASSERT_TRUE(fddp.converged);
  ASSERT_TRUE(ddp.converged);
  EXPECT_GT(fddp.trace[0].gap_norm, 1.0);
  EXPECT_LE(fddp.gap_norm, 1e-6);
  EXPECT_LE(MaxDiff(fddp.xs, ddp.xs), 1e-9);
  EXPECT_LE(MaxDiff(fddp.ws, ddp.ws), 1e-9);
}

TEST(DdpTest, ZeroHorizonIsMidpoint) {
  LinearProblem p;
  p.A = p.G = p.C = p.P = p.Q = p.R = Eigen::MatrixXd::Identity(1, 1);
  p.b = p.m = Eigen::VectorXd::Zero(1);
  p.ys = {Eigen::VectorXd::Constant(1, 1.0)};
  for (bool fddp : {false, true}) {
    const DdpResult r = SolveDdp(p, Zeros(1, 1), {}, Options(fddp));
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.xs[0][0], 0.5, 1e-9);
    EXPECT_NEAR(r.cost, 0.5, 1e-12);
  }
}

TEST(DdpTest, LinearProblemsMatchNormalEquations) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int nx = trial % 2 == 0 ? 1 : 4;
    const int T = 1 + trial;
    const LinearProblem p =
        RandomLinearProblem(rng, nx, nx, nx == 1 ? 1 : 2, T);
    std::vector<Eigen::VectorXd> xs_ref, ws_ref;
    p.BatchSolve(&xs_ref, &ws_ref);
    const double ref_cost = TrajectoryCost(p, xs_ref, ws_ref);
    for (bool fddp : {false, true}) {
      const DdpResult r =
          SolveDdp(p, Zeros(T + 1, nx), Zeros(T, nx), Options(fddp));
      ASSERT_TRUE(r.converged) << r.message;
      EXPECT_LE(MaxDiff(r.xs, xs_ref), 1e-8) << trial << " fddp " << fddp;
      EXPECT_LE(MaxDiff(r.ws, ws_ref), 1e-8) << trial << " fddp " << fddp;
      EXPECT_NEAR(r.cost, ref_cost, 1e-9 * (1.0 + ref_cost));
      ExpectMonotone(r);
    }
  }
}

TEST(DdpTest, FddpFromFeasibleRolloutKeepsGapsZero) {
  std::mt19937_64 rng(3);
  const LinearProblem p = RandomLinearProblem(rng, 4, 4, 2, 12);
  const auto ws = Zeros(12, 4);
  const auto xs = Rollout(p, Eigen::VectorXd::Ones(4), ws);
  const DdpResult fddp = SolveDdp(p, xs, ws, Options(true));
  const DdpResult ddp = SolveDdp(p, xs, ws, Options(false));
  for (const auto& row : fddp.trace) EXPECT_LE(row.gap_norm, 1e-12);
  EXPECT_LE(MaxDiff(fddp.xs, ddp.xs), 1e-9);
  EXPECT_EQ(fddp.iterations, ddp.iterations);
}

// Mildly nonlinear two-state system.
class PendulumProblem : public ShootingProblem {
 public:
  explicit PendulumProblem(int T) : T_(T) {
    for (int k = 0; k <= T; ++k) {
      ys_.push_back(Eigen::Vector2d(std::sin(0.3 * k), std::cos(0.2 * k)));
    }
  }
  int horizon() const override { return T_; }
  int state_dim() const override { return 2; }
  int disturbance_dim() const override { return 2; }
  Eigen::VectorXd Dynamics(int, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& w) const override {
    return Eigen::Vector2d(x[0] + 0.1 * x[1], x[1] - 0.3 * std::sin(x[0])) + w;
  }
  DynamicsDerivatives Linearize(int k, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& w) const override {
    Eigen::Matrix2d fx;
    fx << 1.0, 0.1, -0.3 * std::cos(x[0]), 1.0;
    return {Dynamics(k, x, w), fx, Eigen::Matrix2d::Identity()};
  }
  double Cost(int k, const Eigen::VectorXd& x,
              const Eigen::VectorXd& w) const override {
    double c = 3.0 * (x - ys_[k]).squaredNorm();
    if (k < T_) c += 10.0 * w.squaredNorm();
    return c;
  }
  CostDerivatives CostQuadratic(int k, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& w) const override {
    const int nw = k < T_ ? 2 : 0;
    CostDerivatives d;
    d.lx = 6.0 * (x - ys_[k]);
    d.lxx = 6.0 * Eigen::Matrix2d::Identity();
    d.lw = nw ? Eigen::VectorXd(20.0 * w) : Eigen::VectorXd(0);
    d.lww = 20.0 * Eigen::MatrixXd::Identity(nw, nw);
    d.lwx = Eigen::MatrixXd::Zero(nw, 2);
    return d;
  }

 private:
  int T_;
  std::vector<Eigen::VectorXd> ys_;
};

// Reduced cost J(x_0, w) through single shooting.
double ReducedCost(const ShootingProblem& p, const Eigen::VectorXd& z) {
  const int nx = p.state_dim(), nw = p.disturbance_dim();
  std::vector<Eigen::VectorXd> ws(p.horizon());
  for (int k = 0; k < p.horizon(); ++k) ws[k] = z.segment(nx + k * nw, nw);
  return TrajectoryCost(p, Rollout(p, z.head(nx), ws), ws);
}

TEST(DdpTest, NonlinearOptimumIsStationary) {
  const PendulumProblem p(10);
  for (bool fddp : {false, true}) {
    std::vector<Eigen::VectorXd> xs(11, Eigen::Vector2d(0.5, -0.5));
    // Stop on stationarity only.
    DdpOptions options = Options(fddp);
    options.tolerance = 0.0;
    const DdpResult r = SolveDdp(p, xs, Zeros(10, 2), options);
    ASSERT_TRUE(r.converged) << r.message;
    ExpectMonotone(r);
    Eigen::VectorXd z(2 + 20);
    z.head(2) = r.xs[0];
    for (int k = 0; k < 10; ++k) z.segment(2 + 2 * k, 2) = r.ws[k];
    Eigen::VectorXd grad(z.size());
    const double h = 1e-6;
    for (int i = 0; i < z.size(); ++i) {
      Eigen::VectorXd zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      grad[i] = (ReducedCost(p, zp) - ReducedCost(p, zm)) / (2.0 * h);
    }
    EXPECT_LE(grad.norm(), 1e-5 * (1.0 + r.cost));
    EXPECT_NEAR(ReducedCost(p, z), r.cost, 1e-9 * r.cost);
  }
}

TEST(DdpTest, ThreadedLinearizationIsBitIdentical) {
  const PendulumProblem p(30);
  std::vector<Eigen::VectorXd> xs(31, Eigen::Vector2d(0.1, 0.2));
  DdpOptions serial = Options(true);
  DdpOptions threaded = serial;
  threaded.threads = 4;
  const DdpResult a = SolveDdp(p, xs, Zeros(30, 2), serial);
  const DdpResult b = SolveDdp(p, xs, Zeros(30, 2), threaded);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].cost, b.trace[i].cost);
    EXPECT_EQ(a.trace[i].step, b.trace[i].step);
  }
  EXPECT_EQ(MaxDiff(a.xs, b.xs), 0.0);
}

TEST(DdpTest, RejectsBadGuess) {
  const LinearProblem p = ScalarRandomWalk();
  EXPECT_THROW(SolveDdp(p, Zeros(3, 1), Zeros(1, 1), Options(true)),
               InvalidArgument);
  EXPECT_THROW(SolveDdp(p, Zeros(2, 2), Zeros(1, 1), Options(true)),
               InvalidArgument);
}

}  // namespace
}  // namespace prime
