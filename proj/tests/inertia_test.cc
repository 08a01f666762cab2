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

#include "prime/inertia.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "prime/errors.h"
#include "test_models.h"

namespace prime {
namespace {

using testing::NumericJacobian;
using testing::RandomVector;
using testing::RelativeError;

Vector10d Pi3(std::initializer_list<double> v) {
  Vector10d out;
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(Inertia3dTest, ZeroThetaIsUnitPseudoInertia) {
  const InertialParams3D pi = ThetaToPi3d({});
  EXPECT_LE((pi.pi - Pi3({1, 0, 0, 0, 2, 2, 2, 0, 0, 0})).norm(), 1e-15);
  EXPECT_LE((PiToPseudo3d(pi).P - Eigen::Matrix4d::Identity()).norm(), 1e-15);
}

TEST(Inertia3dTest, AlphaScalesEverything) {
  LogCholeskyParams3D theta;
  theta.theta[0] = std::log(2.0);
  const InertialParams3D pi = ThetaToPi3d(theta);
  EXPECT_LE((pi.pi - Pi3({4, 0, 0, 0, 8, 8, 8, 0, 0, 0})).norm(), 1e-13);
  const InertialParams3D scaled{4.0 * ThetaToPi3d({}).pi};
  EXPECT_LE((PiToPseudo3d(scaled).P - 4.0 * Eigen::Matrix4d::Identity()).norm(),
            1e-14);
}

TEST(Inertia3dTest, SingleOffsetEntryByHand) {
  LogCholeskyParams3D theta;
  theta.theta[7] = 0.5;
  const InertialParams3D pi = ThetaToPi3d(theta);
  EXPECT_LE((pi.pi - Pi3({1, 0.5, 0, 0, 2, 2.25, 2.25, 0, 0, 0})).norm(),
            1e-15);

  Eigen::Matrix4d expected = Eigen::Matrix4d::Identity();
  expected(0, 0) = 1.25;
  expected(0, 3) = expected(3, 0) = 0.5;
  EXPECT_LE((PiToPseudo3d(pi).P - expected).norm(), 1e-15);
}

TEST(Inertia3dTest, JacobianAtZero) {
  const Matrix10d jac = PiJacobian3d({});
  EXPECT_LE((jac.col(0) - Pi3({2, 0, 0, 0, 4, 4, 4, 0, 0, 0})).norm(), 1e-14);
  EXPECT_EQ(jac(0, 7), 0.0);
  EXPECT_EQ(jac(0, 8), 0.0);
  EXPECT_EQ(jac(0, 9), 0.0);
}

TEST(Inertia3dTest, JacobianMatchesFiniteDifferences) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector10d theta = RandomVector(rng, 10, 1.0);
    const Matrix10d analytic = PiJacobian3d({theta});
    const Eigen::MatrixXd numeric = NumericJacobian(
        [](const Eigen::VectorXd& t) -> Eigen::VectorXd {
          return ThetaToPi3d({Vector10d(t)}).pi;
        },
        theta);
    EXPECT_LE(RelativeError(analytic, numeric), 1e-6) << "trial " << trial;
  }
}

TEST(Inertia3dTest, RoundTripsAndConsistency) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector10d theta = RandomVector(rng, 10, 1.5);
    const InertialParams3D pi = ThetaToPi3d({theta});
    const ConsistencyReport report = CheckConsistency(pi);
    ASSERT_TRUE(report.consistent) << "trial " << trial;
    EXPECT_GT(report.margin, 0.0);

    const InertialParams3D back = PseudoToPi3d(PiToPseudo3d(pi));
    EXPECT_LE((back.pi - pi.pi).cwiseAbs().maxCoeff(),
              1e-12 * (1.0 + pi.pi.cwiseAbs().maxCoeff()));

    const LogCholeskyParams3D recovered = PiToTheta3d(pi);
    EXPECT_LE((recovered.theta - theta).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Inertia3dTest, MassScalingLaw) {
  std::mt19937 rng(3);
  const Vector10d theta = RandomVector(rng, 10, 1.0);
  Vector10d shifted = theta;
  shifted[0] += 0.37;
  const double ratio =
      ThetaToPi3d({shifted}).mass() / ThetaToPi3d({theta}).mass();
  EXPECT_NEAR(ratio, std::exp(2 * 0.37), 1e-14);
}

TEST(Inertia3dTest, InconsistentParameters) {
  EXPECT_FALSE(
      CheckConsistency(InertialParams3D{Pi3({-1, 0, 0, 0, 2, 2, 2, 0, 0, 0})})
          .consistent);
  // Triangle inequality violated: I_zz > I_xx + I_yy.
  EXPECT_FALSE(
      CheckConsistency(InertialParams3D{Pi3({1, 0, 0, 0, 1, 1, 3, 0, 0, 0})})
          .consistent);
  EXPECT_THROW(
      PiToTheta3d(InertialParams3D{Pi3({-1, 0, 0, 0, 2, 2, 2, 0, 0, 0})}),
      InvalidArgument);
}

TEST(Inertia3dTest, NonFiniteInputThrows) {
  LogCholeskyParams3D theta;
  theta.theta[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(ThetaToPi3d(theta), InvalidArgument);
  EXPECT_THROW(PiJacobian3d(theta), InvalidArgument);
}

TEST(Inertia2dTest, HandExamples) {
  EXPECT_LE((ThetaToPi2d({}).pi - Eigen::Vector4d(1, 0, 0, 2)).norm(), 1e-15);
  LogCholeskyParams2D scaled;
  scaled.theta[kAlpha] = std::log(2.0);
  EXPECT_LE((ThetaToPi2d(scaled).pi - Eigen::Vector4d(4, 0, 0, 8)).norm(),
            1e-13);
  LogCholeskyParams2D offset;
  offset.theta[kT1] = 0.3;
  EXPECT_LE((ThetaToPi2d(offset).pi - Eigen::Vector4d(1, 0.3, 0, 2.09)).norm(),
            1e-15);
}

TEST(Inertia2dTest, JacobianMatchesFiniteDifferences) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector6d theta = RandomVector(rng, 6, 1.0);
    const Matrix46d analytic = PiJacobian2d({theta});
    const Eigen::MatrixXd numeric = NumericJacobian(
        [](const Eigen::VectorXd& t) -> Eigen::VectorXd {
          return ThetaToPi2d({Vector6d(t)}).pi;
        },
        theta);
    EXPECT_LE(RelativeError(analytic, numeric), 1e-6) << "trial " << trial;
  }
}

TEST(Inertia2dTest, EveryThetaIsConsistentAndLiftRoundTrips) {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector6d theta = RandomVector(rng, 6, 1.5);
    const InertialParams2D pi = ThetaToPi2d({theta});
    ASSERT_TRUE(CheckConsistency(pi).consistent) << "trial " << trial;
    EXPECT_GT(pi.iz() * pi.mass(), pi.first_moment().squaredNorm());

    const InertialParams2D back = PseudoToPi2d(PiToPseudo2d(pi));
    EXPECT_LE((back.pi - pi.pi).cwiseAbs().maxCoeff(),
              1e-12 * (1.0 + pi.pi.cwiseAbs().maxCoeff()));

    // The canonical lift has its own theta; it maps to the same pi2.
    const LogCholeskyParams2D canonical = PiToTheta2d(pi);
    EXPECT_LE((ThetaToPi2d(canonical).pi - pi.pi).cwiseAbs().maxCoeff(), 1e-10);

    // The full pseudo-inertia round trips exactly through theta.
    const LogCholeskyParams2D same = PseudoToTheta2d(ThetaToPseudo2d({theta}));
    EXPECT_LE((same.theta - theta).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Inertia2dTest, InconsistentParameters) {
  EXPECT_FALSE(CheckConsistency(InertialParams2D{Eigen::Vector4d(1, 2, 0, 1)})
                   .consistent);
  EXPECT_FALSE(CheckConsistency(InertialParams2D{Eigen::Vector4d(-1, 0, 0, 1)})
                   .consistent);
  EXPECT_TRUE(CheckConsistency(InertialParams2D{Eigen::Vector4d(1, 0.5, 0, 1)})
                  .consistent);
  EXPECT_THROW(PiToTheta2d(InertialParams2D{Eigen::Vector4d(1, 2, 0, 1)}),
               InvalidArgument);
}

}  // namespace
}  // namespace prime
