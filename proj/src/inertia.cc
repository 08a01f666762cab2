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

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <string>

#include "prime/errors.h"

namespace prime {
namespace {

template <typename Derived>
void RequireFinite(const Eigen::MatrixBase<Derived>& x, const char* what) {
  if (!x.allFinite()) {
    throw InvalidArgument(std::string(what) + ": non-finite input");
  }
}

// Upper-triangular factor of a 4x4 Log-Cholesky vector.
Eigen::Matrix4d UpperFactor3d(const Vector10d& t) {
  const double ea = std::exp(t[0]);
  Eigen::Matrix4d u = Eigen::Matrix4d::Zero();
  u(0, 0) = std::exp(t[1]);
  u(1, 1) = std::exp(t[2]);
  u(2, 2) = std::exp(t[3]);
  u(3, 3) = 1.0;
  u(0, 1) = t[4];
  u(1, 2) = t[5];
  u(0, 2) = t[6];
  u(0, 3) = t[7];
  u(1, 3) = t[8];
  u(2, 3) = t[9];
  return ea * u;
}

Eigen::Matrix3d UpperFactor2d(const Vector6d& t) {
  const double ea = std::exp(t[kAlpha]);
  Eigen::Matrix3d u = Eigen::Matrix3d::Zero();
  u(0, 0) = std::exp(t[kD1]);
  u(1, 1) = std::exp(t[kD2]);
  u(2, 2) = 1.0;
  u(0, 1) = t[kS12];
  u(0, 2) = t[kT1];
  u(1, 2) = t[kT2];
  return ea * u;
}

// Linear map from a symmetric 4x4 pseudo-inertia to pi.
Vector10d PseudoToPiVector(const Eigen::Matrix4d& p) {
  const Eigen::Matrix3d sigma = p.topLeftCorner<3, 3>();
  const Eigen::Matrix3d inertia =
      sigma.trace() * Eigen::Matrix3d::Identity() - sigma;
  Vector10d pi;
  pi << p(3, 3), p(0, 3), p(1, 3), p(2, 3), inertia(0, 0), inertia(1, 1),
      inertia(2, 2), inertia(0, 1), inertia(1, 2), inertia(0, 2);
  return pi;
}

Eigen::Vector4d PseudoToPiVector2d(const Eigen::Matrix3d& p) {
  return {p(2, 2), p(0, 2), p(1, 2), p(0, 0) + p(1, 1)};
}

// P = U U^T with U upper triangular and positive diagonal. Returns false if
// P is not positive definite.
template <int N>
bool UpperCholesky(const Eigen::Matrix<double, N, N>& p,
                   Eigen::Matrix<double, N, N>* u) {
  Eigen::Matrix<double, N, N> flipped = p.reverse();
  Eigen::LLT<Eigen::Matrix<double, N, N>> llt(flipped);
  if (llt.info() != Eigen::Success) return false;
  Eigen::Matrix<double, N, N> lower = llt.matrixL();
  *u = lower.reverse();
  return (u->diagonal().array() > 0.0).all();
}

// Pivot test with tolerance 1e-12 * tr(P), plus the smallest eigenvalue.
template <int N>
ConsistencyReport PivotCheck(const Eigen::Matrix<double, N, N>& p) {
  ConsistencyReport report;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> eig(
      p, Eigen::EigenvaluesOnly);
  report.margin = eig.eigenvalues().minCoeff();
  const double trace = p.trace();
  if (!(trace > 0.0)) return report;
  const double tol = 1e-12 * trace;
  Eigen::Matrix<double, N, N> l = Eigen::Matrix<double, N, N>::Zero();
  for (int j = 0; j < N; ++j) {
    double pivot = p(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > tol)) return report;
    l(j, j) = std::sqrt(pivot);
    for (int i = j + 1; i < N; ++i) {
      l(i, j) = (p(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  report.consistent = true;
  return report;
}

}  // namespace

Eigen::Matrix3d InertialParams3D::rotational_inertia() const {
  Eigen::Matrix3d inertia;
  inertia << pi[4], pi[7], pi[9],  //
      pi[7], pi[5], pi[8],         //
      pi[9], pi[8], pi[6];
  return inertia;
}

InertialParams3D ThetaToPi3d(const LogCholeskyParams3D& theta) {
  RequireFinite(theta.theta, "ThetaToPi3d");
  const Eigen::Matrix4d u = UpperFactor3d(theta.theta);
  return {PseudoToPiVector(u * u.transpose())};
}

Matrix10d PiJacobian3d(const LogCholeskyParams3D& theta) {
  RequireFinite(theta.theta, "PiJacobian3d");
  const Vector10d& t = theta.theta;
  const Eigen::Matrix4d u = UpperFactor3d(t);
  const double ea = std::exp(t[0]);

  // dU/dtheta_j for each coordinate.
  std::array<Eigen::Matrix4d, 10> du;
  for (auto& m : du) m.setZero();
  du[0] = u;
  du[1](0, 0) = ea * std::exp(t[1]);
  du[2](1, 1) = ea * std::exp(t[2]);
  du[3](2, 2) = ea * std::exp(t[3]);
  du[4](0, 1) = ea;
  du[5](1, 2) = ea;
  du[6](0, 2) = ea;
  du[7](0, 3) = ea;
  du[8](1, 3) = ea;
  du[9](2, 3) = ea;

  Matrix10d jac;
  for (int j = 0; j < 10; ++j) {
    const Eigen::Matrix4d dp = du[j] * u.transpose() + u * du[j].transpose();
    jac.col(j) = PseudoToPiVector(dp);
  }
  return jac;
}

PseudoInertia3D PiToPseudo3d(const InertialParams3D& pi) {
  RequireFinite(pi.pi, "PiToPseudo3d");
  const Eigen::Matrix3d inertia = pi.rotational_inertia();
  PseudoInertia3D out;
  out.P.topLeftCorner<3, 3>() =
      0.5 * inertia.trace() * Eigen::Matrix3d::Identity() - inertia;
  out.P.topRightCorner<3, 1>() = pi.first_moment();
  out.P.bottomLeftCorner<1, 3>() = pi.first_moment().transpose();
  out.P(3, 3) = pi.mass();
  return out;
}

InertialParams3D PseudoToPi3d(const PseudoInertia3D& pseudo) {
  RequireFinite(pseudo.P, "PseudoToPi3d");
  return {PseudoToPiVector(0.5 * (pseudo.P + pseudo.P.transpose()))};
}

LogCholeskyParams3D PiToTheta3d(const InertialParams3D& pi) {
  const Eigen::Matrix4d p = PiToPseudo3d(pi).P;
  Eigen::Matrix4d u;
  if (!UpperCholesky<4>(p, &u)) {
    throw InvalidArgument(
        "PiToTheta3d: parameters are not physically consistent");
  }
  const double ea = u(3, 3);
  const Eigen::Matrix4d n = u / ea;
  LogCholeskyParams3D out;
  out.theta << std::log(ea), std::log(n(0, 0)), std::log(n(1, 1)),
      std::log(n(2, 2)), n(0, 1), n(1, 2), n(0, 2), n(0, 3), n(1, 3), n(2, 3);
  return out;
}

ConsistencyReport CheckConsistency(const InertialParams3D& pi) {
  return PivotCheck<4>(PiToPseudo3d(pi).P);
}

InertialParams2D ThetaToPi2d(const LogCholeskyParams2D& theta) {
  return {PseudoToPiVector2d(ThetaToPseudo2d(theta))};
}

Eigen::Matrix3d ThetaToPseudo2d(const LogCholeskyParams2D& theta) {
  RequireFinite(theta.theta, "ThetaToPi2d");
  const Eigen::Matrix3d u = UpperFactor2d(theta.theta);
  return u * u.transpose();
}

Matrix46d PiJacobian2d(const LogCholeskyParams2D& theta) {
  RequireFinite(theta.theta, "PiJacobian2d");
  const Vector6d& t = theta.theta;
  const Eigen::Matrix3d u = UpperFactor2d(t);
  const double ea = std::exp(t[kAlpha]);

  std::array<Eigen::Matrix3d, 6> du;
  for (auto& m : du) m.setZero();
  du[kAlpha] = u;
  du[kD1](0, 0) = ea * std::exp(t[kD1]);
  du[kD2](1, 1) = ea * std::exp(t[kD2]);
  du[kS12](0, 1) = ea;
  du[kT1](0, 2) = ea;
  du[kT2](1, 2) = ea;

  Matrix46d jac;
  for (int j = 0; j < 6; ++j) {
    const Eigen::Matrix3d dp = du[j] * u.transpose() + u * du[j].transpose();
    jac.col(j) = PseudoToPiVector2d(dp);
  }
  return jac;
}

InertialParams2D PseudoToPi2d(const Eigen::Matrix3d& pseudo) {
  RequireFinite(pseudo, "PseudoToPi2d");
  return {PseudoToPiVector2d(0.5 * (pseudo + pseudo.transpose()))};
}

Eigen::Matrix3d PiToPseudo2d(const InertialParams2D& pi) {
  RequireFinite(pi.pi, "PiToPseudo2d");
  const double m = pi.mass();
  const Eigen::Vector2d h = pi.first_moment();
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
  double remainder = pi.iz();
  if (m > 0.0) {
    sigma = h * h.transpose() / m;
    remainder -= h.squaredNorm() / m;
  }
  sigma += 0.5 * remainder * Eigen::Matrix2d::Identity();
  Eigen::Matrix3d p;
  p.topLeftCorner<2, 2>() = sigma;
  p.topRightCorner<2, 1>() = h;
  p.bottomLeftCorner<1, 2>() = h.transpose();
  p(2, 2) = m;
  return p;
}

LogCholeskyParams2D PseudoToTheta2d(const Eigen::Matrix3d& pseudo) {
  RequireFinite(pseudo, "PseudoToTheta2d");
  Eigen::Matrix3d u;
  if (!UpperCholesky<3>(pseudo, &u)) {
    throw InvalidArgument(
        "PseudoToTheta2d: pseudo-inertia is not positive definite");
  }
  const double ea = u(2, 2);
  const Eigen::Matrix3d n = u / ea;
  LogCholeskyParams2D out;
  out.theta << std::log(ea), std::log(n(0, 0)), std::log(n(1, 1)), n(0, 1),
      n(0, 2), n(1, 2);
  return out;
}

LogCholeskyParams2D PiToTheta2d(const InertialParams2D& pi) {
  if (!CheckConsistency(pi).consistent) {
    throw InvalidArgument(
        "PiToTheta2d: parameters are not physically consistent");
  }
  return PseudoToTheta2d(PiToPseudo2d(pi));
}

ConsistencyReport CheckConsistency(const InertialParams2D& pi) {
  return PivotCheck<3>(PiToPseudo2d(pi));
}

}  // namespace prime
