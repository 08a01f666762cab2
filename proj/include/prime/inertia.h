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

// Inertial-parameter representations and the smooth maps among them.
//
// Three representations are used for each rigid link:
//   * standard parameters pi (mass, first mass moment, rotational inertia
//     about the link-frame origin),
//   * the pseudo-inertia P = [[Sigma, h], [h^T, m]], positive definite iff
//     pi is realizable by a nonnegative density,
//   * the unconstrained Log-Cholesky vector theta with P = U U^T, U upper
//     triangular with exponentiated diagonal.
//
// The 3D form uses 10 parameters. The planar form keeps (m, h_x, h_y, I_z)
// and a 3x3 pseudo-inertia over the plane; its Log-Cholesky vector has 6
// entries, two of which (Sigma anisotropy and off-diagonal) do not affect
// planar dynamics.

#ifndef PRIME_INERTIA_H_
#define PRIME_INERTIA_H_

#include <Eigen/Core>

namespace prime {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Vector10d = Eigen::Matrix<double, 10, 1>;
using Matrix10d = Eigen::Matrix<double, 10, 10>;
using Matrix46d = Eigen::Matrix<double, 4, 6>;

// [m, h_x, h_y, h_z, I_xx, I_yy, I_zz, I_xy, I_yz, I_xz]. The I_ab entries
// are the entries of the 3x3 inertia matrix about the link-frame origin.
struct InertialParams3D {
  Vector10d pi = Vector10d::Zero();

  double mass() const { return pi[0]; }
  Eigen::Vector3d first_moment() const { return pi.segment<3>(1); }
  Eigen::Matrix3d rotational_inertia() const;
};

struct PseudoInertia3D {
  Eigen::Matrix4d P = Eigen::Matrix4d::Zero();
};

// [alpha, d1, d2, d3, s12, s23, s13, t1, t2, t3].
struct LogCholeskyParams3D {
  Vector10d theta = Vector10d::Zero();
};

// [m, h_x, h_y, I_z]; I_z about the link-frame origin, out-of-plane axis.
struct InertialParams2D {
  Eigen::Vector4d pi = Eigen::Vector4d::Zero();

  double mass() const { return pi[0]; }
  double hx() const { return pi[1]; }
  double hy() const { return pi[2]; }
  double iz() const { return pi[3]; }
  Eigen::Vector2d first_moment() const { return pi.segment<2>(1); }
};

// [alpha, d1, d2, s12, t1, t2]; U = e^alpha [[e^d1, s12, t1],
//                                            [0, e^d2, t2],
//                                            [0, 0, 1]].
struct LogCholeskyParams2D {
  Vector6d theta = Vector6d::Zero();
};

// Index names for the planar Log-Cholesky vector.
enum LogCholesky2DIndex : int {
  kAlpha = 0,
  kD1 = 1,
  kD2 = 2,
  kS12 = 3,
  kT1 = 4,
  kT2 = 5,
};

struct ConsistencyReport {
  bool consistent = false;
  // Smallest eigenvalue of the pseudo-inertia.
  double margin = 0.0;
};

// ---------------------------------------------------------------- 3D maps --

// Throws InvalidArgument on non-finite input.
InertialParams3D ThetaToPi3d(const LogCholeskyParams3D& theta);

// Closed-form d(pi)/d(theta).
Matrix10d PiJacobian3d(const LogCholeskyParams3D& theta);

PseudoInertia3D PiToPseudo3d(const InertialParams3D& pi);
InertialParams3D PseudoToPi3d(const PseudoInertia3D& pseudo);

// Inverse of ThetaToPi3d. Throws InvalidArgument if pi is not physically
// consistent.
LogCholeskyParams3D PiToTheta3d(const InertialParams3D& pi);

ConsistencyReport CheckConsistency(const InertialParams3D& pi);

// ------------------------------------------------------------ planar maps --

InertialParams2D ThetaToPi2d(const LogCholeskyParams2D& theta);
Matrix46d PiJacobian2d(const LogCholeskyParams2D& theta);

// Full 3x3 planar pseudo-inertia U U^T, including the Sigma split that pi2
// does not retain.
Eigen::Matrix3d ThetaToPseudo2d(const LogCholeskyParams2D& theta);

InertialParams2D PseudoToPi2d(const Eigen::Matrix3d& pseudo);

// Canonical lift of pi2 to a planar pseudo-inertia: Sigma is h h^T / m plus
// an isotropic remainder carrying the rest of I_z. The lift is positive
// definite iff m > 0 and I_z m > |h|^2.
Eigen::Matrix3d PiToPseudo2d(const InertialParams2D& pi);

// Log-Cholesky coordinates of the canonical lift. Throws InvalidArgument if
// pi2 is not physically consistent.
LogCholeskyParams2D PiToTheta2d(const InertialParams2D& pi);

LogCholeskyParams2D PseudoToTheta2d(const Eigen::Matrix3d& pseudo);

ConsistencyReport CheckConsistency(const InertialParams2D& pi);

}  // namespace prime

#endif  // PRIME_INERTIA_H_
