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

#ifndef PRIME_DYNAMICS_H_
#define PRIME_DYNAMICS_H_

#include <Eigen/Core>
#include <vector>

#include "prime/model.h"

namespace prime {

struct LinkPose {
  double angle = 0.0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
};

// World pose of every link frame.
std::vector<LinkPose> ForwardKinematics(const PlanarModel& model,
                                        const Eigen::VectorXd& q);

// Composite-rigid-body mass matrix.
Eigen::MatrixXd MassMatrix(const PlanarModel& model, const Eigen::VectorXd& q);

// Coriolis, centrifugal and gravity terms.
Eigen::VectorXd Bias(const PlanarModel& model, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& v);

// M(q) a + h(q, v).
Eigen::VectorXd InverseDynamics(const PlanarModel& model,
                                const Eigen::VectorXd& q,
                                const Eigen::VectorXd& v,
                                const Eigen::VectorXd& a);

struct InverseDynamicsPartials {
  Eigen::MatrixXd dtau_dq;
  Eigen::MatrixXd dtau_dv;
};

// Exact partials of InverseDynamics with respect to q and v (a held fixed).
InverseDynamicsPartials InverseDynamicsDerivatives(const PlanarModel& model,
                                                   const Eigen::VectorXd& q,
                                                   const Eigen::VectorXd& v,
                                                   const Eigen::VectorXd& a);

// Y with Y * [pi2(link 0); pi2(link 1); ...] = M(q) a + h(q, v). Columns are
// grouped per link in the order (m, h_x, h_y, I_z).
Eigen::MatrixXd Regressor(const PlanarModel& model, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& v, const Eigen::VectorXd& a);

// Stacked pi2 of all links, matching the regressor column order.
Eigen::VectorXd StackedInertia(const PlanarModel& model);

struct ContactKinematics {
  // Per contact: world position, signed distance to z = 0 and Jacobian rows
  // along the tangent (x) and normal (z) axes.
  std::vector<Eigen::Vector2d> position;
  Eigen::VectorXd phi;
  Eigen::MatrixXd Jn;  // nc x nv
  Eigen::MatrixXd Jt;  // nc x nv
  // Hn[i](j, k) = d Jn(i, j) / d q_k; likewise Ht. Symmetric. Empty when
  // second derivatives were not requested.
  std::vector<Eigen::MatrixXd> Hn;
  std::vector<Eigen::MatrixXd> Ht;
};

ContactKinematics ComputeContactKinematics(const PlanarModel& model,
                                           const Eigen::VectorXd& q,
                                           bool with_hessians = true);

// v + dt M^-1 (B u - h).
Eigen::VectorXd FreeVelocity(const PlanarModel& model, const Eigen::VectorXd& q,
                             const Eigen::VectorXd& v, const Eigen::VectorXd& u,
                             double dt);

// q + dt v_plus.
Eigen::VectorXd IntegrateConfig(const Eigen::VectorXd& q,
                                const Eigen::VectorXd& v_plus, double dt);

// Sum of link kinetic energies computed link by link (not through M).
double KineticEnergy(const PlanarModel& model, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& v);

double PotentialEnergy(const PlanarModel& model, const Eigen::VectorXd& q);

}  // namespace prime

#endif  // PRIME_DYNAMICS_H_
