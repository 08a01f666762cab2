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

// Scalar-templated planar kinematics and recursive Newton-Euler. Instantiated
// with double and with forward-mode autodiff scalars for exact partials.

#ifndef PRIME_SRC_DYNAMICS_IMPL_H_
#define PRIME_SRC_DYNAMICS_IMPL_H_

#include <Eigen/Core>
#include <cmath>
#include <span>
#include <vector>

#include "prime/model.h"

namespace prime::internal {

template <typename S>
using Vec2 = Eigen::Matrix<S, 2, 1>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Rotation of a constant vector by `angle`.
template <typename S>
Vec2<S> Rotate(const S& angle, const Eigen::Vector2d& r) {
  using std::cos;
  using std::sin;
  const S c = cos(angle);
  const S s = sin(angle);
  return Vec2<S>(c * r.x() - s * r.y(), s * r.x() + c * r.y());
}

// Counter-clockwise quarter turn: the planar "omega x" operator.
template <typename S>
Vec2<S> Perp(const Vec2<S>& a) {
  return Vec2<S>(-a.y(), a.x());
}

template <typename S>
S Cross(const Vec2<S>& a, const Vec2<S>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

template <typename S>
struct LinkFrame {
  S angle;
  Vec2<S> pos;
};

template <typename S>
std::vector<LinkFrame<S>> ForwardKinematicsT(const PlanarModel& model,
                                             const VecX<S>& q) {
  const auto& links = model.links();
  std::vector<LinkFrame<S>> frames(links.size());
  frames[0].angle = q[2];
  frames[0].pos = Vec2<S>(q[0], q[1]);
  for (size_t i = 1; i < links.size(); ++i) {
    const Link& link = links[i];
    const LinkFrame<S>& parent = frames[link.parent];
    const S joint_angle = parent.angle + link.offset_angle;
    const Vec2<S> joint_origin =
        parent.pos + Rotate(parent.angle, link.offset_xy);
    const S& qi = q[PlanarModel::JointIndex(static_cast<int>(i))];
    if (link.joint.type == JointType::kRevolute) {
      frames[i].angle = joint_angle + link.joint.sign * qi;
      frames[i].pos = joint_origin;
    } else {
      frames[i].angle = joint_angle;
      frames[i].pos = joint_origin + Rotate(joint_angle, link.joint.axis) * qi;
    }
  }
  return frames;
}

// tau = M(q) a + h(q, v) for the given per-link inertial parameters. The
// parameters enter linearly, which the regressor relies on. With
// `with_gravity` false the gravity term is dropped.
template <typename S>
VecX<S> InverseDynamicsT(const PlanarModel& model,
                         std::span<const Eigen::Vector4d> inertia,
                         const VecX<S>& q, const VecX<S>& v, const VecX<S>& a,
                         bool with_gravity) {
  const auto& links = model.links();
  const size_t n = links.size();
  std::vector<S> angle(n), omega(n), omegadot(n);
  std::vector<Vec2<S>> pos(n), acc(n);

  angle[0] = q[2];
  pos[0] = Vec2<S>(q[0], q[1]);
  omega[0] = v[2];
  omegadot[0] = a[2];
  acc[0] = Vec2<S>(a[0], a[1]);
  if (with_gravity) {
    acc[0] -= model.gravity().template cast<S>();
  }

  std::vector<Vec2<S>> axis_world(n);
  for (size_t i = 1; i < n; ++i) {
    const Link& link = links[i];
    const int p = link.parent;
    const int j = PlanarModel::JointIndex(static_cast<int>(i));
    const S joint_angle = angle[p] + link.offset_angle;
    Vec2<S> d = Rotate(angle[p], link.offset_xy);
    if (link.joint.type == JointType::kRevolute) {
      const double s = link.joint.sign;
      angle[i] = joint_angle + s * q[j];
      omega[i] = omega[p] + s * v[j];
      omegadot[i] = omegadot[p] + s * a[j];
      pos[i] = pos[p] + d;
      acc[i] = acc[p] + omegadot[p] * Perp(d) - omega[p] * omega[p] * d;
    } else {
      const Vec2<S> e = Rotate(joint_angle, link.joint.axis);
      axis_world[i] = e;
      d += e * q[j];
      angle[i] = joint_angle;
      omega[i] = omega[p];
      omegadot[i] = omegadot[p];
      pos[i] = pos[p] + d;
      acc[i] = acc[p] + omegadot[p] * Perp(d) - omega[p] * omega[p] * d +
               S(2.0) * omega[p] * v[j] * Perp(e) + e * a[j];
    }
  }

  // Per-link wrench (force, moment about the link origin).
  std::vector<Vec2<S>> force(n);
  std::vector<S> moment(n);
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector4d& pi = inertia[i];
    const Vec2<S> rh = Rotate(angle[i], Eigen::Vector2d(pi[1], pi[2]));
    force[i] =
        pi[0] * acc[i] + omegadot[i] * Perp(rh) - omega[i] * omega[i] * rh;
    moment[i] = pi[3] * omegadot[i] + Cross(rh, acc[i]);
  }

  VecX<S> tau(model.nv());
  for (size_t i = n - 1; i >= 1; --i) {
    const Link& link = links[i];
    const int p = link.parent;
    const int j = PlanarModel::JointIndex(static_cast<int>(i));
    if (link.joint.type == JointType::kRevolute) {
      tau[j] = link.joint.sign * moment[i];
    } else {
      tau[j] = axis_world[i].dot(force[i]);
    }
    force[p] += force[i];
    moment[p] += moment[i] + Cross(Vec2<S>(pos[i] - pos[p]), force[i]);
  }
  tau[0] = force[0].x();
  tau[1] = force[0].y();
  tau[2] = moment[0];
  return tau;
}

inline std::vector<Eigen::Vector4d> LinkInertia(const PlanarModel& model) {
  std::vector<Eigen::Vector4d> out;
  out.reserve(model.links().size());
  for (const Link& link : model.links()) out.push_back(link.inertia.pi);
  return out;
}

}  // namespace prime::internal

#endif  // PRIME_SRC_DYNAMICS_IMPL_H_
