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

#include "prime/dynamics.h"

#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <cmath>
#include <string>
#include <unsupported/Eigen/AutoDiff>
#include <vector>

#include "dynamics_impl.h"
#include "prime/errors.h"

namespace prime {
namespace {

using internal::Perp;

void CheckSizes(const PlanarModel& model, const Eigen::VectorXd& q,
                const Eigen::VectorXd* v, const char* where) {
  if (q.size() != model.nq() || (v != nullptr && v->size() != model.nv())) {
    throw InvalidArgument(std::string(where) + ": state dimension mismatch");
  }
  if (!q.allFinite() || (v != nullptr && !v->allFinite())) {
    throw InvalidArgument(std::string(where) + ": non-finite state");
  }
}

// Spatial inertia of a body (or composite) about the world origin.
struct WorldInertia {
  double m = 0.0;
  Eigen::Vector2d h = Eigen::Vector2d::Zero();
  double i = 0.0;

  WorldInertia& operator+=(const WorldInertia& o) {
    m += o.m;
    h += o.h;
    i += o.i;
    return *this;
  }
};

// Planar twist expressed at the world origin.
struct Motion {
  double w = 0.0;
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
};

// s^T (I s') for motion subspaces s, s'.
double Pair(const Motion& s, const WorldInertia& in, const Motion& t) {
  const Eigen::Vector2d linear = in.m * t.v + t.w * Perp<double>(in.h);
  const double angular = in.i * t.w + internal::Cross<double>(in.h, t.v);
  return s.w * angular + s.v.dot(linear);
}

// Per-DOF geometry used by the Jacobian and Hessian code.
enum class DofKind { kSlideX, kSlideZ, kRotate, kSlide };

struct Dof {
  DofKind kind = DofKind::kSlideX;
  double sign = 1.0;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();  // rotations
  Eigen::Vector2d axis = Eigen::Vector2d::Zero();    // prismatic slides
  // DOFs that move `center`, or that rotate `axis`.
  std::vector<bool> moved_by;
};

class ChainGeometry {
 public:
  ChainGeometry(const PlanarModel& model, const Eigen::VectorXd& q)
      : model_(model), frames_(ForwardKinematics(model, q)) {
    const int nv = model.nv();
    const int nl = model.num_links();
    chain_.assign(nl, std::vector<bool>(nv, false));
    for (int k = 0; k < 3; ++k) chain_[0][k] = true;
    for (int l = 1; l < nl; ++l) {
      chain_[l] = chain_[model.links()[l].parent];
      chain_[l][PlanarModel::JointIndex(l)] = true;
    }
    dofs_.resize(nv);
    dofs_[0].kind = DofKind::kSlideX;
    dofs_[1].kind = DofKind::kSlideZ;
    dofs_[2].kind = DofKind::kRotate;
    dofs_[2].center = frames_[0].position;
    dofs_[2].moved_by.assign(nv, false);
    dofs_[2].moved_by[0] = dofs_[2].moved_by[1] = true;
    for (int l = 1; l < nl; ++l) {
      const Link& link = model.links()[l];
      Dof& d = dofs_[PlanarModel::JointIndex(l)];
      if (link.joint.type == JointType::kRevolute) {
        d.kind = DofKind::kRotate;
        d.sign = link.joint.sign;
        d.center = frames_[l].position;
        d.moved_by = chain_[link.parent];
      } else {
        d.kind = DofKind::kSlide;
        d.axis = Eigen::Rotation2Dd(frames_[l].angle) * link.joint.axis;
        d.moved_by = chain_[link.parent];
        for (int k = 0; k < nv; ++k) {
          if (d.moved_by[k] && dofs_[k].kind != DofKind::kRotate) {
            d.moved_by[k] = false;
          }
        }
      }
    }
  }

  const std::vector<LinkPose>& frames() const { return frames_; }
  const std::vector<bool>& chain(int link) const { return chain_[link]; }

  // d x / d q_k for a point x carried by a body that DOF k moves.
  Eigen::Vector2d Column(int k, const Eigen::Vector2d& x) const {
    const Dof& d = dofs_[k];
    switch (d.kind) {
      case DofKind::kSlideX:
        return Eigen::Vector2d::UnitX();
      case DofKind::kSlideZ:
        return Eigen::Vector2d::UnitY();
      case DofKind::kRotate:
        return d.sign * Perp<double>(Eigen::Vector2d(x - d.center));
      case DofKind::kSlide:
        return d.axis;
    }
    return Eigen::Vector2d::Zero();
  }

  // Jacobian (2 x nv) of a point carried by `link`, and optionally its
  // derivative: hx(j, k) = d J(0, j) / d q_k, hz likewise for row 1.
  void PointJacobian(int link, const Eigen::Vector2d& x, Eigen::MatrixXd* jac,
                     Eigen::MatrixXd* hx, Eigen::MatrixXd* hz) const {
    const int nv = model_.nv();
    const std::vector<bool>& chain = chain_[link];
    jac->setZero(2, nv);
    for (int k = 0; k < nv; ++k) {
      if (chain[k]) jac->col(k) = Column(k, x);
    }
    if (hx == nullptr) return;
    hx->setZero(nv, nv);
    hz->setZero(nv, nv);
    for (int j = 0; j < nv; ++j) {
      if (!chain[j]) continue;
      const Dof& d = dofs_[j];
      for (int k = 0; k < nv; ++k) {
        if (!chain[k]) continue;
        Eigen::Vector2d col = Eigen::Vector2d::Zero();
        if (d.kind == DofKind::kRotate) {
          Eigen::Vector2d dx = jac->col(k);
          if (d.moved_by[k]) dx -= Column(k, d.center);
          col = d.sign * Perp<double>(dx);
        } else if (d.kind == DofKind::kSlide && d.moved_by[k]) {
          col = dofs_[k].sign * Perp<double>(d.axis);
        }
        (*hx)(j, k) = col.x();
        (*hz)(j, k) = col.y();
      }
    }
  }

 private:
  const PlanarModel& model_;
  std::vector<LinkPose> frames_;
  std::vector<std::vector<bool>> chain_;
  std::vector<Dof> dofs_;
};

}  // namespace

std::vector<LinkPose> ForwardKinematics(const PlanarModel& model,
                                        const Eigen::VectorXd& q) {
  CheckSizes(model, q, nullptr, "ForwardKinematics");
  const auto frames = internal::ForwardKinematicsT<double>(model, q);
  std::vector<LinkPose> out(frames.size());
  for (size_t i = 0; i < frames.size(); ++i) {
    out[i].angle = frames[i].angle;
    out[i].position = frames[i].pos;
  }
  return out;
}

Eigen::MatrixXd MassMatrix(const PlanarModel& model, const Eigen::VectorXd& q) {
  CheckSizes(model, q, nullptr, "MassMatrix");
  const auto frames = ForwardKinematics(model, q);
  const auto& links = model.links();
  const int nl = model.num_links();
  const int nv = model.nv();

  std::vector<WorldInertia> composite(nl);
  for (int l = 0; l < nl; ++l) {
    const InertialParams2D& in = links[l].inertia;
    const Eigen::Vector2d p = frames[l].position;
    const Eigen::Vector2d rh =
        Eigen::Rotation2Dd(frames[l].angle) * in.first_moment();
    composite[l].m = in.mass();
    composite[l].h = in.mass() * p + rh;
    composite[l].i = in.iz() + 2.0 * p.dot(rh) + in.mass() * p.squaredNorm();
  }
  for (int l = nl - 1; l >= 1; --l) composite[links[l].parent] += composite[l];

  std::vector<Motion> s(nv);
  s[0].v = Eigen::Vector2d::UnitX();
  s[1].v = Eigen::Vector2d::UnitY();
  s[2].w = 1.0;
  s[2].v = -Perp<double>(frames[0].position);
  for (int l = 1; l < nl; ++l) {
    Motion& m = s[PlanarModel::JointIndex(l)];
    if (links[l].joint.type == JointType::kRevolute) {
      const double sign = links[l].joint.sign;
      m.w = sign;
      m.v = -sign * Perp<double>(frames[l].position);
    } else {
      m.v = Eigen::Rotation2Dd(frames[l].angle) * links[l].joint.axis;
    }
  }

  // Owner link of each DOF; base DOFs belong to link 0.
  auto owner = [](int dof) { return dof < 3 ? 0 : dof - 2; };
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nv, nv);
  for (int j = 0; j < nv; ++j) {
    const int lj = owner(j);
    const WorldInertia& c = composite[lj];
    // Every DOF on the path from the root to lj (inclusive) couples with j.
    for (int l = lj; l >= 0; l = l == 0 ? -1 : links[l].parent) {
      if (l == 0) {
        for (int i = 0; i < 3; ++i) {
          if (i > j) continue;
          mass(i, j) = mass(j, i) = Pair(s[i], c, s[j]);
        }
      } else {
        const int i = PlanarModel::JointIndex(l);
        if (i > j) continue;
        mass(i, j) = mass(j, i) = Pair(s[i], c, s[j]);
      }
    }
  }
  return mass;
}

Eigen::VectorXd InverseDynamics(const PlanarModel& model,
                                const Eigen::VectorXd& q,
                                const Eigen::VectorXd& v,
                                const Eigen::VectorXd& a) {
  CheckSizes(model, q, &v, "InverseDynamics");
  if (a.size() != model.nv()) {
    throw InvalidArgument("InverseDynamics: acceleration dimension mismatch");
  }
  const auto inertia = internal::LinkInertia(model);
  return internal::InverseDynamicsT<double>(model, inertia, q, v, a, true);
}

Eigen::VectorXd Bias(const PlanarModel& model, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& v) {
  return InverseDynamics(model, q, v, Eigen::VectorXd::Zero(model.nv()));
}

InverseDynamicsPartials InverseDynamicsDerivatives(const PlanarModel& model,
                                                   const Eigen::VectorXd& q,
                                                   const Eigen::VectorXd& v,
                                                   const Eigen::VectorXd& a) {
  CheckSizes(model, q, &v, "InverseDynamicsDerivatives");
  using Ad = Eigen::AutoDiffScalar<Eigen::VectorXd>;
  const int nv = model.nv();
  const int nd = 2 * nv;
  internal::VecX<Ad> qa(nv), va(nv), aa(nv);
  for (int i = 0; i < nv; ++i) {
    qa[i] = Ad(q[i], nd, i);
    va[i] = Ad(v[i], nd, nv + i);
    aa[i] = Ad(a[i], Eigen::VectorXd::Zero(nd));
  }
  const auto inertia = internal::LinkInertia(model);
  const internal::VecX<Ad> tau =
      internal::InverseDynamicsT<Ad>(model, inertia, qa, va, aa, true);
  InverseDynamicsPartials out;
  out.dtau_dq.resize(nv, nv);
  out.dtau_dv.resize(nv, nv);
  for (int i = 0; i < nv; ++i) {
    const Eigen::VectorXd& d = tau[i].derivatives();
    if (d.size() == nd) {
      out.dtau_dq.row(i) = d.head(nv).transpose();
      out.dtau_dv.row(i) = d.tail(nv).transpose();
    } else {
      out.dtau_dq.row(i).setZero();
      out.dtau_dv.row(i).setZero();
    }
  }
  return out;
}

Eigen::MatrixXd Regressor(const PlanarModel& model, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& v, const Eigen::VectorXd& a) {
  CheckSizes(model, q, &v, "Regressor");
  const int nl = model.num_links();
  Eigen::MatrixXd y(model.nv(), 4 * nl);
  std::vector<Eigen::Vector4d> unit(nl, Eigen::Vector4d::Zero());
  for (int l = 0; l < nl; ++l) {
    for (int p = 0; p < 4; ++p) {
      unit[l] = Eigen::Vector4d::Unit(p);
      y.col(4 * l + p) =
          internal::InverseDynamicsT<double>(model, unit, q, v, a, true);
    }
    unit[l].setZero();
  }
  return y;
}

Eigen::VectorXd StackedInertia(const PlanarModel& model) {
  Eigen::VectorXd pi(4 * model.num_links());
  for (int l = 0; l < model.num_links(); ++l) {
    pi.segment<4>(4 * l) = model.links()[l].inertia.pi;
  }
  return pi;
}

ContactKinematics ComputeContactKinematics(const PlanarModel& model,
                                           const Eigen::VectorXd& q,
                                           bool with_hessians) {
  CheckSizes(model, q, nullptr, "ComputeContactKinematics");
  const ChainGeometry geometry(model, q);
  const int nc = model.num_contacts();
  const int nv = model.nv();
  ContactKinematics out;
  out.position.resize(nc);
  out.phi.resize(nc);
  out.Jn.resize(nc, nv);
  out.Jt.resize(nc, nv);
  if (with_hessians) {
    out.Hn.resize(nc);
    out.Ht.resize(nc);
  }
  Eigen::MatrixXd jac;
  for (int i = 0; i < nc; ++i) {
    const ContactPoint& c = model.contacts()[i];
    const LinkPose& frame = geometry.frames()[c.link];
    const Eigen::Vector2d x =
        frame.position + Eigen::Rotation2Dd(frame.angle) * c.point;
    out.position[i] = x;
    out.phi[i] = x.y();
    if (with_hessians) {
      geometry.PointJacobian(c.link, x, &jac, &out.Ht[i], &out.Hn[i]);
    } else {
      geometry.PointJacobian(c.link, x, &jac, nullptr, nullptr);
    }
    out.Jt.row(i) = jac.row(0);
    out.Jn.row(i) = jac.row(1);
  }
  return out;
}

Eigen::VectorXd FreeVelocity(const PlanarModel& model, const Eigen::VectorXd& q,
                             const Eigen::VectorXd& v, const Eigen::VectorXd& u,
                             double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("FreeVelocity: dt must be positive");
  if (u.size() != model.nu()) {
    throw InvalidArgument("FreeVelocity: input dimension mismatch");
  }
  const Eigen::MatrixXd mass = MassMatrix(model, q);
  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success) {
    throw SolverError("FreeVelocity: mass matrix is not positive definite", "");
  }
  const Eigen::VectorXd rhs = model.actuation_matrix() * u - Bias(model, q, v);
  return v + dt * llt.solve(rhs);
}

Eigen::VectorXd IntegrateConfig(const Eigen::VectorXd& q,
                                const Eigen::VectorXd& v_plus, double dt) {
  if (!(dt > 0.0))
    throw InvalidArgument("IntegrateConfig: dt must be positive");
  if (q.size() != v_plus.size()) {
    throw InvalidArgument("IntegrateConfig: dimension mismatch");
  }
  return q + dt * v_plus;
}

double KineticEnergy(const PlanarModel& model, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& v) {
  CheckSizes(model, q, &v, "KineticEnergy");
  const auto& links = model.links();
  const int nl = model.num_links();
  const auto frames = ForwardKinematics(model, q);
  std::vector<double> omega(nl);
  std::vector<Eigen::Vector2d> vel(nl);
  omega[0] = v[2];
  vel[0] = v.head<2>();
  double energy = 0.0;
  for (int l = 0; l < nl; ++l) {
    if (l > 0) {
      const Link& link = links[l];
      const int p = link.parent;
      const int j = PlanarModel::JointIndex(l);
      const Eigen::Vector2d d = frames[l].position - frames[p].position;
      vel[l] = vel[p] + omega[p] * Perp<double>(d);
      omega[l] = omega[p];
      if (link.joint.type == JointType::kRevolute) {
        omega[l] += link.joint.sign * v[j];
      } else {
        vel[l] +=
            v[j] * (Eigen::Rotation2Dd(frames[l].angle) * link.joint.axis);
      }
    }
    const InertialParams2D& in = links[l].inertia;
    const Eigen::Vector2d rh =
        Eigen::Rotation2Dd(frames[l].angle) * in.first_moment();
    energy += 0.5 * in.mass() * vel[l].squaredNorm() +
              omega[l] * vel[l].dot(Perp<double>(rh)) +
              0.5 * in.iz() * omega[l] * omega[l];
  }
  return energy;
}

double PotentialEnergy(const PlanarModel& model, const Eigen::VectorXd& q) {
  const auto frames = ForwardKinematics(model, q);
  double energy = 0.0;
  for (int l = 0; l < model.num_links(); ++l) {
    const InertialParams2D& in = model.links()[l].inertia;
    const Eigen::Vector2d moment =
        in.mass() * frames[l].position +
        Eigen::Rotation2Dd(frames[l].angle) * in.first_moment();
    energy -= model.gravity().dot(moment);
  }
  return energy;
}

}  // namespace prime
