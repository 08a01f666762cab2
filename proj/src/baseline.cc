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

// Fixed-contact-sequence baseline: contacts flagged active by a height
// threshold on the measured configuration are rigid (J v+ = 0); the rest
// are open. The friction cone is not enforced; impulses outside it are
// clamped for reporting and counted.

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <vector>

#include "estimator_impl.h"
#include "prime/dynamics.h"
#include "prime/errors.h"

namespace prime {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct RigidStep {
  VectorXd v_plus;
  VectorXd lambda_n;
  VectorXd lambda_t;
  bool pseudo_inverse = false;
};

// Equality-constrained step: v+ = v_free + M^-1 J^T lambda with J v+ = 0.
RigidStep SolveRigid(const PlanarModel& model, const State& x,
                     const VectorXd& u, double dt,
                     const std::vector<bool>& active) {
  const int nc = model.num_contacts();
  RigidStep s;
  s.v_plus = FreeVelocity(model, x.q, x.v, u, dt);
  s.lambda_n = VectorXd::Zero(nc);
  s.lambda_t = VectorXd::Zero(nc);
  std::vector<int> rows;
  for (int i = 0; i < nc; ++i) {
    if (active[i]) rows.push_back(i);
  }
  if (rows.empty()) return s;

  const ContactKinematics kin = ComputeContactKinematics(model, x.q, false);
  const int na = static_cast<int>(rows.size());
  MatrixXd J(2 * na, model.nv());
  for (int a = 0; a < na; ++a) {
    J.row(2 * a) = kin.Jn.row(rows[a]);
    J.row(2 * a + 1) = kin.Jt.row(rows[a]);
  }
  const Eigen::LLT<MatrixXd> mass(MassMatrix(model, x.q));
  const MatrixXd minv_jt = mass.solve(J.transpose());
  MatrixXd S = J * minv_jt;
  S = 0.5 * (S + S.transpose()).eval();
  const VectorXd rhs = -J * s.v_plus;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
  VectorXd lambda;
  if (eig.eigenvalues().minCoeff() > 1e-10 * std::max(top, 1e-300)) {
    lambda = S.ldlt().solve(rhs);
  } else {
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(S);
    cod.setThreshold(1e-10);
    lambda = cod.solve(rhs);
    s.pseudo_inverse = true;
  }
  s.v_plus += minv_jt * lambda;
  for (int a = 0; a < na; ++a) {
    s.lambda_n[rows[a]] = lambda[2 * a];
    s.lambda_t[rows[a]] = lambda[2 * a + 1];
  }
  return s;
}

}  // namespace

EstimationSolution BaselineFixedContactEstimate(
    const EstimationProblem& problem, double height_threshold) {
  problem.Validate();
  if (!std::isfinite(height_threshold)) {
    throw InvalidArgument("BaselineFixedContactEstimate: bad threshold");
  }
  const std::vector<State> seeds = SeedStates(problem);
  const int nc = problem.model.num_contacts();
  std::vector<std::vector<bool>> flags;
  for (const State& x : seeds) {
    const ContactKinematics kin =
        ComputeContactKinematics(problem.model, x.q, false);
    std::vector<bool> f(nc);
    for (int i = 0; i < nc; ++i) f[i] = kin.phi[i] < height_threshold;
    flags.push_back(f);
  }

  const double dt = problem.dt;
  const std::vector<VectorXd>* inputs = &problem.inputs;
  const std::vector<std::vector<bool>>* flag_ptr = &flags;
  // The transition into node k+1 uses that node's flags. Derivatives are
  // central differences in (q, v): the rigid step is smooth for a fixed
  // active set. Parameters are not identified, so d/dpi is not needed.
  const internal::Transition transition =
      [dt, inputs, flag_ptr](int k, const PlanarModel& model, const State& x,
                             bool derivatives) {
        const VectorXd& u = (*inputs)[k];
        const std::vector<bool>& active = (*flag_ptr)[k + 1];
        const RigidStep s = SolveRigid(model, x, u, dt, active);
        internal::TransitionResult r;
        r.v_plus = s.v_plus;
        r.pseudo_inverse = s.pseudo_inverse;
        r.lambda_n = s.lambda_n;
        r.lambda_t = s.lambda_t;
        for (int i = 0; i < model.num_contacts(); ++i) {
          const double mu = model.contacts()[i].mu;
          const double n = std::max(r.lambda_n[i], 0.0);
          const double t = std::clamp(r.lambda_t[i], -mu * n, mu * n);
          if (n != r.lambda_n[i] || t != r.lambda_t[i]) ++r.cone_violations;
          r.lambda_n[i] = n;
          r.lambda_t[i] = t;
        }
        if (!derivatives) return r;
        const int nv = model.nv();
        const double h = 1e-6;
        r.dv_dq.resize(nv, nv);
        r.dv_dv.resize(nv, nv);
        for (int i = 0; i < nv; ++i) {
          State xp = x, xm = x;
          xp.q[i] += h;
          xm.q[i] -= h;
          r.dv_dq.col(i) = (SolveRigid(model, xp, u, dt, active).v_plus -
                            SolveRigid(model, xm, u, dt, active).v_plus) /
                           (2.0 * h);
          xp = x;
          xm = x;
          xp.v[i] += h;
          xm.v[i] -= h;
          r.dv_dv.col(i) = (SolveRigid(model, xp, u, dt, active).v_plus -
                            SolveRigid(model, xm, u, dt, active).v_plus) /
                           (2.0 * h);
        }
        return r;
      };

  EstimationSolution s = internal::Solve(problem, transition,
                                         problem.solver.fddp, /*identify=*/{});
  s.contact_flags = std::move(flags);
  return s;
}

}  // namespace prime
