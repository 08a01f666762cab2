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

#include "prime/gradcheck.h"

#include <algorithm>
#include <functional>
#include <vector>

#include "prime/dynamics.h"
#include "prime/errors.h"
#include "prime/inertia.h"
#include "prime/rng.h"

namespace prime {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd Central(const std::function<VectorXd(const VectorXd&)>& f,
                 const VectorXd& x, double h) {
  const VectorXd f0 = f(x);
  MatrixXd jac(f0.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    jac.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

double Relative(const MatrixXd& analytic, const MatrixXd& numeric) {
  if (numeric.size() == 0) return 0.0;
  return (analytic - numeric).cwiseAbs().maxCoeff() /
         std::max(1.0, numeric.cwiseAbs().maxCoeff());
}

double Centered(Rng& rng, double half_width) {
  return half_width * (2.0 * rng.Uniform() - 1.0);
}

// Perturbed reference with the lowest contact 0 to 5 mm above the ground,
// moving down.
State Sample(const PlanarModel& model, const State& reference, Rng& rng) {
  State x = reference;
  x.q[0] += Centered(rng, 0.5);
  x.q[2] += Centered(rng, 0.1);
  for (int j = 3; j < model.nq(); ++j) x.q[j] += Centered(rng, 0.1);
  if (model.num_contacts() > 0) {
    const double lowest =
        ComputeContactKinematics(model, x.q, false).phi.minCoeff();
    x.q[1] += -lowest + 0.005 * rng.Uniform();
  }
  x.v[0] = Centered(rng, 0.1);
  x.v[1] = -0.3 - 1.5 * rng.Uniform();
  for (int j = 2; j < model.nv(); ++j) x.v[j] = Centered(rng, 0.25);
  return x;
}

}  // namespace

double GradCheckReport::worst_step() const {
  return std::max({a, b_u, b_theta});
}

double GradCheckReport::worst_inertia() const {
  return std::max(inertia_2d, inertia_3d);
}

GradCheckReport RunGradCheck(const PlanarModel& model,
                             const GradCheckOptions& options) {
  if (options.samples < 1) {
    throw InvalidArgument("RunGradCheck: samples must be >= 1");
  }
  model.Validate();
  State reference = options.reference.value_or(State::Zero(model));
  if (reference.q.size() != model.nq() || reference.v.size() != model.nv()) {
    throw InvalidArgument("RunGradCheck: reference state dimension");
  }
  Rng rng(options.seed);
  const double h = options.step;
  const double dt = options.dt;
  const StepOptions step{Stepper::kSmoothed, options.smoothing};
  GradCheckReport report;
  std::vector<ThetaIndex> all;
  for (int l = 0; l < model.num_links(); ++l) {
    for (int p = 0; p < 6; ++p) all.push_back({l, p});
  }
  std::vector<LogCholeskyParams2D> thetas;
  for (int l = 0; l < model.num_links(); ++l) {
    thetas.push_back(LinkTheta(model, l));
  }
  VectorXd theta_all(6 * model.num_links());
  for (int l = 0; l < model.num_links(); ++l) {
    theta_all.segment<6>(6 * l) = thetas[l].theta;
  }

  while (report.samples < options.samples) {
    if (report.resampled > 100 * options.samples) {
      throw SolverError("RunGradCheck: too many rejected samples");
    }
    const State x = Sample(model, reference, rng);
    VectorXd u(model.nu());
    for (int i = 0; i < u.size(); ++i) u[i] = Centered(rng, 50.0);
    StepJacobians d;
    try {
      d = StepDerivatives(model, x, u, dt, options.smoothing);
    } catch (const SolverError&) {
      ++report.resampled;
      continue;
    }
    if (d.result.slack.size() > 0 &&
        d.result.slack.minCoeff() < options.min_slack) {
      ++report.resampled;
      continue;
    }
    const int nv = model.nv();
    const MatrixXd a = Central(
        [&](const VectorXd& s) {
          return Step(model, State::FromStacked(s, nv), u, dt, step).Stacked();
        },
        x.Stacked(), h);
    const MatrixXd b_u = Central(
        [&](const VectorXd& w) {
          return Step(model, x, w, dt, step).Stacked();
        },
        u, h);
    const MatrixXd b_theta = Central(
        [&](const VectorXd& t) {
          PlanarModel m = model;
          for (int l = 0; l < model.num_links(); ++l) {
            m = SetLinkTheta(m, l, {t.segment<6>(6 * l)});
          }
          return Step(m, x, u, dt, step).Stacked();
        },
        theta_all, h);
    report.a = std::max(report.a, Relative(d.A, a));
    report.b_u = std::max(report.b_u, Relative(d.B_u, b_u));
    report.b_theta = std::max(
        report.b_theta, Relative(ThetaJacobian(d.B_pi, thetas, all), b_theta));

    LogCholeskyParams2D t2;
    for (int i = 0; i < 6; ++i) t2.theta[i] = Centered(rng, 1.0);
    const MatrixXd j2 = Central(
        [](const VectorXd& t) -> VectorXd {
          return ThetaToPi2d({Vector6d(t)}).pi;
        },
        t2.theta, h);
    report.inertia_2d =
        std::max(report.inertia_2d, Relative(PiJacobian2d(t2), j2));
    LogCholeskyParams3D t3;
    for (int i = 0; i < 10; ++i) t3.theta[i] = Centered(rng, 1.0);
    const MatrixXd j3 = Central(
        [](const VectorXd& t) -> VectorXd {
          return ThetaToPi3d({Vector10d(t)}).pi;
        },
        t3.theta, h);
    report.inertia_3d =
        std::max(report.inertia_3d, Relative(PiJacobian3d(t3), j3));
    ++report.samples;
  }
  return report;
}

}  // namespace prime
