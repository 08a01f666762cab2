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

#include <utility>
#include <vector>

#include "estimator_impl.h"
#include "prime/dynamics.h"
#include "prime/errors.h"

namespace prime::internal {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Augmented state [q; v; theta_selected] with theta constant in time.
class EstimationShooting : public ShootingProblem {
 public:
  EstimationShooting(const EstimationProblem& problem,
                     const Transition& transition,
                     std::vector<ThetaIndex> identify)
      : problem_(problem),
        transition_(transition),
        identify_(std::move(identify)),
        nv_(problem.model.nv()),
        np_(static_cast<int>(identify_.size())),
        T_(problem.horizon()),
        prior_thetas_(ModelThetas(problem.model)) {
    prior_selected_.resize(np_);
    for (int i = 0; i < np_; ++i) {
      prior_selected_[i] =
          prior_thetas_[identify_[i].link].theta[identify_[i].param];
    }
    for (const MeasurementSample& y : problem.measurements) {
      ys_.push_back(y.Stacked());
      measurement_weights_.push_back(
          MeasurementWeights(problem.weights, y.mask, nv_));
    }
    prior_weights_ = PriorWeights(problem.weights, nv_);
    process_weights_ = ProcessWeights(problem.weights, nv_);
  }

  void set_initial_prior(VectorXd x0) { x0_prior_ = std::move(x0); }
  const VectorXd& prior_selected() const { return prior_selected_; }

  int horizon() const override { return T_; }
  int state_dim() const override { return 2 * nv_ + np_; }
  int disturbance_dim() const override { return nv_; }

  std::vector<LogCholeskyParams2D> Thetas(const VectorXd& x) const {
    std::vector<LogCholeskyParams2D> thetas = prior_thetas_;
    for (int i = 0; i < np_; ++i) {
      thetas[identify_[i].link].theta[identify_[i].param] = x[2 * nv_ + i];
    }
    return thetas;
  }

  PlanarModel ModelAt(const VectorXd& x) const {
    if (np_ == 0) return problem_.model;
    return ModelWithThetas(problem_.model, Thetas(x));
  }

  static State Split(const VectorXd& x, int nv) {
    return {x.head(nv), x.segment(nv, nv)};
  }

  VectorXd Dynamics(int k, const VectorXd& x,
                    const VectorXd& w) const override {
    const TransitionResult r = transition_(k, ModelAt(x), Split(x, nv_), false);
    return Next(x, r.v_plus + w);
  }

  DynamicsDerivatives Linearize(int k, const VectorXd& x,
                                const VectorXd& w) const override {
    const PlanarModel model = ModelAt(x);
    const TransitionResult r = transition_(k, model, Split(x, nv_), true);
    const int n = state_dim();
    const double dt = problem_.dt;
    DynamicsDerivatives d;
    d.next = Next(x, r.v_plus + w);
    d.fx = MatrixXd::Zero(n, n);
    d.fx.block(nv_, 0, nv_, nv_) = r.dv_dq;
    d.fx.block(nv_, nv_, nv_, nv_) = r.dv_dv;
    if (np_ > 0) {
      d.fx.block(nv_, 2 * nv_, nv_, np_) =
          ThetaJacobian(r.dv_dpi, Thetas(x), identify_);
      d.fx.bottomRightCorner(np_, np_).setIdentity();
    }
    d.fx.topRows(nv_) = dt * d.fx.middleRows(nv_, nv_);
    d.fx.topLeftCorner(nv_, nv_).diagonal().array() += 1.0;
    d.fw = MatrixXd::Zero(n, nv_);
    d.fw.topRows(nv_).diagonal().setConstant(dt);
    d.fw.middleRows(nv_, nv_).setIdentity();
    return d;
  }

  double Cost(int k, const VectorXd& x, const VectorXd& w) const override {
    const Terms t = CostTerms(k, x, w);
    return t.measurement + t.prior + t.parameter + t.process;
  }

  CostDerivatives CostQuadratic(int k, const VectorXd& x,
                                const VectorXd& w) const override {
    const int n = state_dim();
    CostDerivatives d;
    VectorXd hx = VectorXd::Zero(n);
    hx.head(2 * nv_) = 2.0 * measurement_weights_[k];
    d.lx = VectorXd::Zero(n);
    d.lx.head(2 * nv_) =
        hx.head(2 * nv_).cwiseProduct(x.head(2 * nv_) - ys_[k]);
    if (k == 0) {
      d.lx.head(2 * nv_) +=
          2.0 * prior_weights_.cwiseProduct(x.head(2 * nv_) - x0_prior_);
      hx.head(2 * nv_) += 2.0 * prior_weights_;
      d.lx.tail(np_) =
          2.0 * problem_.weights.parameter * (x.tail(np_) - prior_selected_);
      hx.tail(np_).setConstant(2.0 * problem_.weights.parameter);
    }
    d.lxx = hx.asDiagonal();
    if (k < T_) {
      d.lw = 2.0 * process_weights_.cwiseProduct(w);
      d.lww = (2.0 * process_weights_).asDiagonal();
      d.lwx = MatrixXd::Zero(nv_, n);
    } else {
      d.lw.resize(0);
      d.lww.resize(0, 0);
      d.lwx.resize(0, n);
    }
    return d;
  }

  struct Terms {
    double measurement = 0.0;
    double prior = 0.0;
    double parameter = 0.0;
    double process = 0.0;
  };

  Terms CostTerms(int k, const VectorXd& x, const VectorXd& w) const {
    Terms t;
    const VectorXd r = x.head(2 * nv_) - ys_[k];
    t.measurement = r.dot(measurement_weights_[k].cwiseProduct(r));
    if (k == 0) {
      const VectorXd e = x.head(2 * nv_) - x0_prior_;
      t.prior = e.dot(prior_weights_.cwiseProduct(e));
      t.parameter = problem_.weights.parameter *
                    (x.tail(np_) - prior_selected_).squaredNorm();
    }
    if (k < T_) t.process = w.dot(process_weights_.cwiseProduct(w));
    return t;
  }

 private:
  VectorXd Next(const VectorXd& x, const VectorXd& v_plus) const {
    VectorXd next(x.size());
    next.head(nv_) = x.head(nv_) + problem_.dt * v_plus;
    next.segment(nv_, nv_) = v_plus;
    next.tail(np_) = x.tail(np_);
    return next;
  }

  const EstimationProblem& problem_;
  const Transition& transition_;
  std::vector<ThetaIndex> identify_;
  int nv_;
  int np_;
  int T_;
  std::vector<LogCholeskyParams2D> prior_thetas_;
  VectorXd prior_selected_;
  std::vector<VectorXd> ys_;
  std::vector<VectorXd> measurement_weights_;
  VectorXd prior_weights_;
  VectorXd process_weights_;
  VectorXd x0_prior_;
};

}  // namespace

Transition SmoothedTransition(const EstimationProblem& problem) {
  const SmoothingConfig config = problem.smoothing;
  const double dt = problem.dt;
  const std::vector<VectorXd>* inputs = &problem.inputs;
  return [config, dt, inputs](int k, const PlanarModel& model, const State& x,
                              bool derivatives) {
    TransitionResult r;
    const VectorXd& u = (*inputs)[k];
    if (derivatives) {
      const StepJacobians j = StepDerivatives(model, x, u, dt, config);
      const int nv = model.nv();
      r.v_plus = j.result.v_plus;
      r.lambda_n = j.result.lambda_n;
      r.lambda_t = j.result.lambda_t;
      r.dv_dq = j.A.block(nv, 0, nv, nv);
      r.dv_dv = j.A.block(nv, nv, nv, nv);
      r.dv_dpi = j.B_pi.bottomRows(nv);
    } else {
      const ContactStepResult s = SolveSmoothed(model, x.q, x.v, u, dt, config);
      if (!s.converged) {
        throw SolverError("smoothed contact step did not converge at node " +
                          std::to_string(k));
      }
      r.v_plus = s.v_plus;
      r.lambda_n = s.lambda_n;
      r.lambda_t = s.lambda_t;
    }
    return r;
  };
}

std::vector<LogCholeskyParams2D> ModelThetas(const PlanarModel& model) {
  std::vector<LogCholeskyParams2D> thetas;
  for (int l = 0; l < model.num_links(); ++l) {
    thetas.push_back(LinkTheta(model, l));
  }
  return thetas;
}

PlanarModel ModelWithThetas(const PlanarModel& model,
                            const std::vector<LogCholeskyParams2D>& theta) {
  if (static_cast<int>(theta.size()) != model.num_links()) {
    throw InvalidArgument("ModelWithThetas: one theta per link expected");
  }
  // Links whose theta equals the model's own lift keep their exact inertia.
  PlanarModel out = model;
  for (int l = 0; l < model.num_links(); ++l) {
    if (theta[l].theta != LinkTheta(model, l).theta) {
      out = SetLinkTheta(out, l, theta[l]);
    }
  }
  return out;
}

CostBreakdown ObjectiveWith(const EstimationProblem& problem,
                            const Transition& transition,
                            const std::vector<State>& states,
                            const std::vector<LogCholeskyParams2D>& theta) {
  const int T = problem.horizon();
  const int nv = problem.model.nv();
  if (static_cast<int>(states.size()) != T + 1) {
    throw InvalidArgument("Objective: expected " + std::to_string(T + 1) +
                          " states");
  }
  for (const State& x : states) {
    if (x.q.size() != nv || x.v.size() != nv) {
      throw InvalidArgument("Objective: state dimension does not match model");
    }
  }
  const PlanarModel model = ModelWithThetas(problem.model, theta);
  const std::vector<LogCholeskyParams2D> prior = ModelThetas(problem.model);
  const std::vector<State> seeds = SeedStates(problem);
  const VectorXd x0_prior = problem.initial_prior
                                ? problem.initial_prior->Stacked()
                                : seeds[0].Stacked();

  CostBreakdown c;
  const VectorXd wd = ProcessWeights(problem.weights, nv);
  const VectorXd w0 = PriorWeights(problem.weights, nv);
  for (int k = 0; k <= T; ++k) {
    const MeasurementSample& y = problem.measurements[k];
    const VectorXd r = states[k].Stacked() - y.Stacked();
    c.measurement +=
        r.dot(MeasurementWeights(problem.weights, y.mask, nv).cwiseProduct(r));
    if (k < T) {
      const VectorXd delta =
          states[k + 1].v - transition(k, model, states[k], false).v_plus;
      c.process += delta.dot(wd.cwiseProduct(delta));
    }
  }
  const VectorXd e = states[0].Stacked() - x0_prior;
  c.prior = e.dot(w0.cwiseProduct(e));
  for (size_t l = 0; l < prior.size(); ++l) {
    c.parameter += problem.weights.parameter *
                   (theta[l].theta - prior[l].theta).squaredNorm();
  }
  return c;
}

EstimationSolution Solve(const EstimationProblem& problem,
                         const Transition& transition, bool feasibility_driven,
                         const std::vector<ThetaIndex>& identify,
                         const WarmStart* warm, WarmStart* final_iterate) {
  const int T = problem.horizon();
  const int nv = problem.model.nv();
  EstimationShooting shooting(problem, transition, identify);
  const std::vector<State> seeds = SeedStates(problem);
  shooting.set_initial_prior(problem.initial_prior
                                 ? problem.initial_prior->Stacked()
                                 : seeds[0].Stacked());
  const int n = shooting.state_dim();
  std::vector<VectorXd> xs(T + 1, VectorXd(n));
  for (int k = 0; k <= T; ++k) {
    xs[k] << seeds[k].Stacked(), shooting.prior_selected();
  }
  std::vector<VectorXd> ws(T, VectorXd::Zero(nv));
  if (warm != nullptr) {
    xs = warm->xs;
    ws = warm->ws;
  } else if (!feasibility_driven) {
    // Disturbances that make the rollout reproduce the seeded velocities.
    VectorXd x = xs[0];
    for (int k = 0; k < T; ++k) {
      const VectorXd free = shooting.Dynamics(k, x, ws[k]);
      ws[k] = seeds[k + 1].v - free.segment(nv, nv);
      x = shooting.Dynamics(k, x, ws[k]);
    }
  }

  DdpOptions options;
  options.max_iterations = problem.solver.max_iterations;
  options.tolerance = problem.solver.tolerance;
  options.stationarity_tolerance = problem.solver.stationarity_tolerance;
  options.feasibility_driven = feasibility_driven;
  options.threads = problem.solver.threads;
  DdpResult result = SolveDdp(shooting, std::move(xs), std::move(ws), options);

  EstimationSolution s;
  s.kappa = problem.smoothing.kappa;
  s.theta = shooting.Thetas(result.xs[0]);
  s.model = shooting.ModelAt(result.xs[0]);
  for (const VectorXd& x : result.xs) {
    s.states.push_back(EstimationShooting::Split(x, nv));
  }
  for (int k = 0; k < T; ++k) {
    const TransitionResult r = transition(k, s.model, s.states[k], false);
    s.disturbances.push_back(s.states[k + 1].v - r.v_plus);
    s.lambda_n.push_back(r.lambda_n);
    s.lambda_t.push_back(r.lambda_t);
    s.cone_violations += r.cone_violations;
    s.pseudo_inverse_fallbacks += r.pseudo_inverse ? 1 : 0;
  }
  s.cost = ObjectiveWith(problem, transition, s.states, s.theta);
  s.gap_norm = result.gap_norm;
  s.trace = std::move(result.trace);
  s.trace_kappa.assign(s.trace.size(), problem.smoothing.kappa);
  s.converged = result.converged;
  s.iterations = result.iterations;
  s.message = std::move(result.message);
  if (final_iterate != nullptr) {
    final_iterate->xs = std::move(result.xs);
    final_iterate->ws = std::move(result.ws);
  }
  return s;
}

}  // namespace prime::internal
