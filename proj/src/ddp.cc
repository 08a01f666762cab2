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

#include <Eigen/Cholesky>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "prime/errors.h"

namespace prime {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Runs fn(0..n-1) on up to `threads` workers. The first exception thrown is
// rethrown on the calling thread.
void ParallelFor(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min(threads, n);
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct NodeModel {
  DynamicsDerivatives dynamics;
  CostDerivatives cost;
  VectorXd gap;  // f_k(x_k, w_k) - x_{k+1}; zero-length at k = T
};

struct Policy {
  VectorXd dx0;
  std::vector<VectorXd> k;
  std::vector<MatrixXd> K;
};

void CheckDimensions(const ShootingProblem& problem,
                     const std::vector<VectorXd>& xs,
                     const std::vector<VectorXd>& ws) {
  const int T = problem.horizon();
  if (T < 0) throw InvalidArgument("SolveDdp: negative horizon");
  if (static_cast<int>(xs.size()) != T + 1 ||
      static_cast<int>(ws.size()) != T) {
    throw InvalidArgument("SolveDdp: expected " + std::to_string(T + 1) +
                          " states and " + std::to_string(T) + " disturbances");
  }
  for (const auto& x : xs) {
    if (x.size() != problem.state_dim() || !x.allFinite()) {
      throw InvalidArgument("SolveDdp: bad state in initial guess");
    }
  }
  for (const auto& w : ws) {
    if (w.size() != problem.disturbance_dim() || !w.allFinite()) {
      throw InvalidArgument("SolveDdp: bad disturbance in initial guess");
    }
  }
}

std::vector<NodeModel> LinearizeAll(const ShootingProblem& problem,
                                    const std::vector<VectorXd>& xs,
                                    const std::vector<VectorXd>& ws,
                                    int threads) {
  const int T = problem.horizon();
  std::vector<NodeModel> nodes(T + 1);
  const VectorXd no_w = VectorXd::Zero(problem.disturbance_dim());
  ParallelFor(T + 1, threads, [&](int k) {
    const VectorXd& w = k < T ? ws[k] : no_w;
    nodes[k].cost = problem.CostQuadratic(k, xs[k], w);
    if (k < T) {
      nodes[k].dynamics = problem.Linearize(k, xs[k], w);
      nodes[k].gap = nodes[k].dynamics.next - xs[k + 1];
    }
  });
  return nodes;
}

// Backward Riccati sweep. Returns false if some regularized Q_ww or the
// initial-node Hessian is not positive definite.
bool BackwardPass(const std::vector<NodeModel>& nodes, double eta,
                  Policy* policy) {
  const int T = static_cast<int>(nodes.size()) - 1;
  policy->k.assign(T, VectorXd());
  policy->K.assign(T, MatrixXd());
  VectorXd vx = nodes[T].cost.lx;
  MatrixXd vxx = nodes[T].cost.lxx;
  for (int k = T - 1; k >= 0; --k) {
    const NodeModel& n = nodes[k];
    const MatrixXd& fx = n.dynamics.fx;
    const MatrixXd& fw = n.dynamics.fw;
    // The defect shifts the expansion point of the next value function.
    const VectorXd vx_next = vx + vxx * n.gap;
    const VectorXd qx = n.cost.lx + fx.transpose() * vx_next;
    const VectorXd qw = n.cost.lw + fw.transpose() * vx_next;
    const MatrixXd vxx_fx = vxx * fx;
    const MatrixXd vxx_fw = vxx * fw;
    const MatrixXd qxx = n.cost.lxx + fx.transpose() * vxx_fx;
    const MatrixXd qww = n.cost.lww + fw.transpose() * vxx_fw;
    const MatrixXd qwx = n.cost.lwx + fw.transpose() * vxx_fx;

    MatrixXd reg = qww;
    reg.diagonal().array() += eta;
    Eigen::LLT<MatrixXd> llt(reg);
    if (llt.info() != Eigen::Success) return false;
    policy->k[k] = -llt.solve(qw);
    policy->K[k] = -llt.solve(qwx);
    const VectorXd& kk = policy->k[k];
    const MatrixXd& KK = policy->K[k];

    vx = qx + KK.transpose() * qww * kk + KK.transpose() * qw +
         qwx.transpose() * kk;
    vxx = qxx + KK.transpose() * qww * KK + KK.transpose() * qwx +
          qwx.transpose() * KK;
    vxx = 0.5 * (vxx + vxx.transpose()).eval();
    if (!vx.allFinite() || !vxx.allFinite()) return false;
  }
  MatrixXd reg = vxx;
  reg.diagonal().array() += eta;
  Eigen::LLT<MatrixXd> llt(reg);
  if (llt.info() != Eigen::Success) return false;
  policy->dx0 = -llt.solve(vx);
  return policy->dx0.allFinite();
}

// Slope d1 and curvature d2 of the quadratic model along the full step,
// propagated through the linearized dynamics including defects. The model
// change at step size a is a d1 + a^2 d2 / 2.
std::pair<double, double> ExpectedChange(const std::vector<NodeModel>& nodes,
                                         const Policy& policy) {
  const int T = static_cast<int>(nodes.size()) - 1;
  double d1 = 0.0;
  double d2 = 0.0;
  VectorXd dx = policy.dx0;
  for (int k = 0; k < T; ++k) {
    const NodeModel& n = nodes[k];
    const VectorXd dw = policy.k[k] + policy.K[k] * dx;
    d1 += n.cost.lx.dot(dx) + n.cost.lw.dot(dw);
    d2 += dx.dot(n.cost.lxx * dx) + 2.0 * dw.dot(n.cost.lwx * dx) +
          dw.dot(n.cost.lww * dw);
    dx = n.dynamics.fx * dx + n.dynamics.fw * dw + n.gap;
  }
  d1 += nodes[T].cost.lx.dot(dx);
  d2 += dx.dot(nodes[T].cost.lxx * dx);
  return {d1, d2};
}

// Gradient of the single-shooting cost with respect to (x_0, w_0, ...)
// through the adjoint recursion. Only meaningful for a feasible iterate.
double ReducedGradientNorm(const std::vector<NodeModel>& nodes) {
  const int T = static_cast<int>(nodes.size()) - 1;
  VectorXd adjoint = nodes[T].cost.lx;
  double sq = 0.0;
  for (int k = T - 1; k >= 0; --k) {
    const NodeModel& n = nodes[k];
    sq += (n.cost.lw + n.dynamics.fw.transpose() * adjoint).squaredNorm();
    adjoint = n.cost.lx + n.dynamics.fx.transpose() * adjoint;
  }
  return std::sqrt(sq + adjoint.squaredNorm());
}

// Nonlinear rollout of the policy at step size alpha. Defects shrink by the
// factor (1 - alpha).
bool ForwardPass(const ShootingProblem& problem,
                 const std::vector<VectorXd>& xs,
                 const std::vector<VectorXd>& ws,
                 const std::vector<NodeModel>& nodes, const Policy& policy,
                 double alpha, std::vector<VectorXd>* xs_new,
                 std::vector<VectorXd>* ws_new) {
  const int T = problem.horizon();
  xs_new->assign(T + 1, VectorXd());
  ws_new->assign(T, VectorXd());
  (*xs_new)[0] = xs[0] + alpha * policy.dx0;
  try {
    for (int k = 0; k < T; ++k) {
      const VectorXd dx = (*xs_new)[k] - xs[k];
      (*ws_new)[k] = ws[k] + alpha * policy.k[k] + policy.K[k] * dx;
      VectorXd next = problem.Dynamics(k, (*xs_new)[k], (*ws_new)[k]);
      if (alpha < 1.0) next -= (1.0 - alpha) * nodes[k].gap;
      if (!next.allFinite()) return false;
      (*xs_new)[k + 1] = std::move(next);
    }
  } catch (const SolverError&) {
    return false;
  }
  return true;
}

}  // namespace

double TrajectoryCost(const ShootingProblem& problem,
                      const std::vector<VectorXd>& xs,
                      const std::vector<VectorXd>& ws) {
  const int T = problem.horizon();
  double cost = 0.0;
  for (int k = 0; k < T; ++k) cost += problem.Cost(k, xs[k], ws[k]);
  cost += problem.Cost(T, xs[T], VectorXd::Zero(problem.disturbance_dim()));
  return cost;
}

double MaxGap(const ShootingProblem& problem, const std::vector<VectorXd>& xs,
              const std::vector<VectorXd>& ws) {
  double gap = 0.0;
  for (int k = 0; k < problem.horizon(); ++k) {
    gap = std::max(gap, (problem.Dynamics(k, xs[k], ws[k]) - xs[k + 1])
                            .lpNorm<Eigen::Infinity>());
  }
  return gap;
}

std::vector<VectorXd> Rollout(const ShootingProblem& problem,
                              const VectorXd& x0,
                              const std::vector<VectorXd>& ws) {
  std::vector<VectorXd> xs(ws.size() + 1);
  xs[0] = x0;
  for (size_t k = 0; k < ws.size(); ++k) {
    xs[k + 1] = problem.Dynamics(static_cast<int>(k), xs[k], ws[k]);
  }
  return xs;
}

DdpResult SolveDdp(const ShootingProblem& problem, std::vector<VectorXd> xs,
                   std::vector<VectorXd> ws, const DdpOptions& options) {
  CheckDimensions(problem, xs, ws);
  if (options.max_iterations < 0 || options.line_search_steps < 1 ||
      !(options.tolerance >= 0.0) || !(options.regularization_min > 0.0) ||
      !(options.regularization_max >= options.regularization_min)) {
    throw InvalidArgument("SolveDdp: invalid options");
  }
  if (!options.feasibility_driven) xs = Rollout(problem, xs[0], ws);

  DdpResult result;
  double cost = TrajectoryCost(problem, xs, ws);
  double gap = options.feasibility_driven ? MaxGap(problem, xs, ws) : 0.0;
  if (!std::isfinite(cost)) {
    throw SolverError("SolveDdp: initial guess has non-finite cost");
  }
  double eta =
      std::clamp(options.regularization_init, options.regularization_min,
                 options.regularization_max);
  result.trace.push_back({0, cost, gap, 0.0, eta, 0.0, true});

  std::vector<NodeModel> nodes;
  bool stale = true;
  std::vector<VectorXd> xs_trial;
  std::vector<VectorXd> ws_trial;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;
    if (stale) {
      nodes = LinearizeAll(problem, xs, ws, options.threads);
      stale = false;
    }
    const bool feasible = gap <= options.gap_tolerance;
    const double scale = options.tolerance * (1.0 + std::abs(cost));
    if (feasible &&
        ReducedGradientNorm(nodes) <=
            options.stationarity_tolerance * (1.0 + std::abs(cost))) {
      result.converged = true;
      result.message = "gradient below tolerance";
      result.iterations = iter - 1;
      break;
    }

    Policy policy;
    if (!BackwardPass(nodes, eta, &policy)) {
      result.trace.push_back({iter, cost, gap, 0.0, eta, 0.0, false});
      eta *= 2.0;
      if (eta > options.regularization_max) {
        result.message = "regularization exceeded its cap in backward pass";
        break;
      }
      continue;
    }
    const auto [d1, d2] = ExpectedChange(nodes, policy);
    if (feasible && -(d1 + 0.5 * d2) <= scale && -d1 <= scale) {
      result.converged = true;
      result.message = "predicted decrease below tolerance";
      result.iterations = iter - 1;
      break;
    }

    bool accepted = false;
    double alpha = 1.0;
    double new_cost = cost;
    double expected = 0.0;
    for (int ls = 0; ls < options.line_search_steps; ++ls, alpha *= 0.5) {
      if (!ForwardPass(problem, xs, ws, nodes, policy, alpha, &xs_trial,
                       &ws_trial)) {
        continue;
      }
      new_cost = TrajectoryCost(problem, xs_trial, ws_trial);
      if (!std::isfinite(new_cost)) continue;
      expected = alpha * d1 + 0.5 * alpha * alpha * d2;
      const double change = new_cost - cost;
      if (expected < 0.0) {
        accepted = change <= options.armijo * expected;
      } else {
        // Closing defects may legitimately raise the cost; bound the rise
        // by the model.
        accepted = !feasible && change <= 2.0 * expected + scale;
      }
      if (accepted) break;
    }

    if (!accepted) {
      result.trace.push_back({iter, cost, gap, 0.0, eta, 0.0, false});
      eta *= 2.0;
      if (eta > options.regularization_max) {
        result.message = "line search failed with regularization at its cap";
        break;
      }
      continue;
    }

    const double decrease = cost - new_cost;
    xs.swap(xs_trial);
    ws.swap(ws_trial);
    stale = true;
    cost = new_cost;
    gap = options.feasibility_driven ? (1.0 - alpha) * gap : 0.0;
    if (alpha == 1.0) gap = 0.0;
    eta = std::max(eta * 0.5, options.regularization_min);
    result.trace.push_back({iter, cost, gap, alpha, eta, -expected, true});

    if (feasible && gap <= options.gap_tolerance &&
        std::abs(decrease) <= scale) {
      result.converged = true;
      result.message = "relative cost decrease below tolerance";
      break;
    }
  }
  if (!result.converged && result.message.empty()) {
    result.message = "iteration limit reached";
  }
  if (options.feasibility_driven) gap = MaxGap(problem, xs, ws);
  result.xs = std::move(xs);
  result.ws = std::move(ws);
  result.cost = cost;
  result.gap_norm = gap;
  if (result.converged && gap > options.gap_tolerance) {
    result.converged = false;
    result.message = "defects above tolerance at termination";
  }
  return result;
}

}  // namespace prime
