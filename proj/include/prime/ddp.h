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

// Differential dynamic programming for estimation-type shooting problems:
//
//   min_{x_0, w_0..w_{T-1}}  sum_{k=0}^{T} l_k(x_k, w_k)
//   s.t.  x_{k+1} = f_k(x_k, w_k)
//
// The initial state is a decision variable (updated by the initial-node
// Newton step), and w_k is a disturbance rather than a control. The
// feasibility-driven variant accepts trajectories with nonzero defects
// x_{k+1} - f_k(x_k, w_k) and closes them along the line search.

#ifndef PRIME_DDP_H_
#define PRIME_DDP_H_

#include <Eigen/Core>
#include <string>
#include <vector>

namespace prime {

// Quadratic model of one node's cost. For the terminal node w-terms are
// empty.
struct CostDerivatives {
  Eigen::VectorXd lx;
  Eigen::VectorXd lw;
  Eigen::MatrixXd lxx;
  Eigen::MatrixXd lww;
  Eigen::MatrixXd lwx;
};

struct DynamicsDerivatives {
  Eigen::VectorXd next;  // f_k(x, w)
  Eigen::MatrixXd fx;
  Eigen::MatrixXd fw;
};

class ShootingProblem {
 public:
  virtual ~ShootingProblem() = default;

  // Number of transitions T; there are T + 1 states.
  virtual int horizon() const = 0;
  virtual int state_dim() const = 0;
  virtual int disturbance_dim() const = 0;

  // f_k. May throw SolverError, which the line search treats as a rejected
  // trial.
  virtual Eigen::VectorXd Dynamics(int k, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& w) const = 0;
  virtual DynamicsDerivatives Linearize(int k, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& w) const = 0;

  // l_k. `w` is ignored at k = T.
  virtual double Cost(int k, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& w) const = 0;
  virtual CostDerivatives CostQuadratic(int k, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& w) const = 0;
};

struct DdpOptions {
  int max_iterations = 100;
  // Stops once an accepted step lowers the cost by less than
  // tolerance * (1 + |cost|), or the predicted decrease is that small.
  double tolerance = 1e-9;
  // Also stops once the reduced gradient norm of a feasible iterate is below
  // stationarity_tolerance * (1 + |cost|).
  double stationarity_tolerance = 1e-8;
  bool feasibility_driven = true;
  double gap_tolerance = 1e-6;
  double regularization_init = 1e-9;
  double regularization_min = 1e-9;
  double regularization_max = 1e6;
  // Step sizes 1, 1/2, ..., 2^-(line_search_steps - 1).
  int line_search_steps = 11;
  double armijo = 1e-4;
  // Worker threads for the per-node linearization; 1 runs inline.
  int threads = 1;
};

struct DdpIteration {
  int iteration = 0;
  double cost = 0.0;
  // Largest defect infinity norm of the iterate.
  double gap_norm = 0.0;
  double step = 0.0;
  double regularization = 0.0;
  double expected_decrease = 0.0;
  bool accepted = false;
};

struct DdpResult {
  std::vector<Eigen::VectorXd> xs;
  std::vector<Eigen::VectorXd> ws;
  double cost = 0.0;
  double gap_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  // Row 0 is the initial guess.
  std::vector<DdpIteration> trace;
  std::string message;
};

// Total cost of a trajectory.
double TrajectoryCost(const ShootingProblem& problem,
                      const std::vector<Eigen::VectorXd>& xs,
                      const std::vector<Eigen::VectorXd>& ws);

// Largest infinity norm of x_{k+1} - f_k(x_k, w_k).
double MaxGap(const ShootingProblem& problem,
              const std::vector<Eigen::VectorXd>& xs,
              const std::vector<Eigen::VectorXd>& ws);

// Single-shooting rollout of `ws` from `x0`.
std::vector<Eigen::VectorXd> Rollout(const ShootingProblem& problem,
                                     const Eigen::VectorXd& x0,
                                     const std::vector<Eigen::VectorXd>& ws);

// Solves the problem from the initial guess. Without feasibility_driven the
// guess is first replaced by the rollout of `ws` from `xs[0]`. Throws
// InvalidArgument on dimension mismatch and SolverError if the initial guess
// cannot be evaluated.
DdpResult SolveDdp(const ShootingProblem& problem,
                   std::vector<Eigen::VectorXd> xs,
                   std::vector<Eigen::VectorXd> ws, const DdpOptions& options);

}  // namespace prime

#endif  // PRIME_DDP_H_
