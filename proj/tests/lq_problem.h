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

// Linear-Gaussian estimation problems and their batch least-squares oracle.

#ifndef PRIME_TESTS_LQ_PROBLEM_H_
#define PRIME_TESTS_LQ_PROBLEM_H_

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <random>
#include <vector>

#include "prime/ddp.h"

namespace prime::testing {

// x_{k+1} = A x_k + b + G w_k with cost
//   |x_0 - m|_P^2 + sum_k |w_k|_Q^2 + sum_k |C x_k - y_k|_R^2.
class LinearProblem : public ShootingProblem {
 public:
  Eigen::MatrixXd A, G, C, P, Q, R;
  Eigen::VectorXd b, m;
  std::vector<Eigen::VectorXd> ys;

  int horizon() const override { return static_cast<int>(ys.size()) - 1; }
  int state_dim() const override { return static_cast<int>(A.rows()); }
  int disturbance_dim() const override { return static_cast<int>(G.cols()); }

  Eigen::VectorXd Dynamics(int, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& w) const override {
    return A * x + b + G * w;
  }
  DynamicsDerivatives Linearize(int k, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& w) const override {
    return {Dynamics(k, x, w), A, G};
  }
  double Cost(int k, const Eigen::VectorXd& x,
              const Eigen::VectorXd& w) const override {
    const Eigen::VectorXd r = C * x - ys[k];
    double c = r.dot(R * r);
    if (k == 0) c += (x - m).dot(P * (x - m));
    if (k < horizon()) c += w.dot(Q * w);
    return c;
  }
  CostDerivatives CostQuadratic(int k, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& w) const override {
    const int nx = state_dim();
    const int nw = k < horizon() ? disturbance_dim() : 0;
    CostDerivatives d;
    const Eigen::VectorXd r = C * x - ys[k];
    d.lx = 2.0 * C.transpose() * R * r;
    d.lxx = 2.0 * C.transpose() * R * C;
    if (k == 0) {
      d.lx += 2.0 * P * (x - m);
      d.lxx += 2.0 * P;
    }
    d.lw = nw > 0 ? Eigen::VectorXd(2.0 * Q * w) : Eigen::VectorXd(0);
    d.lww = nw > 0 ? Eigen::MatrixXd(2.0 * Q) : Eigen::MatrixXd(0, 0);
    d.lwx = Eigen::MatrixXd::Zero(nw, nx);
    return d;
  }

  // Minimizer over z = (x_0, w_0, ..., w_{T-1}) of the same cost, from the
  // normal equations of the stacked affine map z -> x_k.
  void BatchSolve(std::vector<Eigen::VectorXd>* xs,
                  std::vector<Eigen::VectorXd>* ws) const {
    const int T = horizon();
    const int nx = state_dim();
    const int nw = disturbance_dim();
    const int nz = nx + T * nw;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nz, nz);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(nz);
    // x_k = Phi z + c.
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(nx, nz);
    phi.leftCols(nx).setIdentity();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nx);
    auto add = [&](const Eigen::MatrixXd& S, const Eigen::MatrixXd& W,
                   const Eigen::VectorXd& target) {
      // |S z - target|_W^2
      H += S.transpose() * W * S;
      g += S.transpose() * W * target;
    };
    for (int k = 0; k <= T; ++k) {
      add(C * phi, R, ys[k] - C * c);
      if (k == 0) add(phi, P, m - c);
      if (k < T) {
        Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(nw, nz);
        sel.block(0, nx + k * nw, nw, nw).setIdentity();
        add(sel, Q, Eigen::VectorXd::Zero(nw));
        phi = (A * phi + G * sel).eval();
        c = A * c + b;
      }
    }
    const Eigen::VectorXd z = H.ldlt().solve(g);
    ws->assign(T, Eigen::VectorXd());
    for (int k = 0; k < T; ++k) (*ws)[k] = z.segment(nx + k * nw, nw);
    xs->assign(T + 1, Eigen::VectorXd());
    (*xs)[0] = z.head(nx);
    for (int k = 0; k < T; ++k) {
      (*xs)[k + 1] = A * (*xs)[k] + b + G * (*ws)[k];
    }
  }
};

// The random walk x_1 = x_0 + w with cost x_0^2 + w^2 + (x_1 - 2)^2.
inline LinearProblem ScalarRandomWalk() {
  LinearProblem p;
  p.A = p.G = p.Q = p.C = p.R = Eigen::MatrixXd::Identity(1, 1);
  p.b = p.m = Eigen::VectorXd::Zero(1);
  // The x_0^2 term enters as a zero measurement at node 0; no prior.
  p.P = Eigen::MatrixXd::Zero(1, 1);
  p.ys = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 2.0)};
  return p;
}

inline Eigen::MatrixXd RandomSpd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n * n; ++i) a.data()[i] = normal(rng);
  return a * a.transpose() / n + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

inline LinearProblem RandomLinearProblem(std::mt19937_64& rng, int nx, int nw,
                                         int ny, int T) {
  std::normal_distribution<double> normal;
  auto random = [&](int r, int c) {
    Eigen::MatrixXd a(r, c);
    for (int i = 0; i < r * c; ++i) a.data()[i] = normal(rng);
    return a;
  };
  LinearProblem p;
  p.A = Eigen::MatrixXd::Identity(nx, nx) + 0.2 * random(nx, nx);
  p.G = random(nx, nw);
  p.C = random(ny, nx);
  p.b = random(nx, 1);
  p.m = random(nx, 1);
  p.P = RandomSpd(rng, nx);
  p.Q = RandomSpd(rng, nw);
  p.R = RandomSpd(rng, ny);
  for (int k = 0; k <= T; ++k) p.ys.push_back(random(ny, 1));
  return p;
}

}  // namespace prime::testing

#endif  // PRIME_TESTS_LQ_PROBLEM_H_
