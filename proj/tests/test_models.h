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

// Small models shared by the unit tests.

#ifndef PRIME_TESTS_TEST_MODELS_H_
#define PRIME_TESTS_TEST_MODELS_H_

#include <Eigen/Core>
#include <functional>
#include <random>
#include <string>

#include "prime/model.h"

namespace prime::testing {

// Point-like body (tiny rotational inertia) with one contact at its origin.
inline PlanarModel Particle(double mu = 0.7, double g = 9.81, double m = 1.0) {
  return LoadModel(R"({"links":[{"name":"body","parent":-1,
    "inertia":{"m":)" +
                   std::to_string(m) + R"(,"hx":0,"hy":0,"Iz":1e-3}}],
    "contacts":[{"link":0,"point":[0,0],"mu":)" +
                   std::to_string(mu) + R"(}],
    "gravity":[0,)" +
                   std::to_string(-g) + "]}");
}

// Body plus prismatic leg sliding along -z of the body; foot contact at the
// leg frame origin.
inline const char* kHopperJson = R"({
  "links": [
    {"name": "body", "parent": -1,
     "inertia": {"m": 5.0, "hx": 0.0, "hy": 0.0, "Iz": 0.1}},
    {"name": "leg", "parent": 0,
     "joint": {"type": "prismatic", "axis": [0, -1]},
     "inertia": {"m": 0.5, "hx": 0.0, "hy": 0.0, "Iz": 0.01}}
  ],
  "contacts": [{"link": 1, "point": [0, 0], "mu": 0.7}],
  "gravity": [0, -9.81],
  "actuated": [true]
})";

inline PlanarModel Hopper() { return LoadModel(kHopperJson); }

// Branched tree exercising every joint kind, signs, offsets and off-center
// first moments.
inline const char* kTreeJson = R"({
  "links": [
    {"name": "torso", "parent": -1,
     "inertia": {"m": 3.0, "hx": 0.12, "hy": -0.05, "Iz": 0.4}},
    {"name": "thigh", "parent": 0,
     "joint": {"type": "revolute", "axis": [0, 0, 1]},
     "offset": {"xy": [0.1, -0.2], "angle": 0.3},
     "inertia": {"m": 1.0, "hx": 0.0, "hy": -0.15, "Iz": 0.05}},
    {"name": "shin", "parent": 1,
     "joint": {"type": "prismatic", "axis": [0.6, -0.8]},
     "offset": {"xy": [0.0, -0.3], "angle": -0.2},
     "inertia": {"m": 0.6, "hx": 0.03, "hy": 0.02, "Iz": 0.02}},
    {"name": "arm", "parent": 0,
     "joint": {"type": "revolute", "axis": [0, 0, -1]},
     "offset": {"xy": [-0.15, 0.25], "angle": 1.1},
     "inertia": {"m": 0.8, "hx": 0.1, "hy": 0.0, "Iz": 0.03}},
    {"name": "hand", "parent": 3,
     "joint": {"type": "revolute", "axis": [0, 0, 1]},
     "offset": {"xy": [0.3, 0.0], "angle": 0.0},
     "inertia": {"m": 0.3, "hx": 0.05, "hy": 0.01, "Iz": 0.01}}
  ],
  "contacts": [
    {"link": 2, "point": [0.02, -0.05], "mu": 0.8},
    {"link": 4, "point": [0.1, 0.03], "mu": 0.5},
    {"link": 0, "point": [-0.2, -0.1], "mu": 0.6}
  ],
  "gravity": [0, -9.81],
  "actuated": [true, true, false, true]
})";

inline PlanarModel Tree() { return LoadModel(kTreeJson); }

inline Eigen::VectorXd RandomVector(std::mt19937& rng, int n, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = dist(rng);
  return x;
}

// Central-difference Jacobian of f at x.
inline Eigen::MatrixXd NumericJacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  for (int k = 0; k < x.size(); ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    jac.col(k) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

// max |a - b| / max(1, max |b|).
inline double RelativeError(const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace prime::testing

#endif  // PRIME_TESTS_TEST_MODELS_H_
