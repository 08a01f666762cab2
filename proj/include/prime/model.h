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

#ifndef PRIME_MODEL_H_
#define PRIME_MODEL_H_

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <vector>

#include "prime/inertia.h"

namespace prime {

// World frame: x to the right, z up. The ground is the plane z = 0.

enum class JointType { kFloating, kRevolute, kPrismatic };

struct Joint {
  JointType type = JointType::kRevolute;
  // Revolute: +1 or -1 (rotation about the out-of-plane axis).
  double sign = 1.0;
  // Prismatic: unit sliding direction in the joint frame.
  Eigen::Vector2d axis = Eigen::Vector2d::UnitX();

  bool operator==(const Joint&) const = default;
};

struct Link {
  std::string name;
  // -1 for the floating base, otherwise an index smaller than this link's.
  int parent = -1;
  Joint joint;
  // Fixed transform from the parent frame to the joint frame.
  Eigen::Vector2d offset_xy = Eigen::Vector2d::Zero();
  double offset_angle = 0.0;
  InertialParams2D inertia;

  bool operator==(const Link& other) const;
};

struct ContactPoint {
  int link = 0;
  Eigen::Vector2d point = Eigen::Vector2d::Zero();  // in the link frame
  double mu = 0.7;

  bool operator==(const ContactPoint&) const = default;
};

// Planar articulated robot. Link 0 is the floating base with coordinates
// (p_x, p_z, theta); every other link adds one joint coordinate, in link
// order. Immutable after loading.
class PlanarModel {
 public:
  PlanarModel() = default;
  PlanarModel(std::vector<Link> links, std::vector<ContactPoint> contacts,
              Eigen::Vector2d gravity, std::vector<bool> actuated);

  const std::vector<Link>& links() const { return links_; }
  const std::vector<ContactPoint>& contacts() const { return contacts_; }
  const Eigen::Vector2d& gravity() const { return gravity_; }
  const std::vector<bool>& actuated() const { return actuated_; }

  int num_links() const { return static_cast<int>(links_.size()); }
  int num_joints() const { return num_links() - 1; }
  int nq() const { return 3 + num_joints(); }
  int nv() const { return nq(); }
  int nu() const { return num_actuators_; }
  int num_contacts() const { return static_cast<int>(contacts_.size()); }

  // Velocity index of the joint that moves `link` (link >= 1).
  static int JointIndex(int link) { return 2 + link; }

  // B: nv x nu, maps actuator torques into generalized forces.
  const Eigen::MatrixXd& actuation_matrix() const { return actuation_; }

  double TotalMass() const;

  // Replaces one link's inertia. Throws InvalidArgument on a bad index.
  PlanarModel WithLinkInertia(int link, const InertialParams2D& inertia) const;

  // Throws ValidationError describing the first violated invariant.
  void Validate() const;

  bool operator==(const PlanarModel& other) const;

 private:
  void BuildActuation();

  std::vector<Link> links_;
  std::vector<ContactPoint> contacts_;
  Eigen::Vector2d gravity_{0.0, -9.81};
  std::vector<bool> actuated_;
  int num_actuators_ = 0;
  Eigen::MatrixXd actuation_;
};

struct State {
  Eigen::VectorXd q;
  Eigen::VectorXd v;

  static State Zero(const PlanarModel& model) {
    return {Eigen::VectorXd::Zero(model.nq()),
            Eigen::VectorXd::Zero(model.nv())};
  }
  Eigen::VectorXd Stacked() const;
  static State FromStacked(const Eigen::VectorXd& x, int nv);
};

// Parses a model document. Unknown fields are rejected. Schema problems throw
// ParseError carrying the JSON path; invariant violations throw
// ValidationError naming the link or contact.
PlanarModel LoadModel(std::string_view document);
PlanarModel LoadModelFile(const std::string& path);

// Serializes back to the same schema.
std::string SaveModel(const PlanarModel& model);

// Returns a copy with link `link`'s inertia set from a planar Log-Cholesky
// vector.
PlanarModel SetLinkTheta(const PlanarModel& model, int link,
                         const LogCholeskyParams2D& theta);

// Log-Cholesky coordinates of the canonical lift of a link's inertia.
LogCholeskyParams2D LinkTheta(const PlanarModel& model, int link);

}  // namespace prime

#endif  // PRIME_MODEL_H_
