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

#include "prime/model.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "prime/errors.h"

namespace prime {
namespace {

using nlohmann::json;

std::string Index(const std::string& path, size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void RejectUnknown(const json& object, const std::string& path,
                   std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (const char* name : allowed) known = known || key == name;
    if (!known) throw ParseError(path + "." + key, "unknown field");
  }
}

const json& Require(const json& object, const std::string& path,
                    const char* key) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw ParseError(path + "." + key, "missing required field");
  }
  return *it;
}

void RequireObject(const json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path, "expected object");
}

double Number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ParseError(path, "expected finite number");
  return x;
}

int Integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path, "expected integer");
  return j.get<int>();
}

Eigen::VectorXd NumberArray(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected array of numbers");
  Eigen::VectorXd out(j.size());
  for (size_t i = 0; i < j.size(); ++i) out[i] = Number(j[i], Index(path, i));
  return out;
}

Eigen::Vector2d Vec2(const json& j, const std::string& path) {
  Eigen::VectorXd v = NumberArray(j, path);
  if (v.size() != 2) throw ParseError(path, "expected 2 numbers");
  return v;
}

Joint ParseJoint(const json& j, const std::string& path) {
  RequireObject(j, path);
  RejectUnknown(j, path, {"type", "axis"});
  const json& type = Require(j, path, "type");
  if (!type.is_string()) throw ParseError(path + ".type", "expected string");
  const std::string name = type.get<std::string>();
  Joint joint;
  if (name == "floating") {
    joint.type = JointType::kFloating;
    if (j.contains("axis")) {
      throw ParseError(path + ".axis", "floating joint takes no axis");
    }
  } else if (name == "revolute") {
    joint.type = JointType::kRevolute;
    if (j.contains("axis")) {
      Eigen::VectorXd axis = NumberArray(j["axis"], path + ".axis");
      if (axis.size() != 3 || axis[0] != 0.0 || axis[1] != 0.0 ||
          std::abs(axis[2]) != 1.0) {
        throw ParseError(path + ".axis",
                         "revolute axis must be [0,0,1] or [0,0,-1]");
      }
      joint.sign = axis[2];
    }
  } else if (name == "prismatic") {
    joint.type = JointType::kPrismatic;
    joint.axis = Vec2(Require(j, path, "axis"), path + ".axis");
    if (std::abs(joint.axis.norm() - 1.0) > 1e-9) {
      throw ParseError(path + ".axis", "prismatic axis must be a unit vector");
    }
  } else {
    throw ParseError(path + ".type", "unknown joint type '" + name + "'");
  }
  return joint;
}

Link ParseLink(const json& j, const std::string& path) {
  RequireObject(j, path);
  RejectUnknown(j, path, {"name", "parent", "joint", "offset", "inertia"});
  Link link;
  const json& name = Require(j, path, "name");
  if (!name.is_string()) throw ParseError(path + ".name", "expected string");
  link.name = name.get<std::string>();
  link.parent = Integer(Require(j, path, "parent"), path + ".parent");
  if (j.contains("joint")) {
    link.joint = ParseJoint(j["joint"], path + ".joint");
  } else if (link.parent == -1) {
    link.joint.type = JointType::kFloating;
  } else {
    throw ParseError(path + ".joint", "missing required field");
  }
  if (j.contains("offset")) {
    const std::string opath = path + ".offset";
    const json& offset = j["offset"];
    RequireObject(offset, opath);
    RejectUnknown(offset, opath, {"xy", "angle"});
    if (offset.contains("xy"))
      link.offset_xy = Vec2(offset["xy"], opath + ".xy");
    if (offset.contains("angle")) {
      link.offset_angle = Number(offset["angle"], opath + ".angle");
    }
  }
  const std::string ipath = path + ".inertia";
  const json& inertia = Require(j, path, "inertia");
  RequireObject(inertia, ipath);
  RejectUnknown(inertia, ipath, {"m", "hx", "hy", "Iz"});
  link.inertia.pi << Number(Require(inertia, ipath, "m"), ipath + ".m"),
      Number(Require(inertia, ipath, "hx"), ipath + ".hx"),
      Number(Require(inertia, ipath, "hy"), ipath + ".hy"),
      Number(Require(inertia, ipath, "Iz"), ipath + ".Iz");
  return link;
}

ContactPoint ParseContact(const json& j, const std::string& path) {
  RequireObject(j, path);
  RejectUnknown(j, path, {"link", "point", "mu"});
  ContactPoint c;
  c.link = Integer(Require(j, path, "link"), path + ".link");
  c.point = Vec2(Require(j, path, "point"), path + ".point");
  c.mu = Number(Require(j, path, "mu"), path + ".mu");
  return c;
}

json ToJson(const Eigen::Vector2d& v) { return json::array({v[0], v[1]}); }

}  // namespace

bool Link::operator==(const Link& other) const {
  return name == other.name && parent == other.parent && joint == other.joint &&
         offset_xy == other.offset_xy && offset_angle == other.offset_angle &&
         inertia.pi == other.inertia.pi;
}

PlanarModel::PlanarModel(std::vector<Link> links,
                         std::vector<ContactPoint> contacts,
                         Eigen::Vector2d gravity, std::vector<bool> actuated)
    : links_(std::move(links)),
      contacts_(std::move(contacts)),
      gravity_(std::move(gravity)),
      actuated_(std::move(actuated)) {
  if (actuated_.empty() && !links_.empty()) {
    actuated_.assign(links_.size() - 1, true);
  }
  Validate();
  BuildActuation();
}

void PlanarModel::BuildActuation() {
  num_actuators_ = 0;
  for (bool a : actuated_) num_actuators_ += a ? 1 : 0;
  actuation_ = Eigen::MatrixXd::Zero(nv(), num_actuators_);
  int col = 0;
  for (int j = 0; j < num_joints(); ++j) {
    if (actuated_[j]) actuation_(3 + j, col++) = 1.0;
  }
}

void PlanarModel::Validate() const {
  if (links_.empty()) throw ValidationError("model has no links");
  std::set<std::string> names;
  for (int i = 0; i < num_links(); ++i) {
    const Link& link = links_[i];
    const std::string who =
        "link " + std::to_string(i) + " ('" + link.name + "')";
    if (link.name.empty()) throw ValidationError(who + ": empty name");
    if (!names.insert(link.name).second) {
      throw ValidationError(who + ": duplicate name");
    }
    if (i == 0) {
      if (link.parent != -1 || link.joint.type != JointType::kFloating) {
        throw ValidationError(who +
                              ": link 0 must be the floating base (parent -1)");
      }
    } else {
      if (link.parent < 0 || link.parent >= i) {
        throw ValidationError(who + ": parent index " +
                              std::to_string(link.parent) + " must be in [0, " +
                              std::to_string(i) +
                              ") (acyclic, parent before child)");
      }
      if (link.joint.type == JointType::kFloating) {
        throw ValidationError(who + ": only the base may be floating");
      }
    }
    if (!CheckConsistency(link.inertia).consistent) {
      throw ValidationError(who + ": inertia is not physically consistent");
    }
  }
  for (int c = 0; c < num_contacts(); ++c) {
    const ContactPoint& contact = contacts_[c];
    const std::string who = "contact " + std::to_string(c);
    if (contact.link < 0 || contact.link >= num_links()) {
      throw ValidationError(who + ": link index out of range");
    }
    if (!(contact.mu > 0.0)) {
      throw ValidationError(who + ": friction coefficient must be positive");
    }
  }
  if (static_cast<int>(actuated_.size()) != num_joints()) {
    throw ValidationError("actuated: expected " + std::to_string(num_joints()) +
                          " entries");
  }
  if (!gravity_.allFinite()) throw ValidationError("gravity: non-finite");
}

double PlanarModel::TotalMass() const {
  double total = 0.0;
  for (const Link& link : links_) total += link.inertia.mass();
  return total;
}

PlanarModel PlanarModel::WithLinkInertia(
    int link, const InertialParams2D& inertia) const {
  if (link < 0 || link >= num_links()) {
    throw InvalidArgument("link index " + std::to_string(link) +
                          " out of range");
  }
  PlanarModel out = *this;
  out.links_[link].inertia = inertia;
  return out;
}

bool PlanarModel::operator==(const PlanarModel& other) const {
  return links_ == other.links_ && contacts_ == other.contacts_ &&
         gravity_ == other.gravity_ && actuated_ == other.actuated_;
}

Eigen::VectorXd State::Stacked() const {
  Eigen::VectorXd x(q.size() + v.size());
  x << q, v;
  return x;
}

State State::FromStacked(const Eigen::VectorXd& x, int nv) {
  return {x.head(nv), x.segment(nv, nv)};
}

PlanarModel LoadModel(std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError("$", e.what());
  }
  RequireObject(root, "$");
  RejectUnknown(root, "$", {"links", "contacts", "gravity", "actuated"});

  const json& links_json = Require(root, "$", "links");
  if (!links_json.is_array()) throw ParseError("$.links", "expected array");
  std::vector<Link> links;
  for (size_t i = 0; i < links_json.size(); ++i) {
    links.push_back(ParseLink(links_json[i], Index("$.links", i)));
  }

  std::vector<ContactPoint> contacts;
  if (root.contains("contacts")) {
    const json& cj = root["contacts"];
    if (!cj.is_array()) throw ParseError("$.contacts", "expected array");
    for (size_t i = 0; i < cj.size(); ++i) {
      contacts.push_back(ParseContact(cj[i], Index("$.contacts", i)));
    }
  }

  Eigen::Vector2d gravity(0.0, -9.81);
  if (root.contains("gravity")) gravity = Vec2(root["gravity"], "$.gravity");

  std::vector<bool> actuated;
  if (root.contains("actuated")) {
    const json& aj = root["actuated"];
    if (!aj.is_array()) throw ParseError("$.actuated", "expected array");
    for (size_t i = 0; i < aj.size(); ++i) {
      if (!aj[i].is_boolean()) {
        throw ParseError(Index("$.actuated", i), "expected boolean");
      }
      actuated.push_back(aj[i].get<bool>());
    }
  } else if (!links.empty()) {
    actuated.assign(links.size() - 1, true);
  }
  return PlanarModel(std::move(links), std::move(contacts), gravity,
                     std::move(actuated));
}

PlanarModel LoadModelFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return LoadModel(buffer.str());
}

std::string SaveModel(const PlanarModel& model) {
  json root;
  json links = json::array();
  for (const Link& link : model.links()) {
    json l;
    l["name"] = link.name;
    l["parent"] = link.parent;
    switch (link.joint.type) {
      case JointType::kFloating:
        l["joint"] = {{"type", "floating"}};
        break;
      case JointType::kRevolute:
        l["joint"] = {{"type", "revolute"},
                      {"axis", json::array({0.0, 0.0, link.joint.sign})}};
        break;
      case JointType::kPrismatic:
        l["joint"] = {{"type", "prismatic"}, {"axis", ToJson(link.joint.axis)}};
        break;
    }
    l["offset"] = {{"xy", ToJson(link.offset_xy)},
                   {"angle", link.offset_angle}};
    l["inertia"] = {{"m", link.inertia.pi[0]},
                    {"hx", link.inertia.pi[1]},
                    {"hy", link.inertia.pi[2]},
                    {"Iz", link.inertia.pi[3]}};
    links.push_back(std::move(l));
  }
  root["links"] = std::move(links);
  json contacts = json::array();
  for (const ContactPoint& c : model.contacts()) {
    contacts.push_back(
        {{"link", c.link}, {"point", ToJson(c.point)}, {"mu", c.mu}});
  }
  root["contacts"] = std::move(contacts);
  root["gravity"] = ToJson(model.gravity());
  root["actuated"] = model.actuated();
  return root.dump(2);
}

PlanarModel SetLinkTheta(const PlanarModel& model, int link,
                         const LogCholeskyParams2D& theta) {
  if (link < 0 || link >= model.num_links()) {
    throw InvalidArgument("SetLinkTheta: link index " + std::to_string(link) +
                          " out of range");
  }
  return model.WithLinkInertia(link, ThetaToPi2d(theta));
}

LogCholeskyParams2D LinkTheta(const PlanarModel& model, int link) {
  if (link < 0 || link >= model.num_links()) {
    throw InvalidArgument("LinkTheta: link index " + std::to_string(link) +
                          " out of range");
  }
  return PiToTheta2d(model.links()[link].inertia);
}

}  // namespace prime
