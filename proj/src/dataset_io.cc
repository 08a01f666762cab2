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

#include "prime/dataset_io.h"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "prime/errors.h"
#include "prime/rng.h"

namespace prime {

using Eigen::VectorXd;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kDatasetFormat = "prime-dataset";
constexpr int kDatasetVersion = 1;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

void Dump(const ordered_json& value, int indent, int depth, std::string* out) {
  const auto newline = [&](int level) {
    if (indent < 0) return;
    out->push_back('\n');
    out->append(static_cast<size_t>(indent * level), ' ');
  };
  switch (value.type()) {
    case ordered_json::value_t::number_float:
      out->append(FormatDouble(value.get<double>()));
      return;
    case ordered_json::value_t::array: {
      if (value.empty()) {
        out->append("[]");
        return;
      }
      // Numeric arrays stay on one line.
      bool flat = true;
      for (const auto& v : value) flat &= v.is_primitive();
      out->push_back('[');
      bool first = true;
      for (const auto& v : value) {
        if (!first) out->push_back(',');
        if (!flat) newline(depth + 1);
        if (flat && !first && indent >= 0) out->push_back(' ');
        Dump(v, indent, depth + 1, out);
        first = false;
      }
      if (!flat) newline(depth);
      out->push_back(']');
      return;
    }
    case ordered_json::value_t::object: {
      if (value.empty()) {
        out->append("{}");
        return;
      }
      out->push_back('{');
      bool first = true;
      for (const auto& [key, v] : value.items()) {
        if (!first) out->push_back(',');
        newline(depth + 1);
        out->append(ordered_json(key).dump());
        out->append(indent < 0 ? ":" : ": ");
        Dump(v, indent, depth + 1, out);
        first = false;
      }
      newline(depth);
      out->push_back('}');
      return;
    }
    default:
      out->append(value.dump());
  }
}

ordered_json Vec(const VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

VectorXd ToVector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where, "expected an array of numbers");
  VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(where, "expected a number");
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

const json& Field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(where, std::string("missing field \"") + key + "\"");
  }
  return j.at(key);
}

double Number(const json& j, const char* key, const std::string& where) {
  const json& v = Field(j, key, where);
  if (!v.is_number()) {
    throw ParseError(where + "." + key, "expected a number");
  }
  return v.get<double>();
}

ordered_json ModelJson(const PlanarModel& model) {
  return ordered_json::parse(SaveModel(model));
}

PlanarModel ModelFromJson(const json& j) { return LoadModel(j.dump()); }

ordered_json MaskJson(const MeasurementMask& m) {
  return ordered_json::array({m.base_position, m.base_angle, m.base_velocity,
                              m.base_angular_velocity, m.joint_positions,
                              m.joint_velocities});
}

MeasurementMask MaskFromJson(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 6) {
    throw ParseError(where, "mask must be an array of 6 booleans");
  }
  for (const json& b : j) {
    if (!b.is_boolean()) throw ParseError(where, "mask entries must be bool");
  }
  MeasurementMask m;
  m.base_position = j[0];
  m.base_angle = j[1];
  m.base_velocity = j[2];
  m.base_angular_velocity = j[3];
  m.joint_positions = j[4];
  m.joint_velocities = j[5];
  return m;
}

// Appends the columns of `values` (one vector per row) with NaN padding.
void AppendColumns(const std::string& prefix,
                   const std::vector<VectorXd>& values, int rows, double scale,
                   Table* table) {
  if (values.empty()) return;
  const int n = static_cast<int>(values[0].size());
  for (int i = 0; i < n; ++i) {
    table->columns.push_back(prefix + std::to_string(i));
    for (int k = 0; k < rows; ++k) {
      table->rows[k].push_back(
          k < static_cast<int>(values.size()) ? values[k][i] * scale : kNaN);
    }
  }
}

}  // namespace

std::string FormatDouble(double value) {
  if (!std::isfinite(value)) {
    throw InvalidArgument("FormatDouble: non-finite value");
  }
  // "-0" would read back as the integer 0.
  if (value == 0.0 && std::signbit(value)) return "-0.0";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string DumpJson(const ordered_json& value, int indent) {
  std::string out;
  Dump(value, indent, 0, &out);
  return out;
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path + ": " + std::strerror(errno));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return buffer.str();
}

void WriteTextFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path + ": " + std::strerror(errno));
  }
  out << content;
  out.flush();
  if (!out) throw IoError("cannot write " + path);
}

Trajectory Dataset::Truth() const {
  Trajectory t;
  t.dt = dt;
  t.states = states;
  t.inputs = inputs;
  t.lambda_n = lambda_n;
  t.lambda_t = lambda_t;
  return t;
}

void Dataset::Validate() const {
  model.Validate();
  const size_t T = inputs.size();
  if (!(dt > 0.0)) throw InvalidArgument("Dataset: dt must be positive");
  for (const VectorXd& u : inputs) {
    if (u.size() != model.nu()) throw InvalidArgument("Dataset: input size");
  }
  if (has_truth()) {
    if (states.size() != T + 1 || lambda_n.size() != T ||
        lambda_t.size() != T) {
      throw InvalidArgument("Dataset: ground-truth lengths do not match");
    }
    for (const State& x : states) {
      if (x.q.size() != model.nq() || x.v.size() != model.nv()) {
        throw InvalidArgument("Dataset: state dimension");
      }
    }
    for (size_t k = 0; k < T; ++k) {
      if (lambda_n[k].size() != model.num_contacts() ||
          lambda_t[k].size() != model.num_contacts()) {
        throw InvalidArgument("Dataset: impulse dimension");
      }
    }
  }
  if (has_measurements()) {
    if (measurements.size() != T + 1) {
      throw InvalidArgument("Dataset: expected " + std::to_string(T + 1) +
                            " measurements");
    }
    for (const MeasurementSample& y : measurements) {
      if (y.joint_positions.size() != model.num_joints() ||
          y.joint_velocities.size() != model.num_joints()) {
        throw InvalidArgument("Dataset: measurement dimension");
      }
    }
  }
  if (!has_truth() && !has_measurements()) {
    throw InvalidArgument("Dataset: neither ground truth nor measurements");
  }
}

Dataset DatasetFromTrajectory(const PlanarModel& model, const Trajectory& truth,
                              const std::string& stepper, double kappa) {
  Dataset d;
  d.model = model;
  d.dt = truth.dt;
  d.inputs = truth.inputs;
  d.states = truth.states;
  d.lambda_n = truth.lambda_n;
  d.lambda_t = truth.lambda_t;
  d.stepper = stepper;
  d.kappa = kappa;
  d.rng = kRngAlgorithm;
  return d;
}

ordered_json NoiseToJson(const NoiseConfig& noise) {
  ordered_json j;
  j["seed"] = noise.seed;
  j["base_position"] = noise.base_position;
  j["base_angle"] = noise.base_angle;
  j["base_angle_bias"] = noise.base_angle_bias;
  j["base_velocity"] = noise.base_velocity;
  j["base_angular_velocity"] = noise.base_angular_velocity;
  j["joint_position"] = noise.joint_position;
  j["joint_velocity"] = noise.joint_velocity;
  return j;
}

NoiseConfig NoiseFromJson(const json& j) {
  const std::string where = "$.noise";
  NoiseConfig n;
  const json& seed = Field(j, "seed", where);
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    throw ParseError(where + ".seed", "expected an unsigned integer");
  }
  n.seed = seed.get<uint64_t>();
  n.base_position = Number(j, "base_position", where);
  n.base_angle = Number(j, "base_angle", where);
  n.base_angle_bias = Number(j, "base_angle_bias", where);
  n.base_velocity = Number(j, "base_velocity", where);
  n.base_angular_velocity = Number(j, "base_angular_velocity", where);
  n.joint_position = Number(j, "joint_position", where);
  n.joint_velocity = Number(j, "joint_velocity", where);
  return n;
}

std::string SerializeDataset(const Dataset& d) {
  d.Validate();
  const int T = d.horizon();
  ordered_json header;
  header["format"] = kDatasetFormat;
  header["version"] = kDatasetVersion;
  header["model"] = ModelJson(d.model);
  header["dt"] = d.dt;
  header["steps"] = T;
  header["stepper"] = d.stepper;
  header["kappa"] = d.kappa;
  header["rng"] = d.rng;
  header["noise"] = d.noise ? NoiseToJson(*d.noise) : ordered_json();
  header["has_truth"] = d.has_truth();
  header["has_measurements"] = d.has_measurements();
  std::string out = DumpJson(header) + "\n";
  for (int k = 0; k <= T; ++k) {
    ordered_json row;
    row["k"] = k;
    if (d.has_truth()) row["x"] = Vec(d.states[k].Stacked());
    if (k < T) {
      row["u"] = Vec(d.inputs[k]);
      if (d.has_truth()) {
        row["lambda_n"] = Vec(d.lambda_n[k]);
        row["lambda_t"] = Vec(d.lambda_t[k]);
      }
    }
    if (d.has_measurements()) {
      row["y"] = Vec(d.measurements[k].Stacked());
      row["mask"] = MaskJson(d.measurements[k].mask);
    }
    out += DumpJson(row) + "\n";
  }
  return out;
}

Dataset ParseDataset(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto next = [&]() -> json {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        return json::parse(line);
      } catch (const json::exception& e) {
        throw ParseError("line " + std::to_string(line_no), e.what());
      }
    }
    throw ParseError("line " + std::to_string(line_no + 1),
                     "unexpected end of dataset");
  };
  const json header = next();
  const std::string where = "line 1";
  if (!header.is_object() || header.value("format", "") != kDatasetFormat) {
    throw ParseError(where, "not a prime-dataset header");
  }
  if (header.value("version", 0) != kDatasetVersion) {
    throw ParseError(where, "unsupported dataset version");
  }
  Dataset d;
  try {
    d.model = ModelFromJson(Field(header, "model", where));
  } catch (const ParseError& e) {
    throw ParseError(where + " model " + e.path(), e.what());
  } catch (const ValidationError& e) {
    throw ParseError(where + " model", e.what());
  }
  d.dt = Number(header, "dt", where);
  const json& steps = Field(header, "steps", where);
  if (!steps.is_number_integer() || steps.get<int64_t>() < 0) {
    throw ParseError(where + ".steps", "expected a non-negative integer");
  }
  const int T = steps.get<int>();
  d.stepper = Field(header, "stepper", where).get<std::string>();
  d.kappa = Number(header, "kappa", where);
  d.rng = Field(header, "rng", where).get<std::string>();
  if (!Field(header, "noise", where).is_null()) {
    d.noise = NoiseFromJson(header.at("noise"));
  }
  const bool has_truth = Field(header, "has_truth", where).get<bool>();
  const bool has_y = Field(header, "has_measurements", where).get<bool>();
  const int nv = d.model.nv();
  for (int k = 0; k <= T; ++k) {
    const json row = next();
    const std::string at = "line " + std::to_string(line_no);
    if (Number(row, "k", at) != k)
      throw ParseError(at, "row index out of order");
    if (has_truth) {
      const VectorXd x = ToVector(Field(row, "x", at), at + ".x");
      if (x.size() != 2 * nv) throw ParseError(at + ".x", "wrong state size");
      d.states.push_back(State::FromStacked(x, nv));
    }
    if (k < T) {
      d.inputs.push_back(ToVector(Field(row, "u", at), at + ".u"));
      if (has_truth) {
        d.lambda_n.push_back(
            ToVector(Field(row, "lambda_n", at), at + ".lambda_n"));
        d.lambda_t.push_back(
            ToVector(Field(row, "lambda_t", at), at + ".lambda_t"));
      }
    }
    if (has_y) {
      const VectorXd y = ToVector(Field(row, "y", at), at + ".y");
      if (y.size() != 2 * nv) throw ParseError(at + ".y", "wrong size");
      MeasurementSample s = MeasurementSample::FromStacked(y, nv);
      s.mask = MaskFromJson(Field(row, "mask", at), at + ".mask");
      d.measurements.push_back(std::move(s));
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty()) {
      throw ParseError("line " + std::to_string(line_no), "trailing content");
    }
  }
  try {
    d.Validate();
  } catch (const InvalidArgument& e) {
    throw ParseError("dataset", e.what());
  }
  return d;
}

void WriteDataset(const std::string& path, const Dataset& dataset) {
  WriteTextFile(path, SerializeDataset(dataset));
}

Dataset ReadDataset(const std::string& path) {
  const std::string text = ReadTextFile(path);
  try {
    return ParseDataset(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.path(),
                     std::string(e.what()).substr(e.path().size() + 2));
  }
}

int Table::Column(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::string SerializeCsv(const Table& table) {
  std::string out;
  for (size_t i = 0; i < table.columns.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += table.columns[i];
  }
  out.push_back('\n');
  for (const std::vector<double>& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw InvalidArgument("SerializeCsv: ragged row");
    }
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out.push_back(',');
      if (!std::isnan(row[i])) out += FormatDouble(row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

Table ParseCsv(const std::string& text) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  std::istringstream in(text);
  std::string line;
  Table table;
  if (!std::getline(in, line) || line.empty()) {
    throw ParseError("line 1", "missing CSV header");
  }
  if (line.back() == '\r') line.pop_back();
  table.columns = split(line);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    const std::string at = "line " + std::to_string(line_no);
    if (cells.size() != table.columns.size()) {
      throw ParseError(at, "expected " + std::to_string(table.columns.size()) +
                               " cells, got " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (const std::string& c : cells) {
      if (c.empty()) {
        row.push_back(kNaN);
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end != c.c_str() + c.size()) {
        throw ParseError(at, "not a number: \"" + c + "\"");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<std::string> StateChannelNames(const PlanarModel& model) {
  std::vector<std::string> q = {"base_x", "base_z", "base_angle"};
  std::vector<std::string> v = {"base_vx", "base_vz", "base_omega"};
  for (int l = 1; l < model.num_links(); ++l) {
    q.push_back(model.links()[l].name + "_pos");
    v.push_back(model.links()[l].name + "_vel");
  }
  q.insert(q.end(), v.begin(), v.end());
  return q;
}

Table TrajectoryTable(const PlanarModel& model, double dt,
                      const std::vector<State>& states,
                      const std::vector<VectorXd>& inputs,
                      const std::vector<VectorXd>& lambda_n,
                      const std::vector<VectorXd>& lambda_t) {
  Table table;
  table.columns = {"k", "t"};
  const std::vector<std::string> names = StateChannelNames(model);
  table.columns.insert(table.columns.end(), names.begin(), names.end());
  const int rows = static_cast<int>(states.size());
  for (int k = 0; k < rows; ++k) {
    std::vector<double> row = {static_cast<double>(k), k * dt};
    const VectorXd x = states[k].Stacked();
    row.insert(row.end(), x.data(), x.data() + x.size());
    table.rows.push_back(std::move(row));
  }
  AppendColumns("u", inputs, rows, 1.0, &table);
  AppendColumns("lambda_n", lambda_n, rows, 1.0, &table);
  AppendColumns("lambda_t", lambda_t, rows, 1.0, &table);
  AppendColumns("force_n", lambda_n, rows, 1.0 / dt, &table);
  return table;
}

Table MeasurementTable(const PlanarModel& model, double dt,
                       const std::vector<MeasurementSample>& measurements) {
  Table table;
  table.columns = {"k", "t"};
  const std::vector<std::string> names = StateChannelNames(model);
  table.columns.insert(table.columns.end(), names.begin(), names.end());
  const int nv = model.nv();
  for (size_t k = 0; k < measurements.size(); ++k) {
    const MeasurementSample& y = measurements[k];
    const VectorXd w = MeasurementWeights(WeightConfig{}, y.mask, nv);
    const VectorXd values = y.Stacked();
    std::vector<double> row = {static_cast<double>(k), k * dt};
    for (int i = 0; i < values.size(); ++i) {
      row.push_back(w[i] > 0.0 ? values[i] : kNaN);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table TraceTable(const EstimationSolution& solution) {
  Table table;
  table.columns = {"iteration",         "kappa",   "cost",
                   "gap_norm",          "step",    "regularization",
                   "expected_decrease", "accepted"};
  for (size_t i = 0; i < solution.trace.size(); ++i) {
    const DdpIteration& r = solution.trace[i];
    const double kappa =
        i < solution.trace_kappa.size() ? solution.trace_kappa[i] : kNaN;
    table.rows.push_back({static_cast<double>(r.iteration), kappa, r.cost,
                          r.gap_norm, r.step, r.regularization,
                          r.expected_decrease, r.accepted ? 1.0 : 0.0});
  }
  return table;
}

ordered_json SolutionToJson(const EstimationSolution& s) {
  ordered_json j;
  j["converged"] = s.converged;
  j["iterations"] = s.iterations;
  j["message"] = s.message;
  j["kappa"] = s.kappa;
  j["gap_norm"] = s.gap_norm;
  j["cost"] = {{"process", s.cost.process},
               {"measurement", s.cost.measurement},
               {"prior", s.cost.prior},
               {"parameter", s.cost.parameter},
               {"total", s.cost.total()}};
  ordered_json theta = ordered_json::array();
  for (const LogCholeskyParams2D& t : s.theta) theta.push_back(Vec(t.theta));
  j["theta"] = std::move(theta);
  j["model"] = ModelJson(s.model);
  ordered_json states = ordered_json::array();
  for (const State& x : s.states) states.push_back(Vec(x.Stacked()));
  j["states"] = std::move(states);
  const auto list = [](const std::vector<VectorXd>& values) {
    ordered_json a = ordered_json::array();
    for (const VectorXd& v : values) a.push_back(Vec(v));
    return a;
  };
  j["disturbances"] = list(s.disturbances);
  j["lambda_n"] = list(s.lambda_n);
  j["lambda_t"] = list(s.lambda_t);
  if (!s.contact_flags.empty()) {
    ordered_json flags = ordered_json::array();
    for (const std::vector<bool>& f : s.contact_flags) {
      ordered_json row = ordered_json::array();
      for (bool b : f) row.push_back(b);
      flags.push_back(std::move(row));
    }
    j["contact_flags"] = std::move(flags);
    j["cone_violations"] = s.cone_violations;
    j["pseudo_inverse_fallbacks"] = s.pseudo_inverse_fallbacks;
  }
  return j;
}

EstimationSolution SolutionFromJson(const json& j) {
  const std::string where = "$";
  EstimationSolution s;
  s.converged = Field(j, "converged", where).get<bool>();
  s.iterations = Field(j, "iterations", where).get<int>();
  s.message = Field(j, "message", where).get<std::string>();
  s.kappa = Number(j, "kappa", where);
  s.gap_norm = Number(j, "gap_norm", where);
  const json& cost = Field(j, "cost", where);
  s.cost.process = Number(cost, "process", "$.cost");
  s.cost.measurement = Number(cost, "measurement", "$.cost");
  s.cost.prior = Number(cost, "prior", "$.cost");
  s.cost.parameter = Number(cost, "parameter", "$.cost");
  s.model = ModelFromJson(Field(j, "model", where));
  for (const json& t : Field(j, "theta", where)) {
    const VectorXd v = ToVector(t, "$.theta");
    if (v.size() != 6) throw ParseError("$.theta", "expected 6 entries");
    LogCholeskyParams2D p;
    p.theta = v;
    s.theta.push_back(p);
  }
  const int nv = s.model.nv();
  for (const json& x : Field(j, "states", where)) {
    const VectorXd v = ToVector(x, "$.states");
    if (v.size() != 2 * nv) throw ParseError("$.states", "wrong state size");
    s.states.push_back(State::FromStacked(v, nv));
  }
  for (const char* key : {"disturbances", "lambda_n", "lambda_t"}) {
    std::vector<VectorXd>& target =
        std::string(key) == "disturbances" ? s.disturbances
        : std::string(key) == "lambda_n"   ? s.lambda_n
                                           : s.lambda_t;
    for (const json& v : Field(j, key, where)) {
      target.push_back(ToVector(v, std::string("$.") + key));
    }
  }
  if (j.contains("contact_flags")) {
    for (const json& row : j.at("contact_flags")) {
      std::vector<bool> f;
      for (const json& b : row) f.push_back(b.get<bool>());
      s.contact_flags.push_back(std::move(f));
    }
    s.cone_violations = Field(j, "cone_violations", where).get<int>();
    s.pseudo_inverse_fallbacks =
        Field(j, "pseudo_inverse_fallbacks", where).get<int>();
  }
  return s;
}

}  // namespace prime
