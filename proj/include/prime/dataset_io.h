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

// File formats. Every floating-point number is written with 17 significant
// digits so that files round-trip exactly and compare byte for byte.
//
// Dataset (JSONL): line 1 is a header object
//   {"format": "prime-dataset", "version": 1, "model": {...}, "dt": ...,
//    "steps": T, "stepper": ..., "kappa": ..., "rng": ..., "noise": {...},
//    "has_truth": ..., "has_measurements": ...}
// followed by T + 1 rows {"k", "x", "u", "lambda_n", "lambda_t", "y",
// "mask"}; "u" and the impulses are absent on the last row, "x" and the
// impulses without ground truth, "y" and "mask" without measurements.

#ifndef PRIME_DATASET_IO_H_
#define PRIME_DATASET_IO_H_

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "prime/datagen.h"
#include "prime/estimator.h"
#include "prime/model.h"

namespace prime {

// "%.17g". Throws InvalidArgument for NaN and infinities.
std::string FormatDouble(double value);

// Serializes with FormatDouble for floats; indent < 0 gives one line.
std::string DumpJson(const nlohmann::ordered_json& value, int indent = -1);

// Whole-file helpers. Throw IoError naming the path.
std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& content);

struct Dataset {
  PlanarModel model;
  double dt = 0.025;
  std::vector<Eigen::VectorXd> inputs;  // u_0 .. u_{T-1}
  // Ground truth; empty when unknown.
  std::vector<State> states;
  std::vector<Eigen::VectorXd> lambda_n;
  std::vector<Eigen::VectorXd> lambda_t;
  // Measurements; empty before corruption.
  std::vector<MeasurementSample> measurements;
  std::optional<NoiseConfig> noise;
  std::string stepper = "lcp";
  double kappa = 0.0;
  std::string rng = "";

  int horizon() const { return static_cast<int>(inputs.size()); }
  bool has_truth() const { return !states.empty(); }
  bool has_measurements() const { return !measurements.empty(); }
  Trajectory Truth() const;

  // Throws InvalidArgument on inconsistent lengths or dimensions.
  void Validate() const;
};

Dataset DatasetFromTrajectory(const PlanarModel& model, const Trajectory& truth,
                              const std::string& stepper, double kappa);

std::string SerializeDataset(const Dataset& dataset);
// Throws ParseError ("line N: ...") on malformed content.
Dataset ParseDataset(const std::string& text);
void WriteDataset(const std::string& path, const Dataset& dataset);
Dataset ReadDataset(const std::string& path);

// Column-oriented numeric table; NaN cells are written empty.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  // Index of `name` or -1.
  int Column(const std::string& name) const;
};

std::string SerializeCsv(const Table& table);
// Throws ParseError on ragged rows or non-numeric cells.
Table ParseCsv(const std::string& text);

// Channel names of the state in [q; v] order: base_x, base_z, base_angle,
// <link>_pos, base_vx, base_vz, base_omega, <link>_vel.
std::vector<std::string> StateChannelNames(const PlanarModel& model);

// Columns k, t, state channels, then u<i>, lambda_n<i>, lambda_t<i> and
// force_n<i> = lambda_n<i> / dt when given. Transition columns hold NaN on
// the last node.
Table TrajectoryTable(const PlanarModel& model, double dt,
                      const std::vector<State>& states,
                      const std::vector<Eigen::VectorXd>& inputs,
                      const std::vector<Eigen::VectorXd>& lambda_n,
                      const std::vector<Eigen::VectorXd>& lambda_t);

// Columns k, t and state channels; masked channels are NaN.
Table MeasurementTable(const PlanarModel& model, double dt,
                       const std::vector<MeasurementSample>& measurements);

// Columns iteration, kappa, cost, gap_norm, step, regularization,
// expected_decrease, accepted.
Table TraceTable(const EstimationSolution& solution);

nlohmann::ordered_json SolutionToJson(const EstimationSolution& solution);
EstimationSolution SolutionFromJson(const nlohmann::json& document);

nlohmann::ordered_json NoiseToJson(const NoiseConfig& noise);
NoiseConfig NoiseFromJson(const nlohmann::json& document);

}  // namespace prime

#endif  // PRIME_DATASET_IO_H_
