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

#include "cli.h"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prime/contact.h"
#include "prime/datagen.h"
#include "prime/dataset_io.h"
#include "prime/errors.h"
#include "prime/estimator.h"
#include "prime/gradcheck.h"
#include "prime/model.h"
#include "prime/rng.h"
#include "prime/svg_plot.h"

namespace prime::cli {
namespace {

namespace fs = std::filesystem;
using Eigen::VectorXd;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kStepTolerance = 1e-4;
constexpr double kInertiaTolerance = 1e-6;

// Output directory plus a record of every file read and written.
class RunContext {
 public:
  explicit RunContext(std::string out_dir) : out_dir_(std::move(out_dir)) {}

  std::string ReadInput(const std::string& path) {
    std::string content = ReadTextFile(path);
    if (seen_.insert(path).second) {
      inputs_.push_back({{"path", path}, {"fnv1a64", Fnv1a64(content)}});
    }
    return content;
  }

  void WriteOutput(const std::string& name, const std::string& content) {
    WriteTextFile((fs::path(out_dir_) / name).string(), content);
    outputs_.push_back(name);
  }

  const ordered_json& inputs() const { return inputs_; }
  const std::vector<std::string>& outputs() const { return outputs_; }

 private:
  std::string out_dir_;
  std::set<std::string> seen_;
  ordered_json inputs_ = ordered_json::array();
  std::vector<std::string> outputs_;
};

template <typename T>
T Arg(const ordered_json& args, const std::string& key) {
  if (!args.contains(key)) throw ParseError("$.args." + key, "missing");
  try {
    return args.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError("$.args." + key, "has the wrong type");
  }
}

std::string Short(double v) {
  if (std::isnan(v)) return "-";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

std::string CsvNumber(double v) {
  return std::isfinite(v) ? FormatDouble(v) : "";
}

std::string CsvCell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string quoted = "\"";
  for (char c : cell) {
    if (c == '"') quoted += '"';
    quoted += c == '\n' ? ' ' : c;
  }
  return quoted + "\"";
}

std::string TextCsv(const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += CsvCell(cells[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out;
}

void PrintTable(const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width(header.size());
  for (size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string text;
    for (size_t i = 0; i < cells.size(); ++i) {
      std::string cell = cells[i];
      cell.resize(width[i], ' ');
      text += (i == 0 ? "" : "  ") + cell;
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    std::cout << text << '\n';
  };
  line(header);
  std::vector<std::string> rule;
  for (size_t w : width) rule.push_back(std::string(w, '-'));
  line(rule);
  for (const auto& row : rows) line(row);
  std::cout.flush();
}

PlanarModel LoadModelArg(RunContext& ctx, const std::string& path) {
  if (path.empty()) return HopperModel();
  return LoadModel(ctx.ReadInput(path));
}

Dataset LoadDatasetArg(RunContext& ctx, const ordered_json& args) {
  const std::string path = Arg<std::string>(args, "data");
  if (path.empty()) throw UsageError("--data is required");
  return ParseDataset(ctx.ReadInput(path));
}

State HopperLayoutState(const PlanarModel& model,
                        const std::vector<double>& x0) {
  if (x0.empty()) {
    if (model.nq() != 4) {
      throw UsageError("--x0 is required for models other than the hopper");
    }
    return HopperInitialState();
  }
  if (static_cast<int>(x0.size()) != 2 * model.nv()) {
    throw UsageError("--x0 needs " + std::to_string(2 * model.nv()) +
                     " values");
  }
  return State::FromStacked(
      Eigen::Map<const VectorXd>(x0.data(),
                                 static_cast<Eigen::Index>(x0.size())),
      model.nv());
}

// ---------------------------------------------------------------- simulate

int RunSimulate(RunContext& ctx, const ordered_json& args) {
  const int steps = Arg<int>(args, "steps");
  const double dt = Arg<double>(args, "dt");
  const double kappa = Arg<double>(args, "kappa");
  if (steps < 1) throw UsageError("--steps must be at least 1");
  if (!(dt > 0.0)) throw UsageError("--dt must be positive");
  Stepper stepper;
  try {
    stepper = ParseStepper(Arg<std::string>(args, "stepper"));
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if (stepper == Stepper::kSmoothed && !(kappa > 0.0)) {
    throw UsageError("--kappa must be positive");
  }
  const PlanarModel model = LoadModelArg(ctx, Arg<std::string>(args, "model"));
  const State x0 =
      HopperLayoutState(model, Arg<std::vector<double>>(args, "x0"));
  StepOptions options;
  options.stepper = stepper;
  options.smoothing.kappa = kappa;

  Trajectory truth;
  const std::string schedule_path = Arg<std::string>(args, "schedule");
  if (!schedule_path.empty()) {
    const Table table = ParseCsv(ctx.ReadInput(schedule_path));
    if (static_cast<int>(table.rows.size()) != steps) {
      throw UsageError("schedule has " + std::to_string(table.rows.size()) +
                       " rows but --steps is " + std::to_string(steps));
    }
    std::vector<int> columns;
    for (int i = 0; i < model.nu(); ++i) {
      const int c = table.Column("u" + std::to_string(i));
      if (c < 0)
        throw UsageError("schedule lacks column u" + std::to_string(i));
      columns.push_back(c);
    }
    std::vector<VectorXd> schedule;
    for (const auto& row : table.rows) {
      VectorXd u(model.nu());
      for (int i = 0; i < model.nu(); ++i) u[i] = row[columns[i]];
      schedule.push_back(u);
    }
    truth = Simulate(model, x0, schedule, dt, options);
  } else {
    if (model.nq() != 4 || model.nu() != 1) {
      throw UsageError(
          "--schedule is required for models other than the hopper");
    }
    const ordered_json& p = args.at("policy");
    HopperPolicy policy;
    policy.rest_length = Arg<double>(p, "rest_length");
    policy.stiffness = Arg<double>(p, "stiffness");
    policy.damping = Arg<double>(p, "damping");
    policy.amplitude = Arg<double>(p, "amplitude");
    policy.frequency = Arg<double>(p, "frequency");
    policy.phase = Arg<double>(p, "phase");
    policy.max_force = Arg<double>(p, "max_force");
    truth = Simulate(
        model, x0,
        [&policy, dt](int k, const State& x) { return policy(k * dt, x); }, dt,
        steps, options);
  }
  const Dataset dataset =
      DatasetFromTrajectory(model, truth, StepperName(stepper),
                            stepper == Stepper::kSmoothed ? kappa : 0.0);
  ctx.WriteOutput("dataset.jsonl", SerializeDataset(dataset));
  ctx.WriteOutput("truth.csv", SerializeCsv(TrajectoryTable(
                                   model, dt, truth.states, truth.inputs,
                                   truth.lambda_n, truth.lambda_t)));
  PrintTable({"steps", "dt", "stepper", "touchdowns", "stance_transitions"},
             {{std::to_string(steps), Short(dt), StepperName(stepper),
               std::to_string(CountTouchdowns(truth.lambda_n)),
               std::to_string(StanceNodes(truth.lambda_n).size())}});
  return kExitOk;
}

// ----------------------------------------------------------------- corrupt

int RunCorrupt(RunContext& ctx, const ordered_json& args) {
  Dataset dataset = LoadDatasetArg(ctx, args);
  if (!dataset.has_truth()) {
    throw UsageError("dataset has no ground truth to corrupt");
  }
  NoiseConfig noise;
  noise.seed = Arg<uint64_t>(args, "seed");
  noise.base_position = Arg<double>(args, "base_position");
  noise.base_angle = Arg<double>(args, "base_angle");
  noise.base_angle_bias = Arg<double>(args, "bias");
  noise.base_velocity = Arg<double>(args, "base_velocity");
  noise.base_angular_velocity = Arg<double>(args, "base_angular_velocity");
  noise.joint_position = Arg<double>(args, "joint_position");
  noise.joint_velocity = Arg<double>(args, "joint_velocity");
  try {
    noise.Validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  dataset.noise = noise;
  dataset.rng = kRngAlgorithm;
  dataset.measurements = Corrupt(dataset.model, dataset.states, noise);
  ctx.WriteOutput("dataset.jsonl", SerializeDataset(dataset));
  ctx.WriteOutput("measured.csv",
                  SerializeCsv(MeasurementTable(dataset.model, dataset.dt,
                                                dataset.measurements)));
  spdlog::info("corrupted {} nodes with seed {}", dataset.measurements.size(),
               noise.seed);
  return kExitOk;
}

// ---------------------------------------------------------------- estimate

WeightConfig WeightsFromJson(const json& document) {
  WeightConfig w;
  const std::map<std::string, double*> fields = {
      {"base_position", &w.base_position},
      {"base_angle", &w.base_angle},
      {"base_velocity", &w.base_velocity},
      {"base_angular_velocity", &w.base_angular_velocity},
      {"joint_position", &w.joint_position},
      {"joint_velocity", &w.joint_velocity},
      {"process_base_linear", &w.process_base_linear},
      {"process_base_angular", &w.process_base_angular},
      {"process_joint", &w.process_joint},
      {"parameter", &w.parameter},
      {"prior_base_position", &w.prior_base_position},
      {"prior_base_angle", &w.prior_base_angle},
      {"prior_base_velocity", &w.prior_base_velocity},
      {"prior_base_angular_velocity", &w.prior_base_angular_velocity},
      {"prior_joint_position", &w.prior_joint_position},
      {"prior_joint_velocity", &w.prior_joint_velocity},
  };
  if (!document.is_object()) throw ParseError("$", "expected an object");
  for (const auto& [key, value] : document.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ParseError("$." + key, "unknown weight");
    if (!value.is_number()) throw ParseError("$." + key, "expected a number");
    *it->second = value.get<double>();
  }
  w.Validate();
  return w;
}

bool SameStructure(const PlanarModel& a, const PlanarModel& b) {
  if (a.num_links() != b.num_links() || a.nu() != b.nu() ||
      a.num_contacts() != b.num_contacts()) {
    return false;
  }
  for (int i = 0; i < a.num_links(); ++i) {
    if (a.links()[i].parent != b.links()[i].parent ||
        !(a.links()[i].joint == b.links()[i].joint)) {
      return false;
    }
  }
  return true;
}

// Problem shared by estimate and sweep-kappa, at smoothing `kappa`.
EstimationProblem BuildProblem(RunContext& ctx, const ordered_json& args,
                               const Dataset& dataset, double kappa) {
  if (!dataset.has_measurements()) {
    throw UsageError("dataset has no measurements; run corrupt first");
  }
  if (!(kappa > 0.0)) throw UsageError("--kappa must be positive");
  EstimationProblem problem;
  PlanarModel nominal = dataset.model;
  const std::string prior_path = Arg<std::string>(args, "prior_model");
  if (!prior_path.empty()) {
    nominal = LoadModel(ctx.ReadInput(prior_path));
    if (!SameStructure(nominal, dataset.model)) {
      throw UsageError("--prior-model does not match the dataset's structure");
    }
  }
  const double mass_scale = Arg<double>(args, "mass_scale");
  const int mass_link = Arg<int>(args, "mass_link");
  if (!(mass_scale > 0.0)) throw UsageError("--mass-scale must be positive");
  if (mass_link < 0 || mass_link >= nominal.num_links()) {
    throw UsageError("--mass-link out of range");
  }
  if (mass_scale != 1.0) {
    // Mass and first moment scale together, so the COM stays put.
    InertialParams2D inertia = nominal.links()[mass_link].inertia;
    inertia.pi.head<3>() *= mass_scale;
    nominal = nominal.WithLinkInertia(mass_link, inertia);
  }
  problem.model = nominal;
  problem.dt = dataset.dt;
  problem.measurements = dataset.measurements;
  problem.inputs = dataset.inputs;
  const std::string weights_path = Arg<std::string>(args, "weights");
  if (!weights_path.empty()) {
    json document;
    try {
      document = json::parse(ctx.ReadInput(weights_path));
    } catch (const json::parse_error& e) {
      throw ParseError("$", e.what());
    }
    problem.weights = WeightsFromJson(document);
  }
  for (int link : Arg<std::vector<int>>(args, "identify")) {
    if (link < 0 || link >= nominal.num_links()) {
      throw UsageError("--identify link " + std::to_string(link) +
                       " out of range");
    }
    for (int p = 0; p < 6; ++p) problem.identify.push_back({link, p});
  }
  const std::string solver = Arg<std::string>(args, "solver");
  if (solver != "fddp" && solver != "ddp") {
    throw UsageError("--solver must be fddp or ddp");
  }
  problem.smoothing.kappa = kappa;
  problem.solver.fddp = solver == "fddp";
  problem.solver.max_iterations = Arg<int>(args, "max_iterations");
  problem.solver.threads = Arg<int>(args, "threads");
  if (problem.solver.max_iterations < 1) {
    throw UsageError("--max-iterations must be at least 1");
  }
  if (problem.solver.threads < 1) throw UsageError("--threads must be >= 1");
  return problem;
}

std::vector<double> InertiaRow(const InertialParams2D& in) {
  const double m = in.mass();
  return {m, in.hx(), in.hy(), in.iz(), in.hx() / m, in.hy() / m};
}

Table ParameterTable(const PlanarModel& prior, const PlanarModel& estimate,
                     const Dataset& dataset) {
  Table t;
  t.columns = {"link"};
  for (const char* which : {"prior", "estimate", "truth"}) {
    for (const char* q : {"m", "hx", "hy", "Iz", "com_x", "com_y"}) {
      t.columns.push_back(std::string(which) + "_" + q);
    }
  }
  const bool truth = dataset.has_truth();
  for (int l = 0; l < prior.num_links(); ++l) {
    std::vector<double> row = {static_cast<double>(l)};
    for (const PlanarModel* m : {&prior, &estimate, &dataset.model}) {
      std::vector<double> v = InertiaRow(m->links()[l].inertia);
      if (m == &dataset.model && !truth) v.assign(6, NAN);
      row.insert(row.end(), v.begin(), v.end());
    }
    t.rows.push_back(row);
  }
  return t;
}

const std::vector<std::string> kMetricColumns = {"method",
                                                 "pose_rmse",
                                                 "base_position_rmse",
                                                 "base_angle_rmse",
                                                 "joint_position_rmse",
                                                 "velocity_rmse",
                                                 "force_rmse",
                                                 "contact_timing_accuracy",
                                                 "cost",
                                                 "converged",
                                                 "iterations"};

std::vector<std::string> MetricRow(const std::string& method, const Metrics& m,
                                   double cost, const std::string& converged,
                                   const std::string& iterations) {
  return {method,
          CsvNumber(m.pose_rmse),
          CsvNumber(m.base_position_rmse),
          CsvNumber(m.base_angle_rmse),
          CsvNumber(m.joint_position_rmse),
          CsvNumber(m.velocity_rmse),
          CsvNumber(m.force_rmse),
          CsvNumber(m.contact_timing_accuracy),
          CsvNumber(cost),
          converged,
          iterations};
}

std::vector<std::string> Console(const std::vector<std::string>& row) {
  std::vector<std::string> out;
  for (const std::string& cell : row) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    out.push_back(!cell.empty() && end && *end == '\0'
                      ? Short(v)
                      : (cell.empty() ? "-" : cell));
  }
  return out;
}

std::vector<std::string> SolutionMetricRow(const std::string& method,
                                           const EstimationSolution& s,
                                           const Trajectory& truth) {
  return MetricRow(method, ComputeMetrics(s.states, s.lambda_n, truth),
                   s.cost.total(), s.converged ? "1" : "0",
                   std::to_string(s.iterations));
}

std::vector<std::string> MeasurementMetricRow(const EstimationProblem& problem,
                                              const Trajectory& truth) {
  return MetricRow("measurements",
                   ComputeMetrics(SeedStates(problem), {}, truth), NAN, "", "");
}

void WriteSolution(RunContext& ctx, const std::string& prefix,
                   const EstimationSolution& s, const Dataset& dataset) {
  ctx.WriteOutput(prefix + "solution.json",
                  DumpJson(SolutionToJson(s), 2) + "\n");
  ctx.WriteOutput(prefix + "trace.csv", SerializeCsv(TraceTable(s)));
  ctx.WriteOutput(
      prefix + "estimate.csv",
      SerializeCsv(TrajectoryTable(s.model, dataset.dt, s.states,
                                   dataset.inputs, s.lambda_n, s.lambda_t)));
}

void LogSolution(const std::string& name, const EstimationSolution& s) {
  const auto log = s.converged ? spdlog::level::info : spdlog::level::warn;
  spdlog::log(log, "{}: {} after {} iterations ({}), cost {:.9g}, gap {:.3g}",
              name, s.converged ? "converged" : "not converged", s.iterations,
              s.message, s.cost.total(), s.gap_norm);
}

int RunEstimate(RunContext& ctx, const ordered_json& args) {
  const Dataset dataset = LoadDatasetArg(ctx, args);
  EstimationProblem problem =
      BuildProblem(ctx, args, dataset, Arg<double>(args, "kappa"));
  problem.solver.kappa_final = Arg<double>(args, "kappa_final");
  problem.solver.kappa_growth = Arg<double>(args, "kappa_growth");
  if (problem.solver.kappa_final > problem.smoothing.kappa &&
      !(problem.solver.kappa_growth > 1.0)) {
    throw UsageError("--kappa-growth must exceed 1");
  }
  const auto start = std::chrono::steady_clock::now();
  const EstimationSolution solution = PfieEstimate(problem);
  spdlog::info(
      "estimate took {:.2f} s",
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count());
  LogSolution("estimate", solution);
  WriteSolution(ctx, "", solution, dataset);
  ctx.WriteOutput(
      "parameters.csv",
      SerializeCsv(ParameterTable(problem.model, solution.model, dataset)));

  std::optional<EstimationSolution> baseline;
  if (Arg<bool>(args, "baseline")) {
    EstimationProblem fixed = problem;
    fixed.identify.clear();
    baseline = BaselineFixedContactEstimate(
        fixed, Arg<double>(args, "height_threshold"));
    LogSolution("baseline", *baseline);
    WriteSolution(ctx, "baseline_", *baseline, dataset);
  }

  const CostBreakdown& c = solution.cost;
  PrintTable({"process", "measurement", "prior", "parameter", "total", "kappa",
              "gap", "iterations", "converged"},
             {{Short(c.process), Short(c.measurement), Short(c.prior),
               Short(c.parameter), Short(c.total()), Short(solution.kappa),
               Short(solution.gap_norm), std::to_string(solution.iterations),
               solution.converged ? "yes" : "no"}});
  if (!problem.identify.empty()) {
    std::vector<std::vector<std::string>> rows;
    std::set<int> links;
    for (const ThetaIndex& t : problem.identify) links.insert(t.link);
    const char* names[] = {"m", "hx", "hy", "Iz", "com_x", "com_y"};
    for (int l : links) {
      const auto prior = InertiaRow(problem.model.links()[l].inertia);
      const auto est = InertiaRow(solution.model.links()[l].inertia);
      const auto truth = InertiaRow(dataset.model.links()[l].inertia);
      for (int i = 0; i < 6; ++i) {
        rows.push_back({dataset.model.links()[l].name, names[i],
                        Short(prior[i]), Short(est[i]),
                        dataset.has_truth() ? Short(truth[i]) : "-"});
      }
    }
    std::cout << '\n';
    PrintTable({"link", "parameter", "prior", "estimate", "truth"}, rows);
  }
  if (dataset.has_truth()) {
    const Trajectory truth = dataset.Truth();
    std::vector<std::vector<std::string>> rows = {
        MeasurementMetricRow(problem, truth),
        SolutionMetricRow("prime", solution, truth)};
    if (baseline)
      rows.push_back(SolutionMetricRow("baseline", *baseline, truth));
    ctx.WriteOutput("metrics.csv", TextCsv(kMetricColumns, rows));
    std::vector<std::vector<std::string>> console;
    for (const auto& row : rows) console.push_back(Console(row));
    std::cout << '\n';
    PrintTable(kMetricColumns, console);
  }
  return solution.converged ? kExitOk : kExitNotConverged;
}

// --------------------------------------------------------------- gradcheck

int RunGradcheck(RunContext& ctx, const ordered_json& args) {
  const int samples = Arg<int>(args, "samples");
  if (samples < 1) throw UsageError("--samples must be at least 1");
  GradCheckOptions options;
  options.samples = samples;
  options.seed = Arg<uint64_t>(args, "seed");
  options.dt = Arg<double>(args, "dt");
  options.smoothing.kappa = Arg<double>(args, "kappa");
  if (!(options.dt > 0.0)) throw UsageError("--dt must be positive");
  if (!(options.smoothing.kappa > 0.0)) {
    throw UsageError("--kappa must be positive");
  }
  const PlanarModel model = LoadModelArg(ctx, Arg<std::string>(args, "model"));
  if (model.nq() == 4 && model.nu() == 1)
    options.reference = HopperInitialState();
  const GradCheckReport report = RunGradCheck(model, options);

  struct Row {
    const char* name;
    double error;
    double tolerance;
  };
  const std::vector<Row> rows = {
      {"A", report.a, kStepTolerance},
      {"B_u", report.b_u, kStepTolerance},
      {"B_theta", report.b_theta, kStepTolerance},
      {"inertia_2d", report.inertia_2d, kInertiaTolerance},
      {"inertia_3d", report.inertia_3d, kInertiaTolerance},
  };
  bool pass = true;
  std::vector<std::vector<std::string>> csv, console;
  for (const Row& r : rows) {
    const bool ok = r.error <= r.tolerance;
    pass = pass && ok;
    csv.push_back({r.name, FormatDouble(r.error), FormatDouble(r.tolerance),
                   ok ? "1" : "0"});
    console.push_back(
        {r.name, Short(r.error), Short(r.tolerance), ok ? "pass" : "FAIL"});
  }
  ctx.WriteOutput(
      "gradcheck.csv",
      TextCsv({"quantity", "max_relative_error", "tolerance", "pass"}, csv));
  PrintTable({"quantity", "max_rel_error", "tolerance", "status"}, console);
  std::cout << "samples " << report.samples << ", resampled "
            << report.resampled << '\n';
  return pass ? kExitOk : kExitNotConverged;
}

// ------------------------------------------------------------- sweep-kappa

int RunSweep(RunContext& ctx, const ordered_json& args) {
  const auto kappas = Arg<std::vector<double>>(args, "kappas");
  if (kappas.empty()) throw UsageError("--kappas must list at least one value");
  for (double k : kappas) {
    if (!(k > 0.0)) throw UsageError("--kappas values must be positive");
  }
  const Dataset dataset = LoadDatasetArg(ctx, args);
  // Validates the shared options once before the loop.
  BuildProblem(ctx, args, dataset, kappas.front());

  std::optional<Trajectory> truth;
  std::vector<State> stance_states;
  std::vector<VectorXd> stance_inputs;
  if (dataset.has_truth()) {
    truth = dataset.Truth();
    for (int k : StanceNodes(truth->lambda_n)) {
      stance_states.push_back(truth->states[k]);
      stance_inputs.push_back(truth->inputs[k]);
    }
  }

  std::vector<std::vector<std::string>> rows, console;
  PlotSeries gap_series{"gap to SOCP", {}, {}};
  PlotSeries force_series{"force RMSE", {}, {}};
  for (double kappa : kappas) {
    std::vector<std::string> row = {FormatDouble(kappa)};
    double gap = NAN, force = NAN;
    try {
      const EstimationProblem problem = BuildProblem(ctx, args, dataset, kappa);
      const EstimationSolution s = PfieEstimate(problem);
      LogSolution("kappa " + Short(kappa), s);
      double timing = NAN;
      if (truth) {
        const Metrics m = ComputeMetrics(s.states, s.lambda_n, *truth);
        force = m.force_rmse;
        timing = m.contact_timing_accuracy;
        if (!stance_states.empty()) {
          gap = MeanSocpGap(dataset.model, stance_states, stance_inputs,
                            dataset.dt, problem.smoothing);
        }
      }
      row.insert(row.end(),
                 {s.converged ? "converged" : "not_converged",
                  std::to_string(s.iterations), CsvNumber(s.cost.total()),
                  CsvNumber(force), CsvNumber(timing), CsvNumber(gap)});
    } catch (const std::exception& e) {
      spdlog::warn("kappa {}: {}", Short(kappa), e.what());
      row.insert(row.end(),
                 {std::string("failed: ") + e.what(), "", "", "", "", ""});
    }
    gap_series.x.push_back(kappa);
    gap_series.y.push_back(gap);
    force_series.x.push_back(kappa);
    force_series.y.push_back(force);
    console.push_back(Console(row));
    rows.push_back(std::move(row));
  }
  ctx.WriteOutput("sweep.csv", TextCsv({"kappa", "status", "iterations", "cost",
                                        "force_rmse", "contact_timing_accuracy",
                                        "gap_to_socp"},
                                       rows));
  PrintTable({"kappa", "status", "iterations", "cost", "force_rmse", "timing",
              "gap_to_socp"},
             console);
  auto plot = [&](const std::string& name, const PlotSeries& series,
                  const std::string& title, const std::string& y_label) {
    const bool any = std::any_of(series.y.begin(), series.y.end(),
                                 [](double v) { return std::isfinite(v); });
    if (!any) {
      spdlog::warn("{}: no finite values, plot skipped", name);
      return;
    }
    PlotSpec spec;
    spec.title = title;
    spec.x_label = "kappa";
    spec.y_label = y_label;
    spec.log_x = true;
    spec.series = {series};
    ctx.WriteOutput(name, RenderSvg(spec));
  };
  plot("sweep_gap.svg", gap_series, "Mean smoothed-vs-SOCP velocity gap",
       "gap (m/s)");
  plot("sweep_force.svg", force_series, "Normal force RMSE", "RMSE (N)");
  return kExitOk;
}

// -------------------------------------------------------------------- eval

int RunEval(RunContext& ctx, const ordered_json& args) {
  const Dataset dataset = LoadDatasetArg(ctx, args);
  if (!dataset.has_truth()) throw UsageError("dataset has no ground truth");
  const std::string solution_path = Arg<std::string>(args, "solution");
  if (solution_path.empty()) throw UsageError("--solution is required");
  json document;
  try {
    document = json::parse(ctx.ReadInput(solution_path));
  } catch (const json::parse_error& e) {
    throw ParseError("$", e.what());
  }
  const EstimationSolution solution = SolutionFromJson(document);
  const Trajectory truth = dataset.Truth();
  std::vector<std::vector<std::string>> rows;
  if (dataset.has_measurements()) {
    EstimationProblem problem;
    problem.model = dataset.model;
    problem.dt = dataset.dt;
    problem.measurements = dataset.measurements;
    problem.inputs = dataset.inputs;
    rows.push_back(MeasurementMetricRow(problem, truth));
  }
  rows.push_back(SolutionMetricRow("solution", solution, truth));
  ctx.WriteOutput("metrics.csv", TextCsv(kMetricColumns, rows));
  std::vector<std::vector<std::string>> console;
  for (const auto& row : rows) console.push_back(Console(row));
  PrintTable(kMetricColumns, console);
  return kExitOk;
}

// -------------------------------------------------------------------- plot

struct LabeledTable {
  std::string label;
  Table table;
};

std::vector<LabeledTable> LoadPlotInputs(
    RunContext& ctx, const std::vector<std::string>& paths) {
  std::vector<LabeledTable> tables;
  for (const std::string& path : paths) {
    const std::string stem = fs::path(path).stem().string();
    const std::string content = ctx.ReadInput(path);
    if (fs::path(path).extension() == ".jsonl") {
      const Dataset d = ParseDataset(content);
      if (d.has_truth()) {
        tables.push_back(
            {stem + ":truth", TrajectoryTable(d.model, d.dt, d.states, d.inputs,
                                              d.lambda_n, d.lambda_t)});
      }
      if (d.has_measurements()) {
        tables.push_back({stem + ":measured",
                          MeasurementTable(d.model, d.dt, d.measurements)});
      }
    } else {
      tables.push_back({stem, ParseCsv(content)});
    }
  }
  return tables;
}

int RunPlot(RunContext& ctx, const ordered_json& args) {
  const auto inputs = Arg<std::vector<std::string>>(args, "inputs");
  const auto channels = Arg<std::vector<std::string>>(args, "channels");
  const std::string name = Arg<std::string>(args, "name");
  if (inputs.empty()) throw UsageError("--inputs must list at least one file");
  if (channels.empty()) throw UsageError("--channels must list at least one");
  if (name.empty() || fs::path(name).has_parent_path()) {
    throw UsageError("--name must be a plain file name");
  }
  const std::vector<LabeledTable> tables = LoadPlotInputs(ctx, inputs);

  PlotSpec spec;
  spec.title = Arg<std::string>(args, "title");
  spec.x_label = "t";
  std::set<std::string> available;
  for (const std::string& channel : channels) {
    bool found = false;
    for (const LabeledTable& lt : tables) {
      const Table& t = lt.table;
      const int c = t.Column(channel);
      if (c < 0) continue;
      found = true;
      int x = t.Column("t");
      if (x < 0) {
        x = t.Column("k");
        spec.x_label = "k";
      }
      PlotSeries series;
      series.label = channels.size() == 1 ? lt.label : lt.label + ":" + channel;
      for (size_t r = 0; r < t.rows.size(); ++r) {
        series.x.push_back(x < 0 ? static_cast<double>(r) : t.rows[r][x]);
        series.y.push_back(t.rows[r][c]);
      }
      spec.series.push_back(std::move(series));
    }
    if (!found) {
      for (const LabeledTable& lt : tables) {
        for (const std::string& col : lt.table.columns) {
          if (col != "k" && col != "t") available.insert(col);
        }
      }
      std::string list;
      for (const std::string& col : available) {
        list += (list.empty() ? "" : ", ") + col;
      }
      throw UsageError("unknown channel '" + channel + "'; available: " + list);
    }
  }
  if (spec.title.empty()) {
    for (const std::string& channel : channels) {
      spec.title += (spec.title.empty() ? "" : ", ") + channel;
    }
  }
  spec.y_label = channels.size() == 1 ? channels.front() : "value";
  ctx.WriteOutput(name, RenderSvg(spec));
  return kExitOk;
}

using Command = std::function<int(RunContext&, const ordered_json&)>;

const std::map<std::string, Command>& Commands() {
  static const auto* commands = new std::map<std::string, Command>{
      {"simulate", RunSimulate}, {"corrupt", RunCorrupt},
      {"estimate", RunEstimate}, {"gradcheck", RunGradcheck},
      {"sweep-kappa", RunSweep}, {"eval", RunEval},
      {"plot", RunPlot},
  };
  return *commands;
}

std::string Absolute(const std::string& path) {
  if (path.empty()) return path;
  return fs::absolute(path).lexically_normal().string();
}

std::vector<double> ParseList(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (*end != '\0') {
      throw UsageError(std::string(flag) + ": '" + item + "' is not a number");
    }
    values.push_back(v);
  }
  return values;
}

void SetUpLogging() {
  auto logger = std::make_shared<spdlog::logger>(
      "prime", std::make_shared<spdlog::sinks::stderr_sink_mt>());
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("PRIME_LOG")) {
    const std::string name = env;
    const auto level = spdlog::level::from_str(name);
    if (level == spdlog::level::off && name != "off") {
      spdlog::warn("PRIME_LOG: unknown level '{}', using info", name);
    } else {
      spdlog::set_level(level);
    }
  }
}

// Options of the estimator shared by estimate and sweep-kappa.
struct ProblemFlags {
  std::string data;
  std::string prior_model;
  double mass_scale = 1.0;
  int mass_link = 0;
  std::string weights;
  std::vector<int> identify = {0};
  bool no_id = false;
  std::string solver = "fddp";
  int max_iterations = 200;
  int threads = 1;

  void Add(CLI::App* app, bool identify_default) {
    if (!identify_default) identify.clear();
    app->add_option("--data", data, "Dataset (JSONL) with measurements")
        ->required();
    app->add_option("--prior-model", prior_model,
                    "Model whose inertias form the parameter prior");
    app->add_option("--mass-scale", mass_scale,
                    "Scale the prior mass of --mass-link (COM kept)")
        ->capture_default_str();
    app->add_option("--mass-link", mass_link, "Link scaled by --mass-scale")
        ->capture_default_str();
    app->add_option("--weights", weights, "JSON object of weight overrides");
    app->add_option("--identify", identify,
                    "Links whose inertias are identified")
        ->delimiter(',')
        ->capture_default_str();
    app->add_flag("--no-id", no_id, "State estimation only");
    app->add_option("--solver", solver, "fddp or ddp")
        ->check(CLI::IsMember({"fddp", "ddp"}))
        ->capture_default_str();
    app->add_option("--max-iterations", max_iterations,
                    "Iterations per kappa stage")
        ->capture_default_str();
    app->add_option("--threads", threads, "Linearization threads")
        ->capture_default_str();
  }

  void Fill(ordered_json* args) const {
    (*args)["data"] = Absolute(data);
    (*args)["prior_model"] = Absolute(prior_model);
    (*args)["mass_scale"] = mass_scale;
    (*args)["mass_link"] = mass_link;
    (*args)["weights"] = Absolute(weights);
    (*args)["identify"] = no_id ? std::vector<int>{} : identify;
    (*args)["solver"] = solver;
    (*args)["max_iterations"] = max_iterations;
    (*args)["threads"] = threads;
  }
};

}  // namespace

std::string Fnv1a64(const std::string& data) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

int Execute(const Invocation& invocation, const std::string& out_dir) {
  const auto it = Commands().find(invocation.command);
  if (it == Commands().end()) {
    throw UsageError("unknown command '" + invocation.command + "'");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw IoError("cannot create output directory " + out_dir +
                  (ec ? ": " + ec.message() : ""));
  }
  RunContext ctx(out_dir);
  const int code = it->second(ctx, invocation.args);
  ordered_json run;
  run["tool"] = "prime";
  run["version"] = PRIME_VERSION;
  run["command"] = invocation.command;
  run["args"] = invocation.args;
  run["rng"] = kRngAlgorithm;
  run["libraries"] = {
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  run["inputs"] = ctx.inputs();
  run["outputs"] = ctx.outputs();
  run["exit_code"] = code;
  WriteTextFile((fs::path(out_dir) / "run.json").string(),
                DumpJson(run, 2) + "\n");
  return code;
}

int Replay(const std::string& run_json,
           const std::optional<std::string>& out_dir) {
  ordered_json run;
  try {
    run = ordered_json::parse(ReadTextFile(run_json));
  } catch (const json::parse_error& e) {
    throw ParseError("$", e.what());
  }
  if (!run.is_object() || run.value("tool", "") != "prime") {
    throw ParseError("$.tool", "not a prime run record");
  }
  const std::string version = Arg<std::string>(run, "version");
  if (version != PRIME_VERSION) {
    spdlog::warn("run.json was written by version {}, this is {}", version,
                 PRIME_VERSION);
  }
  if (!run.contains("inputs") || !run.at("inputs").is_array()) {
    throw ParseError("$.inputs", "missing");
  }
  for (const auto& input : run.at("inputs")) {
    const std::string path = Arg<std::string>(input, "path");
    if (Fnv1a64(ReadTextFile(path)) != Arg<std::string>(input, "fnv1a64")) {
      throw IoError("input changed since the recorded run: " + path);
    }
  }
  if (!run.contains("args") || !run.at("args").is_object()) {
    throw ParseError("$.args", "missing");
  }
  const Invocation invocation{Arg<std::string>(run, "command"), run.at("args")};
  const std::string out =
      out_dir
          ? *out_dir
          : fs::absolute(run_json).parent_path().lexically_normal().string();
  return Execute(invocation, out);
}

int Main(int argc, char** argv) {
  SetUpLogging();
  CLI::App app{
      "Contact-aware trajectory and inertial parameter estimation "
      "for planar legged robots"};
  app.set_version_flag("--version", PRIME_VERSION);
  app.require_subcommand(1);
  std::string out = "out";
  auto add_out = [&out](CLI::App* sub) {
    sub->add_option("--out", out, "Output directory")->capture_default_str();
  };

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a ground-truth dataset");
  std::string sim_model, sim_schedule, sim_stepper = "lcp", sim_x0;
  int sim_steps = 100;
  double sim_dt = 0.025, sim_kappa = 5000.0;
  HopperPolicy policy;
  sim->add_option("--model", sim_model,
                  "Model JSON (default: built-in hopper)");
  sim->add_option("--steps", sim_steps, "Number of steps")
      ->capture_default_str();
  sim->add_option("--dt", sim_dt, "Time step (s)")->capture_default_str();
  sim->add_option("--stepper", sim_stepper, "lcp, smoothed or socp")
      ->check(CLI::IsMember({"lcp", "smoothed", "socp"}))
      ->capture_default_str();
  sim->add_option("--kappa", sim_kappa, "Barrier weight for --stepper smoothed")
      ->capture_default_str();
  sim->add_option("--schedule", sim_schedule,
                  "CSV of inputs u0..u{nu-1}, one row per step");
  sim->add_option("--x0", sim_x0, "Initial [q; v], comma separated");
  sim->add_option("--amplitude", policy.amplitude,
                  "Hopper thrust amplitude (N)")
      ->capture_default_str();
  sim->add_option("--frequency", policy.frequency,
                  "Hopper thrust frequency (Hz)")
      ->capture_default_str();
  sim->add_option("--stiffness", policy.stiffness, "Hopper leg stiffness (N/m)")
      ->capture_default_str();
  add_out(sim);

  // corrupt
  auto* cor =
      app.add_subcommand("corrupt", "Add measurement noise to a dataset");
  std::string cor_data;
  NoiseConfig noise;
  cor->add_option("--data", cor_data, "Dataset (JSONL) with ground truth")
      ->required();
  cor->add_option("--seed", noise.seed, "Noise seed")->capture_default_str();
  cor->add_option("--sigma-base-position", noise.base_position)
      ->capture_default_str();
  cor->add_option("--sigma-base-angle", noise.base_angle)
      ->capture_default_str();
  cor->add_option("--sigma-base-velocity", noise.base_velocity)
      ->capture_default_str();
  cor->add_option("--sigma-base-angular-velocity", noise.base_angular_velocity)
      ->capture_default_str();
  cor->add_option("--sigma-joint-position", noise.joint_position)
      ->capture_default_str();
  cor->add_option("--sigma-joint-velocity", noise.joint_velocity)
      ->capture_default_str();
  cor->add_option("--bias", noise.base_angle_bias,
                  "Constant base-angle bias (rad)")
      ->capture_default_str();
  add_out(cor);

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate states and inertias");
  ProblemFlags est_flags;
  est_flags.Add(est, true);
  double est_kappa = 500.0, est_kappa_final = 5000.0, est_growth = 10.0;
  double threshold = 0.01;
  bool with_baseline = false;
  est->add_option("--kappa", est_kappa, "Initial barrier weight")
      ->capture_default_str();
  est->add_option("--kappa-final", est_kappa_final,
                  "Final barrier weight of the annealing")
      ->capture_default_str();
  est->add_option("--kappa-growth", est_growth, "Annealing factor per stage")
      ->capture_default_str();
  est->add_flag("--baseline", with_baseline,
                "Also run the fixed-contact baseline");
  est->add_option("--height-threshold", threshold,
                  "Baseline contact height threshold (m)")
      ->capture_default_str();
  add_out(est);

  // gradcheck
  auto* grad = app.add_subcommand("gradcheck", "Check analytic derivatives");
  std::string grad_model;
  int grad_samples = 100;
  uint64_t grad_seed = 1;
  double grad_kappa = 500.0, grad_dt = 0.025;
  grad->add_option("--model", grad_model,
                   "Model JSON (default: built-in hopper)");
  grad->add_option("--samples", grad_samples, "Random states")
      ->capture_default_str();
  grad->add_option("--seed", grad_seed, "Sampling seed")->capture_default_str();
  grad->add_option("--kappa", grad_kappa, "Barrier weight")
      ->capture_default_str();
  grad->add_option("--dt", grad_dt, "Time step (s)")->capture_default_str();
  add_out(grad);

  // sweep-kappa
  auto* sweep =
      app.add_subcommand("sweep-kappa", "Estimate at several barrier weights");
  ProblemFlags sweep_flags;
  sweep_flags.Add(sweep, false);
  std::string kappas = "50,100,500,1000,5000";
  sweep->add_option("--kappas", kappas, "Comma-separated barrier weights")
      ->capture_default_str();
  add_out(sweep);

  // eval
  auto* ev =
      app.add_subcommand("eval", "Score a solution against ground truth");
  std::string ev_data, ev_solution;
  ev->add_option("--data", ev_data, "Dataset (JSONL) with ground truth")
      ->required();
  ev->add_option("--solution", ev_solution, "solution.json")->required();
  add_out(ev);

  // plot
  auto* plot =
      app.add_subcommand("plot", "Plot channels of CSV or dataset files");
  std::vector<std::string> plot_inputs, plot_channels;
  std::string plot_name = "plot.svg", plot_title;
  plot->add_option("--inputs", plot_inputs, "CSV or dataset files")->required();
  plot->add_option("--channels", plot_channels, "Column names")
      ->delimiter(',')
      ->required();
  plot->add_option("--name", plot_name, "SVG file name")->capture_default_str();
  plot->add_option("--title", plot_title, "Plot title");
  add_out(plot);

  // replay
  auto* replay = app.add_subcommand("replay", "Re-run a recorded run.json");
  std::string replay_path;
  std::string replay_out;
  replay->add_option("run_json", replay_path, "run.json")->required();
  replay->add_option("--out", replay_out,
                     "Output directory (default: beside run.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (replay->parsed()) {
      return Replay(replay_path, replay_out.empty()
                                     ? std::nullopt
                                     : std::optional<std::string>(replay_out));
    }
    Invocation inv;
    ordered_json& a = inv.args;
    if (sim->parsed()) {
      inv.command = "simulate";
      a["model"] = Absolute(sim_model);
      a["steps"] = sim_steps;
      a["dt"] = sim_dt;
      a["stepper"] = sim_stepper;
      a["kappa"] = sim_kappa;
      a["schedule"] = Absolute(sim_schedule);
      a["x0"] = ParseList(sim_x0, "--x0");
      a["policy"] = {
          {"rest_length", policy.rest_length}, {"stiffness", policy.stiffness},
          {"damping", policy.damping},         {"amplitude", policy.amplitude},
          {"frequency", policy.frequency},     {"phase", policy.phase},
          {"max_force", policy.max_force}};
    } else if (cor->parsed()) {
      inv.command = "corrupt";
      a["data"] = Absolute(cor_data);
      a["seed"] = noise.seed;
      a["base_position"] = noise.base_position;
      a["base_angle"] = noise.base_angle;
      a["bias"] = noise.base_angle_bias;
      a["base_velocity"] = noise.base_velocity;
      a["base_angular_velocity"] = noise.base_angular_velocity;
      a["joint_position"] = noise.joint_position;
      a["joint_velocity"] = noise.joint_velocity;
    } else if (est->parsed()) {
      inv.command = "estimate";
      est_flags.Fill(&a);
      a["kappa"] = est_kappa;
      a["kappa_final"] = est_kappa_final;
      a["kappa_growth"] = est_growth;
      a["baseline"] = with_baseline;
      a["height_threshold"] = threshold;
    } else if (grad->parsed()) {
      inv.command = "gradcheck";
      a["model"] = Absolute(grad_model);
      a["samples"] = grad_samples;
      a["seed"] = grad_seed;
      a["kappa"] = grad_kappa;
      a["dt"] = grad_dt;
    } else if (sweep->parsed()) {
      inv.command = "sweep-kappa";
      sweep_flags.Fill(&a);
      a["kappas"] = ParseList(kappas, "--kappas");
    } else if (ev->parsed()) {
      inv.command = "eval";
      a["data"] = Absolute(ev_data);
      a["solution"] = Absolute(ev_solution);
    } else if (plot->parsed()) {
      inv.command = "plot";
      std::vector<std::string> paths;
      for (const std::string& p : plot_inputs) paths.push_back(Absolute(p));
      a["inputs"] = paths;
      a["channels"] = plot_channels;
      a["name"] = plot_name;
      a["title"] = plot_title;
    }
    return Execute(inv, out);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const SolverError& e) {
    spdlog::error("{}", e.what());
    if (!e.diagnostics().empty()) spdlog::debug("{}", e.diagnostics());
    return kExitNotConverged;
  } catch (const std::exception& e) {
    // IoError, ParseError, ValidationError and anything unexpected.
    spdlog::error("{}", e.what());
    return kExitIo;
  }
}

}  // namespace prime::cli
