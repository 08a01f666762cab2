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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lq_problem.h"
#include "prime/contact.h"
#include "prime/datagen.h"
#include "prime/dataset_io.h"
#include "prime/ddp.h"
#include "prime/dynamics.h"
#include "prime/estimator.h"
#include "prime/gradcheck.h"
#include "prime/inertia.h"
#include "prime/rng.h"
#include "test_models.h"

namespace prime {
namespace {

namespace fs = std::filesystem;
using Eigen::VectorXd;

// Pinned tolerances.
constexpr int kSteps = 100;
constexpr double kDt = 0.025;
constexpr double kMassBias = 1.3;
constexpr double kMassTolerance = 0.05;  // relative
constexpr double kComTolerance = 0.01;   // m
constexpr double kRuntimeLimit = 60.0;   // s
constexpr double kPoseRatioLimit = 0.5;
constexpr double kTimingLimit = 0.95;
constexpr int kStanceStates = 50;
constexpr double kGapLimit = 1e-3;  // m/s at kappa = 5000
constexpr int kGradSamples = 100;
constexpr double kStepJacobianTolerance = 1e-4;
constexpr double kInertiaJacobianTolerance = 1e-6;
constexpr double kComplementarityTolerance = 1e-10;
constexpr double kPenetrationTolerance = 1e-10;
constexpr double kConeTolerance = 1e-12;
constexpr double kOracleTolerance = 1e-8;
constexpr int kParameterSamples = 1000;
constexpr double kRoundTripTolerance = 1e-12;
constexpr double kContactHeightNoise = 0.01;  // m, base and leg positions
constexpr double kBaselineThreshold = 0.01;   // m

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double a) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), format, a);
  return buffer;
}

Trajectory HopperTruth(int steps) {
  const HopperPolicy policy;
  StepOptions options;
  options.stepper = Stepper::kLcp;
  return Simulate(
      HopperModel(), HopperInitialState(),
      [&policy](int k, const State& x) { return policy(k * kDt, x); }, kDt,
      steps, options);
}

EstimationProblem HopperProblem(const Trajectory& truth,
                                const NoiseConfig& noise) {
  EstimationProblem problem;
  problem.model = HopperModel();
  problem.dt = kDt;
  problem.measurements = Corrupt(problem.model, truth.states, noise);
  problem.inputs = truth.inputs;
  problem.smoothing.kappa = 500.0;
  problem.solver.kappa_final = 5000.0;
  problem.solver.threads = 1;
  return problem;
}

// Shared by criteria 1 and 2.
struct IdentificationRun {
  Trajectory truth;
  EstimationProblem problem;
  EstimationSolution solution;
  double seconds = 0.0;
};

const IdentificationRun& Identification() {
  static const IdentificationRun* run = [] {
    auto* r = new IdentificationRun;
    r->truth = HopperTruth(kSteps);
    r->problem = HopperProblem(r->truth, NoiseConfig{});
    InertialParams2D body = r->problem.model.links()[0].inertia;
    body.pi.head<3>() *= kMassBias;
    r->problem.model = r->problem.model.WithLinkInertia(0, body);
    for (int p = 0; p < 6; ++p) r->problem.identify.push_back({0, p});
    const auto start = std::chrono::steady_clock::now();
    r->solution = PfieEstimate(r->problem);
    r->seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return r;
  }();
  return *run;
}

// Accepted feasible iterates never raise the cost within one kappa stage.
bool MonotoneTrace(const EstimationSolution& s, int* checked) {
  double last = INFINITY, kappa = -1.0;
  *checked = 0;
  for (size_t i = 0; i < s.trace.size(); ++i) {
    if (s.trace_kappa[i] != kappa) {
      kappa = s.trace_kappa[i];
      last = INFINITY;
    }
    const DdpIteration& row = s.trace[i];
    if (!row.accepted || row.gap_norm > 1e-6) continue;
    if (row.cost > last + 1e-12 * std::abs(last)) return false;
    last = row.cost;
    ++*checked;
  }
  return true;
}

Outcome Criterion1() {
  const IdentificationRun& r = Identification();
  const InertialParams2D est = r.solution.model.links()[0].inertia;
  const InertialParams2D truth = HopperModel().links()[0].inertia;
  const double mass_error = std::abs(est.mass() - truth.mass()) / truth.mass();
  const double com_error =
      std::abs(est.hx() / est.mass() - truth.hx() / truth.mass());
  int checked = 0;
  const bool monotone = MonotoneTrace(r.solution, &checked);
  Outcome o;
  o.pass = r.solution.converged && mass_error <= kMassTolerance &&
           com_error <= kComTolerance && monotone && checked > 0 &&
           r.seconds <= kRuntimeLimit;
  o.detail = "prior mass " + Fmt("%.3g", truth.mass() * kMassBias) +
             " kg, estimate " + Fmt("%.6g", est.mass()) + " kg (rel err " +
             Fmt("%.2e", mass_error) + " <= 5e-2), COM x err " +
             Fmt("%.2e", com_error) + " m (<= 1e-2), " +
             (monotone ? "monotone" : "NOT monotone") + " over " +
             std::to_string(checked) + " feasible iterates, " +
             (r.solution.converged ? "converged" : "not converged") + ", " +
             Fmt("%.2f", r.seconds) + " s (<= 60 s)";
  return o;
}

Outcome Criterion2() {
  const IdentificationRun& r = Identification();
  const Metrics est =
      ComputeMetrics(r.solution.states, r.solution.lambda_n, r.truth);
  const Metrics raw = ComputeMetrics(SeedStates(r.problem), {}, r.truth);
  const double ratio = est.pose_rmse / raw.pose_rmse;
  Outcome o;
  o.pass =
      ratio <= kPoseRatioLimit && est.contact_timing_accuracy >= kTimingLimit;
  o.detail = "pose RMSE " + Fmt("%.3e", est.pose_rmse) + " vs raw " +
             Fmt("%.3e", raw.pose_rmse) + " (ratio " + Fmt("%.3f", ratio) +
             " <= 0.5), contact timing " +
             Fmt("%.3f", est.contact_timing_accuracy) + " (>= 0.95)";
  return o;
}

Outcome Criterion3() {
  const Trajectory truth = Identification().truth;
  std::vector<State> states;
  std::vector<VectorXd> inputs;
  for (int k : StanceNodes(truth.lambda_n)) {
    if (static_cast<int>(states.size()) == kStanceStates) break;
    states.push_back(truth.states[k]);
    inputs.push_back(truth.inputs[k]);
  }
  Outcome o;
  if (static_cast<int>(states.size()) < kStanceStates) {
    o.detail = "only " + std::to_string(states.size()) + " stance states";
    return o;
  }
  bool decreasing = true;
  double previous = INFINITY, last = INFINITY;
  std::string gaps;
  for (double kappa : {50.0, 100.0, 500.0, 1000.0, 5000.0}) {
    SmoothingConfig smoothing;
    smoothing.kappa = kappa;
    last = MeanSocpGap(HopperModel(), states, inputs, kDt, smoothing);
    decreasing = decreasing && last < previous;
    previous = last;
    gaps += (gaps.empty() ? "" : ", ") + Fmt("%.3e", last);
  }
  o.pass = decreasing && last <= kGapLimit;
  o.detail = "mean gap over " + std::to_string(kStanceStates) +
             " stance states at kappa 50..5000: " + gaps +
             (decreasing ? " (strictly decreasing)" : " (NOT decreasing)") +
             ", final <= 1e-3";
  return o;
}

Outcome Criterion4() {
  Outcome o;
  o.pass = true;
  const std::vector<std::pair<std::string, PlanarModel>> models = {
      {"hopper", HopperModel()}, {"tree", testing::Tree()}};
  for (const auto& [name, model] : models) {
    GradCheckOptions options;
    options.samples = kGradSamples;
    if (name == "hopper") options.reference = HopperInitialState();
    const GradCheckReport r = RunGradCheck(model, options);
    o.pass = o.pass && r.worst_step() <= kStepJacobianTolerance &&
             r.worst_inertia() <= kInertiaJacobianTolerance;
    o.detail += (o.detail.empty() ? "" : "; ") + name + ": A " +
                Fmt("%.1e", r.a) + ", B_u " + Fmt("%.1e", r.b_u) +
                ", B_theta " + Fmt("%.1e", r.b_theta) + " (<= 1e-4), inertia " +
                Fmt("%.1e", r.worst_inertia()) + " (<= 1e-6), " +
                std::to_string(r.samples) + " samples";
  }
  return o;
}

Outcome Criterion5() {
  // LCP along the hopper ground truth and at random tree contact states.
  struct Sample {
    PlanarModel model;
    VectorXd q, v, u;
    double dt;
  };
  std::vector<Sample> samples;
  const Trajectory truth = Identification().truth;
  for (int k = 0; k < truth.horizon(); ++k) {
    samples.push_back({HopperModel(), truth.states[k].q, truth.states[k].v,
                       truth.inputs[k], kDt});
  }
  const PlanarModel tree = testing::Tree();
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    VectorXd q = testing::RandomVector(rng, tree.nq(), 1.0);
    q[1] -= ComputeContactKinematics(tree, q, false).phi.minCoeff() - 0.001;
    samples.push_back({tree, q, testing::RandomVector(rng, tree.nv(), 1.5),
                       testing::RandomVector(rng, tree.nu(), 2.0), 0.01});
  }
  double complementarity = 0.0, penetration = 0.0, cone = 0.0;
  for (const Sample& s : samples) {
    const ContactStepResult r = SolveLcp(s.model, s.q, s.v, s.u, s.dt);
    for (int i = 0; i < s.model.num_contacts(); ++i) {
      const double next_gap = s.dt * r.gap_rate[i];
      complementarity =
          std::max(complementarity, std::abs(next_gap * r.lambda_n[i]));
      penetration = std::min(penetration, next_gap);
      cone = std::max(cone, std::abs(r.lambda_t[i]) -
                                s.model.contacts()[i].mu * r.lambda_n[i]);
    }
  }
  // Smoothed force balance at the hopper stance states and the tree states.
  double balance = 0.0;
  SmoothingConfig cfg;
  for (const Sample& s : samples) {
    const ContactStepResult r =
        SolveSmoothed(s.model, s.q, s.v, s.u, s.dt, cfg);
    const ContactKinematics kin = ComputeContactKinematics(s.model, s.q, false);
    const VectorXd residual = MassMatrix(s.model, s.q) * (r.v_plus - r.v_free) -
                              kin.Jn.transpose() * r.lambda_n -
                              kin.Jt.transpose() * r.lambda_t;
    balance = std::max(
        balance, residual.norm() / (cfg.tolerance * (1.0 + r.v_free.norm())));
  }
  Outcome o;
  o.pass = complementarity <= kComplementarityTolerance &&
           penetration >= -kPenetrationTolerance && cone <= kConeTolerance &&
           balance <= 1.0;
  o.detail = std::to_string(samples.size()) + " states: LCP |gap*lambda_n| " +
             Fmt("%.1e", complementarity) + " (<= 1e-10), min gap " +
             Fmt("%.1e", penetration) + " (>= -1e-10), cone excess " +
             Fmt("%.1e", cone) + " (<= 1e-12); smoothed force balance " +
             Fmt("%.2f", balance) + " x Newton tolerance (<= 1)";
  return o;
}

double MaxDiff(const std::vector<VectorXd>& a, const std::vector<VectorXd>& b) {
  double d = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    d = std::max(d, (a[k] - b[k]).lpNorm<Eigen::Infinity>());
  }
  return d;
}

Outcome Criterion6() {
  double worst = 0.0;
  bool converged = true;
  int instances = 0;
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 20; ++trial) {
    const int nx = trial % 2 == 0 ? 1 : 4;
    const int T = 1 + trial;
    const testing::LinearProblem p =
        testing::RandomLinearProblem(rng, nx, nx, nx == 1 ? 1 : 2, T);
    std::vector<VectorXd> xs_ref, ws_ref;
    p.BatchSolve(&xs_ref, &ws_ref);
    for (bool fddp : {false, true}) {
      DdpOptions options;
      options.feasibility_driven = fddp;
      const DdpResult r =
          SolveDdp(p, std::vector<VectorXd>(T + 1, VectorXd::Zero(nx)),
                   std::vector<VectorXd>(T, VectorXd::Zero(nx)), options);
      converged = converged && r.converged;
      worst = std::max({worst, MaxDiff(r.xs, xs_ref), MaxDiff(r.ws, ws_ref)});
      ++instances;
    }
  }
  const testing::LinearProblem walk = testing::ScalarRandomWalk();
  double walk_error = 0.0;
  for (bool fddp : {false, true}) {
    DdpOptions options;
    options.feasibility_driven = fddp;
    const DdpResult r = SolveDdp(walk, {VectorXd::Zero(1), VectorXd::Zero(1)},
                                 {VectorXd::Zero(1)}, options);
    converged = converged && r.converged;
    walk_error = std::max({walk_error, std::abs(r.xs[0][0] - 2.0 / 3.0),
                           std::abs(r.xs[1][0] - 4.0 / 3.0)});
  }
  Outcome o;
  o.pass =
      converged && worst <= kOracleTolerance && walk_error <= kOracleTolerance;
  o.detail = std::to_string(instances) +
             " DDP/FDDP solves of scalar and 4-state problems (T <= 20): max "
             "deviation from normal equations " +
             Fmt("%.1e", worst) + " (<= 1e-8); random walk (x0, x1) error " +
             Fmt("%.1e", walk_error);
  return o;
}

Outcome Criterion7() {
  const Trajectory truth = HopperTruth(kSteps);
  NoiseConfig noise;
  noise.base_position = kContactHeightNoise;
  noise.joint_position = kContactHeightNoise;
  const EstimationProblem problem = HopperProblem(truth, noise);
  const EstimationSolution prime = PfieEstimate(problem);
  const EstimationSolution baseline =
      BaselineFixedContactEstimate(problem, kBaselineThreshold);
  const Metrics mp = ComputeMetrics(prime.states, prime.lambda_n, truth);
  const Metrics mb = ComputeMetrics(baseline.states, baseline.lambda_n, truth);
  std::printf("      %-10s %14s %14s %10s\n", "method", "force_rmse_N",
              "pose_rmse", "timing");
  std::printf("      %-10s %14.6g %14.6g %10.3f\n", "prime", mp.force_rmse,
              mp.pose_rmse, mp.contact_timing_accuracy);
  std::printf("      %-10s %14.6g %14.6g %10.3f\n", "baseline", mb.force_rmse,
              mb.pose_rmse, mb.contact_timing_accuracy);
  Outcome o;
  o.pass = prime.converged && mp.force_rmse < mb.force_rmse;
  o.detail = "contact-height noise 0.01 m: force RMSE prime " +
             Fmt("%.4g", mp.force_rmse) + " N < baseline " +
             Fmt("%.4g", mb.force_rmse) + " N";
  return o;
}

Outcome Criterion8() {
  Rng rng(8);
  auto gaussian = [&rng](int n, double scale) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * rng.Normal();
    return v;
  };
  int consistent = 0;
  double min_margin = INFINITY, round_trip = 0.0;
  for (int i = 0; i < kParameterSamples; ++i) {
    LogCholeskyParams3D t3;
    t3.theta = gaussian(10, 0.5);
    const InertialParams3D pi3 = ThetaToPi3d(t3);
    const ConsistencyReport c3 = CheckConsistency(pi3);
    const InertialParams3D back3 = PseudoToPi3d(PiToPseudo3d(pi3));
    round_trip =
        std::max(round_trip, (back3.pi - pi3.pi).cwiseAbs().maxCoeff() /
                                 std::max(1.0, pi3.pi.cwiseAbs().maxCoeff()));
    LogCholeskyParams2D t2;
    t2.theta = gaussian(6, 0.5);
    const InertialParams2D pi2 = ThetaToPi2d(t2);
    const ConsistencyReport c2 = CheckConsistency(pi2);
    const InertialParams2D back2 = PseudoToPi2d(PiToPseudo2d(pi2));
    round_trip =
        std::max(round_trip, (back2.pi - pi2.pi).cwiseAbs().maxCoeff() /
                                 std::max(1.0, pi2.pi.cwiseAbs().maxCoeff()));
    consistent += c3.consistent && c2.consistent;
    min_margin = std::min({min_margin, c3.margin, c2.margin});
  }
  Outcome o;
  o.pass = consistent == kParameterSamples && min_margin > 0.0 &&
           round_trip <= kRoundTripTolerance;
  o.detail = std::to_string(consistent) + "/" +
             std::to_string(kParameterSamples) +
             " random theta (3D and 2D) consistent, min PD margin " +
             Fmt("%.2e", min_margin) + " (> 0), pseudo-inertia round trip " +
             Fmt("%.1e", round_trip) + " (<= 1e-12)";
  return o;
}

int RunCli(const std::string& args) {
  const std::string command =
      std::string(PRIME_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome Criterion9() {
  const fs::path root = fs::temp_directory_path() /
                        ("prime_acceptance_" + std::to_string(getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string r = root.string();
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"sim", "simulate --steps 100"},
      {"cor", "corrupt --data " + r + "/sim/dataset.jsonl --seed 3"},
      {"est", "estimate --data " + r +
                  "/cor/dataset.jsonl --mass-scale 1.3 "
                  "--baseline"},
      {"eval", "eval --data " + r + "/cor/dataset.jsonl --solution " + r +
                   "/est/solution.json"},
      {"grad", "gradcheck --samples 10"},
      {"sweep", "sweep-kappa --data " + r + "/cor/dataset.jsonl"},
      {"plot", "plot --inputs " + r + "/cor/dataset.jsonl " + r +
                   "/est/estimate.csv --channels base_z,force_n0"},
  };
  Outcome o;
  o.pass = true;
  int files = 0;
  for (const auto& [dir, args] : runs) {
    const std::string out = r + "/" + dir;
    const std::string again = out + "_replay";
    if (RunCli(args + " --out " + out) != 0 ||
        RunCli("replay " + out + "/run.json --out " + again) != 0) {
      o.pass = false;
      o.detail += dir + " failed to run; ";
      continue;
    }
    for (const auto& entry : fs::directory_iterator(out)) {
      const fs::path other = fs::path(again) / entry.path().filename();
      ++files;
      if (!fs::exists(other) ||
          ReadTextFile(entry.path().string()) != ReadTextFile(other.string())) {
        o.pass = false;
        o.detail += dir + "/" + entry.path().filename().string() + " differs; ";
      }
    }
  }
  fs::remove_all(root);
  o.detail += std::to_string(runs.size()) +
              " commands replayed from run.json, " + std::to_string(files) +
              " files compared byte for byte";
  return o;
}

}  // namespace
}  // namespace prime

int main() {
  using prime::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria =
      {
          {"C1 hopper identification", prime::Criterion1},
          {"C2 trajectory refinement", prime::Criterion2},
          {"C3 smoothing consistency", prime::Criterion3},
          {"C4 gradient suite", prime::Criterion4},
          {"C5 contact-solver exactness", prime::Criterion5},
          {"C6 DDP oracle", prime::Criterion6},
          {"C7 baseline ordering", prime::Criterion7},
          {"C8 parameterization suite", prime::Criterion8},
          {"C9 reproducibility", prime::Criterion9},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
