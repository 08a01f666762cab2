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

#include "prime/contact.h"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "prime/errors.h"
#include "prime/inertia.h"

namespace prime {
namespace {

// Quantities shared by all steppers at one (q, v, u).
struct StepSetup {
  Eigen::MatrixXd mass;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd v_free;
  ContactKinematics kin;
  Eigen::VectorXd gap0;  // phi / dt
  Eigen::VectorXd mu;
  Eigen::MatrixXd minv_jn;  // M^-1 Jn^T
  Eigen::MatrixXd minv_jt;  // M^-1 Jt^T
};

StepSetup Prepare(const PlanarModel& model, const Eigen::VectorXd& q,
                  const Eigen::VectorXd& v, const Eigen::VectorXd& u, double dt,
                  bool with_hessians) {
  if (!(dt > 0.0)) throw InvalidArgument("contact step: dt must be positive");
  if (q.size() != model.nq() || v.size() != model.nv() ||
      u.size() != model.nu()) {
    throw InvalidArgument("contact step: dimension mismatch");
  }
  if (!q.allFinite() || !v.allFinite() || !u.allFinite()) {
    throw InvalidArgument("contact step: non-finite input");
  }
  StepSetup s;
  s.mass = MassMatrix(model, q);
  s.llt.compute(s.mass);
  if (s.llt.info() != Eigen::Success) {
    throw SolverError("contact step: mass matrix is not positive definite", "");
  }
  const Eigen::VectorXd rhs = model.actuation_matrix() * u - Bias(model, q, v);
  s.v_free = v + dt * s.llt.solve(rhs);
  s.kin = ComputeContactKinematics(model, q, with_hessians);
  s.gap0 = s.kin.phi / dt;
  const int nc = model.num_contacts();
  s.mu.resize(nc);
  for (int i = 0; i < nc; ++i) s.mu[i] = model.contacts()[i].mu;
  s.minv_jn = s.llt.solve(s.kin.Jn.transpose());
  s.minv_jt = s.llt.solve(s.kin.Jt.transpose());
  return s;
}

void FillContactState(const StepSetup& s, ContactStepResult* r) {
  r->gap_rate = s.gap0 + s.kin.Jn * r->v_plus;
  r->slip = s.kin.Jt * r->v_plus;
  const int nc = static_cast<int>(s.mu.size());
  r->slack.resize(nc);
  for (int i = 0; i < nc; ++i) {
    const double a = r->gap_rate[i] / s.mu[i] - r->slip[i];
    const double b = r->gap_rate[i] / s.mu[i] + r->slip[i];
    r->slack[i] = a * b;
  }
}

double Scale(const StepSetup& s) {
  double scale = 1.0 + s.v_free.lpNorm<Eigen::Infinity>();
  if (s.gap0.size() > 0) scale += s.gap0.lpNorm<Eigen::Infinity>();
  return scale;
}

std::string DescribeState(const StepSetup& s) {
  std::ostringstream os;
  os.precision(17);
  os << "v_free=[" << s.v_free.transpose() << "] phi=[" << s.kin.phi.transpose()
     << "]";
  return os.str();
}

// ------------------------------------------------------------ barrier ----

struct BarrierPoint {
  bool interior = false;
  Eigen::VectorXd w, t, a, b;
};

BarrierPoint EvalBarrierPoint(const StepSetup& s, const Eigen::VectorXd& v) {
  BarrierPoint p;
  p.w = s.gap0 + s.kin.Jn * v;
  p.t = s.kin.Jt * v;
  p.a = p.w.cwiseQuotient(s.mu) - p.t;
  p.b = p.w.cwiseQuotient(s.mu) + p.t;
  p.interior = (p.a.array() > 0.0).all() && (p.b.array() > 0.0).all();
  return p;
}

double Objective(const StepSetup& s, const Eigen::VectorXd& v,
                 const BarrierPoint& p, double kappa) {
  const Eigen::VectorXd dv = v - s.v_free;
  double f = 0.5 * dv.dot(s.mass * dv);
  for (int i = 0; i < p.w.size(); ++i) {
    f -= (std::log(p.a[i]) + std::log(p.b[i])) / kappa;
  }
  return f;
}

struct BarrierDerivatives {
  Eigen::VectorXd lambda_n, lambda_t;
  Eigen::VectorXd bww, btt, bwt;  // Hessian of the barrier in (w, t)
};

BarrierDerivatives EvalBarrierDerivatives(const BarrierPoint& p,
                                          const Eigen::VectorXd& mu,
                                          double kappa) {
  const int nc = static_cast<int>(p.w.size());
  BarrierDerivatives d;
  d.lambda_n.resize(nc);
  d.lambda_t.resize(nc);
  d.bww.resize(nc);
  d.btt.resize(nc);
  d.bwt.resize(nc);
  for (int i = 0; i < nc; ++i) {
    const double w = p.w[i];
    const double t = p.t[i];
    const double m2 = mu[i] * mu[i];
    const double s = p.a[i] * p.b[i];
    d.lambda_n[i] = 2.0 * w / (m2 * kappa * s);
    d.lambda_t[i] = -2.0 * t / (kappa * s);
    d.bww[i] =
        -2.0 / (kappa * m2 * s) + 4.0 * w * w / (m2 * m2 * kappa * s * s);
    d.btt[i] = 2.0 / (kappa * s) + 4.0 * t * t / (kappa * s * s);
    d.bwt[i] = -4.0 * w * t / (m2 * kappa * s * s);
  }
  return d;
}

Eigen::VectorXd Gradient(const StepSetup& s, const Eigen::VectorXd& v,
                         const BarrierDerivatives& d) {
  return s.mass * (v - s.v_free) - s.kin.Jn.transpose() * d.lambda_n -
         s.kin.Jt.transpose() * d.lambda_t;
}

Eigen::MatrixXd Hessian(const StepSetup& s, const BarrierDerivatives& d) {
  const auto& jn = s.kin.Jn;
  const auto& jt = s.kin.Jt;
  Eigen::MatrixXd h = s.mass;
  h += jn.transpose() * d.bww.asDiagonal() * jn;
  h += jt.transpose() * d.btt.asDiagonal() * jt;
  const Eigen::MatrixXd cross = jn.transpose() * d.bwt.asDiagonal() * jt;
  h += cross + cross.transpose();
  return h;
}

bool FeasibleWithMargin(const StepSetup& s, const Eigen::VectorXd& v,
                        double margin) {
  const BarrierPoint p = EvalBarrierPoint(s, v);
  if (!p.interior) return false;
  return ((p.a.array() * p.b.array()) >= margin).all();
}

std::vector<int> Violated(const StepSetup& s, const Eigen::VectorXd& v,
                          double margin) {
  const BarrierPoint p = EvalBarrierPoint(s, v);
  std::vector<int> out;
  for (int i = 0; i < p.w.size(); ++i) {
    if (!(p.a[i] > 0.0 && p.b[i] > 0.0 && p.a[i] * p.b[i] >= margin)) {
      out.push_back(i);
    }
  }
  return out;
}

// Smallest beta (to bisection accuracy) with v0 + beta d feasible, or a
// negative value if doubling never reaches a feasible point.
double SearchAlong(const StepSetup& s, const Eigen::VectorXd& v0,
                   const Eigen::VectorXd& d, double margin) {
  double hi = 1e-6;
  while (!FeasibleWithMargin(s, v0 + hi * d, margin)) {
    hi *= 2.0;
    if (hi > 1e8) return -1.0;
  }
  double lo = 0.0;
  for (int it = 0; it < 60 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (FeasibleWithMargin(s, v0 + mid * d, margin)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// Minimizes the smoothed objective along v0 + beta d for beta >= beta0,
// where v0 + beta0 d is feasible. Keeps the start away from the cone
// boundary, where the Newton system is badly conditioned.
double CenterAlong(const StepSetup& s, const Eigen::VectorXd& v0,
                   const Eigen::VectorXd& d, double beta0, double kappa,
                   double margin) {
  auto slope = [&](double beta, bool* feasible) {
    const Eigen::VectorXd v = v0 + beta * d;
    *feasible = FeasibleWithMargin(s, v, margin);
    if (!*feasible) return 1.0;
    const BarrierPoint p = EvalBarrierPoint(s, v);
    return Gradient(s, v, EvalBarrierDerivatives(p, s.mu, kappa)).dot(d);
  };
  bool feasible = false;
  if (slope(beta0, &feasible) >= 0.0) return beta0;
  double lo = beta0;
  double hi = 2.0 * beta0;
  while (slope(hi, &feasible) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e8) return lo;
  }
  for (int it = 0; it < 60 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid, &feasible) < 0.0 ? lo : hi) = mid;
  }
  return lo;
}

// Moves v0 into the strict interior along normal directions of the violated
// contacts; falls back to a direction that raises the gap rate without
// slipping.
Eigen::VectorXd FeasibilityInitializer(const StepSetup& s, Eigen::VectorXd v0,
                                       double margin, double kappa) {
  const int nc = static_cast<int>(s.mu.size());
  for (int round = 0; round <= 2 * nc + 1; ++round) {
    const std::vector<int> violated = Violated(s, v0, margin);
    if (violated.empty()) return v0;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(v0.size());
    for (int i : violated) d += s.minv_jn.col(i);
    double beta = SearchAlong(s, v0, d, margin);
    if (beta < 0.0) {
      const int k = static_cast<int>(violated.size());
      Eigen::MatrixXd g(2 * k, v0.size());
      Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * k);
      for (int j = 0; j < k; ++j) {
        g.row(j) = s.kin.Jn.row(violated[j]);
        g.row(k + j) = s.kin.Jt.row(violated[j]);
        r[j] = 1.0;
      }
      const Eigen::MatrixXd minv_gt = s.llt.solve(g.transpose());
      const Eigen::MatrixXd schur = g * minv_gt;
      d = minv_gt * schur.completeOrthogonalDecomposition().solve(r);
      beta = SearchAlong(s, v0, d, margin);
      if (beta < 0.0) {
        throw SolverError("feasibility initializer found no interior point",
                          DescribeState(s));
      }
    }
    v0 += CenterAlong(s, v0, d, beta, kappa, margin) * d;
  }
  if (!Violated(s, v0, margin).empty()) {
    throw SolverError("feasibility initializer did not converge",
                      DescribeState(s));
  }
  return v0;
}

ContactStepResult NewtonSolve(const StepSetup& s, const SmoothingConfig& cfg,
                              const Eigen::VectorXd* warm_start) {
  if (!(cfg.kappa > 0.0))
    throw InvalidArgument("smoothed step: kappa must be positive");
  Eigen::VectorXd v =
      warm_start != nullptr && warm_start->size() == s.v_free.size()
          ? *warm_start
          : s.v_free;
  v = FeasibilityInitializer(s, v, cfg.feasibility_margin, cfg.kappa);
  const double tol = cfg.tolerance * (1.0 + s.v_free.norm());

  BarrierPoint p = EvalBarrierPoint(s, v);
  BarrierDerivatives d = EvalBarrierDerivatives(p, s.mu, cfg.kappa);
  Eigen::VectorXd g = Gradient(s, v, d);
  double f = Objective(s, v, p, cfg.kappa);
  int it = 0;
  bool converged = g.norm() <= tol;
  while (!converged && it < cfg.max_iterations) {
    ++it;
    Eigen::LLT<Eigen::MatrixXd> llt(Hessian(s, d));
    if (llt.info() != Eigen::Success) break;
    const Eigen::VectorXd step = -llt.solve(g);
    const double slope = g.dot(step);
    const double gnorm = g.norm();
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      const Eigen::VectorXd trial = v + alpha * step;
      const BarrierPoint tp = EvalBarrierPoint(s, trial);
      if (!tp.interior) continue;
      const double ft = Objective(s, trial, tp, cfg.kappa);
      const BarrierDerivatives td = EvalBarrierDerivatives(tp, s.mu, cfg.kappa);
      bool ok = ft <= f + 1e-4 * alpha * slope;
      Eigen::VectorXd tg;
      if (!ok && std::abs(ft - f) <= 1e-13 * (1.0 + std::abs(f))) {
        // Objective differences are at rounding level; judge by gradient.
        tg = Gradient(s, trial, td);
        ok = tg.norm() < gnorm;
      }
      if (ok) {
        v = trial;
        p = tp;
        d = td;
        f = ft;
        g = tg.size() > 0 ? tg : Gradient(s, v, d);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    converged = g.norm() <= tol;
  }

  ContactStepResult r;
  r.v_plus = v;
  r.v_free = s.v_free;
  r.lambda_n = d.lambda_n;
  r.lambda_t = d.lambda_t;
  r.newton_iterations = it;
  r.residual = g.norm();
  r.converged = converged;
  FillContactState(s, &r);
  if (!converged) {
    std::ostringstream os;
    os.precision(17);
    os << "residual=" << r.residual << " tolerance=" << tol
       << " iterations=" << it << " v=[" << v.transpose() << "] "
       << DescribeState(s);
    throw SolverError("smoothed contact solve did not converge", os.str());
  }
  return r;
}

// ---------------------------------------------------------- enumeration ---

// Solves K x = rhs for a square system; false if K is singular.
bool SolveSquare(const Eigen::MatrixXd& k, const Eigen::VectorXd& rhs,
                 Eigen::VectorXd* x) {
  if (k.rows() == 0) {
    x->resize(0);
    return true;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) return false;
  *x = lu.solve(rhs);
  return true;
}

void CheckEnumerable(const PlanarModel& model, const char* who) {
  if (model.num_contacts() > kMaxEnumeratedContacts) {
    throw InvalidArgument(std::string(who) + ": at most " +
                          std::to_string(kMaxEnumeratedContacts) +
                          " contacts are supported");
  }
}

int IntPow4(int n) { return 1 << (2 * n); }

}  // namespace

Stepper ParseStepper(const std::string& name) {
  if (name == "lcp") return Stepper::kLcp;
  if (name == "socp") return Stepper::kSocp;
  if (name == "smoothed") return Stepper::kSmoothed;
  throw InvalidArgument("unknown stepper '" + name + "'");
}

std::string StepperName(Stepper stepper) {
  switch (stepper) {
    case Stepper::kLcp:
      return "lcp";
    case Stepper::kSocp:
      return "socp";
    case Stepper::kSmoothed:
      return "smoothed";
  }
  return "smoothed";
}

ContactStepResult SolveLcp(const PlanarModel& model, const Eigen::VectorXd& q,
                           const Eigen::VectorXd& v, const Eigen::VectorXd& u,
                           double dt) {
  CheckEnumerable(model, "SolveLcp");
  const StepSetup s = Prepare(model, q, v, u, dt, false);
  const int nc = model.num_contacts();
  const double vtol = 1e-9 * Scale(s);

  enum Mode { kOpen = 0, kStick = 1, kSlidePos = 2, kSlideNeg = 3 };
  bool found = false;
  double best_energy = std::numeric_limits<double>::infinity();
  ContactStepResult best;

  std::vector<int> mode(nc);
  for (int combo = 0; combo < IntPow4(nc); ++combo) {
    // Contact 0 is the most significant digit, so combos run in
    // lexicographic order of the mode tuple.
    for (int i = 0, c = combo; i < nc; ++i) {
      mode[nc - 1 - i] = c % 4;
      c /= 4;
    }
    // Force directions (columns of M^-1 F^T) and constraint rows.
    std::vector<Eigen::VectorXd> dirs;
    std::vector<Eigen::RowVectorXd> rows;
    Eigen::VectorXd rhs_const;
    std::vector<double> consts;
    for (int i = 0; i < nc; ++i) {
      const double mu = s.mu[i];
      switch (mode[i]) {
        case kOpen:
          break;
        case kStick:
          dirs.push_back(s.minv_jn.col(i));
          dirs.push_back(s.minv_jt.col(i));
          rows.push_back(s.kin.Jn.row(i));
          consts.push_back(s.gap0[i]);
          rows.push_back(s.kin.Jt.row(i));
          consts.push_back(0.0);
          break;
        case kSlidePos:
          dirs.push_back(s.minv_jn.col(i) - mu * s.minv_jt.col(i));
          rows.push_back(s.kin.Jn.row(i));
          consts.push_back(s.gap0[i]);
          break;
        case kSlideNeg:
          dirs.push_back(s.minv_jn.col(i) + mu * s.minv_jt.col(i));
          rows.push_back(s.kin.Jn.row(i));
          consts.push_back(s.gap0[i]);
          break;
      }
    }
    const int m = static_cast<int>(rows.size());
    Eigen::MatrixXd k(m, m);
    Eigen::VectorXd rhs(m);
    for (int r = 0; r < m; ++r) {
      rhs[r] = -(rows[r].dot(s.v_free) + consts[r]);
      for (int c = 0; c < m; ++c) k(r, c) = rows[r].dot(dirs[c]);
    }
    Eigen::VectorXd x;
    if (!SolveSquare(k, rhs, &x)) continue;
    Eigen::VectorXd vp = s.v_free;
    for (int c = 0; c < m; ++c) vp += x[c] * dirs[c];

    Eigen::VectorXd ln = Eigen::VectorXd::Zero(nc);
    Eigen::VectorXd lt = Eigen::VectorXd::Zero(nc);
    for (int i = 0, col = 0; i < nc; ++i) {
      switch (mode[i]) {
        case kOpen:
          break;
        case kStick:
          ln[i] = x[col++];
          lt[i] = x[col++];
          break;
        case kSlidePos:
          ln[i] = x[col++];
          lt[i] = -s.mu[i] * ln[i];
          break;
        case kSlideNeg:
          ln[i] = x[col++];
          lt[i] = s.mu[i] * ln[i];
          break;
      }
    }
    const double ltol = 1e-9 * (1.0 + ln.lpNorm<Eigen::Infinity>());
    bool valid = true;
    for (int i = 0; i < nc && valid; ++i) {
      const double w = s.gap0[i] + s.kin.Jn.row(i).dot(vp);
      const double t = s.kin.Jt.row(i).dot(vp);
      switch (mode[i]) {
        case kOpen:
          valid = w >= -vtol;
          break;
        case kStick:
          valid = ln[i] >= -ltol && std::abs(lt[i]) <= s.mu[i] * ln[i] + ltol;
          break;
        case kSlidePos:
          valid = ln[i] >= -ltol && t >= -vtol;
          break;
        case kSlideNeg:
          valid = ln[i] >= -ltol && t <= vtol;
          break;
      }
    }
    if (!valid) continue;
    const double energy = 0.5 * vp.dot(s.mass * vp);
    if (!found ||
        energy < best_energy - 1e-12 * (1.0 + std::abs(best_energy))) {
      found = true;
      best_energy = energy;
      best.v_plus = vp;
      best.lambda_n = ln;
      best.lambda_t = lt;
    }
  }
  if (!found) {
    throw SolverError("LCP mode enumeration found no consistent mode",
                      DescribeState(s));
  }
  best.v_free = s.v_free;
  best.q_plus = IntegrateConfig(q, best.v_plus, dt);
  best.converged = true;
  FillContactState(s, &best);
  best.residual = (s.mass * (best.v_plus - s.v_free) -
                   s.kin.Jn.transpose() * best.lambda_n -
                   s.kin.Jt.transpose() * best.lambda_t)
                      .norm();
  return best;
}

ContactStepResult SolveSocp(const PlanarModel& model, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& v, const Eigen::VectorXd& u,
                            double dt) {
  CheckEnumerable(model, "SolveSocp");
  const StepSetup s = Prepare(model, q, v, u, dt, false);
  const int nc = model.num_contacts();
  const double vtol = 1e-10 * Scale(s);

  // In the plane the cone w >= mu |t| is the pair of half-planes
  // w - mu t >= 0 and w + mu t >= 0, so the program is a strictly convex QP.
  // Its active set is found by enumeration; KKT conditions are sufficient.
  std::vector<Eigen::RowVectorXd> g_rows(2 * nc);
  std::vector<Eigen::VectorXd> g_dirs(2 * nc);
  for (int i = 0; i < nc; ++i) {
    g_rows[2 * i] = s.kin.Jn.row(i) - s.mu[i] * s.kin.Jt.row(i);
    g_rows[2 * i + 1] = s.kin.Jn.row(i) + s.mu[i] * s.kin.Jt.row(i);
    g_dirs[2 * i] = s.minv_jn.col(i) - s.mu[i] * s.minv_jt.col(i);
    g_dirs[2 * i + 1] = s.minv_jn.col(i) + s.mu[i] * s.minv_jt.col(i);
  }

  for (int combo = 0; combo < IntPow4(nc); ++combo) {
    std::vector<int> active;
    for (int r = 0; r < 2 * nc; ++r) {
      if (combo & (1 << r)) active.push_back(r);
    }
    const int m = static_cast<int>(active.size());
    Eigen::MatrixXd k(m, m);
    Eigen::VectorXd rhs(m);
    for (int a = 0; a < m; ++a) {
      const int r = active[a];
      rhs[a] = -(g_rows[r].dot(s.v_free) + s.gap0[r / 2]);
      for (int b = 0; b < m; ++b) k(a, b) = g_rows[r].dot(g_dirs[active[b]]);
    }
    Eigen::VectorXd nu;
    if (!SolveSquare(k, rhs, &nu)) continue;
    const double ntol =
        1e-10 * (1.0 + (m > 0 ? nu.lpNorm<Eigen::Infinity>() : 0.0));
    if (m > 0 && nu.minCoeff() < -ntol) continue;
    Eigen::VectorXd vp = s.v_free;
    for (int a = 0; a < m; ++a) vp += nu[a] * g_dirs[active[a]];
    bool primal = true;
    for (int r = 0; r < 2 * nc && primal; ++r) {
      primal = g_rows[r].dot(vp) + s.gap0[r / 2] >= -vtol;
    }
    if (!primal) continue;

    ContactStepResult res;
    res.v_plus = vp;
    res.v_free = s.v_free;
    res.lambda_n = Eigen::VectorXd::Zero(nc);
    res.lambda_t = Eigen::VectorXd::Zero(nc);
    for (int a = 0; a < m; ++a) {
      const int i = active[a] / 2;
      const double val = std::max(nu[a], 0.0);
      res.lambda_n[i] += val;
      res.lambda_t[i] += (active[a] % 2 == 0 ? -1.0 : 1.0) * s.mu[i] * val;
    }
    res.q_plus = IntegrateConfig(q, vp, dt);
    res.converged = true;
    FillContactState(s, &res);
    res.residual =
        (s.mass * (vp - s.v_free) - s.kin.Jn.transpose() * res.lambda_n -
         s.kin.Jt.transpose() * res.lambda_t)
            .norm();
    return res;
  }
  throw SolverError("SOCP active-set enumeration found no KKT point",
                    DescribeState(s));
}

ContactStepResult SolveSmoothed(const PlanarModel& model,
                                const Eigen::VectorXd& q,
                                const Eigen::VectorXd& v,
                                const Eigen::VectorXd& u, double dt,
                                const SmoothingConfig& config,
                                const Eigen::VectorXd* warm_start) {
  const StepSetup s = Prepare(model, q, v, u, dt, false);
  ContactStepResult r = NewtonSolve(s, config, warm_start);
  r.q_plus = IntegrateConfig(q, r.v_plus, dt);
  return r;
}

std::pair<double, double> RecoverImpulses(double w, double t, double kappa,
                                          double mu) {
  if (!(kappa > 0.0) || !(mu > 0.0)) {
    throw InvalidArgument("RecoverImpulses: kappa and mu must be positive");
  }
  const double s = (w / mu - t) * (w / mu + t);
  if (!(s > 0.0) || !(w > 0.0)) {
    throw InvalidArgument("RecoverImpulses: cone slack must be positive");
  }
  return {2.0 * w / (mu * mu * kappa * s), -2.0 * t / (kappa * s)};
}

State Step(const PlanarModel& model, const State& x, const Eigen::VectorXd& u,
           double dt, const StepOptions& options, ContactStepResult* result,
           const Eigen::VectorXd* warm_start) {
  ContactStepResult r;
  switch (options.stepper) {
    case Stepper::kLcp:
      r = SolveLcp(model, x.q, x.v, u, dt);
      break;
    case Stepper::kSocp:
      r = SolveSocp(model, x.q, x.v, u, dt);
      break;
    case Stepper::kSmoothed:
      r = SolveSmoothed(model, x.q, x.v, u, dt, options.smoothing, warm_start);
      break;
  }
  State next{r.q_plus, r.v_plus};
  if (result != nullptr) *result = std::move(r);
  return next;
}

StepJacobians StepDerivatives(const PlanarModel& model, const State& x,
                              const Eigen::VectorXd& u, double dt,
                              const SmoothingConfig& config,
                              const Eigen::VectorXd* warm_start) {
  const StepSetup s = Prepare(model, x.q, x.v, u, dt, true);
  StepJacobians out;
  out.result = NewtonSolve(s, config, warm_start);
  out.result.q_plus = IntegrateConfig(x.q, out.result.v_plus, dt);
  const Eigen::VectorXd& vp = out.result.v_plus;
  const int nv = model.nv();
  const int nc = model.num_contacts();

  const BarrierPoint p = EvalBarrierPoint(s, vp);
  const BarrierDerivatives d = EvalBarrierDerivatives(p, s.mu, config.kappa);
  Eigen::LLT<Eigen::MatrixXd> hess(Hessian(s, d));
  if (hess.info() != Eigen::Success) {
    throw SolverError("step derivatives: singular barrier Hessian",
                      DescribeState(s));
  }

  // Stationarity: g = dt ID(q, v, (v+ - v)/dt) - dt B u - J^T lambda = 0.
  const Eigen::VectorXd acc = (vp - x.v) / dt;
  const InverseDynamicsPartials id =
      InverseDynamicsDerivatives(model, x.q, x.v, acc);
  Eigen::MatrixXd dg_dq = dt * id.dtau_dq;
  const Eigen::MatrixXd dg_dv = dt * id.dtau_dv - s.mass;
  for (int i = 0; i < nc; ++i) {
    const Eigen::MatrixXd& hn = s.kin.Hn[i];
    const Eigen::MatrixXd& ht = s.kin.Ht[i];
    dg_dq -= d.lambda_n[i] * hn + d.lambda_t[i] * ht;
    const Eigen::RowVectorXd dw = s.kin.Jn.row(i) / dt + vp.transpose() * hn;
    const Eigen::RowVectorXd dt_row = vp.transpose() * ht;
    const Eigen::RowVectorXd force_w = d.bww[i] * dw + d.bwt[i] * dt_row;
    const Eigen::RowVectorXd force_t = d.bwt[i] * dw + d.btt[i] * dt_row;
    dg_dq += s.kin.Jn.row(i).transpose() * force_w +
             s.kin.Jt.row(i).transpose() * force_t;
  }
  const Eigen::MatrixXd dvp_dq = -hess.solve(dg_dq);
  const Eigen::MatrixXd dvp_dv = -hess.solve(dg_dv);
  const Eigen::MatrixXd dvp_du = hess.solve(dt * model.actuation_matrix());
  const Eigen::MatrixXd dvp_dpi =
      -hess.solve(dt * Regressor(model, x.q, x.v, acc));
  const Eigen::VectorXd contact_force =
      s.kin.Jn.transpose() * d.lambda_n + s.kin.Jt.transpose() * d.lambda_t;
  const Eigen::VectorXd dvp_dkappa = -hess.solve(contact_force) / config.kappa;

  auto stack = [&](const Eigen::MatrixXd& dv) {
    Eigen::MatrixXd m(2 * nv, dv.cols());
    m.topRows(nv) = dt * dv;
    m.bottomRows(nv) = dv;
    return m;
  };
  out.A.resize(2 * nv, 2 * nv);
  out.A.topLeftCorner(nv, nv) = Eigen::MatrixXd::Identity(nv, nv) + dt * dvp_dq;
  out.A.topRightCorner(nv, nv) = dt * dvp_dv;
  out.A.bottomLeftCorner(nv, nv) = dvp_dq;
  out.A.bottomRightCorner(nv, nv) = dvp_dv;
  out.B_u = stack(dvp_du);
  out.B_pi = stack(dvp_dpi);
  out.dx_dkappa = stack(dvp_dkappa);
  return out;
}

Eigen::MatrixXd ThetaJacobian(const Eigen::MatrixXd& B_pi,
                              const std::vector<LogCholeskyParams2D>& thetas,
                              const std::vector<ThetaIndex>& selection) {
  Eigen::MatrixXd out(B_pi.rows(), static_cast<int>(selection.size()));
  for (size_t c = 0; c < selection.size(); ++c) {
    const ThetaIndex& idx = selection[c];
    if (idx.link < 0 || idx.link >= static_cast<int>(thetas.size()) ||
        idx.param < 0 || idx.param >= 6 || 4 * (idx.link + 1) > B_pi.cols()) {
      throw InvalidArgument("ThetaJacobian: selection out of range");
    }
    const Matrix46d jac = PiJacobian2d(thetas[idx.link]);
    out.col(static_cast<int>(c)) =
        B_pi.middleCols(4 * idx.link, 4) * jac.col(idx.param);
  }
  return out;
}

}  // namespace prime
