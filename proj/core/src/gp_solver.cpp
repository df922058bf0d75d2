// SPDX-License-Identifier: Apache-2.0
#include "fdiab/gp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include <fmt/format.h>

namespace fdiab::gp {

double LogSumExp::value(const Eigen::VectorXd& y) const {
  double mx = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd z = b;
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    for (std::size_t j = 0; j < vars.size(); ++j) z(k) += a(k, static_cast<Eigen::Index>(j)) * y(vars[j]);
    mx = std::max(mx, z(k));
  }
  if (a.rows() == 1) return z(0);
  double s = 0.0;
  for (Eigen::Index k = 0; k < z.size(); ++k) s += std::exp(z(k) - mx);
  return mx + std::log(s);
}

LogSumExp to_log_sum_exp(const Posynomial& p) {
  if (p.empty()) throw std::invalid_argument("empty posynomial");
  std::map<int, int> col;
  for (const auto& t : p.terms())
    for (const auto& [v, e] : t.exponents()) col.emplace(v, 0);
  LogSumExp f;
  for (auto& [v, c] : col) {
    c = static_cast<int>(f.vars.size());
    f.vars.push_back(v);
  }
  f.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(f.vars.size()));
  f.b.resize(static_cast<Eigen::Index>(p.size()));
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto& t = p.terms()[k];
    f.b(static_cast<Eigen::Index>(k)) = std::log(t.coef());
    for (const auto& [v, e] : t.exponents()) f.a(static_cast<Eigen::Index>(k), col.at(v)) = e;
  }
  return f;
}

ConvexProgram log_transform(const GPProblem& p) {
  p.validate();
  ConvexProgram cp;
  cp.n = static_cast<int>(p.size());
  cp.objective = to_log_sum_exp(p.objective());
  std::vector<const Constraint*> eqs;
  const auto cons = p.expanded_constraints();
  for (const auto& c : cons) {
    if (c.kind == ConstraintKind::eq) {
      eqs.push_back(&c);
      continue;
    }
    cp.inequalities.push_back(to_log_sum_exp(c.lhs));
    cp.labels.push_back(c.label);
  }
  cp.eq_matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(eqs.size()), cp.n);
  cp.eq_rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(eqs.size()));
  for (std::size_t r = 0; r < eqs.size(); ++r) {
    const auto& m = eqs[r]->lhs.terms().front();
    for (const auto& [v, e] : m.exponents()) cp.eq_matrix(static_cast<Eigen::Index>(r), v) = e;
    cp.eq_rhs(static_cast<Eigen::Index>(r)) = -std::log(m.coef());
    cp.eq_labels.push_back(eqs[r]->label);
  }
  return cp;
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::max_iter:
      return "max_iter";
  }
  return "?";
}

namespace {

// Value, gradient and Hessian of one log-sum-exp, scattered into the global
// vectors with weights: grad += wg * g, hess += wh * H + wo * g g^T.
struct LocalEval {
  double f = 0.0;
  double err = 0.0;  ///< rounding bound on f
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
};

LocalEval eval_lse(const LogSumExp& f, const Eigen::VectorXd& y) {
  LocalEval e;
  const auto nv = static_cast<Eigen::Index>(f.vars.size());
  Eigen::VectorXd yl(nv);
  for (Eigen::Index j = 0; j < nv; ++j) yl(j) = y(f.vars[static_cast<std::size_t>(j)]);
  Eigen::VectorXd z = f.a * yl + f.b;
  const double size = (f.a.cwiseAbs() * yl.cwiseAbs() + f.b.cwiseAbs()).maxCoeff();
  e.err = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + size);
  if (f.a.rows() == 1) {
    e.f = z(0);
    e.g = f.a.row(0).transpose();
    e.h = Eigen::MatrixXd::Zero(nv, nv);
    return e;
  }
  const double mx = z.maxCoeff();
  Eigen::VectorXd w = (z.array() - mx).exp();
  const double s = w.sum();
  e.f = mx + std::log(s);
  w /= s;
  e.g = f.a.transpose() * w;
  e.h = f.a.transpose() * w.asDiagonal() * f.a - e.g * e.g.transpose();
  return e;
}

void scatter(const LogSumExp& f, const LocalEval& e, double wg, double wh, double wo, Eigen::VectorXd& grad,
             Eigen::MatrixXd& hess) {
  const auto nv = f.vars.size();
  for (std::size_t i = 0; i < nv; ++i) {
    const int gi = f.vars[i];
    const auto li = static_cast<Eigen::Index>(i);
    grad(gi) += wg * e.g(li);
    for (std::size_t j = 0; j < nv; ++j) {
      const auto lj = static_cast<Eigen::Index>(j);
      hess(gi, f.vars[j]) += wh * e.h(li, lj) + wo * e.g(li) * e.g(lj);
    }
  }
}

// min t*f0 - sum log(-f_i) - sum_{j < box} [log(B - y_j) + log(B + y_j)]  s.t. E y = e
struct Barrier {
  int n = 0;
  const LogSumExp* objective = nullptr;
  std::vector<const LogSumExp*> ineq;
  const Eigen::MatrixXd* eq = nullptr;
  int box = 0;
  double bound = 30.0;

  int m() const { return static_cast<int>(ineq.size()) + 2 * box; }

  bool strictly_feasible(const Eigen::VectorXd& y) const {
    for (int j = 0; j < box; ++j)
      if (!(std::abs(y(j)) < bound)) return false;
    for (const auto* f : ineq)
      if (!(f->value(y) < 0.0)) return false;
    return true;
  }

  double phi(const Eigen::VectorXd& y, double t) const {
    double v = t * objective->value(y);
    for (const auto* f : ineq) v -= std::log(-f->value(y));
    for (int j = 0; j < box; ++j) v -= std::log(bound - y(j)) + std::log(bound + y(j));
    return v;
  }

  // Per component, `mag` receives the summed magnitudes of the terms added
  // into g and `noise` the rounding error they carry: an error dF in f_i
  // moves its barrier gradient by dF / f_i^2.
  void derivatives(const Eigen::VectorXd& y, double t, Eigen::VectorXd& g, Eigen::MatrixXd& h, Eigen::VectorXd& mag,
                   Eigen::VectorXd& noise) const {
    g = Eigen::VectorXd::Zero(n);
    h = Eigen::MatrixXd::Zero(n, n);
    mag = Eigen::VectorXd::Zero(n);
    noise = Eigen::VectorXd::Zero(n);
    auto add = [&](const LogSumExp& f, const LocalEval& e, double w, double dw) {
      for (std::size_t i = 0; i < f.vars.size(); ++i) {
        const double gi = std::abs(e.g(static_cast<Eigen::Index>(i)));
        mag(f.vars[i]) += std::abs(w) * gi;
        noise(f.vars[i]) += dw * gi;
      }
    };
    const auto e0 = eval_lse(*objective, y);
    scatter(*objective, e0, t, t, 0.0, g, h);
    add(*objective, e0, t, 0.0);
    for (const auto* f : ineq) {
      const auto e = eval_lse(*f, y);
      const double r = -1.0 / e.f;
      scatter(*f, e, r, r, r * r, g, h);
      add(*f, e, r, r * r * e.err);
    }
    for (int j = 0; j < box; ++j) {
      const double a = 1.0 / (bound - y(j));
      const double b = 1.0 / (bound + y(j));
      g(j) += a - b;
      h(j, j) += a * a + b * b;
      mag(j) += a + b;
    }
  }
};

struct CenterResult {
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  double decrement = 0.0;
};

// Newton centering from a strictly feasible point that satisfies E y = e.
CenterResult center(const Barrier& bp, Eigen::VectorXd& y, double t, int budget, double residual_target,
                    double decrement_target, const std::function<bool(const Eigen::VectorXd&)>& stop_early) {
  CenterResult r;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  const Eigen::Index p = bp.eq ? bp.eq->rows() : 0;
  double best = std::numeric_limits<double>::infinity();
  int stalls = 0;
  Eigen::VectorXd mag, noise;
  while (r.iterations < budget) {
    bp.derivatives(y, t, g, h, mag, noise);
    Eigen::VectorXd dy;
    Eigen::VectorXd w;
    if (p == 0) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      dy = ldlt.solve(-g);
      if (ldlt.info() != Eigen::Success || !dy.allFinite()) dy = h.completeOrthogonalDecomposition().solve(-g);
    } else {
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(bp.n + p, bp.n + p);
      kkt.topLeftCorner(bp.n, bp.n) = h;
      kkt.topRightCorner(bp.n, p) = bp.eq->transpose();
      kkt.bottomLeftCorner(p, bp.n) = *bp.eq;
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(bp.n + p);
      rhs.head(bp.n) = -g;
      const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
      dy = sol.head(bp.n);
      w = sol.tail(p);
    }
    const double lambda2 = -g.dot(dy);
    Eigen::VectorXd stationarity = g;
    if (p > 0) {
      stationarity += bp.eq->transpose() * w;
      mag += bp.eq->cwiseAbs().transpose() * w.cwiseAbs();
    }
    r.residual = ((stationarity.array().abs() - noise.array()).max(0.0) / mag.array().max(t)).maxCoeff();
    ++r.iterations;
    // Near the boundary the gradient carries roundoff amplified by 1/|f_i|,
    // so both the residual and the decrement have a noise floor; a run of
    // steps without progress on the residual means the floor is reached.
    stalls = r.residual < 0.9 * best ? 0 : stalls + 1;
    best = std::min(best, r.residual);
    r.decrement = lambda2;
    if (r.residual <= residual_target || !(lambda2 > 1e-28) || lambda2 <= decrement_target ||
        (lambda2 < 1e-6 && stalls >= 8)) {
      r.converged = true;
      return r;
    }
    const double phi0 = bp.phi(y, t);
    double alpha = 1.0;
    Eigen::VectorXd next = y + dy;
    while (alpha > 1e-14 && !bp.strictly_feasible(next)) {
      alpha *= 0.5;
      next = y + alpha * dy;
    }
    // Inside the quadratic region a full step is taken without the Armijo
    // test, whose phi differences drown in roundoff once t is large.
    const bool pure_newton = alpha == 1.0 && lambda2 < 1e-2;
    const double slack = 1e-13 * std::max(1.0, std::abs(phi0));
    while (!pure_newton && alpha > 1e-14 && bp.phi(next, t) > phi0 - 0.25 * alpha * lambda2 + slack) {
      alpha *= 0.5;
      next = y + alpha * dy;
    }
    if (alpha <= 1e-14) {
      // No progress possible at this precision: treat as centred.
      r.converged = true;
      return r;
    }
    y = next;
    if (stop_early && stop_early(y)) {
      r.converged = true;
      return r;
    }
  }
  return r;
}

Eigen::VectorXd equality_start(const ConvexProgram& cp) {
  if (cp.eq_matrix.rows() == 0) return Eigen::VectorXd::Zero(cp.n);
  const auto cod = cp.eq_matrix.completeOrthogonalDecomposition();
  Eigen::VectorXd y = cod.solve(cp.eq_rhs);
  if ((cp.eq_matrix * y - cp.eq_rhs).lpNorm<Eigen::Infinity>() > 1e-9) return Eigen::VectorXd();
  return y;
}

std::pair<double, std::size_t> worst(const ConvexProgram& cp, const Eigen::VectorXd& y) {
  double mx = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < cp.inequalities.size(); ++i) {
    const double v = cp.inequalities[i].value(y);
    if (v > mx) {
      mx = v;
      arg = i;
    }
  }
  return {mx, arg};
}

}  // namespace

ConvexSolution solve_convex(const ConvexProgram& cp, const SolverOptions& opt) {
  ConvexSolution out;
  const int n = cp.n;
  Eigen::VectorXd y = equality_start(cp);
  if (y.size() == 0) {
    out.status = SolveStatus::infeasible;
    out.violated = cp.eq_labels.empty() ? "equalities" : cp.eq_labels.front();
    out.y = Eigen::VectorXd::Zero(n);
    return out;
  }
  if (y.lpNorm<Eigen::Infinity>() >= opt.log_bound)
    throw NumericRangeError("equality constraints force a variable beyond the log-domain clamp");

  // Phase I: minimise s subject to f_i(y) <= s, s >= -1, inside the box.
  auto [f_max, arg] = worst(cp, y);
  if (!cp.inequalities.empty() && !(f_max < -1e-3)) {
    const int n1 = n + 1;
    std::vector<LogSumExp> shifted;
    shifted.reserve(cp.inequalities.size() + 1);
    for (const auto& f : cp.inequalities) {
      LogSumExp g = f;
      g.vars.push_back(n);
      g.a.conservativeResize(Eigen::NoChange, g.a.cols() + 1);
      g.a.col(g.a.cols() - 1).setConstant(-1.0);
      shifted.push_back(std::move(g));
    }
    LogSumExp floor_s;
    floor_s.vars = {n};
    floor_s.a = Eigen::MatrixXd::Constant(1, 1, -1.0);
    floor_s.b = Eigen::VectorXd::Constant(1, -1.0);
    shifted.push_back(floor_s);
    LogSumExp obj;
    obj.vars = {n};
    obj.a = Eigen::MatrixXd::Constant(1, 1, 1.0);
    obj.b = Eigen::VectorXd::Zero(1);
    Eigen::MatrixXd eq1 = Eigen::MatrixXd::Zero(cp.eq_matrix.rows(), n1);
    eq1.leftCols(n) = cp.eq_matrix;

    Barrier b1;
    b1.n = n1;
    b1.objective = &obj;
    for (const auto& f : shifted) b1.ineq.push_back(&f);
    b1.eq = eq1.rows() > 0 ? &eq1 : nullptr;
    b1.box = n;
    b1.bound = opt.log_bound;

    Eigen::VectorXd x1(n1);
    x1.head(n) = y;
    x1(n) = std::max(f_max, 0.0) + 1.0;
    auto feasible_enough = [n](const Eigen::VectorXd& x) { return x(n) < -0.25; };
    double t = 1.0;
    while (out.newton_iterations < opt.max_newton) {
      const auto c = center(b1, x1, t, opt.max_newton - out.newton_iterations, 1e-3, 1e-9 * t, feasible_enough);
      out.newton_iterations += c.iterations;
      if (feasible_enough(x1)) break;
      if (b1.m() / t < 1e-9) break;
      t *= opt.mu;
    }
    y = x1.head(n);
    std::tie(f_max, arg) = worst(cp, y);
    if (!(f_max < 0.0)) {
      out.status = out.newton_iterations >= opt.max_newton ? SolveStatus::max_iter : SolveStatus::infeasible;
      out.y = y;
      out.violated = cp.labels[arg];
      out.max_violation = std::expm1(f_max);
      return out;
    }
  }

  // Phase II.
  Barrier b2;
  b2.n = n;
  b2.objective = &cp.objective;
  for (const auto& f : cp.inequalities) b2.ineq.push_back(&f);
  b2.eq = cp.eq_matrix.rows() > 0 ? &cp.eq_matrix : nullptr;
  b2.box = n;
  b2.bound = opt.log_bound;

  double t = 1.0;
  CenterResult c;
  bool done = false;
  while (out.newton_iterations < opt.max_newton) {
    // An inexact centre with decrement lambda^2 adds about lambda^2 / t to
    // the gap, so half the tolerance goes to each part.
    c = center(b2, y, t, opt.max_newton - out.newton_iterations, 0.1 * opt.tolerance, 0.5 * opt.tolerance * t, {});
    out.newton_iterations += c.iterations;
    if (b2.m() / t <= 0.5 * opt.tolerance && c.converged) {
      done = true;
      break;
    }
    t *= opt.mu;
  }
  out.y = y;
  out.objective = cp.objective.value(y);
  out.duality_gap = (b2.m() + c.decrement) / t;
  out.kkt_residual = c.residual;
  for (int j = 0; j < n; ++j)
    if (std::abs(y(j)) > opt.log_bound - 0.05)
      throw NumericRangeError(fmt::format("variable {} reached the log-domain clamp (log x = {:.3f})", j, y(j)));
  std::tie(f_max, arg) = worst(cp, y);
  out.max_violation = cp.inequalities.empty() ? 0.0 : std::max(0.0, std::expm1(f_max));
  if (!cp.inequalities.empty()) out.violated = cp.labels[arg];
  out.status = done && out.duality_gap <= opt.tolerance ? SolveStatus::optimal : SolveStatus::max_iter;
  return out;
}

GPSolution solve(const GPProblem& p, const SolverOptions& opt) {
  const auto cp = log_transform(p);
  const auto cs = solve_convex(cp, opt);
  GPSolution s;
  s.status = cs.status;
  s.values.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) s.values[i] = std::exp(cs.y(static_cast<Eigen::Index>(i)));
  s.kkt_residual = cs.kkt_residual;
  s.duality_gap = cs.duality_gap;
  s.newton_iterations = cs.newton_iterations;
  s.objective_value = p.objective_value(s.values);
  const auto [viol, label] = max_violation(p, s.values);
  s.max_violation = std::max(0.0, viol);
  s.violated = cs.status == SolveStatus::infeasible ? cs.violated : label;
  if (s.status == SolveStatus::optimal && s.max_violation > opt.feasibility_tolerance) s.status = SolveStatus::max_iter;
  return s;
}

std::pair<double, std::string> max_violation(const GPProblem& p, std::span<const double> x) {
  double worst_v = -std::numeric_limits<double>::infinity();
  std::string label;
  for (const auto& c : p.expanded_constraints()) {
    const double v = c.lhs.evaluate(x);
    const double viol = c.kind == ConstraintKind::eq ? std::abs(v - 1.0) : v - 1.0;
    if (viol > worst_v) {
      worst_v = viol;
      label = c.label;
    }
  }
  return {worst_v, label};
}

}  // namespace fdiab::gp
