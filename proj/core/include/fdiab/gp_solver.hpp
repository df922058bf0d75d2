// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fdiab/gp.hpp"

namespace fdiab::gp {

/// f(y) = log sum_k exp(a_k . y + b_k) over a subset of the variables.
/// `vars` lists the variables touched, `a` holds one row per term with one
/// column per entry of `vars`.
struct LogSumExp {
  std::vector<int> vars;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;

  double value(const Eigen::VectorXd& y) const;
  bool is_affine() const { return a.rows() == 1; }
};

/// Log-domain image of a GP: minimise f0(y) s.t. f_i(y) <= 0, E y = e.
struct ConvexProgram {
  int n = 0;
  LogSumExp objective;
  std::vector<LogSumExp> inequalities;
  std::vector<std::string> labels;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  std::vector<std::string> eq_labels;
};

/// y = log x. Bounds become affine inequalities, monomial equalities affine
/// equalities, posynomial constraints log-sum-exp inequalities.
ConvexProgram log_transform(const GPProblem& p);
LogSumExp to_log_sum_exp(const Posynomial& p);

enum class SolveStatus { optimal, infeasible, max_iter };
std::string_view to_string(SolveStatus s);

/// Raised when an iterate runs into the log-domain clamp, which means the GP
/// is unbounded or badly scaled.
class NumericRangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  double tolerance = 1e-6;              ///< duality-gap bound on log(objective)
  double feasibility_tolerance = 1e-7;  ///< relative violation accepted by the final audit
  double mu = 12.0;                     ///< barrier parameter growth
  double log_bound = 30.0;              ///< |log x| clamp
  int max_newton = 3000;
};

struct ConvexSolution {
  SolveStatus status = SolveStatus::max_iter;
  Eigen::VectorXd y;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
  int newton_iterations = 0;
  std::string violated;
  double max_violation = 0.0;
};

struct GPSolution {
  SolveStatus status = SolveStatus::max_iter;
  std::vector<double> values;
  double objective_value = 0.0;  ///< in the problem's own sense
  /// Lagrangian gradient beyond its rounding bound, relative to the summed
  /// term magnitudes; largest component.
  double kkt_residual = 0.0;
  double duality_gap = 0.0;  ///< (m + lambda^2) / t at the last centre
  int newton_iterations = 0;
  std::string violated;          ///< label of the worst constraint when infeasible
  double max_violation = 0.0;    ///< largest posynomial value minus one at the returned point

  double value(VarId v) const { return values.at(static_cast<std::size_t>(v)); }
};

/// Phase-I feasibility search followed by a log-barrier interior-point method
/// with backtracking Newton steps. Single-threaded; deterministic.
ConvexSolution solve_convex(const ConvexProgram& cp, const SolverOptions& opt = {});
GPSolution solve(const GPProblem& p, const SolverOptions& opt = {});

/// Largest posynomial-minus-one over all constraints (bounds included) and
/// its label; independent of solver internals.
std::pair<double, std::string> max_violation(const GPProblem& p, std::span<const double> x);

}  // namespace fdiab::gp
