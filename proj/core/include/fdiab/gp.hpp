// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fdiab::gp {

using VarId = int;

/// c * prod x_v^{a_v} with c > 0. Exponents are kept sorted by variable and
/// zero exponents are dropped, so equal monomials compare equal.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(double coef);
  Monomial(double coef, std::vector<std::pair<VarId, double>> exponents);
  static Monomial variable(VarId v, double exponent = 1.0) { return Monomial(1.0, {{v, exponent}}); }

  double coef() const { return coef_; }
  const std::vector<std::pair<VarId, double>>& exponents() const { return exps_; }
  double exponent(VarId v) const;
  bool is_constant() const { return exps_.empty(); }
  bool same_powers(const Monomial& o) const { return exps_ == o.exps_; }

  Monomial pow(double p) const;
  Monomial inverse() const { return pow(-1.0); }

  /// Throws std::domain_error if a referenced variable is not positive.
  double evaluate(std::span<const double> x) const;
  /// log of the value at x = exp(y).
  double log_evaluate(std::span<const double> y) const;

  friend Monomial operator*(const Monomial& a, const Monomial& b);
  friend Monomial operator/(const Monomial& a, const Monomial& b) { return a * b.inverse(); }
  friend Monomial operator*(double s, const Monomial& m);
  friend Monomial operator*(const Monomial& m, double s) { return s * m; }
  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  double coef_ = 1.0;
  std::vector<std::pair<VarId, double>> exps_;
};

/// Nonempty sum of monomials.
class Posynomial {
 public:
  Posynomial() = default;
  Posynomial(Monomial m) : terms_{std::move(m)} {}  // NOLINT(google-explicit-constructor)
  explicit Posynomial(std::vector<Monomial> terms) : terms_(std::move(terms)) {}

  const std::vector<Monomial>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  bool is_monomial() const { return terms_.size() == 1; }

  /// Merges terms with identical powers.
  Posynomial& simplify();

  double evaluate(std::span<const double> x) const;

  Posynomial& operator+=(const Posynomial& o);
  friend Posynomial operator+(Posynomial a, const Posynomial& b) { return a += b; }
  friend Posynomial operator*(const Posynomial& a, const Monomial& m);
  friend Posynomial operator*(const Monomial& m, const Posynomial& a) { return a * m; }
  friend Posynomial operator/(const Posynomial& a, const Monomial& m) { return a * m.inverse(); }
  friend Posynomial operator*(const Posynomial& a, const Posynomial& b);

 private:
  std::vector<Monomial> terms_;
};

/// Weighted AM-GM lower bound of `p`, tight at `x`:
///   sum_m u_m >= prod_m (u_m / w_m)^{w_m},  w_m = u_m(x) / p(x).
Monomial condense(const Posynomial& p, std::span<const double> x);

/// Equal-weight AM-GM bound M * (prod_m u_m)^{1/M}.
Monomial condense_uniform(const Posynomial& p);

struct Variable {
  std::string name;
  double lower = 0.0;  ///< 0 = unbounded below
  double upper = std::numeric_limits<double>::infinity();
};

enum class ConstraintKind { leq, eq };

/// posynomial <= 1, or monomial == 1.
struct Constraint {
  ConstraintKind kind = ConstraintKind::leq;
  Posynomial lhs;
  std::string label;
};

enum class Sense { maximize, minimize };

class GPProblem {
 public:
  VarId add_variable(std::string name, double lower = 0.0,
                     double upper = std::numeric_limits<double>::infinity());
  VarId find(const std::string& name) const;  ///< -1 if unknown

  void maximize(const Monomial& m);
  void minimize(const Posynomial& p);

  void add_leq(Posynomial lhs, std::string label);
  void add_eq(const Monomial& lhs, std::string label);

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return cons_; }
  /// The posynomial actually minimised (1/m for a maximised monomial m).
  const Posynomial& objective() const { return objective_; }
  Sense sense() const { return sense_; }
  std::size_t size() const { return vars_.size(); }

  /// Objective in the user's sense at x.
  double objective_value(std::span<const double> x) const;

  /// Every constraint including variable bounds, as the transform sees them.
  std::vector<Constraint> expanded_constraints() const;

  /// Throws std::invalid_argument on an unusable problem (no variables, no
  /// objective, unknown variable ids, empty posynomials).
  void validate() const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
  Posynomial objective_;
  Sense sense_ = Sense::minimize;
  bool has_objective_ = false;
};

/// Line-oriented text form:
///   gp 1
///   var <name> <lower|-> <upper|->
///   maximize|minimize <posynomial>
///   leq <label> : <posynomial>
///   eq <label> : <monomial>
/// with posynomials written `c * x^a * y^b + ...`.
void write_problem(std::ostream& os, const GPProblem& p);
std::string dump_problem(const GPProblem& p);
GPProblem read_problem(std::istream& is);
GPProblem parse_problem(const std::string& text);

}  // namespace fdiab::gp
