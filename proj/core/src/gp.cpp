// SPDX-License-Identifier: Apache-2.0
#include "fdiab/gp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fdiab::gp {
namespace {

void normalise(std::vector<std::pair<VarId, double>>& e) {
  std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<VarId, double>> out;
  out.reserve(e.size());
  for (const auto& [v, a] : e) {
    if (!out.empty() && out.back().first == v)
      out.back().second += a;
    else
      out.emplace_back(v, a);
  }
  std::erase_if(out, [](const auto& p) { return p.second == 0.0; });
  e = std::move(out);
}

double value_at(std::span<const double> x, VarId v) {
  if (v < 0 || static_cast<std::size_t>(v) >= x.size()) throw std::out_of_range("point has no value for variable");
  const double xv = x[static_cast<std::size_t>(v)];
  if (!(xv > 0.0)) throw std::domain_error("GP variables must be positive, got " + std::to_string(xv));
  return xv;
}

}  // namespace

Monomial::Monomial(double coef) : coef_(coef) {
  if (!(coef > 0.0) || !std::isfinite(coef)) throw std::invalid_argument("monomial coefficient must be positive");
}

Monomial::Monomial(double coef, std::vector<std::pair<VarId, double>> exponents)
    : coef_(coef), exps_(std::move(exponents)) {
  if (!(coef > 0.0) || !std::isfinite(coef)) throw std::invalid_argument("monomial coefficient must be positive");
  for (const auto& [v, a] : exps_)
    if (v < 0 || !std::isfinite(a)) throw std::invalid_argument("bad monomial exponent");
  normalise(exps_);
}

double Monomial::exponent(VarId v) const {
  for (const auto& [w, a] : exps_)
    if (w == v) return a;
  return 0.0;
}

Monomial Monomial::pow(double p) const {
  Monomial m;
  m.coef_ = std::pow(coef_, p);
  if (!(m.coef_ > 0.0) || !std::isfinite(m.coef_)) throw std::domain_error("monomial power out of range");
  m.exps_ = exps_;
  for (auto& e : m.exps_) e.second *= p;
  normalise(m.exps_);
  return m;
}

double Monomial::evaluate(std::span<const double> x) const {
  double v = coef_;
  for (const auto& [var, a] : exps_) v *= std::pow(value_at(x, var), a);
  return v;
}

double Monomial::log_evaluate(std::span<const double> y) const {
  double v = std::log(coef_);
  for (const auto& [var, a] : exps_) v += a * y[static_cast<std::size_t>(var)];
  return v;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
  Monomial m;
  m.coef_ = a.coef_ * b.coef_;
  if (!(m.coef_ > 0.0) || !std::isfinite(m.coef_)) throw std::domain_error("monomial product out of range");
  m.exps_ = a.exps_;
  m.exps_.insert(m.exps_.end(), b.exps_.begin(), b.exps_.end());
  normalise(m.exps_);
  return m;
}

Monomial operator*(double s, const Monomial& m) { return Monomial(s) * m; }

Posynomial& Posynomial::simplify() {
  std::vector<Monomial> out;
  for (const auto& t : terms_) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Monomial& o) { return o.same_powers(t); });
    if (it == out.end())
      out.push_back(t);
    else
      *it = Monomial(it->coef() + t.coef(), it->exponents());
  }
  terms_ = std::move(out);
  return *this;
}

double Posynomial::evaluate(std::span<const double> x) const {
  if (terms_.empty()) throw std::invalid_argument("empty posynomial");
  double s = 0.0;
  for (const auto& t : terms_) s += t.evaluate(x);
  return s;
}

Posynomial& Posynomial::operator+=(const Posynomial& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  return *this;
}

Posynomial operator*(const Posynomial& a, const Monomial& m) {
  std::vector<Monomial> t;
  t.reserve(a.terms_.size());
  for (const auto& x : a.terms_) t.push_back(x * m);
  return Posynomial(std::move(t));
}

Posynomial operator*(const Posynomial& a, const Posynomial& b) {
  std::vector<Monomial> t;
  t.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& x : a.terms_)
    for (const auto& y : b.terms_) t.push_back(x * y);
  Posynomial p(std::move(t));
  p.simplify();
  return p;
}

Monomial condense(const Posynomial& p, std::span<const double> x) {
  if (p.empty()) throw std::invalid_argument("cannot condense an empty posynomial");
  if (p.is_monomial()) return p.terms().front();
  std::vector<double> u;
  u.reserve(p.size());
  double total = 0.0;
  for (const auto& t : p.terms()) {
    u.push_back(t.evaluate(x));
    total += u.back();
  }
  double log_coef = 0.0;
  std::vector<std::pair<VarId, double>> exps;
  for (std::size_t m = 0; m < p.size(); ++m) {
    const double w = u[m] / total;
    if (w <= 0.0) continue;
    const auto& t = p.terms()[m];
    log_coef += w * (std::log(t.coef()) - std::log(w));
    for (const auto& [v, a] : t.exponents()) exps.emplace_back(v, w * a);
  }
  return Monomial(std::exp(log_coef), std::move(exps));
}

Monomial condense_uniform(const Posynomial& p) {
  if (p.empty()) throw std::invalid_argument("cannot condense an empty posynomial");
  if (p.is_monomial()) return p.terms().front();
  const double w = 1.0 / static_cast<double>(p.size());
  double log_coef = std::log(static_cast<double>(p.size()));
  std::vector<std::pair<VarId, double>> exps;
  for (const auto& t : p.terms()) {
    log_coef += w * std::log(t.coef());
    for (const auto& [v, a] : t.exponents()) exps.emplace_back(v, w * a);
  }
  return Monomial(std::exp(log_coef), std::move(exps));
}

VarId GPProblem::add_variable(std::string name, double lower, double upper) {
  if (name.empty() || name.find_first_of(" \t\n*^+:") != std::string::npos)
    throw std::invalid_argument("bad variable name '" + name + "'");
  if (find(name) >= 0) throw std::invalid_argument("duplicate variable " + name);
  if (lower < 0.0 || !(upper > lower)) throw std::invalid_argument("bad bounds for " + name);
  vars_.push_back({std::move(name), lower, upper});
  return static_cast<VarId>(vars_.size() - 1);
}

VarId GPProblem::find(const std::string& name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return static_cast<VarId>(i);
  return -1;
}

void GPProblem::maximize(const Monomial& m) {
  objective_ = Posynomial(m.inverse());
  sense_ = Sense::maximize;
  has_objective_ = true;
}

void GPProblem::minimize(const Posynomial& p) {
  objective_ = p;
  sense_ = Sense::minimize;
  has_objective_ = true;
}

void GPProblem::add_leq(Posynomial lhs, std::string label) {
  if (lhs.empty()) throw std::invalid_argument("empty constraint " + label);
  cons_.push_back({ConstraintKind::leq, std::move(lhs), std::move(label)});
}

void GPProblem::add_eq(const Monomial& lhs, std::string label) {
  cons_.push_back({ConstraintKind::eq, Posynomial(lhs), std::move(label)});
}

double GPProblem::objective_value(std::span<const double> x) const {
  const double v = objective_.evaluate(x);
  return sense_ == Sense::maximize ? 1.0 / v : v;
}

std::vector<Constraint> GPProblem::expanded_constraints() const {
  std::vector<Constraint> out = cons_;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto v = static_cast<VarId>(i);
    if (vars_[i].lower > 0.0)
      out.push_back({ConstraintKind::leq, Posynomial(vars_[i].lower * Monomial::variable(v, -1.0)),
                     vars_[i].name + " lower bound"});
    if (std::isfinite(vars_[i].upper))
      out.push_back({ConstraintKind::leq, Posynomial((1.0 / vars_[i].upper) * Monomial::variable(v)),
                     vars_[i].name + " upper bound"});
  }
  return out;
}

void GPProblem::validate() const {
  if (vars_.empty()) throw std::invalid_argument("GP has no variables");
  if (!has_objective_ || objective_.empty()) throw std::invalid_argument("GP has no objective");
  const auto n = static_cast<VarId>(vars_.size());
  auto check = [&](const Posynomial& p, const std::string& where) {
    if (p.empty()) throw std::invalid_argument("empty posynomial in " + where);
    for (const auto& t : p.terms())
      for (const auto& [v, a] : t.exponents())
        if (v >= n) throw std::invalid_argument("undeclared variable in " + where);
  };
  check(objective_, "objective");
  for (const auto& c : cons_) {
    check(c.lhs, c.label);
    if (c.kind == ConstraintKind::eq && !c.lhs.is_monomial())
      throw std::invalid_argument("equality " + c.label + " is not a monomial");
  }
}

namespace {

void write_monomial(std::ostream& os, const Monomial& m, const std::vector<Variable>& vars) {
  os << m.coef();
  for (const auto& [v, a] : m.exponents()) {
    os << " * " << vars[static_cast<std::size_t>(v)].name;
    if (a != 1.0) os << '^' << a;
  }
}

void write_posynomial(std::ostream& os, const Posynomial& p, const std::vector<Variable>& vars) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i > 0) os << " + ";
    write_monomial(os, p.terms()[i], vars);
  }
}

std::string clean_label(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == ':'; }, '_');
  return s.empty() ? "_" : s;
}

double parse_number(const std::string& tok) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("GP dump: bad number '" + tok + "'");
  }
  if (used != tok.size()) throw std::runtime_error("GP dump: bad number '" + tok + "'");
  return v;
}

Posynomial parse_posynomial(const std::string& text, const GPProblem& p) {
  std::istringstream in(text);
  std::vector<Monomial> terms;
  std::string tok;
  double coef = 0.0;
  std::vector<std::pair<VarId, double>> exps;
  bool have = false;
  auto flush = [&] {
    if (!have) throw std::runtime_error("GP dump: dangling operator in '" + text + "'");
    terms.emplace_back(coef, std::move(exps));
    exps.clear();
    have = false;
  };
  bool expect_factor = true;
  while (in >> tok) {
    if (tok == "+") {
      flush();
      expect_factor = true;
      continue;
    }
    if (tok == "*") {
      expect_factor = true;
      continue;
    }
    if (!expect_factor) throw std::runtime_error("GP dump: missing operator before '" + tok + "'");
    expect_factor = false;
    if (!have) {
      coef = parse_number(tok);
      have = true;
      continue;
    }
    const auto caret = tok.find('^');
    const std::string name = tok.substr(0, caret);
    const double a = caret == std::string::npos ? 1.0 : parse_number(tok.substr(caret + 1));
    const VarId v = p.find(name);
    if (v < 0) throw std::runtime_error("GP dump: unknown variable " + name);
    exps.emplace_back(v, a);
  }
  flush();
  return Posynomial(std::move(terms));
}

}  // namespace

void write_problem(std::ostream& os, const GPProblem& p) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "gp 1\n";
  for (const auto& v : p.variables()) {
    os << "var " << v.name << ' ';
    if (v.lower > 0.0)
      os << v.lower;
    else
      os << '-';
    os << ' ';
    if (std::isfinite(v.upper))
      os << v.upper;
    else
      os << '-';
    os << '\n';
  }
  if (p.sense() == Sense::maximize) {
    os << "maximize ";
    write_monomial(os, p.objective().terms().front().inverse(), p.variables());
  } else {
    os << "minimize ";
    write_posynomial(os, p.objective(), p.variables());
  }
  os << '\n';
  for (const auto& c : p.constraints()) {
    os << (c.kind == ConstraintKind::leq ? "leq " : "eq ") << clean_label(c.label) << " : ";
    write_posynomial(os, c.lhs, p.variables());
    os << '\n';
  }
  os.precision(old);
}

std::string dump_problem(const GPProblem& p) {
  std::ostringstream os;
  write_problem(os, p);
  return os.str();
}

GPProblem read_problem(std::istream& is) {
  GPProblem p;
  std::string line;
  if (!std::getline(is, line) || line != "gp 1") throw std::runtime_error("GP dump: missing 'gp 1' header");
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    std::string kw;
    in >> kw;
    if (kw == "var") {
      std::string name, lo, hi;
      if (!(in >> name >> lo >> hi)) throw std::runtime_error("GP dump: bad var line");
      p.add_variable(name, lo == "-" ? 0.0 : parse_number(lo),
                     hi == "-" ? std::numeric_limits<double>::infinity() : parse_number(hi));
      continue;
    }
    std::string rest;
    std::getline(in, rest);
    if (kw == "maximize" || kw == "minimize") {
      const auto obj = parse_posynomial(rest, p);
      if (kw == "maximize") {
        if (!obj.is_monomial()) throw std::runtime_error("GP dump: maximised objective must be a monomial");
        p.maximize(obj.terms().front());
      } else {
        p.minimize(obj);
      }
      continue;
    }
    if (kw == "leq" || kw == "eq") {
      const auto colon = rest.find(':');
      if (colon == std::string::npos) throw std::runtime_error("GP dump: constraint without ':'");
      std::istringstream lab(rest.substr(0, colon));
      std::string label;
      lab >> label;
      const auto lhs = parse_posynomial(rest.substr(colon + 1), p);
      if (kw == "leq") {
        p.add_leq(lhs, label);
      } else {
        if (!lhs.is_monomial()) throw std::runtime_error("GP dump: equality must be a monomial");
        p.add_eq(lhs.terms().front(), label);
      }
      continue;
    }
    throw std::runtime_error("GP dump: unknown keyword '" + kw + "'");
  }
  p.validate();
  return p;
}

GPProblem parse_problem(const std::string& text) {
  std::istringstream in(text);
  return read_problem(in);
}

}  // namespace fdiab::gp
