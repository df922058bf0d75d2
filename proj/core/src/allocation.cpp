// SPDX-License-Identifier: Apache-2.0
#include "fdiab/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace fdiab {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::uniform:
      return "uniform";
    case Strategy::max_min:
      return "maxmin";
    case Strategy::max_sum:
      return "maxsum";
  }
  return "?";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "uniform") return Strategy::uniform;
  if (text == "maxmin" || text == "max_min" || text == "max-min") return Strategy::max_min;
  if (text == "maxsum" || text == "max_sum" || text == "max-sum" || text == "max_sum_se") return Strategy::max_sum;
  throw std::invalid_argument(fmt::format("unknown strategy '{}'", text));
}

std::string_view to_string(AllocationStatus s) {
  switch (s) {
    case AllocationStatus::optimal:
      return "optimal";
    case AllocationStatus::infeasible:
      return "infeasible";
    case AllocationStatus::max_iter:
      return "max_iter";
    case AllocationStatus::numeric_error:
      return "numeric_error";
    case AllocationStatus::benchmark:
      return "benchmark";
  }
  return "?";
}

PowerAllocation uniform_allocation(const SystemConfig& cfg, const UserSets& sets) {
  PowerAllocation p(sets);
  const double g = cfg.p_max_gnb_watt() / (sets.k_gnb + 1);
  const double a = cfg.p_max_iab_watt() / (sets.k_iab + 1);
  std::fill(p.gnb.begin(), p.gnb.end(), g);
  std::fill(p.iab.begin(), p.iab.end(), a);
  std::fill(p.ue.begin(), p.ue.end(), cfg.p_max_ue_watt());
  return p;
}

PowerAllocation backhaul_feasible_uniform(const GainTable& g, const SystemConfig& cfg) {
  const auto& sets = g.sets();
  const auto base = uniform_allocation(cfg, sets);
  auto scaled = [&](double c) {
    PowerAllocation p = base;
    for (int i : sets.iab_users()) {
      p.at(Node::iab, i) *= c;
      p.at(Node::ue, i) *= c;
    }
    return p;
  };
  auto feasible = [&](double c) {
    const auto r = se_report(g, scaled(c));
    return r.sum(LinkGroup::dl_iab) <= r.backhaul_dl_se && r.sum(LinkGroup::ul_iab) <= r.backhaul_ul_se;
  };
  if (sets.k_iab == 0 || feasible(1.0)) return base;
  // Bisection on log c; access SE falls and backhaul SE rises as c shrinks.
  const double floor = db_to_linear(cfg.power_floor);
  double lo = std::log(floor), hi = 0.0;
  if (!feasible(floor)) return scaled(floor);
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(std::exp(mid)) ? lo : hi) = mid;
  }
  return scaled(std::exp(lo));
}

gp::VarId GpLayout::power(Node node, int index, const UserSets& sets) const {
  auto pick = [](const std::vector<gp::VarId>& v, int slot) {
    return slot >= 0 && slot < static_cast<int>(v.size()) ? v[static_cast<std::size_t>(slot)] : -1;
  };
  switch (node) {
    case Node::gnb:
      return pick(eta_gnb, index);
    case Node::iab:
      return pick(eta_iab, index == 0 ? 0 : index - sets.k_gnb);
    case Node::ue:
      return pick(eta_ue, index - 1);
  }
  return -1;
}

int GpLayout::groups() const {
  return static_cast<int>(std::count_if(z.begin(), z.end(), [](gp::VarId v) { return v >= 0; }));
}

namespace {

using gp::Monomial;
using gp::Posynomial;
using gp::VarId;

constexpr int kMaxProductUsers = 12;

std::size_t gi(LinkGroup g) { return static_cast<std::size_t>(g); }

std::vector<int> members(const UserSets& s, LinkGroup g) {
  return g == LinkGroup::ul_gnb || g == LinkGroup::dl_gnb ? s.gnb_users() : s.iab_users();
}

std::string group_tag(LinkGroup g) {
  switch (g) {
    case LinkGroup::ul_gnb:
      return "ul_gnb";
    case LinkGroup::dl_gnb:
      return "dl_gnb";
    case LinkGroup::ul_iab:
      return "ul_iab";
    case LinkGroup::dl_iab:
      return "dl_iab";
  }
  return "?";
}

/// SINR = num / den in the GP variables. Interference from absent streams is
/// dropped since those streams carry zero power.
struct Ratio {
  Monomial num;
  Posynomial den;
};

Ratio ratio(const SinrExpression& e, const GpLayout& l, const UserSets& s) {
  const VarId sig = l.power(e.signal.power.node, e.signal.power.index, s);
  if (sig < 0) throw std::logic_error("signal stream has no power variable");
  if (!(e.signal.gain > 0.0)) throw std::invalid_argument("zero signal gain for " + e.signal.key.label());
  Ratio r{Monomial(e.signal.gain, {{sig, 1.0}}), Posynomial()};
  std::vector<Monomial> den;
  for (const auto& t : e.interference) {
    const VarId v = l.power(t.power.node, t.power.index, s);
    if (v < 0 || !(t.gain > 0.0)) continue;
    den.emplace_back(t.gain, std::vector<std::pair<VarId, double>>{{v, 1.0}});
  }
  if (e.noise > 0.0) den.emplace_back(e.noise);
  if (den.empty()) throw std::invalid_argument("SINR without noise or interference is unbounded");
  r.den = Posynomial(std::move(den));
  r.den.simplify();
  return r;
}

class Builder {
 public:
  Builder(const GainTable& g, const SystemConfig& cfg, Strategy strategy)
      : g_(g), cfg_(cfg), sets_(g.sets()), strategy_(strategy) {}

  AllocationGp build(const CondensePoint& at) {
    declare();
    if (at) {
      if (at->size() != out_.problem.size()) throw std::invalid_argument("condensation point has wrong size");
      anchor_ = *at;
    } else if (cfg_.condense_anchor == "feasible") {
      anchor_ = tight_point(out_, g_, cfg_, backhaul_feasible_uniform(g_, cfg_), strategy_);
    }
    constrain();
    return std::move(out_);
  }

 private:
  Monomial cond(const Posynomial& p) const {
    return anchor_ ? gp::condense(p, *anchor_) : gp::condense_uniform(p);
  }

  void declare() {
    auto& p = out_.problem;
    auto& l = out_.layout;
    const double floor = db_to_linear(cfg_.power_floor);
    const bool backhaul = sets_.k_iab > 0;
    const double pg = cfg_.p_max_gnb_watt(), pi = cfg_.p_max_iab_watt(), pu = cfg_.p_max_ue_watt();
    l.eta_gnb.assign(static_cast<std::size_t>(sets_.k_gnb + 1), -1);
    for (int k = backhaul ? 0 : 1; k <= sets_.k_gnb; ++k)
      l.eta_gnb[static_cast<std::size_t>(k)] = p.add_variable(fmt::format("eta_gnb_{}", k), pg * floor, pg);
    if (backhaul) {
      l.eta_iab.push_back(p.add_variable("eta_iab_0", pi * floor, pi));
      for (int i : sets_.iab_users()) l.eta_iab.push_back(p.add_variable(fmt::format("eta_iab_{}", i), pi * floor, pi));
    }
    for (int k : sets_.all_users()) l.eta_ue.push_back(p.add_variable(fmt::format("eta_ue_{}", k), pu * floor, pu));

    for (auto grp : kLinkGroups) {
      const auto users = members(sets_, grp);
      if (users.empty()) continue;
      l.z[gi(grp)] = p.add_variable("z_" + group_tag(grp));
      if (strategy_ != Strategy::max_sum) continue;
      for (int k : users) {
        l.gamma[gi(grp)].push_back(p.add_variable(fmt::format("gamma_{}_{}", group_tag(grp), k)));
        l.v[gi(grp)].push_back(p.add_variable(fmt::format("v_{}_{}", group_tag(grp), k)));
      }
    }
    if (backhaul) {
      for (int i : sets_.iab_users()) l.rho_d.push_back(p.add_variable(fmt::format("rho_d_{}", i)));
      for (int i : sets_.iab_users()) l.rho_u.push_back(p.add_variable(fmt::format("rho_u_{}", i)));
      l.z0_d = p.add_variable("z0_d");
      l.z0_u = p.add_variable("z0_u");
    }
  }

  void constrain() {
    auto& p = out_.problem;
    const auto& l = out_.layout;

    // Budgets; per-UE limits are the variable bounds.
    {
      std::vector<Monomial> t;
      for (VarId v : l.eta_gnb)
        if (v >= 0) t.push_back(Monomial(1.0 / cfg_.p_max_gnb_watt(), {{v, 1.0}}));
      p.add_leq(Posynomial(std::move(t)), "gNB budget");
    }
    if (!l.eta_iab.empty()) {
      std::vector<Monomial> t;
      for (VarId v : l.eta_iab) t.push_back(Monomial(1.0 / cfg_.p_max_iab_watt(), {{v, 1.0}}));
      p.add_leq(Posynomial(std::move(t)), "IAB budget");
    }

    Monomial objective(1.0);
    const double n_groups = l.groups();
    for (auto grp : kLinkGroups) {
      const VarId z = l.z[gi(grp)];
      if (z < 0) continue;
      objective = objective * Monomial::variable(z, 1.0 / n_groups);
      const auto users = members(sets_, grp);
      if (strategy_ == Strategy::max_min) {
        for (int k : users) {
          const auto r = ratio(sinr_expression(g_, grp, k), l, sets_);
          p.add_leq(Monomial::variable(z) * r.den / r.num, fmt::format("z_{} <= SINR {}", group_tag(grp), k));
        }
      } else {
        const double eps = cfg_.epsilon_se;
        std::vector<Monomial> sum;
        for (std::size_t m = 0; m < users.size(); ++m) {
          const int k = users[m];
          const VarId gamma = l.gamma[gi(grp)][m], v = l.v[gi(grp)][m];
          const auto r = ratio(sinr_expression(g_, grp, k), l, sets_);
          p.add_leq(Monomial::variable(gamma) * r.den / r.num, fmt::format("gamma {} {}", group_tag(grp), k));
          // v = 1 + ln2/eps * s and v^eps <= 1 + gamma, taken to the power 1/eps.
          const Posynomial one_plus_gamma = Posynomial(Monomial(1.0)) + Monomial::variable(gamma);
          p.add_leq(Posynomial(Monomial::variable(v) * cond(one_plus_gamma).pow(-1.0 / eps)),
                    fmt::format("v <= SE {} {}", group_tag(grp), k));
          sum.push_back(Monomial::variable(v));
        }
        // z <= sum s  <=>  ln2/eps * z + |group| <= sum v
        const double members_n = static_cast<double>(users.size());
        p.add_leq((Posynomial(Monomial(std::numbers::ln2 / eps, {{z, 1.0}})) + Monomial(members_n)) /
                      cond(Posynomial(std::move(sum))),
                  fmt::format("z_{} <= sum s", group_tag(grp)));
      }
    }
    p.maximize(objective);

    if (sets_.k_iab == 0) return;
    if (sets_.k_iab > kMaxProductUsers)
      throw std::invalid_argument(fmt::format("backhaul product constraint supports at most {} IAB users, got {}",
                                              kMaxProductUsers, sets_.k_iab));
    const auto iab = sets_.iab_users();
    for (std::size_t m = 0; m < iab.size(); ++m) {
      const auto d = ratio(sinr_expression(g_, LinkGroup::dl_iab, iab[m]), l, sets_);
      p.add_leq(Posynomial(d.num / (Monomial::variable(l.rho_d[m]) * cond(d.den))),
                fmt::format("rho_d_{} >= SINR", iab[m]));
      const auto u = ratio(sinr_expression(g_, LinkGroup::ul_iab, iab[m]), l, sets_);
      p.add_leq(Posynomial(u.num / (Monomial::variable(l.rho_u[m]) * cond(u.den))),
                fmt::format("rho_u_{} >= SINR", iab[m]));
    }
    // z0_u bounds the backhaul DL (received at the IAB node), z0_d the backhaul UL.
    const auto bdl = ratio(sinr_expression(g_, LinkGroup::ul_iab, 0), l, sets_);
    p.add_leq(Monomial::variable(l.z0_u) * bdl.den / bdl.num, "z0_u <= backhaul DL SINR");
    const auto bul = ratio(sinr_expression(g_, LinkGroup::ul_gnb, 0), l, sets_);
    p.add_leq(Monomial::variable(l.z0_d) * bul.den / bul.num, "z0_d <= backhaul UL SINR");

    auto product = [](const std::vector<VarId>& rho) {
      Posynomial prod(Monomial(1.0));
      for (VarId v : rho) prod = prod * (Posynomial(Monomial(1.0)) + Monomial::variable(v));
      return prod.simplify();
    };
    auto one_plus = [](VarId v) { return Posynomial(Monomial(1.0)) + Monomial::variable(v); };
    p.add_leq(product(l.rho_d) / cond(one_plus(l.z0_u)), "backhaul DL capacity");
    p.add_leq(product(l.rho_u) / cond(one_plus(l.z0_d)), "backhaul UL capacity");
  }

  const GainTable& g_;
  const SystemConfig& cfg_;
  UserSets sets_;
  Strategy strategy_;
  AllocationGp out_;
  std::optional<std::vector<double>> anchor_;
};

}  // namespace

AllocationGp build_maxmin_gp(const GainTable& g, const SystemConfig& cfg, const CondensePoint& at) {
  return Builder(g, cfg, Strategy::max_min).build(at);
}

AllocationGp build_maxsum_gp(const GainTable& g, const SystemConfig& cfg, const CondensePoint& at) {
  return Builder(g, cfg, Strategy::max_sum).build(at);
}

PowerAllocation extract_allocation(const GpLayout& layout, const UserSets& sets, std::span<const double> x) {
  PowerAllocation p(sets);
  auto read = [&](VarId v) { return v >= 0 ? x[static_cast<std::size_t>(v)] : 0.0; };
  for (std::size_t k = 0; k < p.gnb.size(); ++k) p.gnb[k] = read(k < layout.eta_gnb.size() ? layout.eta_gnb[k] : -1);
  for (std::size_t k = 0; k < p.iab.size(); ++k) p.iab[k] = read(k < layout.eta_iab.size() ? layout.eta_iab[k] : -1);
  for (std::size_t k = 0; k < p.ue.size(); ++k) p.ue[k] = read(k < layout.eta_ue.size() ? layout.eta_ue[k] : -1);
  return p;
}

double epsilon_se_bound(double sinr, int epsilon) {
  if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  if (sinr < 0.0) throw std::domain_error("negative SINR");
  const double e = epsilon;
  return e / std::numbers::ln2 * std::expm1(std::log1p(sinr) / e);
}

std::vector<double> tight_point(const AllocationGp& gp, const GainTable& g, const SystemConfig& cfg,
                                const PowerAllocation& p, Strategy strategy) {
  const auto& l = gp.layout;
  std::vector<double> x(gp.problem.size(), 1.0);
  auto put = [&](VarId v, double value) {
    if (v >= 0) x[static_cast<std::size_t>(v)] = value;
  };
  // Keep every power strictly positive so the point is usable as AM-GM anchor.
  const double floor = db_to_linear(cfg.power_floor);
  PowerAllocation q = p;
  for (std::size_t k = 0; k < q.gnb.size(); ++k) {
    if (l.eta_gnb[k] < 0) q.gnb[k] = 0.0;
    else q.gnb[k] = std::max(q.gnb[k], cfg.p_max_gnb_watt() * floor);
  }
  for (std::size_t k = 0; k < q.iab.size(); ++k) {
    if (k >= l.eta_iab.size()) q.iab[k] = 0.0;
    else q.iab[k] = std::max(q.iab[k], cfg.p_max_iab_watt() * floor);
  }
  for (auto& v : q.ue) v = std::max(v, cfg.p_max_ue_watt() * floor);
  for (std::size_t k = 0; k < l.eta_gnb.size(); ++k) put(l.eta_gnb[k], q.gnb[k]);
  for (std::size_t k = 0; k < l.eta_iab.size(); ++k) put(l.eta_iab[k], q.iab[k]);
  for (std::size_t k = 0; k < l.eta_ue.size(); ++k) put(l.eta_ue[k], q.ue[k]);

  const auto r = sinr_report(g, q);
  for (auto grp : kLinkGroups) {
    const VarId z = l.z[gi(grp)];
    if (z < 0) continue;
    const auto& sinr = r.of(grp);
    if (strategy == Strategy::max_sum) {
      double sum = 0.0;
      for (std::size_t m = 0; m < sinr.size(); ++m) {
        const double se = epsilon_se_bound(sinr[m], cfg.epsilon_se);
        put(l.gamma[gi(grp)][m], sinr[m]);
        put(l.v[gi(grp)][m], 1.0 + std::numbers::ln2 / cfg.epsilon_se * se);
        sum += se;
      }
      put(z, std::max(sum, 1e-12));
    } else {
      put(z, *std::min_element(sinr.begin(), sinr.end()));
    }
  }
  const auto& dl = r.of(LinkGroup::dl_iab);
  const auto& ul = r.of(LinkGroup::ul_iab);
  for (std::size_t m = 0; m < l.rho_d.size(); ++m) put(l.rho_d[m], dl[m]);
  for (std::size_t m = 0; m < l.rho_u.size(); ++m) put(l.rho_u[m], ul[m]);
  put(l.z0_u, r.backhaul_dl);
  put(l.z0_d, r.backhaul_ul);
  return x;
}

bool VerificationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const ConstraintCheck& c) { return c.ok; });
}

const ConstraintCheck* VerificationReport::find(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

VerificationReport verify_constraints(const PowerAllocation& p, const GainTable& g, const SystemConfig& cfg,
                                      double tol) {
  VerificationReport rep;
  auto add = [&](std::string name, double lhs, double rhs) {
    rep.checks.push_back({std::move(name), lhs, rhs, lhs <= rhs + tol * std::max(1.0, std::abs(rhs))});
  };
  add("budget gNB", p.gnb_total(), cfg.p_max_gnb_watt());
  add("budget IAB", p.iab_total(), cfg.p_max_iab_watt());
  for (int k : g.sets().all_users()) add(fmt::format("budget UE {}", k), p.at(Node::ue, k), cfg.p_max_ue_watt());

  const auto r = se_report(g, p);
  add("backhaul downlink", r.sum(LinkGroup::dl_iab), r.backhaul_dl_se);
  add("backhaul uplink", r.sum(LinkGroup::ul_iab), r.backhaul_ul_se);
  return rep;
}

CappedIab cap_iab_se(const SeReport& r) {
  CappedIab c;
  c.dl = r.of(LinkGroup::dl_iab);
  c.ul = r.of(LinkGroup::ul_iab);
  auto cap = [&](std::vector<double>& v, double access, double backhaul) {
    if (access <= backhaul || access <= 0.0) return access;
    const double f = backhaul / access;
    for (auto& x : v) x *= f;
    c.capped = true;
    return backhaul;
  };
  c.dl_sum = cap(c.dl, r.sum(LinkGroup::dl_iab), r.backhaul_dl_se);
  c.ul_sum = cap(c.ul, r.sum(LinkGroup::ul_iab), r.backhaul_ul_se);
  return c;
}

double strategy_utility(Strategy s, const SeReport& r) {
  double log_sum = 0.0;
  int n = 0;
  for (std::size_t g = 0; g < 4; ++g) {
    if (r.se[g].empty()) continue;
    const double v = s == Strategy::max_min ? r.min_sinr[g] : r.group_sum[g];
    log_sum += std::log(v);
    ++n;
  }
  return n == 0 ? 0.0 : std::exp(log_sum / n);
}

AllocationResult solve_allocation(Strategy strategy, const GainTable& g, const SystemConfig& cfg,
                                  const AllocationOptions& opt) {
  AllocationResult res;
  res.strategy = strategy;
  const auto& sets = g.sets();
  if (strategy == Strategy::uniform) {
    res.allocation = uniform_allocation(cfg, sets);
    res.status = AllocationStatus::benchmark;
    res.verification = verify_constraints(res.allocation, g, cfg);
    res.verification.notes.push_back("uniform benchmark: backhaul constraints are not enforced");
    if (cfg.cap_uniform && cap_iab_se(se_report(g, res.allocation)).capped)
      res.verification.notes.push_back("IAB-area SE capped at the backhaul SE");
    return res;
  }

  gp::SolverOptions so;
  so.tolerance = cfg.solver_tolerance;
  auto build = [&](const CondensePoint& at) {
    return strategy == Strategy::max_min ? build_maxmin_gp(g, cfg, at) : build_maxsum_gp(g, cfg, at);
  };

  std::optional<AllocationGp> best_gp;
  std::optional<gp::GPSolution> best;
  CondensePoint at;
  const int rounds = 1 + std::max(0, cfg.condense_iters);
  for (int round = 0; round < rounds; ++round) {
    AllocationGp model = build(at);
    if (opt.keep_dump) res.gp_dump = gp::dump_problem(model.problem);
    gp::GPSolution sol;
    try {
      sol = gp::solve(model.problem, so);
    } catch (const gp::NumericRangeError& e) {
      if (!best) {
        res.status = AllocationStatus::numeric_error;
        res.message = e.what();
        res.allocation = PowerAllocation(sets);
        res.condense_rounds = round + 1;
        res.verification = verify_constraints(res.allocation, g, cfg);
        return res;
      }
      res.message = fmt::format("condensation round {} stopped: {}", round + 1, e.what());
      break;
    }
    res.newton_iterations += sol.newton_iterations;
    res.condense_rounds = round + 1;
    if (sol.status != gp::SolveStatus::optimal) {
      if (best) {
        res.message = fmt::format("condensation round {} ended {}", round + 1, gp::to_string(sol.status));
        break;
      }
      res.status = sol.status == gp::SolveStatus::infeasible ? AllocationStatus::infeasible : AllocationStatus::max_iter;
      res.message = fmt::format("{} (worst constraint '{}', violation {:.3g})", gp::to_string(sol.status),
                                sol.violated, sol.max_violation);
      res.allocation = sol.values.size() == model.problem.size()
                           ? extract_allocation(model.layout, sets, sol.values)
                           : PowerAllocation(sets);
      res.verification = verify_constraints(res.allocation, g, cfg);
      return res;
    }
    at = sol.values;
    best = std::move(sol);
    best_gp = std::move(model);
  }

  const auto& l = best_gp->layout;
  const auto& x = best->values;
  res.status = AllocationStatus::optimal;
  res.gp_objective = best->objective_value;
  res.kkt_residual = best->kkt_residual;
  res.allocation = extract_allocation(l, sets, x);
  res.verification = verify_constraints(res.allocation, g, cfg);

  const auto r = sinr_report(g, res.allocation);
  for (std::size_t m = 0; m < l.rho_d.size(); ++m)
    res.rho_gap_d.push_back(x[static_cast<std::size_t>(l.rho_d[m])] / r.of(LinkGroup::dl_iab)[m]);
  for (std::size_t m = 0; m < l.rho_u.size(); ++m)
    res.rho_gap_u.push_back(x[static_cast<std::size_t>(l.rho_u[m])] / r.of(LinkGroup::ul_iab)[m]);
  if (l.z0_u >= 0) res.z0_gap_u = x[static_cast<std::size_t>(l.z0_u)] / r.backhaul_dl;
  if (l.z0_d >= 0) res.z0_gap_d = x[static_cast<std::size_t>(l.z0_d)] / r.backhaul_ul;
  return res;
}

}  // namespace fdiab
