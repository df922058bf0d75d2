// SPDX-License-Identifier: Apache-2.0
#include "fdiab/link_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace fdiab {

PowerAllocation::PowerAllocation(UserSets sets)
    : gnb(static_cast<std::size_t>(sets.k_gnb + 1), 0.0),
      iab(static_cast<std::size_t>(sets.k_iab + 1), 0.0),
      ue(static_cast<std::size_t>(sets.total()), 0.0),
      sets_(sets) {}

std::size_t PowerAllocation::slot(Node node, int index) const {
  switch (node) {
    case Node::gnb:
      if (index == 0 || sets_.is_gnb_user(index)) return static_cast<std::size_t>(index);
      break;
    case Node::iab:
      if (index == 0) return 0;
      if (sets_.is_iab_user(index)) return static_cast<std::size_t>(index - sets_.k_gnb);
      break;
    case Node::ue:
      if (index >= 1 && index <= sets_.total()) return static_cast<std::size_t>(index - 1);
      break;
  }
  throw std::out_of_range(fmt::format("no {} power with index {}", to_string(node), index));
}

double& PowerAllocation::at(Node node, int index) {
  const auto s = slot(node, index);
  return node == Node::gnb ? gnb[s] : node == Node::iab ? iab[s] : ue[s];
}

double PowerAllocation::at(Node node, int index) const {
  const auto s = slot(node, index);
  return node == Node::gnb ? gnb[s] : node == Node::iab ? iab[s] : ue[s];
}

double PowerAllocation::gnb_total() const {
  double s = 0.0;
  for (double x : gnb) s += x;
  return s;
}

double PowerAllocation::iab_total() const {
  double s = 0.0;
  for (double x : iab) s += x;
  return s;
}

PowerAllocation PowerAllocation::scaled(double factor) const {
  PowerAllocation out = *this;
  for (auto* v : {&out.gnb, &out.iab, &out.ue})
    for (auto& x : *v) x *= factor;
  return out;
}

std::vector<std::string> power_violations(const PowerAllocation& p, const SystemConfig& cfg, double rel_tol) {
  std::vector<std::string> out;
  for (const auto* v : {&p.gnb, &p.iab, &p.ue})
    for (double x : *v)
      if (!(x >= 0.0)) {
        out.push_back("negative power entry");
        break;
      }
  const double pg = cfg.p_max_gnb_watt();
  const double pi = cfg.p_max_iab_watt();
  const double pu = cfg.p_max_ue_watt();
  if (p.gnb_total() > pg * (1.0 + rel_tol)) out.push_back(fmt::format("gNB budget: {} W > {} W", p.gnb_total(), pg));
  if (p.iab_total() > pi * (1.0 + rel_tol)) out.push_back(fmt::format("IAB budget: {} W > {} W", p.iab_total(), pi));
  for (std::size_t k = 0; k < p.ue.size(); ++k)
    if (p.ue[k] > pu * (1.0 + rel_tol)) out.push_back(fmt::format("UE {} budget: {} W > {} W", k + 1, p.ue[k], pu));
  return out;
}

std::string_view to_string(LinkGroup g) {
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

double SinrExpression::numerator(const PowerAllocation& p) const {
  return p.at(signal.power.node, signal.power.index) * signal.gain;
}

double SinrExpression::interference_power(const PowerAllocation& p) const {
  double s = 0.0;
  for (const auto& t : interference) s += p.at(t.power.node, t.power.index) * t.gain;
  return s;
}

double SinrExpression::value(const PowerAllocation& p) const {
  const double num = numerator(p);
  if (num == 0.0) return 0.0;
  return num / denominator(p);
}

namespace {

SinrTerm term(const GainTable& g, Node power_node, int power_index, const GainKey& key) {
  return SinrTerm{{power_node, power_index}, g.at(key), key};
}

// Receiver gNB, combiner v^gNB_k (k = 0 decodes the IAB backhaul symbol).
SinrExpression ul_gnb(const GainTable& g, int k) {
  const auto& s = g.sets();
  SinrExpression e;
  if (k == 0) {
    e.signal = term(g, Node::iab, 0, {GainForm::hat, Node::gnb, 0, 0, Node::iab, 0});
  } else {
    e.signal = term(g, Node::ue, k, {GainForm::hat, Node::gnb, k, k, Node::ue, k});
    e.interference.push_back(term(g, Node::iab, 0, {GainForm::hat, Node::gnb, k, 0, Node::iab, 0}));
  }
  for (int i : s.iab_users()) e.interference.push_back(term(g, Node::iab, i, {GainForm::hat, Node::gnb, k, 0, Node::iab, i}));
  for (int j : s.gnb_users())
    if (j != k) e.interference.push_back(term(g, Node::ue, j, {GainForm::hat, Node::gnb, k, j, Node::ue, j}));
  e.noise = g.noise().gnb * g.norm(Node::gnb, k);
  return e;
}

// Receiver IAB node, combiner v^IAB_i (i = 0 decodes the gNB backhaul symbol).
SinrExpression ul_iab(const GainTable& g, int i) {
  const auto& s = g.sets();
  SinrExpression e;
  if (i == 0)
    e.signal = term(g, Node::gnb, 0, {GainForm::plain, Node::iab, 0, 0, Node::gnb, 0});
  else
    e.signal = term(g, Node::ue, i, {GainForm::hat, Node::iab, i, i, Node::ue, i});
  for (int l : s.iab_users())
    if (l != i) e.interference.push_back(term(g, Node::ue, l, {GainForm::hat, Node::iab, i, l, Node::ue, l}));
  if (i != 0) e.interference.push_back(term(g, Node::gnb, 0, {GainForm::plain, Node::iab, i, 0, Node::gnb, 0}));
  for (int k : s.gnb_users()) e.interference.push_back(term(g, Node::gnb, k, {GainForm::plain, Node::iab, i, 0, Node::gnb, k}));
  e.noise = g.noise().iab * g.norm(Node::iab, i);
  return e;
}

// Receiver UE k of the gNB. For k = 0 the IAB node plays that UE: its
// combiner is v^IAB_0, its channel H_0 and its cross links the IAB access
// channels H_i.
SinrExpression dl_gnb(const GainTable& g, int k) {
  const auto& s = g.sets();
  const Node rx = k == 0 ? Node::iab : Node::ue;
  SinrExpression e;
  e.signal = term(g, Node::gnb, k, {GainForm::plain, rx, k, k, Node::gnb, k});
  for (int j = 0; j <= s.k_gnb; ++j)
    if (j != k) e.interference.push_back(term(g, Node::gnb, j, {GainForm::plain, rx, k, k, Node::gnb, j}));
  for (int i : s.iab_users()) {
    const GainKey key = k == 0 ? GainKey{GainForm::hat, Node::iab, 0, i, Node::ue, i}
                               : GainKey{GainForm::cross, Node::ue, k, i, Node::ue, i};
    e.interference.push_back(term(g, Node::ue, i, key));
  }
  e.noise = (k == 0 ? g.noise().iab : g.noise().ue) * g.norm(rx, k);
  return e;
}

// Receiver UE i of the IAB node. For i = 0 the gNB plays that UE: combiner
// v^gNB_0, channel H_0 seen from the IAB side, cross links H_k.
SinrExpression dl_iab(const GainTable& g, int i) {
  const auto& s = g.sets();
  SinrExpression e;
  if (i == 0) {
    e.signal = term(g, Node::iab, 0, {GainForm::hat, Node::gnb, 0, 0, Node::iab, 0});
    for (int k : s.gnb_users()) e.interference.push_back(term(g, Node::ue, k, {GainForm::hat, Node::gnb, 0, k, Node::ue, k}));
    for (int l : s.iab_users()) e.interference.push_back(term(g, Node::iab, l, {GainForm::hat, Node::gnb, 0, 0, Node::iab, l}));
    e.noise = g.noise().gnb * g.norm(Node::gnb, 0);
    return e;
  }
  e.signal = term(g, Node::iab, i, {GainForm::plain, Node::ue, i, i, Node::iab, i});
  for (int k : s.gnb_users()) e.interference.push_back(term(g, Node::ue, k, {GainForm::cross, Node::ue, i, k, Node::ue, k}));
  for (int l : s.iab_users())
    if (l != i) e.interference.push_back(term(g, Node::iab, l, {GainForm::plain, Node::ue, i, i, Node::iab, l}));
  e.interference.push_back(term(g, Node::iab, 0, {GainForm::plain, Node::ue, i, i, Node::iab, 0}));
  e.noise = g.noise().ue * g.norm(Node::ue, i);
  return e;
}

}  // namespace

SinrExpression sinr_expression(const GainTable& g, LinkGroup group, int k) {
  const auto& s = g.sets();
  const bool gnb_side = group == LinkGroup::ul_gnb || group == LinkGroup::dl_gnb;
  if (k != 0 && !(gnb_side ? s.is_gnb_user(k) : s.is_iab_user(k)))
    throw std::out_of_range(fmt::format("UE {} is not in the user set of {}", k, to_string(group)));
  switch (group) {
    case LinkGroup::ul_gnb:
      return ul_gnb(g, k);
    case LinkGroup::dl_gnb:
      return dl_gnb(g, k);
    case LinkGroup::ul_iab:
      return ul_iab(g, k);
    case LinkGroup::dl_iab:
      return dl_iab(g, k);
  }
  throw std::invalid_argument("unknown link group");
}

double sinr_uplink_gnb_access(const GainTable& g, const PowerAllocation& p, int k) {
  if (k == 0) throw std::out_of_range("UE index 0 names the backhaul; use sinr_uplink_gnb_backhaul");
  return sinr_expression(g, LinkGroup::ul_gnb, k).value(p);
}
double sinr_uplink_gnb_backhaul(const GainTable& g, const PowerAllocation& p) {
  return sinr_expression(g, LinkGroup::ul_gnb, 0).value(p);
}
double sinr_downlink_gnb(const GainTable& g, const PowerAllocation& p, int k) {
  return sinr_expression(g, LinkGroup::dl_gnb, k).value(p);
}
double sinr_downlink_iab(const GainTable& g, const PowerAllocation& p, int i) {
  return sinr_expression(g, LinkGroup::dl_iab, i).value(p);
}
double sinr_uplink_iab_backhaul(const GainTable& g, const PowerAllocation& p) {
  return sinr_expression(g, LinkGroup::ul_iab, 0).value(p);
}
double sinr_uplink_iab_access(const GainTable& g, const PowerAllocation& p, int i) {
  if (i == 0) throw std::out_of_range("UE index 0 names the backhaul; use sinr_uplink_iab_backhaul");
  return sinr_expression(g, LinkGroup::ul_iab, i).value(p);
}

SinrReport sinr_report(const GainTable& g, const PowerAllocation& p) {
  SinrReport r;
  const auto& s = g.sets();
  for (auto grp : kLinkGroups) {
    const bool gnb_side = grp == LinkGroup::ul_gnb || grp == LinkGroup::dl_gnb;
    const auto users = gnb_side ? s.gnb_users() : s.iab_users();
    auto& out = r.sinr[static_cast<std::size_t>(grp)];
    auto& inter = r.interference[static_cast<std::size_t>(grp)];
    for (int k : users) {
      const auto e = sinr_expression(g, grp, k);
      out.push_back(e.value(p));
      inter.push_back(e.interference_power(p));
    }
  }
  const auto ul = sinr_expression(g, LinkGroup::ul_gnb, 0);
  const auto dl = sinr_expression(g, LinkGroup::ul_iab, 0);
  r.backhaul_ul = ul.value(p);
  r.backhaul_dl = dl.value(p);
  r.backhaul_ul_interference = ul.interference_power(p);
  r.backhaul_dl_interference = dl.interference_power(p);
  return r;
}

SeReport se_report(const GainTable& g, const PowerAllocation& p) {
  SeReport r;
  r.sinr = sinr_report(g, p);
  for (std::size_t n = 0; n < 4; ++n) {
    double sum = 0.0;
    double mn = std::numeric_limits<double>::quiet_NaN();
    for (double x : r.sinr.sinr[n]) {
      const double se = spectral_efficiency(x);
      r.se[n].push_back(se);
      sum += se;
      mn = std::isnan(mn) ? x : std::min(mn, x);
    }
    r.group_sum[n] = sum;
    r.min_sinr[n] = mn;
  }
  r.backhaul_ul_se = spectral_efficiency(r.sinr.backhaul_ul);
  r.backhaul_dl_se = spectral_efficiency(r.sinr.backhaul_dl);
  return r;
}

BackhaulConsistency backhaul_consistency_check(const GainTable& g, const PowerAllocation& p, double rel_tol) {
  BackhaulConsistency c;
  c.se_d_iab_0 = spectral_efficiency(sinr_downlink_iab(g, p, 0));
  c.se_u_gnb_0 = spectral_efficiency(sinr_uplink_gnb_backhaul(g, p));
  c.se_d_gnb_0 = spectral_efficiency(sinr_downlink_gnb(g, p, 0));
  c.se_u_iab_0 = spectral_efficiency(sinr_uplink_iab_backhaul(g, p));
  auto rel = [](double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
  };
  c.max_relative_error = std::max(rel(c.se_d_iab_0, c.se_u_gnb_0), rel(c.se_d_gnb_0, c.se_u_iab_0));
  c.ok = c.max_relative_error <= rel_tol;
  return c;
}

}  // namespace fdiab
