// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "fdiab/beamforming.hpp"
#include "fdiab/config.hpp"

namespace fdiab {

/// Transmit powers in watts for one drop.
///
///   gnb[k], k = 0..K          gNB streams (0 = backhaul towards the IAB node)
///   iab[0], iab[i - K]        IAB streams (0 = backhaul towards the gNB)
///   ue[k - 1], k = 1..K+K~    UE uplink powers
class PowerAllocation {
 public:
  PowerAllocation() = default;
  explicit PowerAllocation(UserSets sets);

  double& at(Node node, int index);
  double at(Node node, int index) const;

  const UserSets& sets() const { return sets_; }
  double gnb_total() const;
  double iab_total() const;

  /// Every entry multiplied by `factor`.
  PowerAllocation scaled(double factor) const;

  std::vector<double> gnb;
  std::vector<double> iab;
  std::vector<double> ue;

 private:
  std::size_t slot(Node node, int index) const;
  UserSets sets_;
};

/// Budget check; lists each violated constraint (empty when feasible).
std::vector<std::string> power_violations(const PowerAllocation& p, const SystemConfig& cfg, double rel_tol = 1e-9);

/// The four per-UE SINR families (u = uplink, d = downlink, receiver/server).
enum class LinkGroup { ul_gnb, dl_gnb, ul_iab, dl_iab };
inline constexpr std::array<LinkGroup, 4> kLinkGroups{LinkGroup::ul_gnb, LinkGroup::dl_gnb, LinkGroup::ul_iab,
                                                      LinkGroup::dl_iab};
std::string_view to_string(LinkGroup g);

struct PowerRef {
  Node node = Node::ue;
  int index = 0;
  friend bool operator==(const PowerRef&, const PowerRef&) = default;
};

struct SinrTerm {
  PowerRef power;
  double gain = 0.0;
  GainKey key;
};

/// SINR = eta_s * g_s / (sum_j eta_j * g_j + noise), with noise = sigma^2 ||v||^2.
struct SinrExpression {
  SinrTerm signal;
  std::vector<SinrTerm> interference;
  double noise = 0.0;

  double numerator(const PowerAllocation& p) const;
  double interference_power(const PowerAllocation& p) const;
  double denominator(const PowerAllocation& p) const { return interference_power(p) + noise; }
  double value(const PowerAllocation& p) const;
};

/// Builds the SINR of stream `k` in `group` from the gain table.
///
/// k = 0 is accepted in every group: ul_gnb -> backhaul UL received at the
/// gNB, ul_iab -> backhaul DL received at the IAB node, dl_iab -> the gNB
/// treated as a UE of the IAB node, dl_gnb -> the IAB node treated as a UE of
/// the gNB. The last two evaluate the same backhaul links as the first two
/// through the downlink expressions.
SinrExpression sinr_expression(const GainTable& g, LinkGroup group, int k);

double sinr_uplink_gnb_access(const GainTable& g, const PowerAllocation& p, int k);
double sinr_uplink_gnb_backhaul(const GainTable& g, const PowerAllocation& p);
double sinr_downlink_gnb(const GainTable& g, const PowerAllocation& p, int k);
double sinr_downlink_iab(const GainTable& g, const PowerAllocation& p, int i);
double sinr_uplink_iab_backhaul(const GainTable& g, const PowerAllocation& p);
double sinr_uplink_iab_access(const GainTable& g, const PowerAllocation& p, int i);

inline double spectral_efficiency(double sinr) { return std::log2(1.0 + sinr); }

/// Per-group vectors are indexed by position in K (gNB groups) or I (IAB
/// groups), i.e. entry 0 belongs to UE 1 or UE K+1.
struct SinrReport {
  std::array<std::vector<double>, 4> sinr;
  std::array<std::vector<double>, 4> interference;
  double backhaul_ul = 0.0;  ///< SINR^{u,gNB}_0, IAB -> gNB
  double backhaul_dl = 0.0;  ///< SINR^{u,IAB}_0, gNB -> IAB
  double backhaul_ul_interference = 0.0;
  double backhaul_dl_interference = 0.0;

  const std::vector<double>& of(LinkGroup g) const { return sinr[static_cast<std::size_t>(g)]; }
};

struct SeReport {
  SinrReport sinr;
  std::array<std::vector<double>, 4> se;
  std::array<double, 4> group_sum{};
  std::array<double, 4> min_sinr{};  ///< NaN for an empty group
  double backhaul_ul_se = 0.0;
  double backhaul_dl_se = 0.0;

  const std::vector<double>& of(LinkGroup g) const { return se[static_cast<std::size_t>(g)]; }
  double sum(LinkGroup g) const { return group_sum[static_cast<std::size_t>(g)]; }
  double gnb_sum() const { return sum(LinkGroup::ul_gnb) + sum(LinkGroup::dl_gnb); }
  double iab_sum() const { return sum(LinkGroup::ul_iab) + sum(LinkGroup::dl_iab); }
  double total() const { return gnb_sum() + iab_sum(); }
};

SinrReport sinr_report(const GainTable& g, const PowerAllocation& p);
SeReport se_report(const GainTable& g, const PowerAllocation& p);

struct BackhaulConsistency {
  double se_d_iab_0 = 0.0;  ///< through the IAB downlink expression
  double se_u_gnb_0 = 0.0;
  double se_d_gnb_0 = 0.0;  ///< through the gNB downlink expression
  double se_u_iab_0 = 0.0;
  double max_relative_error = 0.0;
  bool ok = true;
};

/// Evaluates both backhaul SEs through the two independent expressions and
/// flags a mismatch beyond `rel_tol`.
BackhaulConsistency backhaul_consistency_check(const GainTable& g, const PowerAllocation& p, double rel_tol = 1e-9);

}  // namespace fdiab
