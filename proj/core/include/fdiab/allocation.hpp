// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdiab/beamforming.hpp"
#include "fdiab/config.hpp"
#include "fdiab/gp.hpp"
#include "fdiab/gp_solver.hpp"
#include "fdiab/link_metrics.hpp"

namespace fdiab {

enum class Strategy { uniform, max_min, max_sum };
std::string_view to_string(Strategy s);
/// Accepts "uniform", "maxmin"/"max_min", "maxsum"/"max_sum"/"max_sum_se".
Strategy parse_strategy(std::string_view text);

/// gNB budget split over its K+1 streams, IAB budget over K~+1, UEs at p_max.
PowerAllocation uniform_allocation(const SystemConfig& cfg, const UserSets& sets);

/// The uniform allocation with IAB access powers (IAB streams to its UEs and
/// those UEs' uplinks) scaled by the largest common factor that meets both
/// backhaul SE constraints. Used as a feasible AM-GM anchor.
PowerAllocation backhaul_feasible_uniform(const GainTable& g, const SystemConfig& cfg);

/// Variable ids of an allocation GP; -1 marks an absent variable.
struct GpLayout {
  std::vector<gp::VarId> eta_gnb;  ///< index 0..K
  std::vector<gp::VarId> eta_iab;  ///< index 0..K~ (slot i-K for UE i)
  std::vector<gp::VarId> eta_ue;   ///< index k-1
  std::array<gp::VarId, 4> z{-1, -1, -1, -1};  ///< per LinkGroup
  std::vector<gp::VarId> rho_d;  ///< upper bounds of SINR^{d,IAB}_i
  std::vector<gp::VarId> rho_u;  ///< upper bounds of SINR^{u,IAB}_i
  gp::VarId z0_d = -1;           ///< lower bound of SINR^{d,IAB}_0 (backhaul UL)
  gp::VarId z0_u = -1;           ///< lower bound of SINR^{u,IAB}_0 (backhaul DL)
  // max-sum only, per LinkGroup and member position: gamma <= SINR and
  // v = 1 + ln2/eps * s with s the per-link SE proxy
  std::array<std::vector<gp::VarId>, 4> gamma;
  std::array<std::vector<gp::VarId>, 4> v;

  gp::VarId power(Node node, int index, const UserSets& sets) const;
  int groups() const;
};

struct AllocationGp {
  gp::GPProblem problem;
  GpLayout layout;
};

/// Optional AM-GM anchor: a full variable vector of a previously built GP
/// with the same layout. Without it the condensation follows
/// `cfg.condense_anchor`.
using CondensePoint = std::optional<std::vector<double>>;

AllocationGp build_maxmin_gp(const GainTable& g, const SystemConfig& cfg, const CondensePoint& at = {});
AllocationGp build_maxsum_gp(const GainTable& g, const SystemConfig& cfg, const CondensePoint& at = {});

/// Powers read back from a GP point; absent streams are zero.
PowerAllocation extract_allocation(const GpLayout& layout, const UserSets& sets, std::span<const double> x);

/// Variable vector for a given allocation with every auxiliary at its
/// tightest value (z = group minima or sums, rho = z0 = SINR, v from the
/// epsilon bound). Used as AM-GM anchor and by tests.
std::vector<double> tight_point(const AllocationGp& gp, const GainTable& g, const SystemConfig& cfg,
                                const PowerAllocation& p, Strategy strategy);

/// Largest s with (1 + ln2/eps * s)^eps <= 1 + sinr.
double epsilon_se_bound(double sinr, int epsilon);

struct ConstraintCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
  double slack() const { return rhs - lhs; }
};

struct VerificationReport {
  std::vector<ConstraintCheck> checks;
  std::vector<std::string> notes;
  bool ok() const;
  const ConstraintCheck* find(std::string_view name) const;
};

/// Budgets plus the true backhaul constraints
///   sum_i SE^{d,IAB}_i <= SE^{u,IAB}_0,  sum_i SE^{u,IAB}_i <= SE^{d,IAB}_0
/// with exact SINRs; each holds when lhs <= rhs + tol * max(1, |rhs|).
VerificationReport verify_constraints(const PowerAllocation& p, const GainTable& g, const SystemConfig& cfg,
                                      double tol = 1e-6);

enum class AllocationStatus { optimal, infeasible, max_iter, numeric_error, benchmark };
std::string_view to_string(AllocationStatus s);

/// Per-UE SEs of the IAB area after the backhaul bottleneck: each direction's
/// sum is min(access sum, backhaul SE), scaled down proportionally.
struct CappedIab {
  std::vector<double> dl;  ///< per IAB UE
  std::vector<double> ul;
  double dl_sum = 0.0;
  double ul_sum = 0.0;
  bool capped = false;
};
CappedIab cap_iab_se(const SeReport& r);

/// Utility the strategy maximises, evaluated at true SINRs:
/// max-min -> geometric mean of the group-minimum SINRs,
/// max-sum -> geometric mean of the group sum SEs. Empty groups are skipped.
double strategy_utility(Strategy s, const SeReport& r);

struct AllocationResult {
  Strategy strategy = Strategy::uniform;
  AllocationStatus status = AllocationStatus::benchmark;
  PowerAllocation allocation;
  double gp_objective = 0.0;  ///< relaxed-GP objective at the returned point (0 for uniform)
  int condense_rounds = 0;    ///< solves performed
  int newton_iterations = 0;
  double kkt_residual = 0.0;
  std::string message;        ///< solver diagnostics when not optimal
  VerificationReport verification;
  /// rho / true SINR (>= 1) and z0 / true SINR (<= 1) at the returned point.
  std::vector<double> rho_gap_d;
  std::vector<double> rho_gap_u;
  double z0_gap_d = 1.0;
  double z0_gap_u = 1.0;
  std::string gp_dump;  ///< last problem, when requested
};

struct AllocationOptions {
  bool keep_dump = false;
};

/// Builds, solves (with `cfg.condense_iters` re-condensations) and verifies.
/// Solver failures are reported in `status`; no fallback is applied.
AllocationResult solve_allocation(Strategy strategy, const GainTable& g, const SystemConfig& cfg,
                                  const AllocationOptions& opt = {});

}  // namespace fdiab
