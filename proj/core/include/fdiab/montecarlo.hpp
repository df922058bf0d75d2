// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fdiab/allocation.hpp"
#include "fdiab/config.hpp"

namespace fdiab {

/// Outcome of one strategy on one channel realization. SEs in bit/s/Hz.
struct TrialRecord {
  int k_iab = 0;
  int trial = 0;
  Strategy strategy = Strategy::uniform;
  AllocationStatus status = AllocationStatus::benchmark;

  std::array<double, 4> group_se{};  ///< per LinkGroup, after capping
  std::array<double, 4> min_sinr{};  ///< NaN for an empty group
  double gnb_sum_se = 0.0;
  double iab_sum_se = 0.0;  ///< after capping
  double total_sum_se = 0.0;
  double min_iab_ue_se = 0.0;  ///< min over IAB UEs of UL + DL SE; NaN without IAB UEs
  double backhaul_ul_se = 0.0;
  double backhaul_dl_se = 0.0;
  bool capped = false;
  bool verified = true;
  double utility = 0.0;       ///< strategy_utility at the true SINRs
  double gp_objective = 0.0;  ///< relaxed objective (GP strategies only)
  double wall_seconds = 0.0;
  std::string message;

  /// Records that feed ECDFs and averages: optimal GP solves and benchmarks.
  bool usable() const { return status == AllocationStatus::optimal || status == AllocationStatus::benchmark; }
};

struct TrialOptions {
  std::optional<std::filesystem::path> dump_dir;  ///< GP dumps, one file per (trial, strategy)
};

/// One realization shared by every strategy. Deterministic per
/// (cfg.seed, cfg.k_iab, trial_index).
std::vector<TrialRecord> run_trial(const SystemConfig& cfg, int trial_index, const std::vector<Strategy>& strategies,
                                   const TrialOptions& opt = {});

/// Gain table of one trial, drawn exactly as run_trial draws it.
GainTable trial_gains(const SystemConfig& cfg, int trial_index);

struct EcdfSeries {
  std::string metric;
  std::string strategy;
  std::string group;
  std::vector<double> values;  ///< sorted ascending
  std::vector<double> probs;   ///< (i + 1) / n

  /// Fraction of samples <= x.
  double evaluate(double x) const;
};

EcdfSeries make_ecdf(std::string metric, std::string strategy, std::string group, std::vector<double> samples);

struct SweepPoint {
  int k_iab = 0;
  std::string strategy;
  double mean = 0.0;
  double ci_low = 0.0;  ///< normal-approximation 95% interval
  double ci_high = 0.0;
  int samples = 0;
};

SweepPoint summarize(int k_iab, std::string strategy, const std::vector<double>& samples);

struct CampaignOptions {
  int trials = 200;
  std::vector<int> k_iab_values;  ///< empty = {cfg.k_iab}
  std::vector<Strategy> strategies{Strategy::uniform, Strategy::max_min, Strategy::max_sum};
  int threads = 1;  ///< 0 = hardware concurrency
  std::optional<std::filesystem::path> dump_dir;
};

struct CampaignResult {
  SystemConfig config;
  CampaignOptions options;
  std::vector<TrialRecord> records;              ///< ordered by (k_iab, trial, strategy)
  std::vector<std::vector<EcdfSeries>> ecdf;     ///< one list per k_iab value
  std::vector<SweepPoint> sweep;                 ///< mean total sum SE
  std::vector<SweepPoint> sweep_iab;             ///< mean IAB-area sum SE
  double wall_seconds = 0.0;

  std::vector<const TrialRecord*> select(int k_iab, Strategy s) const;
};

/// Runs every (k_iab, trial) pair; results do not depend on `threads`.
/// Throws ConfigError for an invalid configuration at any swept k_iab.
CampaignResult run_campaign(const SystemConfig& cfg, const CampaignOptions& opt);

enum class OutputFormat { csv, json };
OutputFormat parse_output_format(std::string_view text);

/// csv: ecdf_ktilde<N>.csv, sweep.csv, sweep_iab.csv, trials.csv and
/// metadata.json; json: a single results.json. Returns the files written.
/// Throws std::invalid_argument("nothing to write") without strategies and
/// std::runtime_error for unwritable paths.
std::vector<std::filesystem::path> write_outputs(const CampaignResult& result, const std::filesystem::path& dir,
                                                 OutputFormat format);

/// Parses an ECDF CSV written by write_outputs.
std::vector<EcdfSeries> read_ecdf_csv(const std::filesystem::path& path);

/// Version string baked in at configure time.
std::string_view build_description();

}  // namespace fdiab
