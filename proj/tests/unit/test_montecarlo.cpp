// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include <json.hpp>

#include "fdiab/montecarlo.hpp"

using namespace fdiab;
namespace fs = std::filesystem;

namespace {

SystemConfig small(int k_gnb, int k_iab, std::uint64_t seed = 1) {
  SystemConfig cfg;
  cfg.k_gnb = k_gnb;
  cfg.k_iab = k_iab;
  cfg.seed = seed;
  return cfg;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::path(FDIAB_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Trial, Deterministic) {
  const auto cfg = small(3, 1, 9);
  const auto a = run_trial(cfg, 2, {Strategy::uniform, Strategy::max_min});
  const auto b = run_trial(cfg, 2, {Strategy::uniform, Strategy::max_min});
  ASSERT_EQ(a.size(), 2u);
  for (std::size_t n = 0; n < a.size(); ++n) {
    EXPECT_EQ(a[n].total_sum_se, b[n].total_sum_se);
    EXPECT_EQ(a[n].min_iab_ue_se, b[n].min_iab_ue_se);
  }
  const auto c = run_trial(cfg, 3, {Strategy::uniform});
  EXPECT_NE(a[0].total_sum_se, c[0].total_sum_se);
}

TEST(Trial, SingleUniformRecord) {
  const auto cfg = small(1, 0);
  const auto r = run_trial(cfg, 0, {Strategy::uniform});
  ASSERT_EQ(r.size(), 1u);
  const auto& rec = r[0];
  EXPECT_EQ(rec.status, AllocationStatus::benchmark);
  EXPECT_TRUE(rec.usable());
  EXPECT_TRUE(std::isnan(rec.min_iab_ue_se));
  EXPECT_DOUBLE_EQ(rec.iab_sum_se, 0.0);
  EXPECT_NEAR(rec.total_sum_se, rec.gnb_sum_se, 1e-12);
  EXPECT_NEAR(rec.gnb_sum_se, rec.group_se[0] + rec.group_se[1], 1e-12);
}

TEST(Trial, RecordMatchesGainTable) {
  const auto cfg = small(2, 1, 5);
  const auto g = trial_gains(cfg, 4);
  const auto rec = run_trial(cfg, 4, {Strategy::uniform})[0];
  const auto r = se_report(g, uniform_allocation(cfg, g.sets()));
  EXPECT_NEAR(rec.gnb_sum_se, r.gnb_sum(), 1e-12);
  EXPECT_NEAR(rec.backhaul_dl_se, r.backhaul_dl_se, 1e-12);
  const auto capped = cap_iab_se(r);
  EXPECT_NEAR(rec.iab_sum_se, capped.dl_sum + capped.ul_sum, 1e-12);
  EXPECT_NEAR(rec.min_iab_ue_se, capped.dl[0] + capped.ul[0], 1e-12);
}

TEST(Trial, GpDumps) {
  const auto dir = scratch("dumps");
  TrialOptions opt;
  opt.dump_dir = dir;
  run_trial(small(2, 1), 0, {Strategy::max_min}, opt);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    ++files;
    EXPECT_NO_THROW(gp::parse_problem(slurp(e.path())));
  }
  EXPECT_EQ(files, 1);
}

TEST(Ecdf, SingleStep) {
  const auto e = make_ecdf("m", "s", "g", {3.0});
  EXPECT_DOUBLE_EQ(e.evaluate(2.999), 0.0);
  EXPECT_DOUBLE_EQ(e.evaluate(3.0), 1.0);
  EXPECT_DOUBLE_EQ(e.evaluate(std::numeric_limits<double>::infinity()), 1.0);
}

TEST(Ecdf, SortedWithTies) {
  const auto e = make_ecdf("m", "s", "g", {4.0, 1.0, 2.0, 2.0});
  EXPECT_EQ(e.values, (std::vector<double>{1.0, 2.0, 2.0, 4.0}));
  EXPECT_DOUBLE_EQ(e.evaluate(2.0), 0.75);
  EXPECT_DOUBLE_EQ(e.evaluate(3.0), 0.75);
  EXPECT_DOUBLE_EQ(e.evaluate(0.0), 0.0);
  EXPECT_DOUBLE_EQ(e.probs.back(), 1.0);
}

TEST(Summary, MeanAndInterval) {
  const auto p = summarize(2, "max_min", {1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(p.mean, 2.5);
  EXPECT_EQ(p.samples, 4);
  // 1.96 * sample sd / sqrt(n), sd = sqrt(5/3).
  EXPECT_NEAR(p.ci_high - p.mean, 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-3);
  EXPECT_NEAR(p.mean - p.ci_low, p.ci_high - p.mean, 1e-12);
  EXPECT_TRUE(std::isnan(summarize(1, "x", {}).mean));
}

TEST(Campaign, OrderingAndSelection) {
  CampaignOptions opt;
  opt.trials = 3;
  opt.k_iab_values = {0, 2};
  opt.strategies = {Strategy::uniform, Strategy::max_sum};
  const auto res = run_campaign(small(2, 1), opt);
  ASSERT_EQ(res.records.size(), 2u * 3u * 2u);
  EXPECT_EQ(res.records[0].k_iab, 0);
  EXPECT_EQ(res.records.back().k_iab, 2);
  EXPECT_EQ(res.select(2, Strategy::max_sum).size(), 3u);
  EXPECT_EQ(res.ecdf.size(), 2u);
  EXPECT_EQ(res.sweep.size(), 4u);
}

TEST(Campaign, RejectsInvalidSweep) {
  CampaignOptions opt;
  opt.trials = 1;
  opt.k_iab_values = {40};
  EXPECT_THROW(run_campaign(small(2, 1), opt), ConfigError);
}

TEST(Outputs, CsvRoundTripAndMetadata) {
  CampaignOptions opt;
  opt.trials = 4;
  opt.k_iab_values = {1};
  opt.strategies = {Strategy::uniform, Strategy::max_min};
  const auto res = run_campaign(small(2, 1, 77), opt);
  const auto dir = scratch("csv");
  const auto files = write_outputs(res, dir, OutputFormat::csv);
  EXPECT_EQ(files.size(), 5u);
  const auto back = read_ecdf_csv(dir / "ecdf_ktilde1.csv");
  ASSERT_EQ(back.size(), res.ecdf[0].size());
  for (std::size_t n = 0; n < back.size(); ++n) {
    EXPECT_EQ(back[n].metric, res.ecdf[0][n].metric);
    EXPECT_EQ(back[n].group, res.ecdf[0][n].group);
    ASSERT_EQ(back[n].values.size(), res.ecdf[0][n].values.size());
    for (std::size_t m = 0; m < back[n].values.size(); ++m)
      EXPECT_EQ(back[n].values[m], res.ecdf[0][n].values[m]);
  }
  const auto meta = nlohmann::json::parse(slurp(dir / "metadata.json"));
  EXPECT_EQ(meta["seed"].get<std::uint64_t>(), 77u);
  EXPECT_EQ(meta["trials"].get<int>(), 4);
}

TEST(Outputs, JsonDocument) {
  CampaignOptions opt;
  opt.trials = 2;
  opt.strategies = {Strategy::uniform};
  const auto res = run_campaign(small(2, 1), opt);
  const auto dir = scratch("json");
  const auto files = write_outputs(res, dir, OutputFormat::json);
  ASSERT_EQ(files.size(), 1u);
  const auto doc = nlohmann::json::parse(slurp(files[0]));
  EXPECT_TRUE(doc.contains("metadata"));
  EXPECT_EQ(parse_output_format("json"), OutputFormat::json);
  EXPECT_THROW(parse_output_format("xml"), std::invalid_argument);
}

TEST(Outputs, NothingToWrite) {
  CampaignResult empty;
  empty.options.strategies.clear();
  EXPECT_THROW(write_outputs(empty, scratch("empty"), OutputFormat::csv), std::invalid_argument);
}
