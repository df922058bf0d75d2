// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fdiab/link_metrics.hpp"
#include "fdiab/montecarlo.hpp"
#include "oracles.hpp"

using namespace fdiab;

namespace {

GainTable zero_table(UserSets sets, NoisePowers noise) {
  GainTable t(sets, noise);
  for (const auto& key : required_gain_keys(sets)) t.set(key, 0.0);
  t.set_norm(Node::gnb, 0, 1.0);
  t.set_norm(Node::iab, 0, 1.0);
  for (int k = 1; k <= sets.total(); ++k) {
    t.set_norm(sets.is_gnb_user(k) ? Node::gnb : Node::iab, k, 1.0);
    t.set_norm(Node::ue, k, 1.0);
  }
  return t;
}

struct Instance {
  SystemConfig cfg;
  ChannelSet channels;
  GainTable gains;
};

Instance instance(int k_gnb, int k_iab, std::uint64_t seed) {
  Instance in;
  in.cfg.k_gnb = k_gnb;
  in.cfg.k_iab = k_iab;
  RandomStream rng(seed);
  in.channels = build_channel_set(generate_topology(in.cfg, rng), in.cfg, rng);
  in.gains = reduce_channels(in.channels, in.cfg.noise_powers());
  return in;
}

}  // namespace

TEST(PowerAllocation, Indexing) {
  PowerAllocation p(UserSets{2, 2});
  EXPECT_EQ(p.gnb.size(), 3u);
  EXPECT_EQ(p.iab.size(), 3u);
  EXPECT_EQ(p.ue.size(), 4u);
  p.at(Node::iab, 4) = 1.5;
  EXPECT_DOUBLE_EQ(p.iab[2], 1.5);
  p.at(Node::ue, 3) = 0.25;
  EXPECT_DOUBLE_EQ(p.ue[2], 0.25);
  EXPECT_THROW(p.at(Node::iab, 1), std::out_of_range);
  EXPECT_THROW(p.at(Node::gnb, 3), std::out_of_range);
  EXPECT_THROW(p.at(Node::ue, 0), std::out_of_range);
  EXPECT_DOUBLE_EQ(p.scaled(2.0).at(Node::iab, 4), 3.0);
}

TEST(PowerAllocation, BudgetViolations) {
  SystemConfig cfg;
  cfg.k_gnb = 2;
  cfg.k_iab = 1;
  PowerAllocation p(cfg.user_sets());
  EXPECT_TRUE(power_violations(p, cfg).empty());
  p.at(Node::ue, 2) = 2.0 * cfg.p_max_ue_watt();
  const auto v = power_violations(p, cfg);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rfind("UE 2 budget", 0), 0u);
  p.at(Node::ue, 2) = 0.0;
  p.gnb.assign(3, cfg.p_max_gnb_watt() / 2.0);
  EXPECT_EQ(power_violations(p, cfg).size(), 1u);
}

TEST(Sinr, NoiseOnlyDenominator) {
  const UserSets sets{1, 0};
  auto g = zero_table(sets, NoisePowers{1.0, 1.0, 1.0});
  g.set({GainForm::hat, Node::gnb, 1, 1, Node::ue, 1}, 1.0);
  PowerAllocation p(sets);
  p.at(Node::ue, 1) = 2.0;
  EXPECT_DOUBLE_EQ(sinr_uplink_gnb_access(g, p, 1), 2.0);
}

TEST(Sinr, HomogeneousWithoutNoise) {
  auto in = instance(3, 2, 4);
  in.gains.set_noise(NoisePowers{0, 0, 0});
  std::mt19937_64 rng(1);
  const auto p = oracle::random_powers(in.cfg, in.gains.sets(), rng);
  const auto a = sinr_report(in.gains, p);
  const auto b = sinr_report(in.gains, p.scaled(2.0));
  for (std::size_t n = 0; n < 4; ++n)
    for (std::size_t m = 0; m < a.sinr[n].size(); ++m) EXPECT_NEAR(b.sinr[n][m] / a.sinr[n][m], 1.0, 1e-12);
  EXPECT_NEAR(b.backhaul_ul / a.backhaul_ul, 1.0, 1e-12);
}

TEST(Sinr, MatchesMatrixLevelEvaluation) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto in = instance(2, 1, seed);
    const auto beams = oracle::svd_beams(in.channels);
    std::mt19937_64 rng(seed);
    const auto p = oracle::random_powers(in.cfg, in.gains.sets(), rng);
    const auto want = oracle::matrix_sinrs(in.channels, beams, in.cfg.noise_powers(), p);
    const auto got = sinr_report(in.gains, p);
    for (std::size_t n = 0; n < 4; ++n) {
      ASSERT_EQ(got.sinr[n].size(), want.sinr[n].size());
      for (std::size_t m = 0; m < want.sinr[n].size(); ++m)
        EXPECT_LE(oracle::relative_error(got.sinr[n][m], want.sinr[n][m]), 1e-10) << n << "/" << m;
    }
    EXPECT_LE(oracle::relative_error(got.backhaul_ul, want.backhaul_ul), 1e-10);
    EXPECT_LE(oracle::relative_error(got.backhaul_dl, want.backhaul_dl), 1e-10);
  }
}

TEST(Sinr, IndexChecks) {
  const auto in = instance(2, 1, 1);
  PowerAllocation p(in.gains.sets());
  EXPECT_THROW(sinr_uplink_gnb_access(in.gains, p, 0), std::out_of_range);
  EXPECT_THROW(sinr_uplink_iab_access(in.gains, p, 0), std::out_of_range);
  EXPECT_THROW(sinr_downlink_gnb(in.gains, p, 3), std::out_of_range);
  EXPECT_THROW(sinr_downlink_iab(in.gains, p, 1), std::out_of_range);
}

TEST(Sinr, ExpressionTermsAreConsistent) {
  const auto in = instance(3, 2, 2);
  std::mt19937_64 rng(2);
  const auto p = oracle::random_powers(in.cfg, in.gains.sets(), rng);
  const auto e = sinr_expression(in.gains, LinkGroup::dl_iab, 5);
  // signal, K cross terms, one other IAB stream and the backhaul stream
  EXPECT_EQ(e.interference.size(), 3u + 1u + 1u);
  EXPECT_DOUBLE_EQ(e.value(p), e.numerator(p) / (e.interference_power(p) + e.noise));
  EXPECT_DOUBLE_EQ(e.value(PowerAllocation(in.gains.sets())), 0.0);
}

TEST(SpectralEfficiency, KnownPoints) {
  EXPECT_DOUBLE_EQ(spectral_efficiency(1.0), 1.0);
  EXPECT_DOUBLE_EQ(spectral_efficiency(0.0), 0.0);
  EXPECT_DOUBLE_EQ(spectral_efficiency(3.0), 2.0);
}

TEST(SeReport, SumsAreConsistent) {
  const auto in = instance(4, 3, 3);
  std::mt19937_64 rng(3);
  const auto p = oracle::random_powers(in.cfg, in.gains.sets(), rng);
  const auto r = se_report(in.gains, p);
  double total = 0.0;
  for (auto grp : kLinkGroups) {
    double s = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    for (double x : r.sinr.of(grp)) {
      s += std::log2(1.0 + x);
      mn = std::min(mn, x);
    }
    EXPECT_NEAR(r.sum(grp), s, 1e-12);
    EXPECT_DOUBLE_EQ(r.min_sinr[static_cast<std::size_t>(grp)], mn);
    total += s;
  }
  EXPECT_NEAR(r.total(), total, 1e-12);
  EXPECT_NEAR(r.backhaul_ul_se, std::log2(1.0 + r.sinr.backhaul_ul), 1e-15);
}

TEST(SeReport, EmptyGroupMinIsNan) {
  const auto in = instance(2, 0, 3);
  const auto r = se_report(in.gains, uniform_allocation(in.cfg, in.gains.sets()));
  EXPECT_TRUE(std::isnan(r.min_sinr[static_cast<std::size_t>(LinkGroup::ul_iab)]));
  EXPECT_DOUBLE_EQ(r.iab_sum(), 0.0);
}

TEST(Backhaul, BothExpressionsAgree) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto in = instance(3, static_cast<int>(seed % 4), seed);
    std::mt19937_64 rng(seed);
    const auto c = backhaul_consistency_check(in.gains, oracle::random_powers(in.cfg, in.gains.sets(), rng));
    EXPECT_TRUE(c.ok) << c.max_relative_error;
    EXPECT_LE(c.max_relative_error, 1e-9);
  }
}

TEST(Backhaul, ZeroPower) {
  const auto in = instance(2, 1, 0);
  const auto c = backhaul_consistency_check(in.gains, PowerAllocation(in.gains.sets()));
  EXPECT_DOUBLE_EQ(c.se_d_iab_0, 0.0);
  EXPECT_DOUBLE_EQ(c.se_u_gnb_0, 0.0);
  EXPECT_DOUBLE_EQ(c.se_d_gnb_0, 0.0);
  EXPECT_DOUBLE_EQ(c.se_u_iab_0, 0.0);
  EXPECT_TRUE(c.ok);
}

TEST(Backhaul, HandEvaluatedSingleUser) {
  // Noise-free, one gNB UE: the IAB backhaul symbol at the gNB sees only the
  // UE's uplink, so SINR = 1 W * 4 / (2 W * 1) = 2.
  const UserSets sets{1, 0};
  auto g = zero_table(sets, NoisePowers{0, 0, 0});
  g.set({GainForm::hat, Node::gnb, 0, 0, Node::iab, 0}, 4.0);
  g.set({GainForm::hat, Node::gnb, 0, 1, Node::ue, 1}, 1.0);
  g.set({GainForm::plain, Node::iab, 0, 0, Node::gnb, 0}, 9.0);
  g.set({GainForm::plain, Node::iab, 0, 0, Node::gnb, 1}, 3.0);
  PowerAllocation p(sets);
  p.at(Node::iab, 0) = 1.0;
  p.at(Node::ue, 1) = 2.0;
  p.at(Node::gnb, 0) = 1.0;
  p.at(Node::gnb, 1) = 1.0;
  const auto c = backhaul_consistency_check(g, p);
  EXPECT_NEAR(c.se_u_gnb_0, std::log2(3.0), 1e-15);
  EXPECT_NEAR(c.se_d_iab_0, std::log2(3.0), 1e-15);
  EXPECT_NEAR(c.se_u_iab_0, std::log2(4.0), 1e-15);
  EXPECT_NEAR(c.se_d_gnb_0, std::log2(4.0), 1e-15);
}
