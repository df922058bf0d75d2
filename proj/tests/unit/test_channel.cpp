// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "fdiab/channel.hpp"

using namespace fdiab;
using cd = std::complex<double>;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

LinkDescriptor plain_link(int nr_rows, int nr_cols, int nt_rows, int nt_cols, int nc, int nl, double gain) {
  LinkDescriptor d;
  d.kind = LinkKind::gnb_access;
  d.rx_array = ArrayGeometry{nr_rows, nr_cols, 0.5, 0.0};
  d.tx_array = ArrayGeometry{nt_rows, nt_cols, 0.5, std::numbers::pi};
  d.rx_position = Position{0, 0, 10};
  d.tx_position = Position{40, 10, 1.5};
  d.n_clusters = nc;
  d.n_paths = nl;
  d.large_scale_gain = gain;
  d.azimuth_spread = 15 * kDeg;
  d.elevation_spread = 5 * kDeg;
  d.intra_cluster_spread = 2 * kDeg;
  return d;
}

std::vector<double> singular_values(const CMatrix& h) {
  Eigen::JacobiSVD<CMatrix> svd(h);
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

}  // namespace

TEST(ArrayResponse, SingleElement) {
  const auto a = array_response(ArrayGeometry{1, 1, 0.5, 0.0}, AnglePair{0.7, -0.2});
  ASSERT_EQ(a.size(), 1);
  EXPECT_EQ(a(0), cd(1.0, 0.0));
}

TEST(ArrayResponse, BroadsideIsInPhase) {
  const auto a = array_response(ArrayGeometry{2, 1, 0.5, 0.0}, AnglePair{0.0, 0.0});
  ASSERT_EQ(a.size(), 2);
  EXPECT_NEAR(std::abs(a(0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a(1) - 1.0), 0.0, 1e-15);
}

TEST(ArrayResponse, FourByTwoAtThirtyDegrees) {
  // Half-wavelength rows at sin(30 deg) advance by pi/2 per row; columns
  // see no elevation.
  const auto a = array_response(ArrayGeometry{4, 2, 0.5, 0.0}, AnglePair{30 * kDeg, 0.0});
  const cd j(0.0, 1.0);
  const std::vector<cd> expected{1.0, 1.0, j, j, -1.0, -1.0, -j, -j};
  ASSERT_EQ(a.size(), 8);
  for (int n = 0; n < 8; ++n) {
    EXPECT_NEAR(std::abs(a(n)), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(a(n) - expected[static_cast<std::size_t>(n)]), 0.0, 1e-14) << n;
  }
}

TEST(ArrayResponse, RejectsEmptyGeometry) {
  EXPECT_THROW(array_response(ArrayGeometry{0, 2, 0.5, 0.0}, {}), std::invalid_argument);
}

TEST(Pathloss, ReferenceIntercept) {
  // 32.4 + 20 log10(30) at 1 m.
  const SystemConfig cfg;
  EXPECT_NEAR(pathloss_db(LinkKind::gnb_access, LinkState::los, 1.0, cfg), 61.942425094393, 1e-9);
}

TEST(Pathloss, LosDistanceDoubling) {
  const SystemConfig cfg;
  const double a = pathloss_db(LinkKind::gnb_access, LinkState::los, 40.0, cfg);
  const double b = pathloss_db(LinkKind::gnb_access, LinkState::los, 80.0, cfg);
  EXPECT_NEAR(b - a, 21.0 * std::log10(2.0), 1e-12);
}

TEST(Pathloss, NlosAtHundredMetres) {
  // 35.3 log10(100) + 22.4 + 21.3 log10(30) for a 1.5 m UE.
  const SystemConfig cfg;
  EXPECT_NEAR(pathloss_db(LinkKind::gnb_access, LinkState::nlos, 100.0, cfg), 124.462682726, 1e-6);
}

TEST(Pathloss, NlosNeverBelowLos) {
  const SystemConfig cfg;
  for (auto kind : {LinkKind::backhaul, LinkKind::gnb_access, LinkKind::iab_access, LinkKind::ue_ue_cross})
    for (double d = 1.0; d < 3000.0; d *= 1.37)
      EXPECT_GE(pathloss_db(kind, LinkState::nlos, d, cfg), pathloss_db(kind, LinkState::los, d, cfg));
}

TEST(Pathloss, BadDistance) {
  const SystemConfig cfg;
  EXPECT_THROW(pathloss_db(LinkKind::gnb_access, LinkState::los, -5.0, cfg), std::domain_error);
  EXPECT_THROW(pathloss_db(LinkKind::gnb_access, LinkState::los, 0.5, cfg), std::domain_error);
}

TEST(Pathloss, LosProbability) {
  EXPECT_DOUBLE_EQ(los_probability(10.0), 1.0);
  EXPECT_DOUBLE_EQ(los_probability(18.0), 1.0);
  EXPECT_NEAR(los_probability(36.0), 0.5 + 0.5 * std::exp(-1.0), 1e-15);
  EXPECT_LT(los_probability(200.0), los_probability(100.0));
}

TEST(SectorGain, Pattern) {
  const SystemConfig cfg;
  EXPECT_DOUBLE_EQ(sector_gain_db(0.0, cfg), 8.0);
  EXPECT_NEAR(sector_gain_db(60 * kDeg, cfg), 5.0, 1e-12);
  EXPECT_NEAR(sector_gain_db(-60 * kDeg, cfg), 5.0, 1e-12);
  EXPECT_NEAR(sector_gain_db(180 * kDeg, cfg), 8.0 - 27.0, 1e-9);
}

TEST(PathPowers, SumAndDecay) {
  const auto w = path_powers(4, 3, 2e-9, 3.0);
  ASSERT_EQ(w.size(), 12u);
  double sum = 0.0;
  for (double x : w) sum += x;
  EXPECT_NEAR(sum / (12 * 2e-9), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(w[0], w[2]);
  EXPECT_NEAR(w[3] / w[0], std::pow(10.0, -0.3), 1e-12);
  EXPECT_THROW(path_powers(0, 3, 1.0, 3.0), std::invalid_argument);
}

TEST(Synthesis, SinglePathIsOuterProduct) {
  auto link = plain_link(4, 2, 2, 2, 1, 1, 1.0);
  PathComponent p;
  p.amplitude = 1.0;
  p.power = 1.0;
  p.aoa = AnglePair{0.3, 0.1};
  p.aod = AnglePair{std::numbers::pi - 0.2, -0.05};
  const auto h = synthesize_channel(link, std::span<const PathComponent>(&p, 1));
  const CVector ar = array_response(link.rx_array, AnglePair{0.3, 0.1}) / std::sqrt(8.0);
  const CVector at = array_response(link.tx_array, AnglePair{-0.2, -0.05}) / 2.0;
  const CMatrix expected = std::sqrt(32.0) * ar * at.transpose();
  EXPECT_LT((h.entries - expected).norm(), 1e-13);
}

TEST(Synthesis, MeanFrobeniusPower) {
  const auto link = plain_link(4, 2, 2, 2, 4, 3, 1e-3);
  RandomStream rng(17);
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) sum += draw_channel(link, rng).entries.squaredNorm();
  // E ||H||_F^2 = Nt Nr times the mean per-path power.
  EXPECT_NEAR(sum / n / (8 * 4 * 1e-3), 1.0, 0.02);
}

TEST(ChannelSet, BackhaulIsRankOne) {
  SystemConfig cfg;
  cfg.k_iab = 3;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomStream rng(seed);
    const auto topo = generate_topology(cfg, rng);
    const auto set = build_channel_set(topo, cfg, rng);
    const auto s = singular_values(set.backhaul.entries);
    EXPECT_LE(s[1], 1e-12 * s[0]);
  }
}

TEST(ChannelSet, CountsAndShapes) {
  const SystemConfig cfg;
  RandomStream rng(2);
  const auto topo = generate_topology(cfg, rng);
  const auto set = build_channel_set(topo, cfg, rng);
  EXPECT_EQ(set.count(), 26u);
  EXPECT_EQ(set.backhaul.entries.rows(), 64);
  EXPECT_EQ(set.backhaul.entries.cols(), 32);
  EXPECT_EQ(set.link(1).entries.rows(), 64);
  EXPECT_EQ(set.link(1).entries.cols(), 8);
  EXPECT_EQ(set.link(13).entries.rows(), 32);
  EXPECT_EQ(set.cross_link(13, 4).entries.rows(), 8);
  EXPECT_EQ(set.cross_link(13, 4).rx, (Endpoint{Node::ue, 4}));
  EXPECT_EQ(set.cross_link(13, 4).tx, (Endpoint{Node::ue, 13}));
  EXPECT_THROW(set.cross_link(4, 13), std::out_of_range);
  EXPECT_THROW(set.link(14), std::out_of_range);
}

TEST(ChannelSet, NoIabUsers) {
  SystemConfig cfg;
  cfg.k_iab = 0;
  RandomStream rng(2);
  const auto set = build_channel_set(generate_topology(cfg, rng), cfg, rng);
  EXPECT_EQ(set.access.size(), 12u);
  EXPECT_TRUE(set.cross.empty());
}

TEST(ChannelSet, Deterministic) {
  SystemConfig cfg;
  cfg.k_iab = 2;
  auto draw = [&](std::uint64_t seed) {
    RandomStream rng(seed);
    return build_channel_set(generate_topology(cfg, rng), cfg, rng);
  };
  const auto a = draw(5), b = draw(5), c = draw(6);
  EXPECT_EQ(a.backhaul.entries, b.backhaul.entries);
  for (std::size_t k = 0; k < a.access.size(); ++k) EXPECT_EQ(a.access[k].entries, b.access[k].entries);
  for (std::size_t k = 0; k < a.cross.size(); ++k) EXPECT_EQ(a.cross[k].entries, b.cross[k].entries);
  EXPECT_NE(a.backhaul.entries, c.backhaul.entries);
}

TEST(ChannelSet, DumpRoundTrip) {
  SystemConfig cfg;
  cfg.k_gnb = 3;
  cfg.k_iab = 2;
  RandomStream rng(8);
  const auto set = build_channel_set(generate_topology(cfg, rng), cfg, rng);
  std::stringstream ss;
  write_channel_dump(ss, set);
  const auto back = read_channel_dump(ss);
  EXPECT_EQ(back.sets, set.sets);
  EXPECT_EQ(back.backhaul.entries, set.backhaul.entries);
  ASSERT_EQ(back.cross.size(), set.cross.size());
  for (std::size_t k = 0; k < set.cross.size(); ++k) {
    EXPECT_EQ(back.cross[k].entries, set.cross[k].entries);
    EXPECT_EQ(back.cross[k].rx, set.cross[k].rx);
  }
  std::stringstream bad("not a dump\n");
  EXPECT_ANY_THROW(read_channel_dump(bad));
}

TEST(Descriptor, BackhaulIsLineOfSightSinglePath) {
  SystemConfig cfg;
  RandomStream rng(1);
  const auto topo = generate_topology(cfg, rng);
  const auto d = describe_link(LinkKind::backhaul, {Node::gnb, 0}, {Node::iab, 0}, topo, cfg, rng);
  EXPECT_EQ(d.state, LinkState::los);
  EXPECT_EQ(d.n_clusters * d.n_paths, 1);
  EXPECT_GT(d.large_scale_gain, 0.0);
}
