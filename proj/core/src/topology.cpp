// SPDX-License-Identifier: Apache-2.0
#include "fdiab/topology.hpp"

#include <cmath>
#include <numbers>

namespace fdiab {
namespace {

constexpr double kSectorWidth = 2.0 * std::numbers::pi / 3.0;

Position drop_in_sector(const Position& site, double boresight, double r_min, double r_max, double height,
                        RandomStream& rng) {
  // Uniform by area: radius ~ sqrt(U(r_min^2, r_max^2)).
  const double r = std::sqrt(rng.uniform(r_min * r_min, r_max * r_max));
  const double phi = boresight + rng.uniform(-kSectorWidth / 2.0, kSectorWidth / 2.0);
  return Position{site.x + r * std::cos(phi), site.y + r * std::sin(phi), height};
}

}  // namespace

double distance_2d(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double distance_3d(const Position& a, const Position& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

Topology generate_topology(const SystemConfig& cfg, RandomStream& rng) {
  Topology t;
  t.sets = cfg.user_sets();
  t.gnb = Position{0.0, 0.0, cfg.height_gnb};
  t.iab = Position{cfg.iab_ground_distance(), 0.0, cfg.height_iab};
  t.gnb_boresight = 0.0;
  t.iab_boresight = 0.0;
  t.ue.reserve(static_cast<std::size_t>(t.sets.total()));
  for (int k = 1; k <= t.sets.k_gnb; ++k)
    t.ue.push_back(drop_in_sector(t.gnb, t.gnb_boresight, cfg.min_distance, cfg.radius_gnb, cfg.height_ue, rng));
  for (int i = 0; i < t.sets.k_iab; ++i)
    t.ue.push_back(drop_in_sector(t.iab, t.iab_boresight, cfg.min_distance, cfg.radius_iab, cfg.height_ue, rng));
  return t;
}

}  // namespace fdiab
