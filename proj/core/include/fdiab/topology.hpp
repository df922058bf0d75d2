// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "fdiab/config.hpp"
#include "fdiab/random.hpp"
#include "fdiab/types.hpp"

namespace fdiab {

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const Position&, const Position&) = default;
};

double distance_2d(const Position& a, const Position& b);
double distance_3d(const Position& a, const Position& b);

/// One network drop: base-station sites plus UE positions.
///
/// The gNB sits at the origin with its sector facing +x; the IAB node sits on
/// the gNB coverage boundary along +x, its sector also facing +x so that the
/// IAB area extends the gNB coverage outward.
struct Topology {
  UserSets sets;
  Position gnb;
  Position iab;
  double gnb_boresight = 0.0;  ///< radians
  double iab_boresight = 0.0;  ///< radians
  std::vector<Position> ue;    ///< ue[k-1] holds UE k

  const Position& ue_position(int k) const { return ue.at(static_cast<std::size_t>(k - 1)); }
  Node server(int k) const { return sets.is_gnb_user(k) ? Node::gnb : Node::iab; }
  const Position& server_position(int k) const { return server(k) == Node::gnb ? gnb : iab; }

  friend bool operator==(const Topology&, const Topology&) = default;
};

/// Drops K UEs uniformly (by area) in the gNB 120-degree sector and K~ UEs in
/// the IAB node's sector, honouring min_distance. Requires a valid config.
Topology generate_topology(const SystemConfig& cfg, RandomStream& rng);

}  // namespace fdiab
