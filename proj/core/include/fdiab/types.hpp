// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <compare>
#include <string_view>
#include <vector>

namespace fdiab {

/// Network node kinds. The gNB doubles as IAB donor.
enum class Node { gnb, iab, ue };

std::string_view to_string(Node node);

/// UE index sets. gNB users carry global indices 1..K, IAB users K+1..K+K~.
/// Index 0 always names the backhaul stream (or the peer base station).
struct UserSets {
  int k_gnb = 0;
  int k_iab = 0;

  int total() const { return k_gnb + k_iab; }
  bool is_gnb_user(int k) const { return k >= 1 && k <= k_gnb; }
  bool is_iab_user(int k) const { return k > k_gnb && k <= k_gnb + k_iab; }
  std::vector<int> gnb_users() const;
  std::vector<int> iab_users() const;
  std::vector<int> all_users() const;

  friend bool operator==(const UserSets&, const UserSets&) = default;
};

/// Receiver noise variance per node type, in watts.
struct NoisePowers {
  double gnb = 0.0;
  double iab = 0.0;
  double ue = 0.0;

  double at(Node node) const;
};

inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

}  // namespace fdiab
