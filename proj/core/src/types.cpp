// SPDX-License-Identifier: Apache-2.0
#include "fdiab/types.hpp"

#include <stdexcept>

namespace fdiab {

std::string_view to_string(Node node) {
  switch (node) {
    case Node::gnb:
      return "gNB";
    case Node::iab:
      return "IAB";
    case Node::ue:
      return "UE";
  }
  return "?";
}

std::vector<int> UserSets::gnb_users() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k_gnb));
  for (int k = 1; k <= k_gnb; ++k) out.push_back(k);
  return out;
}

std::vector<int> UserSets::iab_users() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k_iab));
  for (int i = k_gnb + 1; i <= k_gnb + k_iab; ++i) out.push_back(i);
  return out;
}

std::vector<int> UserSets::all_users() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(total()));
  for (int k = 1; k <= total(); ++k) out.push_back(k);
  return out;
}

double NoisePowers::at(Node node) const {
  switch (node) {
    case Node::gnb:
      return gnb;
    case Node::iab:
      return iab;
    case Node::ue:
      return ue;
  }
  throw std::invalid_argument("unknown node kind");
}

}  // namespace fdiab
