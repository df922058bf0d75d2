// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "fdiab/channel.hpp"
#include "fdiab/types.hpp"

namespace fdiab {

struct SingularPair {
  CVector left;   ///< u_1, receiver side
  CVector right;  ///< w_1, transmitter side
  double value = 0.0;
};

/// Dominant singular pair of H with the phase convention applied to each
/// vector independently: its largest-magnitude entry (first one on ties) is
/// made real positive. Throws std::domain_error for an all-zero matrix.
SingularPair dominant_singular_pair(const CMatrix& h);

/// Rotates v so that its largest-magnitude entry is real positive.
CVector canonical_phase(CVector v);

/// Per-node vectors keyed by global index (0 = backhaul stream / peer BS).
class VectorSet {
 public:
  void set(Node node, int index, CVector v) { vectors_[{node, index}] = std::move(v); }
  const CVector& at(Node node, int index) const;
  bool contains(Node node, int index) const { return vectors_.count({node, index}) > 0; }
  std::size_t size() const { return vectors_.size(); }
  const std::map<std::pair<Node, int>, CVector>& entries() const { return vectors_; }

 private:
  std::map<std::pair<Node, int>, CVector> vectors_;
};

/// Unit-norm precoders: gNB {0} u K, UE K u I, IAB {0} u I.
struct PrecoderSet : VectorSet {};
/// Unnormalised MRC combiners: gNB {0} u K, IAB {0} u I, UE K u I.
struct CombinerSet : VectorSet {};

PrecoderSet compute_precoders(const ChannelSet& channels);
CombinerSet compute_combiners(const ChannelSet& channels, const PrecoderSet& precoders);

/// Which product a gain coefficient is built from:
///   plain  g      = v^H H^H f
///   hat    g-hat  = v^H H f
///   cross  g-tilde between a gNB UE and an IAB UE over H_{i,k}
enum class GainForm { plain, hat, cross };

/// Index of one squared coefficient |g_{rx, channel, tx}^{combiner-precoder}|^2.
/// Cross keys use the transmitting UE as channel index, like g-tilde_{k,i}.
struct GainKey {
  GainForm form = GainForm::plain;
  Node combiner = Node::ue;
  int rx = 0;
  int channel = 0;
  Node precoder = Node::gnb;
  int tx = 0;

  auto operator<=>(const GainKey&) const = default;
  std::string label() const;
};

class MissingGainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Scalar reduction of one drop: squared gains, combiner norms, noise.
class GainTable {
 public:
  GainTable() = default;
  GainTable(UserSets sets, NoisePowers noise) : sets_(sets), noise_(noise) {}

  void set(const GainKey& key, double value);
  void set_norm(Node node, int index, double squared_norm);

  double at(const GainKey& key) const;
  double norm(Node node, int index) const;  ///< ||v||^2
  bool contains(const GainKey& key) const { return gains_.count(key) > 0; }

  const UserSets& sets() const { return sets_; }
  const NoisePowers& noise() const { return noise_; }
  void set_noise(NoisePowers noise) { noise_ = noise; }
  std::size_t gain_count() const { return gains_.size(); }
  std::size_t norm_count() const { return norms_.size(); }
  const std::map<GainKey, double>& gains() const { return gains_; }

 private:
  UserSets sets_;
  NoisePowers noise_;
  std::map<GainKey, double> gains_;
  std::map<std::pair<Node, int>, double> norms_;
};

/// Every coefficient referenced by the six SINR families, enumerated from the
/// user sets. Used both to build and to audit a table.
std::vector<GainKey> required_gain_keys(const UserSets& sets);

/// Evaluates one coefficient directly from the matrices (no table).
std::complex<double> gain_coefficient(const GainKey& key, const ChannelSet& channels,
                                      const PrecoderSet& precoders, const CombinerSet& combiners);

GainTable build_gain_table(const ChannelSet& channels, const PrecoderSet& precoders,
                           const CombinerSet& combiners, const NoisePowers& noise);

/// Precoders, combiners and table in one go.
GainTable reduce_channels(const ChannelSet& channels, const NoisePowers& noise);

}  // namespace fdiab
