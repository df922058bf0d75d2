// SPDX-License-Identifier: Apache-2.0
#include "fdiab/beamforming.hpp"

#include <Eigen/SVD>
#include <fmt/format.h>

namespace fdiab {

CVector canonical_phase(CVector v) {
  Eigen::Index best = 0;
  double mag = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v(i));
    if (m > mag) {
      mag = m;
      best = i;
    }
  }
  if (mag > 0.0) v *= std::conj(v(best)) / mag;
  v(best) = std::abs(v(best));
  return v;
}

SingularPair dominant_singular_pair(const CMatrix& h) {
  if (h.size() == 0 || h.cwiseAbs().maxCoeff() == 0.0)
    throw std::domain_error("degenerate link: channel matrix is zero");
  Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SingularPair p;
  p.value = svd.singularValues()(0);
  p.left = canonical_phase(svd.matrixU().col(0));
  p.right = canonical_phase(svd.matrixV().col(0));
  return p;
}

const CVector& VectorSet::at(Node node, int index) const {
  const auto it = vectors_.find({node, index});
  if (it == vectors_.end())
    throw std::out_of_range(fmt::format("no vector for {} {}", to_string(node), index));
  return it->second;
}

PrecoderSet compute_precoders(const ChannelSet& channels) {
  PrecoderSet p;
  const auto backhaul = dominant_singular_pair(channels.backhaul.entries);
  p.set(Node::gnb, 0, backhaul.left);
  p.set(Node::iab, 0, backhaul.right);
  for (int k = 1; k <= channels.sets.total(); ++k) {
    const auto s = dominant_singular_pair(channels.link(k).entries);
    p.set(channels.sets.is_gnb_user(k) ? Node::gnb : Node::iab, k, s.left);
    p.set(Node::ue, k, s.right);
  }
  return p;
}

CombinerSet compute_combiners(const ChannelSet& channels, const PrecoderSet& f) {
  CombinerSet v;
  const CMatrix& h0 = channels.backhaul.entries;
  v.set(Node::iab, 0, h0.adjoint() * f.at(Node::gnb, 0));
  v.set(Node::gnb, 0, h0 * f.at(Node::iab, 0));
  for (int k = 1; k <= channels.sets.total(); ++k) {
    const CMatrix& h = channels.link(k).entries;
    const Node bs = channels.sets.is_gnb_user(k) ? Node::gnb : Node::iab;
    v.set(bs, k, h * f.at(Node::ue, k));
    v.set(Node::ue, k, h.adjoint() * f.at(bs, k));
  }
  return v;
}

std::string GainKey::label() const {
  const char* sym = form == GainForm::plain ? "g" : form == GainForm::hat ? "ghat" : "gtilde";
  if (form == GainForm::cross) return fmt::format("|gtilde_{{{},{}}}^{{UE-UE}}|^2", rx, tx);
  return fmt::format("|{}_{{{},{},{}}}^{{{}-{}}}|^2", sym, rx, channel, tx, to_string(combiner), to_string(precoder));
}

void GainTable::set(const GainKey& key, double value) {
  if (!(value >= 0.0)) throw std::invalid_argument("gain " + key.label() + " must be non-negative");
  gains_[key] = value;
}

void GainTable::set_norm(Node node, int index, double squared_norm) {
  if (!(squared_norm >= 0.0)) throw std::invalid_argument("combiner norm must be non-negative");
  norms_[{node, index}] = squared_norm;
}

double GainTable::at(const GainKey& key) const {
  const auto it = gains_.find(key);
  if (it == gains_.end()) throw MissingGainError("gain table has no coefficient " + key.label());
  return it->second;
}

double GainTable::norm(Node node, int index) const {
  const auto it = norms_.find({node, index});
  if (it == norms_.end())
    throw MissingGainError(fmt::format("gain table has no combiner norm ||v^{}_{}||^2", to_string(node), index));
  return it->second;
}

std::vector<GainKey> required_gain_keys(const UserSets& sets) {
  std::vector<GainKey> keys;
  const auto gnb_users = sets.gnb_users();
  const auto iab_users = sets.iab_users();
  std::vector<int> gnb_streams{0};
  gnb_streams.insert(gnb_streams.end(), gnb_users.begin(), gnb_users.end());
  std::vector<int> iab_streams{0};
  iab_streams.insert(iab_streams.end(), iab_users.begin(), iab_users.end());

  // gNB receiving (UL): UEs of K over their own channel, IAB streams over H_0.
  for (int k : gnb_streams) {
    for (int j : gnb_users) keys.push_back({GainForm::hat, Node::gnb, k, j, Node::ue, j});
    for (int l : iab_streams) keys.push_back({GainForm::hat, Node::gnb, k, 0, Node::iab, l});
  }
  // IAB receiving: its UEs over their channel, gNB streams over H_0^H.
  for (int i : iab_streams) {
    for (int l : iab_users) keys.push_back({GainForm::hat, Node::iab, i, l, Node::ue, l});
    for (int k : gnb_streams) keys.push_back({GainForm::plain, Node::iab, i, 0, Node::gnb, k});
  }
  // gNB UEs receiving (DL): gNB streams plus IAB-UE uplink leakage.
  for (int k : gnb_users) {
    for (int j : gnb_streams) keys.push_back({GainForm::plain, Node::ue, k, k, Node::gnb, j});
    for (int i : iab_users) keys.push_back({GainForm::cross, Node::ue, k, i, Node::ue, i});
  }
  // IAB UEs receiving: IAB streams plus gNB-UE uplink leakage.
  for (int i : iab_users) {
    for (int l : iab_streams) keys.push_back({GainForm::plain, Node::ue, i, i, Node::iab, l});
    for (int k : gnb_users) keys.push_back({GainForm::cross, Node::ue, i, k, Node::ue, k});
  }
  return keys;
}

std::complex<double> gain_coefficient(const GainKey& key, const ChannelSet& channels, const PrecoderSet& f,
                                      const CombinerSet& v) {
  const CVector& comb = v.at(key.combiner, key.rx);
  const CVector& prec = f.at(key.precoder, key.tx);
  switch (key.form) {
    case GainForm::plain:
      return comb.dot(channels.link(key.channel).entries.adjoint() * prec);
    case GainForm::hat:
      return comb.dot(channels.link(key.channel).entries * prec);
    case GainForm::cross:
      if (channels.sets.is_gnb_user(key.rx))
        return comb.dot(channels.cross_link(key.tx, key.rx).entries * prec);
      return comb.dot(channels.cross_link(key.rx, key.tx).entries.adjoint() * prec);
  }
  throw std::invalid_argument("unknown gain form");
}

GainTable build_gain_table(const ChannelSet& channels, const PrecoderSet& precoders, const CombinerSet& combiners,
                           const NoisePowers& noise) {
  GainTable t(channels.sets, noise);
  for (const auto& key : required_gain_keys(channels.sets))
    t.set(key, std::norm(gain_coefficient(key, channels, precoders, combiners)));
  for (const auto& [id, vec] : combiners.entries()) t.set_norm(id.first, id.second, vec.squaredNorm());
  return t;
}

GainTable reduce_channels(const ChannelSet& channels, const NoisePowers& noise) {
  const auto f = compute_precoders(channels);
  const auto v = compute_combiners(channels, f);
  return build_gain_table(channels, f, v, noise);
}

}  // namespace fdiab
