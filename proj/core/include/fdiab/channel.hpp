// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fdiab/config.hpp"
#include "fdiab/random.hpp"
#include "fdiab/topology.hpp"
#include "fdiab/types.hpp"

namespace fdiab {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Uniform planar array. Element (r, c) sits at (r, c) * spacing wavelengths
/// in the array's horizontal/vertical plane; boresight is `orientation`
/// (azimuth, radians) in the global frame.
struct ArrayGeometry {
  int rows = 1;
  int cols = 1;
  double spacing = 0.5;
  double orientation = 0.0;
  int size() const { return rows * cols; }
};

/// Azimuth/elevation pair in radians.
struct AnglePair {
  double azimuth = 0.0;
  double elevation = 0.0;
};

/// Steering vector for angles measured from the array boresight. Entries are
/// unit modulus and ordered row-major (index r * cols + c); element (0,0) has
/// zero phase.
CVector array_response(const ArrayGeometry& geom, const AnglePair& local);

enum class LinkKind { backhaul, gnb_access, iab_access, ue_ue_cross };
enum class LinkState { los, nlos };

std::string_view to_string(LinkKind kind);
LinkKind parse_link_kind(std::string_view text);

/// 3GPP TR 38.901 UMi street-canyon pathloss in dB at the configured carrier.
/// `distance_m` is the 3-D distance; node heights come from the link kind.
/// Throws std::domain_error below 1 m.
double pathloss_db(LinkKind kind, LinkState state, double distance_m, const SystemConfig& cfg);

/// UMi LoS probability for a 2-D distance.
double los_probability(double distance_2d_m);

/// Parabolic sector element gain (dBi) at an azimuth offset from boresight.
double sector_gain_db(double azimuth_offset, const SystemConfig& cfg);

/// A link endpoint: gNB and IAB node use index 0, UEs their global index.
struct Endpoint {
  Node node = Node::gnb;
  int index = 0;
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

/// One scattering path of the cluster model.
struct PathComponent {
  std::complex<double> amplitude;  ///< alpha ~ CN(0, power)
  double power = 0.0;              ///< Omega, linear
  AnglePair aod;                   ///< global-frame departure angles at the transmitter
  AnglePair aoa;                   ///< global-frame arrival angles at the receiver
};

/// Everything needed to draw one link realisation.
struct LinkDescriptor {
  LinkKind kind = LinkKind::gnb_access;
  LinkState state = LinkState::nlos;
  Endpoint rx;
  Endpoint tx;
  ArrayGeometry rx_array;
  ArrayGeometry tx_array;
  Position rx_position;
  Position tx_position;
  int n_clusters = 1;
  int n_paths = 1;
  double large_scale_gain = 1.0;  ///< linear: -pathloss + sector gain - shadowing
  double cluster_decay_db = 3.0;
  double azimuth_spread = 0.0;    ///< radians
  double elevation_spread = 0.0;  ///< radians
  double intra_cluster_spread = 0.0;
};

/// Channel realisation H (receiver antennas x transmitter antennas).
struct ChannelMatrix {
  CMatrix entries;
  LinkKind kind = LinkKind::gnb_access;
  Endpoint rx;
  Endpoint tx;
};

/// Global azimuth/elevation of the direction from `from` towards `to`.
AnglePair direction(const Position& from, const Position& to);

/// Per-path powers: clusters decay by `decay_db` each, paths split a cluster
/// evenly, and the mean per-path power equals `large_scale_gain` (so
/// E||H||_F^2 = Nt * Nr * large_scale_gain for every cluster order).
std::vector<double> path_powers(int n_clusters, int n_paths, double large_scale_gain, double decay_db);

/// Resolves geometry, LoS state, pathloss, sector gain and shadowing.
LinkDescriptor describe_link(LinkKind kind, Endpoint rx, Endpoint tx, const Topology& topo,
                             const SystemConfig& cfg, RandomStream& rng);

/// Draws angles and amplitudes. The first path follows the geometric
/// line-of-sight direction; the others scatter around it.
std::vector<PathComponent> draw_paths(const LinkDescriptor& link, RandomStream& rng);

/// H = sqrt(Nt Nr / (Nc Nl)) * sum alpha * a_r(theta) a_t(phi)^T with
/// unit-norm steering vectors.
ChannelMatrix synthesize_channel(const LinkDescriptor& link, std::span<const PathComponent> paths);

ChannelMatrix draw_channel(const LinkDescriptor& link, RandomStream& rng);

/// All matrices of one drop.
///
///   backhaul       H_0      gNB x IAB
///   access[k-1]    H_k      gNB x UE (k in K) or IAB x UE (k in I)
///   cross          H_{i,k}  UE k x UE i, for i in I and k in K
///
/// The same matrix serves both directions (TDD reciprocity).
struct ChannelSet {
  UserSets sets;
  ChannelMatrix backhaul;
  std::vector<ChannelMatrix> access;
  std::vector<ChannelMatrix> cross;

  /// H_0 for k = 0, otherwise the access matrix of UE k.
  const ChannelMatrix& link(int k) const;
  const ChannelMatrix& cross_link(int i, int k) const;
  std::size_t count() const { return 1 + access.size() + cross.size(); }
};

ChannelSet build_channel_set(const Topology& topo, const SystemConfig& cfg, RandomStream& rng);

/// Textual dump, one record per link: a header line
/// `link <kind> <rx-node> <rx-index> <tx-node> <tx-index> <rows> <cols>`
/// followed by one line of row-major `re im` pairs at full precision.
void write_channel_dump(std::ostream& os, const ChannelSet& channels);
ChannelSet read_channel_dump(std::istream& is);

}  // namespace fdiab
