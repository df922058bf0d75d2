// SPDX-License-Identifier: Apache-2.0
#include "fdiab/channel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fdiab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSpeedOfLight = 299792458.0;
constexpr double kDeg = kPi / 180.0;

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  return a;
}

struct Heights {
  double bs;
  double ut;
};

Heights link_heights(LinkKind kind, const SystemConfig& cfg) {
  switch (kind) {
    case LinkKind::backhaul:
      return {cfg.height_gnb, cfg.height_iab};
    case LinkKind::gnb_access:
      return {cfg.height_gnb, cfg.height_ue};
    case LinkKind::iab_access:
      return {cfg.height_iab, cfg.height_ue};
    case LinkKind::ue_ue_cross:
      return {cfg.height_ue, cfg.height_ue};
  }
  throw std::invalid_argument("unknown link kind");
}

double umi_los_db(double d3d, double fc_ghz, double fc_hz, Heights h) {
  // Effective heights use the 1 m environment height of UMi.
  const double hbs = std::max(h.bs - 1.0, 0.0);
  const double hut = std::max(h.ut - 1.0, 0.0);
  const double d_bp = 4.0 * hbs * hut * fc_hz / kSpeedOfLight;
  const double pl1 = 32.4 + 21.0 * std::log10(d3d) + 20.0 * std::log10(fc_ghz);
  if (d_bp <= 0.0 || d3d <= d_bp) return pl1;
  const double dh = h.bs - h.ut;
  return 32.4 + 40.0 * std::log10(d3d) + 20.0 * std::log10(fc_ghz) - 9.5 * std::log10(d_bp * d_bp + dh * dh);
}

ArrayGeometry node_array(Node node, const Position& self, const Position& peer, const Topology& topo,
                         const SystemConfig& cfg) {
  ArrayGeometry g;
  g.spacing = cfg.element_spacing;
  switch (node) {
    case Node::gnb:
      g.rows = cfg.n_gnb.rows;
      g.cols = cfg.n_gnb.cols;
      g.orientation = topo.gnb_boresight;
      break;
    case Node::iab:
      g.rows = cfg.n_iab.rows;
      g.cols = cfg.n_iab.cols;
      g.orientation = topo.iab_boresight;
      break;
    case Node::ue:
      g.rows = cfg.n_ue.rows;
      g.cols = cfg.n_ue.cols;
      g.orientation = direction(self, peer).azimuth;
      break;
  }
  return g;
}

const Position& endpoint_position(const Endpoint& e, const Topology& topo) {
  switch (e.node) {
    case Node::gnb:
      return topo.gnb;
    case Node::iab:
      return topo.iab;
    case Node::ue:
      return topo.ue_position(e.index);
  }
  throw std::invalid_argument("unknown node kind");
}

// UEs point their array at the serving node, whatever link they are on.
ArrayGeometry endpoint_array(const Endpoint& e, const Position& peer, const Topology& topo,
                             const SystemConfig& cfg) {
  const Position& self = endpoint_position(e, topo);
  if (e.node == Node::ue) return node_array(Node::ue, self, topo.server_position(e.index), topo, cfg);
  return node_array(e.node, self, peer, topo, cfg);
}

Node parse_node(const std::string& s) {
  if (s == "gNB") return Node::gnb;
  if (s == "IAB") return Node::iab;
  if (s == "UE") return Node::ue;
  throw std::invalid_argument("unknown node in channel dump: " + s);
}

AnglePair perturb(const AnglePair& a, double daz, double del) {
  return AnglePair{wrap_angle(a.azimuth + daz), std::clamp(a.elevation + del, -kPi / 2.0, kPi / 2.0)};
}

}  // namespace

CVector array_response(const ArrayGeometry& geom, const AnglePair& local) {
  if (geom.rows < 1 || geom.cols < 1) throw std::invalid_argument("array needs at least one element");
  if (!(geom.spacing > 0.0)) throw std::invalid_argument("element spacing must be positive");
  CVector a(geom.size());
  const double u = std::sin(local.azimuth) * std::cos(local.elevation);
  const double v = std::sin(local.elevation);
  const double k = 2.0 * kPi * geom.spacing;
  for (int r = 0; r < geom.rows; ++r)
    for (int c = 0; c < geom.cols; ++c) a(r * geom.cols + c) = std::polar(1.0, k * (r * u + c * v));
  return a;
}

std::string_view to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::backhaul:
      return "backhaul";
    case LinkKind::gnb_access:
      return "gnb-access";
    case LinkKind::iab_access:
      return "iab-access";
    case LinkKind::ue_ue_cross:
      return "ue-ue-cross";
  }
  return "?";
}

LinkKind parse_link_kind(std::string_view text) {
  for (auto k : {LinkKind::backhaul, LinkKind::gnb_access, LinkKind::iab_access, LinkKind::ue_ue_cross})
    if (to_string(k) == text) return k;
  throw std::invalid_argument("unknown link kind: " + std::string(text));
}

double pathloss_db(LinkKind kind, LinkState state, double distance_m, const SystemConfig& cfg) {
  if (!(distance_m >= 1.0))
    throw std::domain_error("pathloss model needs distance >= 1 m, got " + std::to_string(distance_m));
  const double fc_ghz = cfg.carrier_frequency / 1e9;
  const Heights h = link_heights(kind, cfg);
  const double los = umi_los_db(distance_m, fc_ghz, cfg.carrier_frequency, h);
  if (state == LinkState::los) return los;
  const double nlos = 35.3 * std::log10(distance_m) + 22.4 + 21.3 * std::log10(fc_ghz) - 0.3 * (h.ut - 1.5);
  return std::max(los, nlos);
}

double los_probability(double distance_2d_m) {
  if (distance_2d_m <= 18.0) return 1.0;
  const double r = 18.0 / distance_2d_m;
  return r + std::exp(-distance_2d_m / 36.0) * (1.0 - r);
}

double sector_gain_db(double azimuth_offset, const SystemConfig& cfg) {
  const double phi = wrap_angle(azimuth_offset) / kDeg;
  const double x = phi / cfg.sector_beamwidth;
  return cfg.sector_max_gain - std::min(12.0 * x * x, cfg.sector_attenuation);
}

AnglePair direction(const Position& from, const Position& to) {
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  const double dz = to.z - from.z;
  return AnglePair{std::atan2(dy, dx), std::atan2(dz, std::hypot(dx, dy))};
}

std::vector<double> path_powers(int n_clusters, int n_paths, double large_scale_gain, double decay_db) {
  if (n_clusters < 1 || n_paths < 1) throw std::invalid_argument("cluster model needs Nc, Nl >= 1");
  std::vector<double> w(static_cast<std::size_t>(n_clusters * n_paths));
  double total = 0.0;
  for (int c = 0; c < n_clusters; ++c) {
    const double cluster = std::pow(10.0, -decay_db * c / 10.0);
    for (int l = 0; l < n_paths; ++l) {
      w[static_cast<std::size_t>(c * n_paths + l)] = cluster / n_paths;
      total += cluster / n_paths;
    }
  }
  const double scale = large_scale_gain * static_cast<double>(w.size()) / total;
  for (auto& x : w) x *= scale;
  return w;
}

LinkDescriptor describe_link(LinkKind kind, Endpoint rx, Endpoint tx, const Topology& topo, const SystemConfig& cfg,
                             RandomStream& rng) {
  LinkDescriptor d;
  d.kind = kind;
  d.rx = rx;
  d.tx = tx;
  d.rx_position = endpoint_position(rx, topo);
  d.tx_position = endpoint_position(tx, topo);
  d.rx_array = endpoint_array(rx, d.tx_position, topo, cfg);
  d.tx_array = endpoint_array(tx, d.rx_position, topo, cfg);
  d.cluster_decay_db = cfg.cluster_decay;
  d.azimuth_spread = cfg.azimuth_spread * kDeg;
  d.elevation_spread = cfg.elevation_spread * kDeg;
  d.intra_cluster_spread = cfg.intra_cluster_spread * kDeg;

  double sector_db = 0.0;
  switch (kind) {
    case LinkKind::backhaul:
      d.state = LinkState::los;
      d.n_clusters = 1;
      d.n_paths = 1;
      break;
    case LinkKind::gnb_access:
    case LinkKind::iab_access: {
      d.state = rng.bernoulli(los_probability(distance_2d(d.rx_position, d.tx_position))) ? LinkState::los
                                                                                          : LinkState::nlos;
      d.n_clusters = cfg.n_clusters;
      d.n_paths = cfg.n_paths;
      const double offset = direction(d.rx_position, d.tx_position).azimuth - d.rx_array.orientation;
      sector_db = sector_gain_db(offset, cfg);
      break;
    }
    case LinkKind::ue_ue_cross:
      d.state = LinkState::nlos;
      d.n_clusters = cfg.n_clusters;
      d.n_paths = cfg.n_paths;
      break;
  }

  const double dist = std::max(distance_3d(d.rx_position, d.tx_position), 1.0);
  double shadow_db = 0.0;
  if (cfg.shadowing) shadow_db = rng.normal(0.0, d.state == LinkState::los ? cfg.shadowing_los : cfg.shadowing_nlos);
  d.large_scale_gain = db_to_linear(-pathloss_db(kind, d.state, dist, cfg) + sector_db - shadow_db);
  return d;
}

std::vector<PathComponent> draw_paths(const LinkDescriptor& link, RandomStream& rng) {
  const auto powers = path_powers(link.n_clusters, link.n_paths, link.large_scale_gain, link.cluster_decay_db);
  const AnglePair los_aod = direction(link.tx_position, link.rx_position);
  const AnglePair los_aoa = direction(link.rx_position, link.tx_position);
  std::vector<PathComponent> paths;
  paths.reserve(powers.size());
  for (int c = 0; c < link.n_clusters; ++c) {
    AnglePair cd = los_aod;
    AnglePair ca = los_aoa;
    if (c > 0) {
      cd = perturb(los_aod, rng.laplace(link.azimuth_spread), rng.laplace(link.elevation_spread));
      ca = perturb(los_aoa, rng.laplace(link.azimuth_spread), rng.laplace(link.elevation_spread));
    }
    for (int l = 0; l < link.n_paths; ++l) {
      PathComponent p;
      p.power = powers[static_cast<std::size_t>(c * link.n_paths + l)];
      if (c == 0 && l == 0) {
        p.aod = cd;
        p.aoa = ca;
      } else {
        const double s = link.intra_cluster_spread;
        p.aod = perturb(cd, rng.laplace(s), rng.laplace(s));
        p.aoa = perturb(ca, rng.laplace(s), rng.laplace(s));
      }
      p.amplitude = rng.complex_normal(p.power);
      paths.push_back(p);
    }
  }
  return paths;
}

ChannelMatrix synthesize_channel(const LinkDescriptor& link, std::span<const PathComponent> paths) {
  if (paths.empty()) throw std::invalid_argument("channel needs at least one path");
  const int nr = link.rx_array.size();
  const int nt = link.tx_array.size();
  ChannelMatrix h;
  h.kind = link.kind;
  h.rx = link.rx;
  h.tx = link.tx;
  h.entries = CMatrix::Zero(nr, nt);
  for (const auto& p : paths) {
    const AnglePair aoa{p.aoa.azimuth - link.rx_array.orientation, p.aoa.elevation};
    const AnglePair aod{p.aod.azimuth - link.tx_array.orientation, p.aod.elevation};
    const CVector ar = array_response(link.rx_array, aoa) / std::sqrt(static_cast<double>(nr));
    const CVector at = array_response(link.tx_array, aod) / std::sqrt(static_cast<double>(nt));
    h.entries.noalias() += p.amplitude * ar * at.transpose();
  }
  h.entries *= std::sqrt(static_cast<double>(nr) * nt / static_cast<double>(paths.size()));
  return h;
}

ChannelMatrix draw_channel(const LinkDescriptor& link, RandomStream& rng) {
  const auto paths = draw_paths(link, rng);
  return synthesize_channel(link, paths);
}

const ChannelMatrix& ChannelSet::link(int k) const {
  if (k == 0) return backhaul;
  if (k < 1 || k > static_cast<int>(access.size()))
    throw std::out_of_range("no access channel for UE " + std::to_string(k));
  return access[static_cast<std::size_t>(k - 1)];
}

const ChannelMatrix& ChannelSet::cross_link(int i, int k) const {
  if (!sets.is_iab_user(i) || !sets.is_gnb_user(k))
    throw std::out_of_range("no cross channel H_{" + std::to_string(i) + "," + std::to_string(k) + "}");
  return cross[static_cast<std::size_t>((i - sets.k_gnb - 1) * sets.k_gnb + (k - 1))];
}

ChannelSet build_channel_set(const Topology& topo, const SystemConfig& cfg, RandomStream& rng) {
  ChannelSet set;
  set.sets = topo.sets;
  set.backhaul = draw_channel(
      describe_link(LinkKind::backhaul, {Node::gnb, 0}, {Node::iab, 0}, topo, cfg, rng), rng);
  for (int k = 1; k <= topo.sets.total(); ++k) {
    const bool gnb = topo.sets.is_gnb_user(k);
    const auto kind = gnb ? LinkKind::gnb_access : LinkKind::iab_access;
    const Endpoint bs{gnb ? Node::gnb : Node::iab, 0};
    set.access.push_back(draw_channel(describe_link(kind, bs, {Node::ue, k}, topo, cfg, rng), rng));
  }
  for (int i : topo.sets.iab_users())
    for (int k : topo.sets.gnb_users())
      set.cross.push_back(
          draw_channel(describe_link(LinkKind::ue_ue_cross, {Node::ue, k}, {Node::ue, i}, topo, cfg, rng), rng));
  return set;
}

void write_channel_dump(std::ostream& os, const ChannelSet& channels) {
  os << "fdiab-channels 1\n";
  os << "sets " << channels.sets.k_gnb << ' ' << channels.sets.k_iab << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto record = [&](const ChannelMatrix& h) {
    os << "link " << to_string(h.kind) << ' ' << to_string(h.rx.node) << ' ' << h.rx.index << ' '
       << to_string(h.tx.node) << ' ' << h.tx.index << ' ' << h.entries.rows() << ' ' << h.entries.cols() << '\n';
    for (Eigen::Index r = 0; r < h.entries.rows(); ++r)
      for (Eigen::Index c = 0; c < h.entries.cols(); ++c) {
        if (r + c > 0) os << ' ';
        os << h.entries(r, c).real() << ' ' << h.entries(r, c).imag();
      }
    os << '\n';
  };
  record(channels.backhaul);
  for (const auto& h : channels.access) record(h);
  for (const auto& h : channels.cross) record(h);
}

ChannelSet read_channel_dump(std::istream& is) {
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "fdiab-channels" || version != 1)
    throw std::runtime_error("not a channel dump");
  ChannelSet set;
  if (!(is >> tag >> set.sets.k_gnb >> set.sets.k_iab) || tag != "sets")
    throw std::runtime_error("channel dump: missing sets line");
  set.access.resize(static_cast<std::size_t>(set.sets.total()));
  set.cross.resize(static_cast<std::size_t>(set.sets.k_gnb * set.sets.k_iab));
  std::size_t seen = 0;
  std::string kind, rxn, txn;
  ChannelMatrix h;
  long rows = 0, cols = 0;
  while (is >> tag) {
    if (tag != "link") throw std::runtime_error("channel dump: unexpected token " + tag);
    if (!(is >> kind >> rxn >> h.rx.index >> txn >> h.tx.index >> rows >> cols) || rows < 1 || cols < 1)
      throw std::runtime_error("channel dump: malformed link header");
    h.kind = parse_link_kind(kind);
    h.rx.node = parse_node(rxn);
    h.tx.node = parse_node(txn);
    h.entries.resize(rows, cols);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) {
        double re = 0.0, im = 0.0;
        if (!(is >> re >> im)) throw std::runtime_error("channel dump: truncated matrix");
        h.entries(r, c) = {re, im};
      }
    switch (h.kind) {
      case LinkKind::backhaul:
        set.backhaul = h;
        break;
      case LinkKind::gnb_access:
      case LinkKind::iab_access:
        if (h.tx.index < 1 || h.tx.index > set.sets.total())
          throw std::runtime_error("channel dump: access link for unknown UE");
        set.access[static_cast<std::size_t>(h.tx.index - 1)] = h;
        break;
      case LinkKind::ue_ue_cross: {
        if (!set.sets.is_iab_user(h.tx.index) || !set.sets.is_gnb_user(h.rx.index))
          throw std::runtime_error("channel dump: cross link with bad endpoints");
        const auto slot = (h.tx.index - set.sets.k_gnb - 1) * set.sets.k_gnb + (h.rx.index - 1);
        set.cross[static_cast<std::size_t>(slot)] = h;
        break;
      }
    }
    ++seen;
  }
  if (seen != set.count()) throw std::runtime_error("channel dump: expected " + std::to_string(set.count()) +
                                                    " links, found " + std::to_string(seen));
  return set;
}

}  // namespace fdiab
