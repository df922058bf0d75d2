// SPDX-License-Identifier: Apache-2.0
// Reference implementations used only by the tests. None of them call the
// code paths they are checking against.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fdiab/channel.hpp"
#include "fdiab/config.hpp"
#include "fdiab/gp.hpp"
#include "fdiab/link_metrics.hpp"

namespace fdiab::oracle {

// ---------------------------------------------------------------- GP oracles

/// Random GP in n variables on the box [0.1, 10]^n: minimise a posynomial
/// subject to m posynomial constraints, each scaled so that x = 1 is
/// strictly inside.
inline gp::GPProblem random_gp(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> coef(0.2, 2.0);
  std::uniform_int_distribution<int> expo(-2, 2);
  std::uniform_int_distribution<int> terms(1, 3);
  gp::GPProblem p;
  for (int v = 0; v < n; ++v) p.add_variable("x" + std::to_string(v), 0.1, 10.0);
  auto random_term = [&] {
    std::vector<std::pair<gp::VarId, double>> e;
    for (int v = 0; v < n; ++v) {
      const int a = expo(rng);
      if (a != 0) e.emplace_back(v, 0.5 * a);
    }
    return gp::Monomial(coef(rng), e);
  };
  std::vector<gp::Monomial> obj;
  // x^-1 terms on every variable keep the objective from running to the box.
  for (int v = 0; v < n; ++v) obj.push_back(gp::Monomial(coef(rng), {{v, -1.0}}));
  for (int t = terms(rng); t > 0; --t) obj.push_back(random_term());
  p.minimize(gp::Posynomial(obj));
  std::uniform_real_distribution<double> slack(0.3, 0.9);
  for (int c = 0; c < m; ++c) {
    std::vector<gp::Monomial> ts;
    for (int t = terms(rng); t > 0; --t) ts.push_back(random_term());
    gp::Posynomial q(ts);
    const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
    const double at_one = q.evaluate(ones);
    p.add_leq(q * gp::Monomial(slack(rng) / at_one), "c" + std::to_string(c));
  }
  return p;
}

/// Exhaustive search on a log grid over the variable boxes, refined around
/// the incumbent. Returns the smallest feasible objective (minimise sense).
inline double grid_search(const gp::GPProblem& p, int points = 25, int levels = 14, double shrink = 0.35) {
  const int n = static_cast<int>(p.size());
  std::vector<double> lo(n), hi(n);
  for (int v = 0; v < n; ++v) {
    lo[v] = std::log(p.variables()[v].lower);
    hi[v] = std::log(p.variables()[v].upper);
  }
  std::vector<double> best_y(n, 0.0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> x(n);
  std::vector<int> idx(n);
  auto feasible = [&](const std::vector<double>& pt) {
    for (const auto& c : p.constraints())
      if (c.lhs.evaluate(pt) > 1.0) return false;
    return true;
  };
  for (int level = 0; level < levels; ++level) {
    std::vector<double> step(n);
    for (int v = 0; v < n; ++v) step[v] = (hi[v] - lo[v]) / (points - 1);
    std::fill(idx.begin(), idx.end(), 0);
    for (;;) {
      for (int v = 0; v < n; ++v) x[v] = std::exp(lo[v] + idx[v] * step[v]);
      if (feasible(x)) {
        const double f = p.objective().evaluate(x);
        if (f < best) {
          best = f;
          for (int v = 0; v < n; ++v) best_y[v] = std::log(x[v]);
        }
      }
      int v = 0;
      while (v < n && ++idx[v] == points) idx[v++] = 0;
      if (v == n) break;
    }
    for (int v = 0; v < n; ++v) {
      const double half = 0.5 * shrink * (hi[v] - lo[v]);
      const double blo = std::log(p.variables()[v].lower);
      const double bhi = std::log(p.variables()[v].upper);
      lo[v] = std::max(blo, best_y[v] - half);
      hi[v] = std::min(bhi, best_y[v] + half);
    }
  }
  return best;
}

// ------------------------------------------------------- matrix-level SINRs

struct Beams {
  std::vector<CVector> f_bs;  ///< serving base station precoder, per UE (index k-1)
  std::vector<CVector> f_ue;
  std::vector<CVector> v_bs;
  std::vector<CVector> v_ue;
  CVector f_gnb0, f_iab0, v_gnb0, v_iab0;
};

/// Dominant singular vectors and MRC combiners straight from an SVD.
inline Beams svd_beams(const ChannelSet& ch) {
  Beams b;
  auto top = [](const CMatrix& h) {
    Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return std::pair<CVector, CVector>{svd.matrixU().col(0), svd.matrixV().col(0)};
  };
  const auto [u0, w0] = top(ch.backhaul.entries);
  b.f_gnb0 = u0;
  b.f_iab0 = w0;
  b.v_iab0 = ch.backhaul.entries.adjoint() * u0;
  b.v_gnb0 = ch.backhaul.entries * w0;
  for (int k = 1; k <= ch.sets.total(); ++k) {
    const CMatrix& h = ch.access[static_cast<std::size_t>(k - 1)].entries;
    const auto [u, w] = top(h);
    b.f_bs.push_back(u);
    b.f_ue.push_back(w);
    b.v_bs.push_back(h * w);
    b.v_ue.push_back(h.adjoint() * u);
  }
  return b;
}

struct MatrixSinrs {
  std::array<std::vector<double>, 4> sinr;  ///< LinkGroup order
  double backhaul_ul = 0.0;
  double backhaul_dl = 0.0;
};

/// SINRs from |v^H C f|^2 with C the physical channel from transmitter to
/// receiver: UE->BS H_k, BS->UE H_k^H, IAB->gNB H_0, gNB->IAB H_0^H,
/// IAB UE i -> gNB UE k H_{i,k} and its adjoint the other way.
inline MatrixSinrs matrix_sinrs(const ChannelSet& ch, const Beams& b, const NoisePowers& noise,
                                const PowerAllocation& p) {
  const auto& s = ch.sets;
  const CMatrix& h0 = ch.backhaul.entries;
  auto H = [&](int k) -> const CMatrix& { return ch.access[static_cast<std::size_t>(k - 1)].entries; };
  auto X = [&](int i, int k) -> const CMatrix& {
    return ch.cross[static_cast<std::size_t>((i - s.k_gnb - 1) * s.k_gnb + (k - 1))].entries;
  };
  auto pw = [](const CVector& v, const CMatrix& c, const CVector& f) { return std::norm(v.dot(c * f)); };
  const auto& fb = b.f_bs;
  const auto& fu = b.f_ue;
  auto bs = [&](int k) -> const CVector& { return fb[static_cast<std::size_t>(k - 1)]; };
  auto ue = [&](int k) -> const CVector& { return fu[static_cast<std::size_t>(k - 1)]; };
  auto vbs = [&](int k) -> const CVector& { return b.v_bs[static_cast<std::size_t>(k - 1)]; };
  auto vue = [&](int k) -> const CVector& { return b.v_ue[static_cast<std::size_t>(k - 1)]; };
  const auto K = s.gnb_users();
  const auto I = s.iab_users();
  MatrixSinrs r;

  // gNB receiving: its UEs' uplink and the IAB backhaul stream.
  auto gnb_rx = [&](const CVector& v, int want) {
    double sig = 0.0, in = 0.0;
    const double x0 = p.at(Node::iab, 0) * pw(v, h0, b.f_iab0);
    (want == 0 ? sig : in) += x0;
    for (int i : I) in += p.at(Node::iab, i) * pw(v, h0, bs(i));
    for (int j : K) (j == want ? sig : in) += p.at(Node::ue, j) * pw(v, H(j), ue(j));
    return sig / (in + noise.gnb * v.squaredNorm());
  };
  for (int k : K) r.sinr[0].push_back(gnb_rx(vbs(k), k));
  r.backhaul_ul = gnb_rx(b.v_gnb0, 0);

  // IAB node receiving: its UEs' uplink and the gNB backhaul stream.
  auto iab_rx = [&](const CVector& v, int want) {
    double sig = 0.0, in = 0.0;
    const double x0 = p.at(Node::gnb, 0) * pw(v, h0.adjoint(), b.f_gnb0);
    (want == 0 ? sig : in) += x0;
    for (int k : K) in += p.at(Node::gnb, k) * pw(v, h0.adjoint(), bs(k));
    for (int l : I) (l == want ? sig : in) += p.at(Node::ue, l) * pw(v, H(l), ue(l));
    return sig / (in + noise.iab * v.squaredNorm());
  };
  for (int i : I) r.sinr[2].push_back(iab_rx(vbs(i), i));
  r.backhaul_dl = iab_rx(b.v_iab0, 0);

  // gNB UEs: all gNB streams over H_k^H, IAB UEs' uplink over H_{i,k}.
  for (int k : K) {
    const CVector& v = vue(k);
    double sig = p.at(Node::gnb, k) * pw(v, H(k).adjoint(), bs(k));
    double in = p.at(Node::gnb, 0) * pw(v, H(k).adjoint(), b.f_gnb0);
    for (int j : K)
      if (j != k) in += p.at(Node::gnb, j) * pw(v, H(k).adjoint(), bs(j));
    for (int i : I) in += p.at(Node::ue, i) * pw(v, X(i, k), ue(i));
    r.sinr[1].push_back(sig / (in + noise.ue * v.squaredNorm()));
  }
  // IAB UEs: all IAB streams over H_i^H, gNB UEs' uplink over H_{i,k}^H.
  for (int i : I) {
    const CVector& v = vue(i);
    double sig = p.at(Node::iab, i) * pw(v, H(i).adjoint(), bs(i));
    double in = p.at(Node::iab, 0) * pw(v, H(i).adjoint(), b.f_iab0);
    for (int l : I)
      if (l != i) in += p.at(Node::iab, l) * pw(v, H(i).adjoint(), bs(l));
    for (int k : K) in += p.at(Node::ue, k) * pw(v, X(i, k).adjoint(), ue(k));
    r.sinr[3].push_back(sig / (in + noise.ue * v.squaredNorm()));
  }
  return r;
}

inline double relative_error(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

/// Random allocation inside the budgets, log-uniform over six decades.
inline PowerAllocation random_powers(const SystemConfig& cfg, const UserSets& sets, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dec(-6.0, 0.0);
  PowerAllocation p(sets);
  auto shared = [&](std::vector<double>& v, double budget) {
    double sum = 0.0;
    for (auto& x : v) sum += (x = std::pow(10.0, dec(rng)));
    const double scale = budget * std::uniform_real_distribution<double>(0.1, 1.0)(rng) / sum;
    for (auto& x : v) x *= scale;
  };
  shared(p.gnb, cfg.p_max_gnb_watt());
  shared(p.iab, cfg.p_max_iab_watt());
  for (auto& x : p.ue) x = cfg.p_max_ue_watt() * std::pow(10.0, dec(rng));
  return p;
}

}  // namespace fdiab::oracle
