// SPDX-License-Identifier: Apache-2.0
#include "fdiab/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "fdiab/beamforming.hpp"
#include "fdiab/channel.hpp"
#include "fdiab/topology.hpp"

namespace fdiab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

TrialRecord make_record(const SystemConfig& cfg, int trial, const AllocationResult& a, const GainTable& g) {
  TrialRecord r;
  r.k_iab = cfg.k_iab;
  r.trial = trial;
  r.strategy = a.strategy;
  r.status = a.status;
  r.verified = a.verification.ok();
  r.gp_objective = a.gp_objective;
  r.message = a.message;

  const auto se = se_report(g, a.allocation);
  r.utility = strategy_utility(a.strategy == Strategy::uniform ? Strategy::max_sum : a.strategy, se);
  for (std::size_t n = 0; n < 4; ++n) {
    r.group_se[n] = se.group_sum[n];
    r.min_sinr[n] = se.min_sinr[n];
  }
  r.backhaul_ul_se = se.backhaul_ul_se;
  r.backhaul_dl_se = se.backhaul_dl_se;

  std::vector<double> dl = se.of(LinkGroup::dl_iab);
  std::vector<double> ul = se.of(LinkGroup::ul_iab);
  if (a.strategy == Strategy::uniform && cfg.cap_uniform) {
    const auto c = cap_iab_se(se);
    r.capped = c.capped;
    dl = c.dl;
    ul = c.ul;
    r.group_se[static_cast<std::size_t>(LinkGroup::dl_iab)] = c.dl_sum;
    r.group_se[static_cast<std::size_t>(LinkGroup::ul_iab)] = c.ul_sum;
  }
  r.gnb_sum_se = r.group_se[0] + r.group_se[1];
  r.iab_sum_se = r.group_se[2] + r.group_se[3];
  r.total_sum_se = r.gnb_sum_se + r.iab_sum_se;
  r.min_iab_ue_se = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t m = 0; m < dl.size(); ++m) {
    const double v = dl[m] + ul[m];
    r.min_iab_ue_se = std::isnan(r.min_iab_ue_se) ? v : std::min(r.min_iab_ue_se, v);
  }
  return r;
}

}  // namespace

GainTable trial_gains(const SystemConfig& cfg, int trial_index) {
  auto rng = RandomStream::derive(cfg.seed, {static_cast<std::uint64_t>(cfg.k_iab),
                                             static_cast<std::uint64_t>(trial_index)});
  const auto topo = generate_topology(cfg, rng);
  const auto channels = build_channel_set(topo, cfg, rng);
  return reduce_channels(channels, cfg.noise_powers());
}

std::vector<TrialRecord> run_trial(const SystemConfig& cfg, int trial_index, const std::vector<Strategy>& strategies,
                                   const TrialOptions& opt) {
  const auto gains = trial_gains(cfg, trial_index);
  std::vector<TrialRecord> out;
  out.reserve(strategies.size());
  for (auto s : strategies) {
    const auto t0 = Clock::now();
    AllocationOptions ao;
    ao.keep_dump = opt.dump_dir.has_value() && s != Strategy::uniform;
    const auto a = solve_allocation(s, gains, cfg, ao);
    auto rec = make_record(cfg, trial_index, a, gains);
    rec.wall_seconds = seconds_since(t0);
    if (ao.keep_dump) {
      const auto path = *opt.dump_dir / fmt::format("gp_ktilde{}_trial{}_{}.gp", cfg.k_iab, trial_index, to_string(s));
      std::ofstream os(path);
      if (!os) throw std::runtime_error("cannot write " + path.string());
      os << a.gp_dump;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

double EcdfSeries::evaluate(double x) const {
  if (values.empty()) return 0.0;
  const auto it = std::upper_bound(values.begin(), values.end(), x);
  if (it == values.begin()) return 0.0;
  return probs[static_cast<std::size_t>(it - values.begin()) - 1];
}

EcdfSeries make_ecdf(std::string metric, std::string strategy, std::string group, std::vector<double> samples) {
  EcdfSeries e{std::move(metric), std::move(strategy), std::move(group), std::move(samples), {}};
  std::sort(e.values.begin(), e.values.end());
  const double n = static_cast<double>(e.values.size());
  for (std::size_t i = 0; i < e.values.size(); ++i) e.probs.push_back(static_cast<double>(i + 1) / n);
  return e;
}

SweepPoint summarize(int k_iab, std::string strategy, const std::vector<double>& samples) {
  SweepPoint p;
  p.k_iab = k_iab;
  p.strategy = std::move(strategy);
  p.samples = static_cast<int>(samples.size());
  if (samples.empty()) {
    p.mean = p.ci_low = p.ci_high = std::numeric_limits<double>::quiet_NaN();
    return p;
  }
  const double n = static_cast<double>(samples.size());
  p.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double half = 0.0;
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - p.mean) * (x - p.mean);
    half = 1.959963984540054 * std::sqrt(ss / (n - 1.0) / n);
  }
  p.ci_low = p.mean - half;
  p.ci_high = p.mean + half;
  return p;
}

std::vector<const TrialRecord*> CampaignResult::select(int k_iab, Strategy s) const {
  std::vector<const TrialRecord*> out;
  for (const auto& r : records)
    if (r.k_iab == k_iab && r.strategy == s) out.push_back(&r);
  return out;
}

namespace {

std::vector<EcdfSeries> build_ecdfs(const CampaignResult& res, int k_iab) {
  std::vector<EcdfSeries> out;
  for (auto s : res.options.strategies) {
    const auto recs = res.select(k_iab, s);
    const std::string name(to_string(s));
    auto series = [&](const std::string& metric, const std::string& group, auto get) {
      std::vector<double> v;
      for (const auto* r : recs) {
        if (!r->usable()) continue;
        const double x = get(*r);
        if (std::isfinite(x)) v.push_back(x);
      }
      if (!v.empty()) out.push_back(make_ecdf(metric, name, group, std::move(v)));
    };
    series("sum_se", "total", [](const TrialRecord& r) { return r.total_sum_se; });
    series("sum_se", "gnb", [](const TrialRecord& r) { return r.gnb_sum_se; });
    series("sum_se", "iab", [](const TrialRecord& r) { return r.iab_sum_se; });
    for (auto grp : kLinkGroups) {
      const auto n = static_cast<std::size_t>(grp);
      series("sum_se", std::string(to_string(grp)), [n](const TrialRecord& r) { return r.group_se[n]; });
    }
    for (auto grp : kLinkGroups) {
      const auto n = static_cast<std::size_t>(grp);
      series("min_sinr", std::string(to_string(grp)), [n](const TrialRecord& r) { return r.min_sinr[n]; });
    }
    series("min_ue_se", "iab", [](const TrialRecord& r) { return r.min_iab_ue_se; });
    series("backhaul_se", "ul", [](const TrialRecord& r) { return r.backhaul_ul_se; });
    series("backhaul_se", "dl", [](const TrialRecord& r) { return r.backhaul_dl_se; });
  }
  return out;
}

}  // namespace

CampaignResult run_campaign(const SystemConfig& cfg, const CampaignOptions& opt) {
  if (opt.trials < 1) throw ConfigError("trial count must be at least 1");
  CampaignResult res;
  res.config = cfg;
  res.options = opt;
  if (res.options.k_iab_values.empty()) res.options.k_iab_values = {cfg.k_iab};
  const auto& ks = res.options.k_iab_values;

  std::vector<SystemConfig> cfgs;
  for (int k : ks) {
    SystemConfig c = cfg;
    c.k_iab = k;
    const auto v = validate_config(c);
    if (!v.ok()) throw ConfigError(fmt::format("invalid configuration at k_iab={}: {}", k, v.violations.front()));
    cfgs.push_back(c);
  }

  const auto t0 = Clock::now();
  const std::size_t jobs = ks.size() * static_cast<std::size_t>(opt.trials);
  std::vector<std::vector<TrialRecord>> slots(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  TrialOptions to{opt.dump_dir};

  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      const auto& c = cfgs[j / static_cast<std::size_t>(opt.trials)];
      const int trial = static_cast<int>(j % static_cast<std::size_t>(opt.trials));
      try {
        slots[j] = run_trial(c, trial, res.options.strategies, to);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  int threads = opt.threads > 0 ? opt.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), jobs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& s : slots)
    for (auto& r : s) res.records.push_back(std::move(r));
  res.wall_seconds = seconds_since(t0);

  for (int k : ks) {
    res.ecdf.push_back(build_ecdfs(res, k));
    for (auto s : res.options.strategies) {
      std::vector<double> total, iab;
      for (const auto* r : res.select(k, s)) {
        if (!r->usable()) continue;
        total.push_back(r->total_sum_se);
        iab.push_back(r->iab_sum_se);
      }
      res.sweep.push_back(summarize(k, std::string(to_string(s)), total));
      res.sweep_iab.push_back(summarize(k, std::string(to_string(s)), iab));
    }
  }
  return res;
}

}  // namespace fdiab
