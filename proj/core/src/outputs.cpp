// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "fdiab/montecarlo.hpp"

#ifndef FDIAB_GIT_DESCRIBE
#define FDIAB_GIT_DESCRIBE "unknown"
#endif

namespace fdiab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view build_description() { return FDIAB_GIT_DESCRIBE; }

OutputFormat parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::csv;
  if (text == "json") return OutputFormat::json;
  throw std::invalid_argument(fmt::format("unknown output format '{}'", text));
}

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

void finish(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) throw std::runtime_error("error while writing " + path.string());
}

json metadata(const CampaignResult& r) {
  json m;
  m["tool"] = "fdiab";
  m["version"] = std::string(build_description());
  m["seed"] = r.config.seed;
  m["trials"] = r.options.trials;
  m["ktilde"] = r.options.k_iab_values;
  json strategies = json::array();
  for (auto s : r.options.strategies) strategies.push_back(std::string(to_string(s)));
  m["strategies"] = strategies;
  m["config"] = json::parse(config_to_json(r.config));
  json status = json::object();
  for (const auto& rec : r.records) {
    const std::string key(to_string(rec.status));
    status[key] = status.value(key, 0) + 1;
  }
  m["status_counts"] = status;
  return m;
}

json sweep_json(const std::vector<SweepPoint>& pts) {
  json a = json::array();
  for (const auto& p : pts)
    a.push_back({{"ktilde", p.k_iab}, {"strategy", p.strategy}, {"mean", p.mean}, {"ci_low", p.ci_low},
                 {"ci_high", p.ci_high}, {"samples", p.samples}});
  return a;
}

void write_sweep(const fs::path& path, const std::vector<SweepPoint>& pts) {
  auto os = open_out(path);
  os << "ktilde,strategy,mean,ci_low,ci_high\n";
  for (const auto& p : pts)
    os << p.k_iab << ',' << p.strategy << ',' << num(p.mean) << ',' << num(p.ci_low) << ',' << num(p.ci_high) << '\n';
  finish(os, path);
}

}  // namespace

std::vector<fs::path> write_outputs(const CampaignResult& result, const fs::path& dir, OutputFormat format) {
  if (result.options.strategies.empty() || result.records.empty()) throw std::invalid_argument("nothing to write");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", dir.string(), ec.message()));

  std::vector<fs::path> written;
  const auto& ks = result.options.k_iab_values;
  if (format == OutputFormat::json) {
    json doc;
    doc["metadata"] = metadata(result);
    json ecdf = json::array();
    for (std::size_t n = 0; n < ks.size(); ++n)
      for (const auto& e : result.ecdf[n])
        ecdf.push_back({{"ktilde", ks[n]}, {"metric", e.metric}, {"strategy", e.strategy}, {"group", e.group},
                        {"values", e.values}, {"probs", e.probs}});
    doc["ecdf"] = ecdf;
    doc["sweep"] = sweep_json(result.sweep);
    doc["sweep_iab"] = sweep_json(result.sweep_iab);
    const auto path = dir / "results.json";
    auto os = open_out(path);
    os << doc.dump(2) << '\n';
    finish(os, path);
    written.push_back(path);
    return written;
  }

  for (std::size_t n = 0; n < ks.size(); ++n) {
    const auto path = dir / fmt::format("ecdf_ktilde{}.csv", ks[n]);
    auto os = open_out(path);
    os << "metric,strategy,group,value,prob\n";
    for (const auto& e : result.ecdf[n])
      for (std::size_t i = 0; i < e.values.size(); ++i)
        os << e.metric << ',' << e.strategy << ',' << e.group << ',' << num(e.values[i]) << ',' << num(e.probs[i])
           << '\n';
    finish(os, path);
    written.push_back(path);
  }
  write_sweep(dir / "sweep.csv", result.sweep);
  written.push_back(dir / "sweep.csv");
  write_sweep(dir / "sweep_iab.csv", result.sweep_iab);
  written.push_back(dir / "sweep_iab.csv");

  {
    const auto path = dir / "trials.csv";
    auto os = open_out(path);
    os << "ktilde,trial,strategy,status,total_sum_se,gnb_sum_se,iab_sum_se,min_iab_ue_se,backhaul_ul_se,"
          "backhaul_dl_se,capped,verified,utility,gp_objective\n";
    for (const auto& r : result.records)
      os << r.k_iab << ',' << r.trial << ',' << to_string(r.strategy) << ',' << to_string(r.status) << ','
         << num(r.total_sum_se) << ',' << num(r.gnb_sum_se) << ',' << num(r.iab_sum_se) << ','
         << num(r.min_iab_ue_se) << ',' << num(r.backhaul_ul_se) << ',' << num(r.backhaul_dl_se) << ','
         << (r.capped ? 1 : 0) << ',' << (r.verified ? 1 : 0) << ',' << num(r.utility) << ','
         << num(r.gp_objective) << '\n';
    finish(os, path);
    written.push_back(path);
  }
  {
    const auto path = dir / "metadata.json";
    auto os = open_out(path);
    os << metadata(result).dump(2) << '\n';
    finish(os, path);
    written.push_back(path);
  }
  return written;
}

std::vector<EcdfSeries> read_ecdf_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "metric,strategy,group,value,prob")
    throw std::runtime_error("unexpected ECDF header in " + path.string());
  std::vector<EcdfSeries> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 5) throw std::runtime_error("bad ECDF row: " + line);
    if (out.empty() || out.back().metric != f[0] || out.back().strategy != f[1] || out.back().group != f[2])
      out.push_back(EcdfSeries{f[0], f[1], f[2], {}, {}});
    out.back().values.push_back(std::stod(f[3]));
    out.back().probs.push_back(std::stod(f[4]));
  }
  return out;
}

}  // namespace fdiab
