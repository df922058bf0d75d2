// SPDX-License-Identifier: Apache-2.0
// fdiab: command-line front end for campaigns, config checks and GP dumps.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fdiab/config.hpp"
#include "fdiab/gp.hpp"
#include "fdiab/gp_solver.hpp"
#include "fdiab/montecarlo.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;
};

void add_config_options(CLI::App* cmd, ConfigArgs& a) {
  cmd->add_option("--config", a.file, "JSON file with SystemConfig keys")->check(CLI::ExistingFile);
  cmd->add_option("--set", a.sets, "override one key, key=value (repeatable)");
}

// defaults < file < FDIAB_* environment < command line
fdiab::SystemConfig resolve_config(const ConfigArgs& a) {
  fdiab::SystemConfig cfg;
  if (!a.file.empty()) cfg = fdiab::load_config(a.file, cfg);
  fdiab::apply_env_overrides(cfg);
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw fdiab::ConfigError("--set expects key=value, got '" + kv + "'");
    fdiab::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void print_summary(const fdiab::CampaignResult& r) {
  fmt::print("{:>6}  {:<8}  {:>12}  {:>12}  {:>8}\n", "ktilde", "strategy", "mean_sum_se", "mean_iab_se", "usable");
  for (std::size_t n = 0; n < r.sweep.size(); ++n) {
    const auto& a = r.sweep[n];
    const auto& b = r.sweep_iab[n];
    fmt::print("{:>6}  {:<8}  {:>12.4f}  {:>12.4f}  {:>4}/{}\n", a.k_iab, a.strategy, a.mean, b.mean, a.samples,
               r.options.trials);
  }
  std::map<std::string, int> status;
  for (const auto& rec : r.records) ++status[std::string(fdiab::to_string(rec.status))];
  for (const auto& [k, v] : status) fmt::print("status {}: {}\n", k, v);
  fmt::print("wall time {:.2f} s\n", r.wall_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex IAB power-allocation simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fdiab::build_description()));

  ConfigArgs sim_cfg;
  int trials = 200;
  std::string strategies = "uniform,maxmin,maxsum";
  std::string ktilde;
  std::int64_t seed = -1;
  std::string out_dir = "fdiab-out";
  std::string format = "csv";
  int condense_iters = -1;
  bool dump_gp = false;
  int threads = 1;
  auto* sim = app.add_subcommand("simulate", "run a Monte-Carlo campaign");
  add_config_options(sim, sim_cfg);
  sim->add_option("--trials", trials, "trials per ktilde value")->check(CLI::PositiveNumber);
  sim->add_option("--strategies", strategies, "comma list of uniform,maxmin,maxsum");
  sim->add_option("--ktilde", ktilde, "comma list of IAB user counts (default: k_iab)");
  sim->add_option("--seed", seed, "master seed (overrides config)")->check(CLI::NonNegativeNumber);
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sim->add_option("--condense-iters", condense_iters, "extra AM-GM condensation rounds")
      ->check(CLI::NonNegativeNumber);
  sim->add_flag("--dump-gp", dump_gp, "write every GP to <out>/gp/");
  sim->add_option("--threads", threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  sim->add_flag("--quiet", "suppress the summary table");

  ConfigArgs val_cfg;
  auto* val = app.add_subcommand("validate", "print the resolved configuration and check it");
  add_config_options(val, val_cfg);

  std::string gp_file;
  double gp_tol = 1e-6;
  auto* gpcmd = app.add_subcommand("solve-gp", "solve a GP dump file");
  gpcmd->add_option("file", gp_file, "dump written by --dump-gp")->required()->check(CLI::ExistingFile);
  gpcmd->add_option("--tol", gp_tol, "duality-gap tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*val) {
    try {
      const auto cfg = resolve_config(val_cfg);
      std::cout << fdiab::config_to_json(cfg) << '\n';
      const auto rep = fdiab::validate_config(cfg);
      for (const auto& v : rep.violations) std::cerr << "violation: " << v << '\n';
      return rep.ok() ? 0 : kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitConfig;
    }
  }

  if (*gpcmd) {
    try {
      std::ifstream is(gp_file);
      const auto p = fdiab::gp::read_problem(is);
      fdiab::gp::SolverOptions so;
      so.tolerance = gp_tol;
      const auto sol = fdiab::gp::solve(p, so);
      fmt::print("status {}\nobjective {:.17g}\nnewton {}\n", fdiab::gp::to_string(sol.status), sol.objective_value,
                 sol.newton_iterations);
      for (std::size_t i = 0; i < p.variables().size(); ++i)
        fmt::print("{} {:.17g}\n", p.variables()[i].name, sol.values[i]);
      return sol.status == fdiab::gp::SolveStatus::optimal ? 0 : 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitRuntime;
    }
  }

  fdiab::CampaignOptions opt;
  fdiab::SystemConfig cfg;
  fdiab::OutputFormat fmt_out{};
  try {
    cfg = resolve_config(sim_cfg);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (condense_iters >= 0) cfg.condense_iters = condense_iters;
    opt.trials = trials;
    opt.threads = threads;
    opt.strategies.clear();
    for (const auto& s : split(strategies)) opt.strategies.push_back(fdiab::parse_strategy(s));
    for (const auto& k : split(ktilde)) {
      std::size_t used = 0;
      const int v = std::stoi(k, &used);
      if (used != k.size() || v < 0) throw fdiab::ConfigError("bad --ktilde entry '" + k + "'");
      opt.k_iab_values.push_back(v);
    }
    fmt_out = fdiab::parse_output_format(format);
    const auto rep = fdiab::validate_config(cfg);
    if (!rep.ok()) throw fdiab::ConfigError(rep.violations.front());
    if (opt.strategies.empty()) throw fdiab::ConfigError("nothing to write: no strategies selected");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (dump_gp) {
      opt.dump_dir = std::filesystem::path(out_dir) / "gp";
      std::filesystem::create_directories(*opt.dump_dir);
    }
    const auto result = fdiab::run_campaign(cfg, opt);
    const auto files = fdiab::write_outputs(result, out_dir, fmt_out);
    if (sim->count("--quiet") == 0) {
      print_summary(result);
      for (const auto& f : files) fmt::print("wrote {}\n", f.string());
    }
  } catch (const fdiab::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
