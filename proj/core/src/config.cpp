// SPDX-License-Identifier: Apache-2.0
#include "fdiab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace fdiab {
namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
  }
}

long long parse_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    // Accept integral floating-point spellings such as "12.0" or "1e3".
    const double d = parse_double(key, text);
    if (std::floor(d) != d) throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
    return static_cast<long long>(d);
  }
  return v;
}

std::uint64_t parse_seed(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError("config key '" + key + "': expected an unsigned 64-bit integer, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

ArraySize parse_array(const std::string& key, std::string text) {
  text.erase(std::remove_if(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c) || c == '[' || c == ']'; }),
             text.end());
  std::replace(text.begin(), text.end(), 'X', 'x');
  std::replace(text.begin(), text.end(), ',', 'x');
  const auto sep = text.find('x');
  if (sep == std::string::npos) throw ConfigError("config key '" + key + "': expected RxC array size, got '" + text + "'");
  ArraySize a;
  a.rows = static_cast<int>(parse_integer(key, text.substr(0, sep)));
  a.cols = static_cast<int>(parse_integer(key, text.substr(sep + 1)));
  return a;
}

struct Field {
  std::string name;
  std::function<void(SystemConfig&, const std::string&)> set;
  std::function<std::string(const SystemConfig&)> get;
};

Field real(std::string name, double SystemConfig::*member) {
  return {name, [name, member](SystemConfig& c, const std::string& v) { c.*member = parse_double(name, v); },
          [member](const SystemConfig& c) { return format_double(c.*member); }};
}

Field integer(std::string name, int SystemConfig::*member) {
  return {name, [name, member](SystemConfig& c, const std::string& v) { c.*member = static_cast<int>(parse_integer(name, v)); },
          [member](const SystemConfig& c) { return std::to_string(c.*member); }};
}

Field boolean(std::string name, bool SystemConfig::*member) {
  return {name, [name, member](SystemConfig& c, const std::string& v) { c.*member = parse_bool(name, v); },
          [member](const SystemConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field array(std::string name, ArraySize SystemConfig::*member) {
  return {name, [name, member](SystemConfig& c, const std::string& v) { c.*member = parse_array(name, v); },
          [member](const SystemConfig& c) {
            return std::to_string((c.*member).rows) + "x" + std::to_string((c.*member).cols);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    t.push_back(real("carrier_frequency", &SystemConfig::carrier_frequency));
    t.push_back(real("noise_density", &SystemConfig::noise_density));
    t.push_back(real("bandwidth", &SystemConfig::bandwidth));
    t.push_back(real("noise_figure_gnb", &SystemConfig::noise_figure_gnb));
    t.push_back(real("noise_figure_iab", &SystemConfig::noise_figure_iab));
    t.push_back(real("noise_figure_ue", &SystemConfig::noise_figure_ue));
    t.push_back(array("n_gnb", &SystemConfig::n_gnb));
    t.push_back(array("n_iab", &SystemConfig::n_iab));
    t.push_back(array("n_ue", &SystemConfig::n_ue));
    t.push_back(real("element_spacing", &SystemConfig::element_spacing));
    t.push_back(real("p_max_gnb", &SystemConfig::p_max_gnb));
    t.push_back(real("p_max_iab", &SystemConfig::p_max_iab));
    t.push_back(real("p_max_ue", &SystemConfig::p_max_ue));
    t.push_back(integer("k_gnb", &SystemConfig::k_gnb));
    t.push_back(integer("k_iab", &SystemConfig::k_iab));
    t.push_back(real("radius_gnb", &SystemConfig::radius_gnb));
    t.push_back(real("radius_iab", &SystemConfig::radius_iab));
    t.push_back(real("min_distance", &SystemConfig::min_distance));
    t.push_back(real("height_gnb", &SystemConfig::height_gnb));
    t.push_back(real("height_iab", &SystemConfig::height_iab));
    t.push_back(real("height_ue", &SystemConfig::height_ue));
    t.push_back({"iab_distance",
                 [](SystemConfig& c, const std::string& v) {
                   if (v.empty() || v == "null" || v == "auto")
                     c.iab_distance.reset();
                   else
                     c.iab_distance = parse_double("iab_distance", v);
                 },
                 [](const SystemConfig& c) {
                   return c.iab_distance ? format_double(*c.iab_distance) : std::string("auto");
                 }});
    t.push_back(integer("n_clusters", &SystemConfig::n_clusters));
    t.push_back(integer("n_paths", &SystemConfig::n_paths));
    t.push_back(real("cluster_decay", &SystemConfig::cluster_decay));
    t.push_back(real("azimuth_spread", &SystemConfig::azimuth_spread));
    t.push_back(real("elevation_spread", &SystemConfig::elevation_spread));
    t.push_back(real("intra_cluster_spread", &SystemConfig::intra_cluster_spread));
    t.push_back(boolean("shadowing", &SystemConfig::shadowing));
    t.push_back(real("shadowing_los", &SystemConfig::shadowing_los));
    t.push_back(real("shadowing_nlos", &SystemConfig::shadowing_nlos));
    t.push_back(real("sector_beamwidth", &SystemConfig::sector_beamwidth));
    t.push_back(real("sector_max_gain", &SystemConfig::sector_max_gain));
    t.push_back(real("sector_attenuation", &SystemConfig::sector_attenuation));
    t.push_back(integer("epsilon_se", &SystemConfig::epsilon_se));
    t.push_back(real("solver_tolerance", &SystemConfig::solver_tolerance));
    t.push_back(integer("condense_iters", &SystemConfig::condense_iters));
    t.push_back({"condense_anchor",
                 [](SystemConfig& c, const std::string& v) { c.condense_anchor = v; },
                 [](const SystemConfig& c) { return c.condense_anchor; }});
    t.push_back(real("power_floor", &SystemConfig::power_floor));
    t.push_back(boolean("cap_uniform", &SystemConfig::cap_uniform));
    t.push_back({"seed", [](SystemConfig& c, const std::string& v) { c.seed = parse_seed("seed", v); },
                 [](const SystemConfig& c) { return std::to_string(c.seed); }});
    return t;
  }();
  return table;
}

const Field& find_field(const std::string& key) {
  const auto& table = fields();
  const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.name == key; });
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  return *it;
}

std::string json_scalar_to_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "null";
  if (v.is_array()) {
    if (v.size() != 2) throw ConfigError("array-valued config entries must have two elements");
    return v[0].dump() + "x" + v[1].dump();
  }
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

}  // namespace

NoisePowers SystemConfig::noise_powers() const {
  const double base_dbm = noise_density + 10.0 * std::log10(bandwidth);
  return NoisePowers{dbm_to_watt(base_dbm + noise_figure_gnb), dbm_to_watt(base_dbm + noise_figure_iab),
                     dbm_to_watt(base_dbm + noise_figure_ue)};
}

ValidationReport validate_config(const SystemConfig& cfg) {
  ValidationReport r;
  auto require = [&r](bool cond, std::string msg) {
    if (!cond) r.violations.push_back(std::move(msg));
  };
  require(cfg.carrier_frequency > 0, "carrier_frequency must be positive");
  require(cfg.bandwidth > 0, "bandwidth must be positive");
  require(std::isfinite(cfg.noise_density), "noise_density must be finite");
  require(cfg.n_gnb.rows >= 1 && cfg.n_gnb.cols >= 1, "n_gnb must have at least one element per dimension");
  require(cfg.n_iab.rows >= 1 && cfg.n_iab.cols >= 1, "n_iab must have at least one element per dimension");
  require(cfg.n_ue.rows >= 1 && cfg.n_ue.cols >= 1, "n_ue must have at least one element per dimension");
  require(cfg.element_spacing > 0, "element_spacing must be positive");
  require(cfg.k_gnb >= 1, "k_gnb must be at least 1");
  require(cfg.k_iab >= 0, "k_iab must be non-negative");
  if (cfg.n_gnb.elements() < cfg.k_gnb + 1)
    r.violations.push_back("N^gNB >= K+1 fails: " + std::to_string(cfg.n_gnb.elements()) + " < " +
                           std::to_string(cfg.k_gnb + 1));
  if (cfg.n_iab.elements() < cfg.k_iab + 1)
    r.violations.push_back("N^IAB >= K~+1 fails: " + std::to_string(cfg.n_iab.elements()) + " < " +
                           std::to_string(cfg.k_iab + 1));
  require(std::isfinite(cfg.p_max_gnb) && std::isfinite(cfg.p_max_iab) && std::isfinite(cfg.p_max_ue),
          "power budgets must be finite");
  require(cfg.radius_gnb > 0, "radius_gnb must be positive");
  require(cfg.radius_iab > 0, "radius_iab must be positive");
  require(cfg.min_distance >= 1.0, "min_distance must be at least 1 m");
  require(cfg.min_distance < cfg.radius_iab && cfg.min_distance < cfg.radius_gnb,
          "min_distance must be smaller than both coverage radii");
  require(cfg.height_gnb > cfg.height_ue && cfg.height_iab > cfg.height_ue,
          "base-station heights must exceed the UE height");
  require(cfg.height_ue > 0, "height_ue must be positive");
  require(!cfg.iab_distance || *cfg.iab_distance > 0, "iab_distance must be positive");
  require(cfg.n_clusters >= 1 && cfg.n_paths >= 1, "n_clusters and n_paths must be at least 1");
  require(cfg.cluster_decay >= 0, "cluster_decay must be non-negative");
  require(cfg.azimuth_spread >= 0 && cfg.elevation_spread >= 0 && cfg.intra_cluster_spread >= 0,
          "angular spreads must be non-negative");
  require(cfg.shadowing_los >= 0 && cfg.shadowing_nlos >= 0, "shadowing deviations must be non-negative");
  require(cfg.sector_beamwidth > 0, "sector_beamwidth must be positive");
  require(cfg.sector_attenuation >= 0, "sector_attenuation must be non-negative");
  if (cfg.epsilon_se < 2) r.violations.push_back("epsilon_se must be >= 2");
  if (cfg.epsilon_se % 2 != 0) r.violations.push_back("epsilon_se must be even");
  require(cfg.solver_tolerance > 0 && cfg.solver_tolerance < 1, "solver_tolerance must lie in (0, 1)");
  require(cfg.condense_iters >= 0, "condense_iters must be non-negative");
  require(cfg.condense_anchor == "equal" || cfg.condense_anchor == "feasible",
          "condense_anchor must be 'equal' or 'feasible'");
  require(cfg.power_floor < 0, "power_floor must be negative (dB below the budget)");
  return r;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.name);
    return k;
  }();
  return keys;
}

void set_config_value(SystemConfig& cfg, const std::string& key, const std::string& value) {
  find_field(key).set(cfg, value);
}

std::string get_config_value(const SystemConfig& cfg, const std::string& key) { return find_field(key).get(cfg); }

std::map<std::string, std::string> config_to_map(const SystemConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& f : fields()) out.emplace(f.name, f.get(cfg));
  return out;
}

SystemConfig parse_config_json(const std::string& text, SystemConfig base) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config document must be a flat JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object()) throw ConfigError("config key '" + key + "' must not be a nested object");
    set_config_value(base, key, json_scalar_to_text(value));
  }
  return base;
}

SystemConfig load_config(const std::filesystem::path& path, SystemConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_json(buffer.str(), std::move(base));
}

std::string config_to_json(const SystemConfig& cfg) {
  nlohmann::ordered_json doc;
  for (const auto& f : fields()) {
    const std::string text = f.get(cfg);
    if (f.name == "n_gnb" || f.name == "n_iab" || f.name == "n_ue") {
      const auto a = parse_array(f.name, text);
      doc[f.name] = {a.rows, a.cols};
    } else if (f.name == "condense_anchor") {
      doc[f.name] = text;
    } else if (f.name == "seed") {
      doc[f.name] = cfg.seed;
    } else if (text == "true" || text == "false") {
      doc[f.name] = text == "true";
    } else if (f.name == "iab_distance" && !cfg.iab_distance) {
      doc[f.name] = nullptr;
    } else {
      doc[f.name] = nlohmann::json::parse(text);
    }
  }
  return doc.dump(2);
}

void apply_env_overrides(SystemConfig& cfg, const std::string& prefix,
                         const std::function<const char*(const char*)>& lookup) {
  for (const auto& f : fields()) {
    std::string var = prefix + f.name;
    std::transform(var.begin(), var.end(), var.begin(), [](unsigned char c) { return std::toupper(c); });
    const char* value = lookup ? lookup(var.c_str()) : std::getenv(var.c_str());
    if (value != nullptr) f.set(cfg, value);
  }
}

}  // namespace fdiab
