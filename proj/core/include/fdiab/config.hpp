// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdiab/types.hpp"

namespace fdiab {

/// Planar array dimensions, horizontal x vertical element counts.
struct ArraySize {
  int rows = 1;  ///< horizontal elements
  int cols = 1;  ///< vertical elements
  int elements() const { return rows * cols; }
  friend bool operator==(const ArraySize&, const ArraySize&) = default;
};

/// Every tunable of a simulation run. Powers and noise density are in dBm
/// (dBm/Hz), geometry in meters, angles in degrees, frequencies in Hz.
///
/// Defaults reproduce the reference scenario: 30 GHz carrier, 16x4 / 8x4 / 4x2
/// arrays, 43/43/23 dBm budgets, K = 12 gNB users, 100 m / 50 m coverage.
/// Quantities the reference scenario leaves open (bandwidth, heights, IAB
/// placement, cluster powers) carry documented defaults and stay configurable.
struct SystemConfig {
  double carrier_frequency = 30e9;
  double noise_density = -173.0;
  double bandwidth = 100e6;
  double noise_figure_gnb = 0.0;
  double noise_figure_iab = 0.0;
  double noise_figure_ue = 0.0;

  ArraySize n_gnb{16, 4};
  ArraySize n_iab{8, 4};
  ArraySize n_ue{4, 2};
  double element_spacing = 0.5;  ///< wavelengths

  double p_max_gnb = 43.0;
  double p_max_iab = 43.0;
  double p_max_ue = 23.0;

  int k_gnb = 12;
  int k_iab = 1;

  double radius_gnb = 100.0;
  double radius_iab = 50.0;
  double min_distance = 10.0;  ///< closest 2-D UE-to-server distance
  double height_gnb = 25.0;
  double height_iab = 10.0;
  double height_ue = 1.5;
  std::optional<double> iab_distance;  ///< gNB-IAB ground distance; unset = radius_gnb

  int n_clusters = 4;
  int n_paths = 3;
  double cluster_decay = 3.0;          ///< dB per cluster
  double azimuth_spread = 15.0;        ///< cluster offset spread, degrees
  double elevation_spread = 5.0;
  double intra_cluster_spread = 2.0;   ///< per-path offset around the cluster, degrees
  bool shadowing = true;
  double shadowing_los = 4.0;          ///< dB
  double shadowing_nlos = 7.82;        ///< dB
  double sector_beamwidth = 120.0;     ///< 3-dB beamwidth, degrees
  double sector_max_gain = 8.0;        ///< dBi
  double sector_attenuation = 30.0;    ///< front-to-back cap, dB

  int epsilon_se = 100;
  double solver_tolerance = 1e-6;
  int condense_iters = 0;
  /// AM-GM weights of the first GP build: "equal" (M * geometric mean) or
  /// "feasible" (weighted bound, tight at backhaul_feasible_uniform).
  std::string condense_anchor = "feasible";
  double power_floor = -90.0;  ///< dB relative to each node's budget
  bool cap_uniform = true;

  std::uint64_t seed = 1;

  double p_max_gnb_watt() const { return dbm_to_watt(p_max_gnb); }
  double p_max_iab_watt() const { return dbm_to_watt(p_max_iab); }
  double p_max_ue_watt() const { return dbm_to_watt(p_max_ue); }
  double iab_ground_distance() const { return iab_distance.value_or(radius_gnb); }
  NoisePowers noise_powers() const;
  UserSets user_sets() const { return UserSets{k_gnb, k_iab}; }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Lists every violated invariant; never throws.
ValidationReport validate_config(const SystemConfig& cfg);

/// Raised for malformed configuration input (unknown keys, unparsable values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Names of all recognised configuration keys, in declaration order.
const std::vector<std::string>& config_keys();

/// Sets one key from its textual form. Arrays accept "16x4" or "[16,4]";
/// booleans accept true/false/1/0. Throws ConfigError.
void set_config_value(SystemConfig& cfg, const std::string& key, const std::string& value);

/// Textual form of one key, as accepted by set_config_value.
std::string get_config_value(const SystemConfig& cfg, const std::string& key);

/// Flat key/value view of the whole configuration.
std::map<std::string, std::string> config_to_map(const SystemConfig& cfg);

/// Reads a flat JSON object whose keys match SystemConfig field names and
/// applies it on top of `base`.
SystemConfig load_config(const std::filesystem::path& path, SystemConfig base = {});
SystemConfig parse_config_json(const std::string& text, SystemConfig base = {});
std::string config_to_json(const SystemConfig& cfg);

/// Applies `<prefix><KEY>` environment variables (key upper-cased) for every
/// known key. `lookup` defaults to std::getenv.
void apply_env_overrides(SystemConfig& cfg, const std::string& prefix = "FDIAB_",
                         const std::function<const char*(const char*)>& lookup = {});

}  // namespace fdiab
