#pragma once

// Experiment description and its per-replication realization (the region
// chain a robot actually crosses).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orbit_mec/delay_model.hpp"
#include "orbit_mec/hyperparams.hpp"
#include "orbit_mec/random.hpp"

namespace orbit_mec {

inline constexpr const char* kScenarioSchema = "orbit-mec.scenario/1";

struct RegionDescriptor {
  int region_id = 1;
  Tier tier = Tier::cellular;
  double length_m = 100.0;
  bool channel_available = true;
  double mec_cpu_hz = 10e9;  // the server co-located with this region's AP
};

/// Draw sets for one AP tier.
struct TierSpec {
  std::vector<double> length_set_m;
  std::vector<double> mec_cpu_set_hz;
};

/// Task draws pinned per region, for deterministic instances. Interval l of
/// region n uses entry (l - 1) mod size.
struct FixedDraws {
  int region_id = 1;
  std::vector<double> data_bits;
  std::vector<double> local_cpu_hz;
};

struct ScenarioConfig {
  std::string name = "custom";

  int region_count = 20;
  std::vector<int> satellite_ids;  // every other id in 1..region_count is cellular
  TierSpec cellular;
  TierSpec satellite;
  int unavailable_count = 4;
  /// When set, used verbatim instead of drawing a topology.
  std::optional<std::vector<RegionDescriptor>> explicit_regions;

  RadioParams radio;
  double cycles_per_bit = 800.0;
  std::vector<double> local_cpu_set_hz;
  std::vector<double> data_set_bits;
  double result_ratio = 0.1;  // D_bar = result_ratio * D
  MigrationParams migration;

  std::vector<double> velocity_set_mps;  // ascending
  double accel_mps2 = 2.0;
  double interval_s = 1.0;
  double initial_velocity_mps = 5.0;

  double theta = 0.1;
  std::optional<double> due_time_s;  // defaults to expected length / mid-range velocity

  Hyperparams hyper;
  int replications = 10;
  std::uint64_t master_seed = 2023;

  std::optional<std::vector<FixedDraws>> fixed_draws;

  double v_min() const { return velocity_set_mps.front(); }
  double v_max() const { return velocity_set_mps.back(); }
  Tier tier_of(int region_id) const;

  /// The moving-time budget T_move.
  double resolved_due_time() const;

  /// Throws ConfigError with a field path on the first violation.
  void validate() const;
};

/// Defaults of the reference 20-AP deployment.
ScenarioConfig reference_preset();

/// One realized region chain. Server m is co-located with region m.
struct Topology {
  std::vector<RegionDescriptor> regions;

  int size() const { return static_cast<int>(regions.size()); }
  const RegionDescriptor& region(int id) const { return regions.at(static_cast<std::size_t>(id - 1)); }
  Tier server_tier(int server_id) const { return server_id == 0 ? Tier::none : region(server_id).tier; }
  double total_length() const;
  int unavailable_count() const;
};

/// Lengths, MEC frequencies and the dead-channel subset drawn uniformly from
/// the configured sets (dead regions without replacement).
Topology draw_topology(const ScenarioConfig& config, Rng& rng);

nlohmann::json to_json(const ScenarioConfig& config);
/// Throws ConfigError naming the JSON path of the first bad field.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::string& path);

/// FNV-1a 64 over the canonical JSON dump.
std::uint64_t config_hash(const ScenarioConfig& config);

}  // namespace orbit_mec
