#pragma once

// Per-interval delay components for one offloading decision: local compute,
// uplink/downlink communication (cellular or satellite relay), MEC compute and
// service migration. All functions are pure; units are SI (bits, Hz, s, m).

#include <optional>

namespace orbit_mec {

enum class Tier { none, cellular, satellite };

const char* to_string(Tier tier) noexcept;

struct RadioParams {
  double bandwidth_hz = 10e6;
  double tx_power_w = 0.2;
  double channel_gain_sq = 1e-6;
  double noise_power_w = 2e-12;
  double sat_uplink_bps = 10e6;     // robot -> satellite
  double sat_downlink_bps = 100e6;  // satellite -> earth station
  double sat_dist_gs_m = 1e6;
  double sat_dist_se_m = 1e6;
  double light_speed_mps = 2.998e8;

  /// Throws InvalidParameter unless every field is finite and > 0 and the
  /// light speed is within 0.1% of 2.998e8.
  void validate() const;
};

struct ComputeParams {
  double cycles_per_bit = 800.0;
  double local_cpu_hz = 1e9;
  std::optional<double> mec_cpu_hz;  // frequency of the selected server, if any
};

struct TaskSpec {
  double upload_bits = 0.0;
  double result_bits = 0.0;
};

struct MigrationParams {
  double migration_ratio = 0.1;    // rho in [0, 1]
  double cross_tier_cost_s = 0.5;  // extra cost between cellular and satellite servers

  void validate() const;
};

/// Where a task is executed. server_id 0 is the robot itself; 1..N are MEC
/// servers, each carrying the tier of the AP it is co-located with.
struct OffloadTarget {
  int server_id = 0;
  Tier tier = Tier::none;

  static constexpr OffloadTarget local() noexcept { return {}; }
  static OffloadTarget server(int id, Tier tier);

  constexpr bool is_local() const noexcept { return server_id == 0; }
  /// The offloading indicator: 1 for any MEC server, 0 for local execution.
  constexpr double indicator() const noexcept { return is_local() ? 0.0 : 1.0; }

  friend constexpr bool operator==(const OffloadTarget&, const OffloadTarget&) = default;
};

struct DelayBreakdown {
  double local_s = 0.0;
  double com_s = 0.0;
  double mec_s = 0.0;
  double mig_s = 0.0;
  double total_s = 0.0;
};

double local_delay(const TaskSpec& task, const ComputeParams& compute, const OffloadTarget& target);

/// Shannon rate W log2(1 + p h^2 / sigma^2) in bit/s.
double cellular_rate(const RadioParams& radio);

double cellular_com_delay(const TaskSpec& task, const RadioParams& radio, const OffloadTarget& target);

/// Two-hop relay via satellite: round-trip propagation plus transmission on
/// both hops, for the upload and the returned result.
double satellite_com_delay(const TaskSpec& task, const RadioParams& radio, const OffloadTarget& target);

double mec_delay(const TaskSpec& task, const ComputeParams& compute, const OffloadTarget& target);

/// Service migration cost between consecutive intervals.
///
/// The first term charges rho * mec_s when the serving server changes, the
/// pair is not local/local and at least one endpoint is a cellular server. The
/// second term charges cross_tier_cost_s whenever the endpoints sit on
/// different tiers (cellular <-> satellite). A satellite -> satellite change
/// therefore costs nothing; that is what the model states and it is kept.
double migration_delay(const OffloadTarget& prev, const OffloadTarget& curr, double mec_s,
                       const MigrationParams& mig);

/// Everything one interval needs to evaluate its completion time.
struct IntervalInputs {
  TaskSpec task;
  ComputeParams compute;  // mec_cpu_hz is the frequency of `curr` when offloading
  RadioParams radio;
  MigrationParams migration;
  OffloadTarget prev;
  OffloadTarget curr;
  Tier region_tier = Tier::cellular;  // tier of the AP the robot is attached to
  bool channel_available = true;
};

/// total = local + mu * (com + mec + mig). Throws IllegalAction for an
/// offload target when the channel is unavailable.
DelayBreakdown interval_delay(const IntervalInputs& in);

}  // namespace orbit_mec
