#pragma once

// Episodic MDP over the region chain. Each episode walks regions 1..N; per
// region the velocity agent picks a target velocity, then the offloading agent
// acts once per interval until the region's L_n intervals have elapsed.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "orbit_mec/delay_model.hpp"
#include "orbit_mec/mobility_model.hpp"
#include "orbit_mec/random.hpp"
#include "orbit_mec/reward_model.hpp"
#include "orbit_mec/scenario.hpp"

namespace orbit_mec {

/// Observation of the offloading agent. The *_index fields locate each value in
/// its configured finite set and form the tabular key.
struct OffloadState {
  int region_id = 1;
  bool channel_available = true;
  double data_bits = 0.0;
  double local_cpu_hz = 0.0;
  double velocity_mps = 0.0;
  int prev_server = 0;

  int data_index = 0;
  int cpu_index = 0;
  int velocity_index = 0;

  friend bool operator==(const OffloadState&, const OffloadState&) = default;
};

/// Observation of the velocity agent. prev_region is 0 at journey start.
struct VelocityState {
  int prev_region = 0;
  int curr_region = 1;
  double entry_velocity_mps = 0.0;
  int entry_velocity_index = 0;

  friend bool operator==(const VelocityState&, const VelocityState&) = default;
};

struct IntervalRecord {
  int region_id = 0;
  int interval = 0;  // 1-based within the region
  OffloadState state;
  int requested_server = 0;
  int executed_server = 0;
  bool legal = true;
  DelayBreakdown delay;
  double local_bound_s = 0.0;
  double reward = 0.0;
};

struct RegionRecord {
  int region_id = 0;
  bool channel_available = true;
  double requested_velocity_mps = 0.0;
  RegionTraversal traversal;
  double reward = 0.0;  // accumulated over the region's intervals
  double completion_sum_s = 0.0;
};

struct EpisodeTrace {
  std::vector<IntervalRecord> intervals;
  std::vector<RegionRecord> regions;
  double mean_completion_s = 0.0;  // average over all intervals of the journey
  double moving_time_s = 0.0;      // sum of region travel times
  int interval_total = 0;
  int illegal_actions = 0;
};

struct IntervalStep {
  DelayBreakdown delay;
  double local_bound_s = 0.0;
  double reward = 0.0;
  bool legal = true;
  int executed_server = 0;
  bool region_done = false;
  bool episode_done = false;
};

class Environment {
 public:
  /// Throws ConfigError for an invalid scenario or an empty chain.
  Environment(const ScenarioConfig& config, Topology topology, std::uint64_t draw_seed);

  /// Starts a new episode at region 1 with the configured initial velocity.
  /// Passing a seed restarts the task-draw stream from it.
  VelocityState reset(std::optional<std::uint64_t> seed = std::nullopt);

  std::span<const int> legal_actions(const OffloadState& state) const;
  /// Every velocity is legal; infeasible targets are clamped by the mobility model.
  std::span<const double> velocity_actions() const { return config_.velocity_set_mps; }

  /// Enters the current region with a target velocity.
  RegionTraversal step_region(double target_velocity_mps);

  /// Executes one offloading decision. An illegal target is run locally
  /// and rewarded -1.
  IntervalStep step_interval(int action);

  const OffloadState& offload_state() const { return offload_; }
  VelocityState velocity_state() const;
  bool awaiting_velocity() const { return phase_ == Phase::awaiting_velocity; }
  bool episode_done() const { return phase_ == Phase::done; }
  int current_region() const { return region_; }
  const RegionTraversal& current_traversal() const { return traversal_; }

  int action_count() const { return topology_.size() + 1; }
  int server_count() const { return topology_.size(); }
  const Topology& topology() const { return topology_; }
  const RewardParams& reward_params() const { return reward_params_; }
  const ScenarioConfig& config() const { return config_; }

  OffloadTarget target_for(int server_id) const;

  /// When enabled the per-interval records are kept; region records and
  /// totals are always kept.
  void set_recording(bool on) { recording_ = on; }
  const EpisodeTrace& trace() const { return trace_; }

  int velocity_index(double v) const;

 private:
  enum class Phase { awaiting_velocity, intervals, done };

  void draw_task();

  ScenarioConfig config_;
  Topology topology_;
  RewardParams reward_params_;
  Rng draws_;
  std::vector<int> all_actions_;

  Phase phase_ = Phase::done;
  int region_ = 1;
  int interval_ = 1;
  double entry_velocity_ = 0.0;
  VelocityPlan plan_;
  RegionTraversal traversal_;
  OffloadState offload_;
  double completion_sum_ = 0.0;

  bool recording_ = false;
  EpisodeTrace trace_;
};

}  // namespace orbit_mec
