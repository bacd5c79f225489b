#pragma once

#include <span>
#include <vector>

#include "orbit_mec/scenario.hpp"

namespace orbit_mec {

/// Largest legal instantaneous reward; the illegal branch returns -1.
inline constexpr double kRewardMax = 2.718281828459045;
inline constexpr double kIllegalReward = -1.0;

struct RewardParams {
  double preference_theta = 0.1;
  double due_time_s = 0.0;      // T_move
  double slowest_time_s = 0.0;  // T_low = sum(c_n) / v_min
  std::vector<double> region_weights;  // k_n = c_n / sum(c), index n - 1
  double interval_s = 1.0;

  /// Derives weights and T_low from a realized chain. Throws ConfigError when
  /// T_low <= T_move (the velocity term's denominator must stay positive).
  static RewardParams from(const ScenarioConfig& config, const Topology& topology);

  double weight(int region_id) const { return region_weights.at(static_cast<std::size_t>(region_id - 1)); }
};

/// The velocity term's exponent argument, max{dT - (k/L) T_move, 0} / ((k/L)(T_low - T_move)).
double moving_excess_ratio(int interval_count, double weight, const RewardParams& params);

/// theta * exp(1 - moving_excess_ratio(...)).
double velocity_term(int interval_count, double weight, const RewardParams& params);

/// (1 - theta) exp(1 - T_n / T_n,max) + velocity term for a legal action, -1 otherwise.
double instant_reward(double total_s, double local_bound_s, int interval_count, double weight,
                      const RewardParams& params, bool legal);

/// Accumulated reward of one region. Throws InvalidParameter on an empty list.
double region_reward(std::span<const double> interval_rewards);

}  // namespace orbit_mec
