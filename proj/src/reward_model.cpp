#include "orbit_mec/reward_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "orbit_mec/errors.hpp"

namespace orbit_mec {

RewardParams RewardParams::from(const ScenarioConfig& config, const Topology& topology) {
  RewardParams p;
  p.preference_theta = config.theta;
  p.due_time_s = config.resolved_due_time();
  p.interval_s = config.interval_s;
  const double total = topology.total_length();
  p.slowest_time_s = total / config.v_min();
  p.region_weights.reserve(topology.regions.size());
  for (const auto& r : topology.regions) p.region_weights.push_back(r.length_m / total);
  if (!(p.slowest_time_s > p.due_time_s)) {
    throw ConfigError("/reward/due_time_s", "due time must be shorter than the slowest journey time " +
                                                std::to_string(p.slowest_time_s) + " s");
  }
  if (!(p.preference_theta >= 0.0 && p.preference_theta < 1.0)) throw ConfigError("/reward/theta", "must lie in [0, 1)");
  return p;
}

double moving_excess_ratio(int interval_count, double weight, const RewardParams& params) {
  const double per_interval = weight / static_cast<double>(interval_count);
  const double excess = std::max(params.interval_s - per_interval * params.due_time_s, 0.0);
  return excess / (per_interval * (params.slowest_time_s - params.due_time_s));
}

double velocity_term(int interval_count, double weight, const RewardParams& params) {
  return params.preference_theta * std::exp(1.0 - moving_excess_ratio(interval_count, weight, params));
}

double instant_reward(double total_s, double local_bound_s, int interval_count, double weight,
                      const RewardParams& params, bool legal) {
  if (!legal) return kIllegalReward;
  if (!(local_bound_s > 0.0)) throw InvalidParameter("local bound must be > 0");
  if (interval_count < 1) throw InvalidParameter("interval count must be >= 1");
  const double offload_term = (1.0 - params.preference_theta) * std::exp(1.0 - total_s / local_bound_s);
  return offload_term + velocity_term(interval_count, weight, params);
}

double region_reward(std::span<const double> interval_rewards) {
  if (interval_rewards.empty()) throw InvalidParameter("a region has at least one interval");
  return std::accumulate(interval_rewards.begin(), interval_rewards.end(), 0.0);
}

}  // namespace orbit_mec
