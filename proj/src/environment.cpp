#include "orbit_mec/environment.hpp"

#include <cmath>
#include <numeric>

#include "orbit_mec/errors.hpp"

namespace orbit_mec {

namespace {

int nearest_index(std::span<const double> set, double value) {
  int best = 0;
  double best_gap = std::abs(set[0] - value);
  for (std::size_t i = 1; i < set.size(); ++i) {
    const double gap = std::abs(set[i] - value);
    if (gap < best_gap) {
      best_gap = gap;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

Environment::Environment(const ScenarioConfig& config, Topology topology, std::uint64_t draw_seed)
    : config_(config), topology_(std::move(topology)), draws_(draw_seed) {
  config_.validate();
  if (topology_.regions.empty()) throw ConfigError("/regions", "region chain must be non-empty");
  for (int i = 0; i < topology_.size(); ++i) {
    if (topology_.regions[static_cast<std::size_t>(i)].region_id != i + 1) {
      throw ConfigError("/regions", "region ids must form 1..N");
    }
  }
  if (config_.fixed_draws && static_cast<int>(config_.fixed_draws->size()) != topology_.size()) {
    throw ConfigError("/fixed_draws", "every region needs an entry");
  }
  reward_params_ = RewardParams::from(config_, topology_);
  all_actions_.resize(static_cast<std::size_t>(action_count()));
  std::iota(all_actions_.begin(), all_actions_.end(), 0);
  trace_.regions.reserve(topology_.regions.size());
}

int Environment::velocity_index(double v) const { return nearest_index(config_.velocity_set_mps, v); }

OffloadTarget Environment::target_for(int server_id) const {
  if (server_id == 0) return OffloadTarget::local();
  return OffloadTarget{server_id, topology_.server_tier(server_id)};
}

void Environment::draw_task() {
  if (config_.fixed_draws) {
    const FixedDraws* fd = nullptr;
    for (const auto& d : *config_.fixed_draws) {
      if (d.region_id == region_) fd = &d;
    }
    const std::size_t k = static_cast<std::size_t>(interval_ - 1);
    offload_.data_bits = fd->data_bits[k % fd->data_bits.size()];
    offload_.local_cpu_hz = fd->local_cpu_hz[k % fd->local_cpu_hz.size()];
    offload_.data_index = nearest_index(config_.data_set_bits, offload_.data_bits);
    offload_.cpu_index = nearest_index(config_.local_cpu_set_hz, offload_.local_cpu_hz);
    return;
  }
  offload_.data_index = static_cast<int>(draws_.uniform_index(config_.data_set_bits.size()));
  offload_.cpu_index = static_cast<int>(draws_.uniform_index(config_.local_cpu_set_hz.size()));
  offload_.data_bits = config_.data_set_bits[static_cast<std::size_t>(offload_.data_index)];
  offload_.local_cpu_hz = config_.local_cpu_set_hz[static_cast<std::size_t>(offload_.cpu_index)];
}

VelocityState Environment::reset(std::optional<std::uint64_t> seed) {
  if (seed) draws_ = Rng(*seed);
  phase_ = Phase::awaiting_velocity;
  region_ = 1;
  interval_ = 1;
  entry_velocity_ = config_.initial_velocity_mps;
  completion_sum_ = 0.0;
  traversal_ = RegionTraversal{};
  trace_.intervals.clear();
  trace_.regions.clear();
  trace_.mean_completion_s = 0.0;
  trace_.moving_time_s = 0.0;
  trace_.interval_total = 0;
  trace_.illegal_actions = 0;

  const auto& r = topology_.region(1);
  offload_ = OffloadState{};
  offload_.region_id = 1;
  offload_.channel_available = r.channel_available;
  offload_.velocity_mps = entry_velocity_;
  offload_.velocity_index = velocity_index(entry_velocity_);
  offload_.prev_server = 0;
  draw_task();
  return velocity_state();
}

VelocityState Environment::velocity_state() const {
  VelocityState s;
  s.prev_region = region_ - 1;
  s.curr_region = region_;
  s.entry_velocity_mps = entry_velocity_;
  s.entry_velocity_index = velocity_index(entry_velocity_);
  return s;
}

std::span<const int> Environment::legal_actions(const OffloadState& state) const {
  std::span<const int> all(all_actions_);
  return state.channel_available ? all : all.first(1);
}

RegionTraversal Environment::step_region(double target_velocity_mps) {
  if (phase_ != Phase::awaiting_velocity) throw std::logic_error("step_region called mid-region or after the episode");
  const auto& r = topology_.region(region_);
  plan_ = VelocityPlan{entry_velocity_, target_velocity_mps, config_.accel_mps2, r.length_m, config_.interval_s};
  traversal_ = traverse_region(plan_, config_.velocity_set_mps);
  plan_.target_velocity_mps = traversal_.target_velocity_mps;
  interval_ = 1;
  offload_.velocity_mps = instantaneous_velocity(plan_, interval_);
  offload_.velocity_index = velocity_index(offload_.velocity_mps);

  RegionRecord rec;
  rec.region_id = region_;
  rec.channel_available = r.channel_available;
  rec.requested_velocity_mps = target_velocity_mps;
  rec.traversal = traversal_;
  trace_.regions.push_back(rec);
  trace_.moving_time_s += traversal_.travel_time_s;
  phase_ = Phase::intervals;
  return traversal_;
}

IntervalStep Environment::step_interval(int action) {
  if (phase_ != Phase::intervals) throw std::logic_error("step_interval called before choosing a velocity");
  if (action < 0 || action >= action_count()) throw InvalidParameter("action outside 0..N");
  const auto& region = topology_.region(region_);

  IntervalStep out;
  out.legal = action == 0 || region.channel_available;
  out.executed_server = out.legal ? action : 0;

  IntervalInputs in;
  in.task = TaskSpec{offload_.data_bits, config_.result_ratio * offload_.data_bits};
  in.compute.cycles_per_bit = config_.cycles_per_bit;
  in.compute.local_cpu_hz = offload_.local_cpu_hz;
  if (out.executed_server != 0) in.compute.mec_cpu_hz = topology_.region(out.executed_server).mec_cpu_hz;
  in.radio = config_.radio;
  in.migration = config_.migration;
  in.prev = target_for(offload_.prev_server);
  in.curr = target_for(out.executed_server);
  in.region_tier = region.tier;
  in.channel_available = region.channel_available;
  out.delay = interval_delay(in);
  out.local_bound_s = offload_.data_bits * config_.cycles_per_bit / offload_.local_cpu_hz;
  out.reward = instant_reward(out.delay.total_s, out.local_bound_s, traversal_.interval_count,
                              reward_params_.weight(region_), reward_params_, out.legal);

  RegionRecord& rec = trace_.regions.back();
  rec.reward += out.reward;
  rec.completion_sum_s += out.delay.total_s;
  completion_sum_ += out.delay.total_s;
  ++trace_.interval_total;
  if (!out.legal) ++trace_.illegal_actions;
  if (recording_) {
    IntervalRecord ir;
    ir.region_id = region_;
    ir.interval = interval_;
    ir.state = offload_;
    ir.requested_server = action;
    ir.executed_server = out.executed_server;
    ir.legal = out.legal;
    ir.delay = out.delay;
    ir.local_bound_s = out.local_bound_s;
    ir.reward = out.reward;
    trace_.intervals.push_back(ir);
  }

  offload_.prev_server = out.executed_server;
  if (interval_ < traversal_.interval_count) {
    ++interval_;
    offload_.velocity_mps = instantaneous_velocity(plan_, interval_);
  } else {
    out.region_done = true;
    entry_velocity_ = traversal_.exit_velocity_mps;
    if (region_ == topology_.size()) {
      phase_ = Phase::done;
      out.episode_done = true;
      trace_.mean_completion_s = completion_sum_ / static_cast<double>(trace_.interval_total);
      return out;
    }
    ++region_;
    interval_ = 1;
    phase_ = Phase::awaiting_velocity;
    offload_.region_id = region_;
    offload_.channel_available = topology_.region(region_).channel_available;
    offload_.velocity_mps = entry_velocity_;
  }
  offload_.velocity_index = velocity_index(offload_.velocity_mps);
  draw_task();
  return out;
}

}  // namespace orbit_mec
