#include "orbit_mec/delay_model.hpp"

#include <cmath>
#include <string>

#include "orbit_mec/errors.hpp"

namespace orbit_mec {

namespace {

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw InvalidParameter(std::string(name) + " must be finite and > 0, got " + std::to_string(value));
  }
}

void require_task(const TaskSpec& task) {
  if (!std::isfinite(task.upload_bits) || task.upload_bits < 0.0) {
    throw InvalidParameter("upload_bits must be finite and >= 0");
  }
  if (!std::isfinite(task.result_bits) || task.result_bits < 0.0) {
    throw InvalidParameter("result_bits must be finite and >= 0");
  }
}

bool is_cellular(const OffloadTarget& t) { return t.tier == Tier::cellular; }
bool is_satellite(const OffloadTarget& t) { return t.tier == Tier::satellite; }

}  // namespace

const char* to_string(Tier tier) noexcept {
  switch (tier) {
    case Tier::none: return "none";
    case Tier::cellular: return "cellular";
    case Tier::satellite: return "satellite";
  }
  return "?";
}

void RadioParams::validate() const {
  require_positive(bandwidth_hz, "bandwidth_hz");
  require_positive(tx_power_w, "tx_power_w");
  require_positive(channel_gain_sq, "channel_gain_sq");
  require_positive(noise_power_w, "noise_power_w");
  require_positive(sat_uplink_bps, "sat_uplink_bps");
  require_positive(sat_downlink_bps, "sat_downlink_bps");
  require_positive(sat_dist_gs_m, "sat_dist_gs_m");
  require_positive(sat_dist_se_m, "sat_dist_se_m");
  require_positive(light_speed_mps, "light_speed_mps");
  if (std::abs(light_speed_mps / 2.998e8 - 1.0) > 1e-3) {
    throw InvalidParameter("light_speed_mps must be 2.998e8 within 0.1%");
  }
}

void MigrationParams::validate() const {
  if (!(migration_ratio >= 0.0 && migration_ratio <= 1.0)) {
    throw InvalidParameter("migration_ratio must lie in [0, 1]");
  }
  if (!std::isfinite(cross_tier_cost_s) || cross_tier_cost_s < 0.0) {
    throw InvalidParameter("cross_tier_cost_s must be finite and >= 0");
  }
}

OffloadTarget OffloadTarget::server(int id, Tier tier) {
  if (id <= 0) throw InvalidParameter("server id must be >= 1 for an MEC target");
  if (tier == Tier::none) throw InvalidParameter("an MEC target needs a cellular or satellite tier");
  return OffloadTarget{id, tier};
}

double local_delay(const TaskSpec& task, const ComputeParams& compute, const OffloadTarget& target) {
  require_positive(compute.local_cpu_hz, "local_cpu_hz");
  require_positive(compute.cycles_per_bit, "cycles_per_bit");
  require_task(task);
  return (1.0 - target.indicator()) * task.upload_bits * compute.cycles_per_bit / compute.local_cpu_hz;
}

double cellular_rate(const RadioParams& radio) {
  require_positive(radio.noise_power_w, "noise_power_w");
  const double snr = radio.tx_power_w * radio.channel_gain_sq / radio.noise_power_w;
  return radio.bandwidth_hz * std::log2(1.0 + snr);
}

double cellular_com_delay(const TaskSpec& task, const RadioParams& radio, const OffloadTarget& target) {
  if (target.is_local()) return 0.0;
  require_task(task);
  const double rate = cellular_rate(radio);
  if (!(rate > 0.0)) throw InfeasibleLink("cellular rate is zero for an offloading target");
  return (task.upload_bits + task.result_bits) / rate;
}

double satellite_com_delay(const TaskSpec& task, const RadioParams& radio, const OffloadTarget& target) {
  if (target.is_local()) return 0.0;
  require_task(task);
  if (!(radio.sat_uplink_bps > 0.0) || !(radio.sat_downlink_bps > 0.0)) {
    throw InfeasibleLink("satellite link rate is zero for an offloading target");
  }
  require_positive(radio.light_speed_mps, "light_speed_mps");
  const double propagation = 2.0 * (radio.sat_dist_gs_m + radio.sat_dist_se_m) / radio.light_speed_mps;
  const double transmission =
      (task.upload_bits + task.result_bits) * (1.0 / radio.sat_uplink_bps + 1.0 / radio.sat_downlink_bps);
  return propagation + transmission;
}

double mec_delay(const TaskSpec& task, const ComputeParams& compute, const OffloadTarget& target) {
  if (target.is_local()) return 0.0;
  if (!compute.mec_cpu_hz) throw InvalidParameter("mec_cpu_hz missing for an offloading target");
  require_positive(*compute.mec_cpu_hz, "mec_cpu_hz");
  require_positive(compute.cycles_per_bit, "cycles_per_bit");
  require_task(task);
  return task.upload_bits * compute.cycles_per_bit / *compute.mec_cpu_hz;
}

double migration_delay(const OffloadTarget& prev, const OffloadTarget& curr, double mec_s,
                       const MigrationParams& mig) {
  const bool changed = prev.server_id != curr.server_id;
  const bool not_both_local = !prev.is_local() || !curr.is_local();
  const bool touches_cellular = is_cellular(prev) || is_cellular(curr);
  const bool crosses_tier =
      (is_cellular(prev) && is_satellite(curr)) || (is_satellite(prev) && is_cellular(curr));

  double cost = 0.0;
  if (changed && not_both_local && touches_cellular) cost += mig.migration_ratio * mec_s;
  if (crosses_tier) cost += mig.cross_tier_cost_s;
  return cost;
}

DelayBreakdown interval_delay(const IntervalInputs& in) {
  if (!in.curr.is_local() && !in.channel_available) {
    throw IllegalAction("offload to server " + std::to_string(in.curr.server_id) +
                        " with no available channel");
  }
  DelayBreakdown d;
  d.local_s = local_delay(in.task, in.compute, in.curr);
  if (in.channel_available) {
    d.com_s = in.region_tier == Tier::satellite ? satellite_com_delay(in.task, in.radio, in.curr)
                                                : cellular_com_delay(in.task, in.radio, in.curr);
    d.mec_s = mec_delay(in.task, in.compute, in.curr);
    d.mig_s = migration_delay(in.prev, in.curr, d.mec_s, in.migration);
    d.total_s = d.local_s + (d.com_s + d.mec_s + d.mig_s);
  } else {
    d.total_s = d.local_s;
  }
  return d;
}

}  // namespace orbit_mec
