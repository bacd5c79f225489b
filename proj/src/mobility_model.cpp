#include "orbit_mec/mobility_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "orbit_mec/errors.hpp"

namespace orbit_mec {

namespace {

void validate(const VelocityPlan& p) {
  if (!(p.accel_mps2 > 0.0)) throw InvalidParameter("accel_mps2 must be > 0");
  if (!(p.region_length_m > 0.0)) throw InvalidParameter("region_length_m must be > 0");
  if (!(p.interval_s > 0.0)) throw InvalidParameter("interval_s must be > 0");
  if (!(p.target_velocity_mps > 0.0)) throw InvalidParameter("target_velocity_mps must be > 0");
  if (!(p.entry_velocity_mps >= 0.0)) throw InvalidParameter("entry_velocity_mps must be >= 0");
}

bool ramp_fits(const VelocityPlan& p) { return ramp_distance(p) <= p.region_length_m; }

}  // namespace

double instantaneous_velocity(const VelocityPlan& plan, int l) {
  const double v0 = plan.entry_velocity_mps;
  const double goal = plan.target_velocity_mps;
  const double dv = plan.accel_mps2 * static_cast<double>(l) * plan.interval_s;
  if (v0 < goal) return std::min(v0 + dv, goal);
  if (v0 > goal) return std::max(v0 - dv, goal);
  return v0;
}

double ramp_distance(const VelocityPlan& plan) {
  const double v0 = plan.entry_velocity_mps;
  const double goal = plan.target_velocity_mps;
  return std::abs(goal * goal - v0 * v0) / (2.0 * plan.accel_mps2);
}

double region_travel_time(const VelocityPlan& plan) {
  validate(plan);
  const double v0 = plan.entry_velocity_mps;
  const double goal = plan.target_velocity_mps;
  const double a = plan.accel_mps2;
  const double c = plan.region_length_m;
  if (!ramp_fits(plan)) {
    const double reach = v0 > goal ? std::sqrt(std::max(0.0, v0 * v0 - 2.0 * a * c))
                                   : std::sqrt(v0 * v0 + 2.0 * a * c);
    throw InfeasiblePlan(reach, "ramp from " + std::to_string(v0) + " to " + std::to_string(goal) +
                                    " m/s does not fit in " + std::to_string(c) + " m");
  }
  const double dv = goal - v0;
  if (v0 <= goal) return (c + dv * dv / (2.0 * a)) / goal;
  return (c - dv * dv / (2.0 * a)) / goal;
}

int interval_count(double travel_time_s, double interval_s) {
  if (!(interval_s > 0.0)) throw InvalidParameter("interval_s must be > 0");
  const double n = std::floor(travel_time_s / interval_s);
  return n < 1.0 ? 1 : static_cast<int>(n);
}

FeasibilityResult feasibility_check(const VelocityPlan& plan, std::span<const double> velocity_set) {
  validate(plan);
  if (ramp_fits(plan)) return {true, plan.target_velocity_mps};

  const double v0 = plan.entry_velocity_mps;
  const double two_ac = 2.0 * plan.accel_mps2 * plan.region_length_m;
  double best = v0;
  if (v0 > plan.target_velocity_mps) {
    const double floor_v = std::sqrt(std::max(0.0, v0 * v0 - two_ac));
    bool found = false;
    for (double v : velocity_set) {
      if (v >= floor_v && v <= v0 && (!found || v < best)) {
        best = v;
        found = true;
      }
    }
  } else {
    const double ceil_v = std::sqrt(v0 * v0 + two_ac);
    bool found = false;
    for (double v : velocity_set) {
      if (v <= ceil_v && v >= v0 && (!found || v > best)) {
        best = v;
        found = true;
      }
    }
  }
  return {false, best};
}

RegionTraversal traverse_region(const VelocityPlan& plan, std::span<const double> velocity_set) {
  const FeasibilityResult fr = feasibility_check(plan, velocity_set);
  VelocityPlan resolved = plan;
  resolved.target_velocity_mps = fr.target_velocity_mps;
  RegionTraversal out;
  out.travel_time_s = region_travel_time(resolved);
  out.interval_count = interval_count(out.travel_time_s, plan.interval_s);
  out.exit_velocity_mps = resolved.target_velocity_mps;
  out.target_velocity_mps = resolved.target_velocity_mps;
  out.clamped = !fr.feasible;
  return out;
}

}  // namespace orbit_mec
