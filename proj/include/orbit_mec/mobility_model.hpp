#pragma once

// One-dimensional trapezoidal velocity profiles across a coverage region: ramp
// at constant acceleration from the entry velocity to the target, then cruise.

#include <span>
#include <stdexcept>
#include <string>

namespace orbit_mec {

struct VelocityPlan {
  double entry_velocity_mps = 0.0;
  double target_velocity_mps = 0.0;
  double accel_mps2 = 2.0;
  double region_length_m = 0.0;
  double interval_s = 1.0;
};

struct RegionTraversal {
  double travel_time_s = 0.0;
  int interval_count = 1;
  double exit_velocity_mps = 0.0;
  double target_velocity_mps = 0.0;  // after clamping
  bool clamped = false;
};

/// Thrown by region_travel_time when the ramp cannot complete inside the region.
class InfeasiblePlan : public std::runtime_error {
 public:
  InfeasiblePlan(double reachable_mps, const std::string& what)
      : std::runtime_error(what), reachable_mps_(reachable_mps) {}
  /// The closest target velocity that can be reached within the region.
  double reachable_mps() const noexcept { return reachable_mps_; }

 private:
  double reachable_mps_;
};

/// Velocity after l intervals (l >= 1): the ramp advances by a * l * interval_s
/// and saturates at the target.
double instantaneous_velocity(const VelocityPlan& plan, int l);

/// Distance covered while ramping from entry to target: |v_goal^2 - v_0^2| / (2a).
double ramp_distance(const VelocityPlan& plan);

/// Closed-form travel time across the region. Throws InfeasiblePlan if the
/// ramp does not fit in region_length_m.
double region_travel_time(const VelocityPlan& plan);

/// floor(travel_time / interval), clamped to at least 1.
int interval_count(double travel_time_s, double interval_s);

struct FeasibilityResult {
  bool feasible = true;
  double target_velocity_mps = 0.0;  // the requested target, or its clamped replacement
};

/// Resolves a target that cannot be reached inside the region. A deceleration
/// that does not fit is replaced by the smallest member of `velocity_set` at or
/// above sqrt(v0^2 - 2ac); an acceleration that does not fit by the largest
/// member at or below sqrt(v0^2 + 2ac). Falls back to the entry velocity when
/// the set has no such member.
FeasibilityResult feasibility_check(const VelocityPlan& plan, std::span<const double> velocity_set);

/// Clamps via feasibility_check, then computes travel time and interval count.
RegionTraversal traverse_region(const VelocityPlan& plan, std::span<const double> velocity_set);

}  // namespace orbit_mec
