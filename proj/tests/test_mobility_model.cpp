#include <doctest.h>

#include <cmath>
#include <vector>

#include "orbit_mec/mobility_model.hpp"

using namespace orbit_mec;

namespace {

const std::vector<double> kSet{5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};

VelocityPlan plan(double v0, double vg, double c, double a = 2.0) { return {v0, vg, a, c, 1.0}; }

}  // namespace

TEST_SUITE("mobility_model") {
  TEST_CASE("instantaneous velocity") {
    CHECK(instantaneous_velocity(plan(5, 20, 300), 3) == 11.0);
    CHECK(instantaneous_velocity(plan(5, 20, 300), 10) == 20.0);
    CHECK(instantaneous_velocity(plan(10, 10, 300), 1) == 10.0);
    CHECK(instantaneous_velocity(plan(10, 10, 300), 50) == 10.0);
    CHECK(instantaneous_velocity(plan(20, 5, 300), 3) == 14.0);
    CHECK(instantaneous_velocity(plan(20, 5, 300), 9) == 5.0);
    VelocityPlan half = plan(5, 20, 300);
    half.interval_s = 0.5;
    CHECK(instantaneous_velocity(half, 3) == 8.0);
  }

  TEST_CASE("travel time worked examples") {
    // 7.5 s ramp over 93.75 m, then 206.25 m at 20 m/s.
    CHECK(region_travel_time(plan(5, 20, 300)) == doctest::Approx(17.8125).epsilon(1e-12));
    CHECK(region_travel_time(plan(20, 5, 100)) == doctest::Approx(8.75).epsilon(1e-12));
    CHECK(region_travel_time(plan(10, 10, 200)) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(ramp_distance(plan(20, 5, 100)) == doctest::Approx(93.75).epsilon(1e-12));
  }

  TEST_CASE("interval count") {
    CHECK(interval_count(17.8125, 1.0) == 17);
    CHECK(interval_count(8.75, 1.0) == 8);
    CHECK(interval_count(0.4, 1.0) == 1);
    CHECK(interval_count(20.0, 1.0) == 20);
    CHECK(interval_count(20.0, 2.0) == 10);
  }

  TEST_CASE("feasibility and clamping") {
    CHECK(feasibility_check(plan(20, 5, 100), kSet).feasible);
    const auto clamped = feasibility_check(plan(20, 5, 50), kSet);
    CHECK_FALSE(clamped.feasible);
    CHECK(clamped.target_velocity_mps == 15.0);
    CHECK(feasibility_check(plan(12, 12, 1), kSet).feasible);

    try {
      (void)region_travel_time(plan(20, 5, 50));
      FAIL("expected InfeasiblePlan");
    } catch (const InfeasiblePlan& e) {
      CHECK(e.reachable_mps() == doctest::Approx(std::sqrt(200.0)).epsilon(1e-12));
    }

    const RegionTraversal t = traverse_region(plan(20, 5, 50), kSet);
    CHECK(t.clamped);
    CHECK(t.target_velocity_mps == 15.0);
    CHECK(t.exit_velocity_mps == 15.0);
    // 2.5 s ramp over 43.75 m, then 6.25 m at 15 m/s.
    CHECK(t.travel_time_s == doctest::Approx(2.5 + 6.25 / 15.0).epsilon(1e-12));
  }

  TEST_CASE("acceleration that cannot complete is clamped down") {
    // sqrt(25 + 2*2*50) = 15 exactly.
    const auto f = feasibility_check(plan(5, 20, 50), kSet);
    CHECK_FALSE(f.feasible);
    CHECK(f.target_velocity_mps == 15.0);
    const auto t = traverse_region(plan(5, 20, 50), kSet);
    CHECK(t.exit_velocity_mps == 15.0);
    CHECK(t.travel_time_s == doctest::Approx(5.0).epsilon(1e-12));
  }

  TEST_CASE("traversal of a long region") {
    const RegionTraversal t = traverse_region(plan(5, 20, 300), kSet);
    CHECK_FALSE(t.clamped);
    CHECK(t.interval_count == 17);
    CHECK(t.exit_velocity_mps == 20.0);
  }
}
