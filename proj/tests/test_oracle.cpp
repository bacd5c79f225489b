#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "orbit_mec/environment.hpp"
#include "orbit_mec/errors.hpp"
#include "orbit_mec/oracle.hpp"

using namespace orbit_mec;

namespace {

ScenarioConfig desk(std::vector<RegionDescriptor> regions, std::vector<FixedDraws> draws, std::vector<double> vset,
                    double due) {
  ScenarioConfig c = reference_preset();
  c.region_count = static_cast<int>(regions.size());
  c.satellite_ids.clear();
  c.unavailable_count = 0;
  for (const auto& r : regions) {
    if (r.tier == Tier::satellite) c.satellite_ids.push_back(r.region_id);
    if (!r.channel_available) ++c.unavailable_count;
  }
  c.explicit_regions = std::move(regions);
  c.fixed_draws = std::move(draws);
  c.velocity_set_mps = std::move(vset);
  c.initial_velocity_mps = c.velocity_set_mps.front();
  c.due_time_s = due;
  return c;
}

// Two 40 m regions at 10 or 15 m/s; every assignment within budget has at most six intervals.
ScenarioConfig coupled_instance() {
  ScenarioConfig c = desk({{1, Tier::cellular, 40.0, true, 12e9}, {2, Tier::satellite, 40.0, true, 55e9}},
                          {{1, {3.2e6, 0.8e6, 5.6e6}, {0.8e9, 0.5e9}}, {2, {2.0e6, 4.4e6}, {0.6e9}}}, {10.0, 15.0},
                          6.5);
  c.migration.migration_ratio = 0.3;
  return c;
}

ScenarioConfig dead_instance() {
  ScenarioConfig c = desk({{1, Tier::cellular, 40.0, true, 10e9}, {2, Tier::cellular, 40.0, false, 19e9}},
                          {{1, {5.6e6, 0.8e6}, {0.5e9}}, {2, {3.2e6}, {0.8e9, 1.0e9}}}, {10.0, 15.0}, 6.5);
  return c;
}

struct Brute {
  double best = std::numeric_limits<double>::infinity();
  long long sequences = 0;
};

// Every velocity assignment and every decision sequence, replayed through the
// environment; a sequence counts when every decision is legal and no interval
// exceeds its local bound.
Brute brute_force(const ScenarioConfig& c, bool reverse) {
  const DeterministicInstance inst = DeterministicInstance::from_config(c);
  const int n = inst.topology.size();
  const int nv = static_cast<int>(c.velocity_set_mps.size());
  int assignments = 1;
  for (int i = 0; i < n; ++i) assignments *= nv;
  Brute out;
  Environment env(c, inst.topology, 0);
  env.set_recording(true);
  for (int ai = 0; ai < assignments; ++ai) {
    const int code = reverse ? assignments - 1 - ai : ai;
    std::vector<double> vel;
    for (int i = 0, k = code; i < n; ++i, k /= nv) vel.push_back(c.velocity_set_mps[static_cast<std::size_t>(k % nv)]);

    // Interval counts do not depend on offloading decisions.
    env.reset();
    std::vector<int> counts;
    double moving = 0.0;
    for (int r = 0; r < n; ++r) {
      const RegionTraversal t = env.step_region(vel[static_cast<std::size_t>(r)]);
      counts.push_back(t.interval_count);
      moving += t.travel_time_s;
      for (int l = 0; l < t.interval_count; ++l) env.step_interval(0);
    }
    if (moving > c.resolved_due_time()) continue;
    int total = 0;
    for (int k : counts) total += k;
    const int actions = n + 1;
    long long sequences = 1;
    for (int i = 0; i < total; ++i) sequences *= actions;
    for (long long si = 0; si < sequences; ++si) {
      const long long seq = reverse ? sequences - 1 - si : si;
      env.reset();
      long long digits = seq;
      bool ok = true;
      for (int r = 0; r < n && ok; ++r) {
        env.step_region(vel[static_cast<std::size_t>(r)]);
        for (int l = 0; l < counts[static_cast<std::size_t>(r)]; ++l) {
          const int a = static_cast<int>(digits % actions);
          digits /= actions;
          const IntervalStep s = env.step_interval(a);
          if (!s.legal || s.delay.total_s > s.local_bound_s) ok = false;
          if (!ok) break;
        }
      }
      if (!ok) continue;
      ++out.sequences;
      out.best = std::min(out.best, env.trace().mean_completion_s);
    }
  }
  return out;
}

std::string constraint_of(const ScenarioConfig& c) {
  try {
    (void)solve_exact(DeterministicInstance::from_config(c));
  } catch (const InfeasibleInstance& e) {
    return e.constraint();
  }
  return "<solved>";
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("dynamic program equals raw enumeration") {
    for (const ScenarioConfig& c : {coupled_instance(), dead_instance()}) {
      const DeterministicInstance inst = DeterministicInstance::from_config(c);
      const OracleSolution sol = solve_exact(inst);
      const Brute fwd = brute_force(c, false);
      const Brute rev = brute_force(c, true);
      REQUIRE(fwd.sequences > 0);
      CHECK(sol.interval_total <= 6);
      CHECK(sol.mean_completion_s == doctest::Approx(fwd.best).epsilon(1e-12));
      CHECK(rev.best == fwd.best);
      CHECK(sol.audit.all());
      CHECK(audit_solution(inst, sol).all());
    }
  }

  TEST_CASE("oracle delay agrees with the environment") {
    const ScenarioConfig c = coupled_instance();
    const DeterministicInstance inst = DeterministicInstance::from_config(c);
    Environment env(c, inst.topology, 0);
    env.reset();
    env.step_region(10.0);
    const std::vector<int> plan{1, 2, 0};
    int prev = 0;
    for (int l = 1; l <= 3; ++l) {
      const int a = plan[static_cast<std::size_t>(l - 1)];
      const IntervalStep s = env.step_interval(a);
      CHECK(oracle_interval_total(inst, 1, l, prev, a) == doctest::Approx(s.delay.total_s).epsilon(1e-14));
      CHECK(oracle_local_bound(inst, 1, l) == doctest::Approx(s.local_bound_s).epsilon(1e-14));
      prev = a;
    }
  }

  TEST_CASE("all-local desk instance") {
    const ScenarioConfig c = desk_instance_all_local();
    const OracleSolution sol = solve_exact(DeterministicInstance::from_config(c));
    CHECK(sol.mean_completion_s == doctest::Approx(3.2e6 * c.cycles_per_bit / 0.8e9).epsilon(1e-12));
    for (const auto& region : sol.decisions) {
      for (int d : region) CHECK(d == 0);
    }
  }

  TEST_CASE("fast-server desk instance offloads every interval") {
    const ScenarioConfig c = desk_instance_fast_server();
    const DeterministicInstance inst = DeterministicInstance::from_config(c);
    const OracleSolution sol = solve_exact(inst);
    for (const auto& region : sol.decisions) {
      for (int d : region) CHECK(d == 1);
    }
    CHECK(oracle_interval_total(inst, 1, 1, 1, 1) < oracle_interval_total(inst, 1, 1, 1, 0));
    CHECK(sol.mean_completion_s < oracle_local_bound(inst, 1, 1));
  }

  TEST_CASE("dead-channel desk instance crosses the dead region at top speed") {
    const ScenarioConfig c = desk_instance_dead_channel();
    const OracleSolution sol = solve_exact(DeterministicInstance::from_config(c));
    REQUIRE(sol.velocities.size() == 2);
    CHECK(sol.velocities[1] == c.v_max());
    CHECK(sol.audit.all());
    CHECK(sol.audit.moving_time_s <= 30.0);
    for (int d : sol.decisions[1]) CHECK(d == 0);
    CHECK(sol.assignments == 16);
  }

  TEST_CASE("decomposition") {
    const DeterministicInstance single = DeterministicInstance::from_config(desk_instance_fast_server());
    CHECK(solve_decomposed(single).mean_completion_s == doctest::Approx(solve_exact(single).mean_completion_s).epsilon(1e-12));
    for (const ScenarioConfig& c : {desk_instance_dead_channel(), coupled_instance()}) {
      const DeterministicInstance inst = DeterministicInstance::from_config(c);
      const OracleSolution joint = solve_exact(inst);
      const OracleSolution part = solve_decomposed(inst);
      // Each region meets k_n T_move, so the concatenation is feasible for the joint problem.
      CHECK(part.mean_completion_s >= joint.mean_completion_s - 1e-12);
      CHECK(audit_solution(inst, part).all());
    }
  }

  TEST_CASE("region weights of a three-region chain") {
    ScenarioConfig c = desk({{1, Tier::cellular, 100.0, true, 10e9}, {2, Tier::cellular, 200.0, true, 10e9},
                             {3, Tier::cellular, 300.0, true, 10e9}},
                            {{1, {0.8e6}, {1e9}}, {2, {0.8e6}, {1e9}}, {3, {0.8e6}, {1e9}}}, {5.0, 20.0}, 60.0);
    const DeterministicInstance inst = DeterministicInstance::from_config(c);
    // Region 3 alone at 20 m/s takes longer than 5 s, so a budget of k_3 T_move = 30 s is what makes it feasible.
    const OracleSolution r3 = solve_region_exact(inst, 3, 5.0, 0);
    CHECK(r3.audit.budget_s == doctest::Approx(60.0 * 0.5).epsilon(1e-12));
    const OracleSolution r1 = solve_region_exact(inst, 1, 5.0, 0);
    CHECK(r1.audit.budget_s == doctest::Approx(60.0 / 6.0).epsilon(1e-12));
  }

  TEST_CASE("guards and infeasibility") {
    ScenarioConfig big = desk_instance_dead_channel();
    big.velocity_set_mps = {5.0, 10.0, 12.5, 15.0, 20.0};
    CHECK(constraint_of(big) == "guard");
    ScenarioConfig no_draws = desk_instance_all_local();
    no_draws.fixed_draws.reset();
    CHECK(constraint_of(no_draws) == "guard");
    ScenarioConfig four = desk({{1, Tier::cellular, 10.0, true, 10e9}, {2, Tier::cellular, 10.0, true, 10e9},
                                {3, Tier::cellular, 10.0, true, 10e9}, {4, Tier::cellular, 10.0, true, 10e9}},
                               {{1, {0.8e6}, {1e9}}, {2, {0.8e6}, {1e9}}, {3, {0.8e6}, {1e9}}, {4, {0.8e6}, {1e9}}},
                               {5.0, 10.0}, 7.0);
    CHECK(constraint_of(four) == "guard");
    ScenarioConfig tight = desk_instance_all_local();
    tight.due_time_s = 4.0;
    CHECK(constraint_of(tight) == "moving_time");
    const DeterministicInstance ok = DeterministicInstance::from_config(desk_instance_dead_channel());
    CHECK(ok.work_bound() <= kOracleMaxWork);
  }

  TEST_CASE("audit catches a tampered solution") {
    const DeterministicInstance inst = DeterministicInstance::from_config(desk_instance_dead_channel());
    OracleSolution sol = solve_exact(inst);
    sol.decisions[1][0] = 1;
    CHECK_FALSE(audit_solution(inst, sol).single_target);
  }
}
