#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "orbit_mec/environment.hpp"
#include "orbit_mec/errors.hpp"
#include "orbit_mec/random.hpp"

using namespace orbit_mec;

namespace {

ScenarioConfig small_config() {
  ScenarioConfig c = reference_preset();
  c.region_count = 3;
  c.unavailable_count = 1;
  c.satellite_ids = {3};
  c.due_time_s = 40.0;
  return c;
}

struct Walk {
  EpisodeTrace trace;
  std::vector<VelocityState> velocity_states;
  std::vector<OffloadState> offload_states;
};

// Random legal-or-not decisions drawn from `actions`; same stream, same walk.
Walk walk(Environment& env, std::uint64_t draw_seed, std::uint64_t action_seed) {
  Walk w;
  Rng pick(action_seed);
  env.set_recording(true);
  env.reset(draw_seed);
  const auto& vs = env.config().velocity_set_mps;
  while (!env.episode_done()) {
    if (env.awaiting_velocity()) {
      w.velocity_states.push_back(env.velocity_state());
      env.step_region(vs[pick.uniform_index(vs.size())]);
    }
    w.offload_states.push_back(env.offload_state());
    env.step_interval(static_cast<int>(pick.uniform_index(static_cast<std::size_t>(env.action_count()))));
  }
  w.trace = env.trace();
  return w;
}

template <class Set>
bool member(const Set& set, double v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

}  // namespace

TEST_SUITE("environment") {
  TEST_CASE("reset") {
    const ScenarioConfig c = reference_preset();
    Rng r(5);
    Environment env(c, draw_topology(c, r), 9);
    const VelocityState v = env.reset();
    CHECK(v.prev_region == 0);
    CHECK(v.curr_region == 1);
    CHECK(v.entry_velocity_mps == c.initial_velocity_mps);
    CHECK(env.offload_state().prev_server == 0);
    CHECK(env.topology().unavailable_count() == 4);
    CHECK(env.awaiting_velocity());
    CHECK_THROWS_AS(env.step_interval(0), std::logic_error);
  }

  TEST_CASE("empty chain is rejected") {
    CHECK_THROWS_AS(Environment(small_config(), Topology{}, 1), ConfigError);
  }

  TEST_CASE("legal action sets") {
    const ScenarioConfig c = reference_preset();
    Rng r(5);
    Environment env(c, draw_topology(c, r), 9);
    OffloadState s;
    s.channel_available = false;
    CHECK(env.legal_actions(s).size() == 1);
    CHECK(env.legal_actions(s)[0] == 0);
    s.channel_available = true;
    CHECK(env.legal_actions(s).size() == 21);
    CHECK(env.velocity_actions().size() == c.velocity_set_mps.size());
  }

  TEST_CASE("conservation, mean and replay") {
    const ScenarioConfig c = small_config();
    Rng r(11);
    const Topology topo = draw_topology(c, r);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      Environment env(c, topo, 0);
      const Walk a = walk(env, seed, seed * 31);
      int intervals = 0;
      double moving = 0.0;
      for (const auto& reg : a.trace.regions) {
        intervals += reg.traversal.interval_count;
        moving += reg.traversal.travel_time_s;
      }
      CHECK(a.trace.regions.size() == 3);
      CHECK(intervals == a.trace.interval_total);
      CHECK(a.trace.intervals.size() == static_cast<std::size_t>(intervals));
      CHECK(a.trace.moving_time_s == doctest::Approx(moving).epsilon(1e-12));
      double sum = 0.0;
      for (const auto& ir : a.trace.intervals) sum += ir.delay.total_s;
      CHECK(a.trace.mean_completion_s == doctest::Approx(sum / intervals).epsilon(1e-12));

      Environment again(c, topo, 0);
      const Walk b = walk(again, seed, seed * 31);
      REQUIRE(b.trace.intervals.size() == a.trace.intervals.size());
      for (std::size_t i = 0; i < a.trace.intervals.size(); ++i) {
        CHECK(b.trace.intervals[i].state == a.trace.intervals[i].state);
        CHECK(b.trace.intervals[i].delay.total_s == a.trace.intervals[i].delay.total_s);
        CHECK(b.trace.intervals[i].reward == a.trace.intervals[i].reward);
      }
      CHECK(b.trace.mean_completion_s == a.trace.mean_completion_s);
    }
  }

  TEST_CASE("state closure and decision audit") {
    const ScenarioConfig c = small_config();
    Rng r(3);
    const Topology topo = draw_topology(c, r);
    Environment env(c, topo, 0);
    const Walk w = walk(env, 77, 78);
    for (const auto& s : w.offload_states) {
      CHECK(member(c.data_set_bits, s.data_bits));
      CHECK(member(c.local_cpu_set_hz, s.local_cpu_hz));
      CHECK(c.data_set_bits[static_cast<std::size_t>(s.data_index)] == s.data_bits);
      CHECK(s.velocity_index >= 0);
      CHECK(s.velocity_index < static_cast<int>(c.velocity_set_mps.size()));
      CHECK(s.prev_server >= 0);
      CHECK(s.prev_server <= topo.size());
      CHECK(s.region_id >= 1);
      CHECK(s.region_id <= topo.size());
    }
    for (const auto& v : w.velocity_states) {
      CHECK(v.prev_region == v.curr_region - 1);
      CHECK(member(c.velocity_set_mps, v.entry_velocity_mps));
    }
    for (const auto& ir : w.trace.intervals) {
      const bool dead = !topo.region(ir.region_id).channel_available;
      if (ir.requested_server != 0 && dead) {
        CHECK_FALSE(ir.legal);
        CHECK(ir.reward == -1.0);
        CHECK(ir.executed_server == 0);
      }
      if (ir.executed_server == 0) {
        CHECK(ir.delay.total_s == doctest::Approx(ir.local_bound_s).epsilon(1e-12));
        CHECK(ir.delay.com_s == 0.0);
        CHECK(ir.delay.mec_s == 0.0);
      }
      if (ir.legal) {
        CHECK(ir.reward > 0.0);
        CHECK(ir.reward <= kRewardMax);
      }
    }
  }

  TEST_CASE("illegal action runs locally") {
    ScenarioConfig c = small_config();
    Topology t;
    t.regions = {{1, Tier::cellular, 100.0, false, 10e9}, {2, Tier::cellular, 100.0, true, 10e9},
                 {3, Tier::satellite, 1000.0, true, 50e9}};
    Environment env(c, t, 4);
    env.reset();
    env.step_region(10.0);
    const IntervalStep s = env.step_interval(2);
    CHECK_FALSE(s.legal);
    CHECK(s.reward == -1.0);
    CHECK(s.executed_server == 0);
    CHECK(s.delay.total_s == doctest::Approx(s.local_bound_s).epsilon(1e-12));
    CHECK(s.delay.local_s > 0.0);
    CHECK(env.offload_state().prev_server == 0);
  }

  TEST_CASE("repeated server and constant velocity") {
    ScenarioConfig c = small_config();
    c.initial_velocity_mps = 10.0;
    Topology t;
    t.regions = {{1, Tier::cellular, 100.0, true, 10e9}, {2, Tier::cellular, 200.0, true, 10e9},
                 {3, Tier::satellite, 1000.0, true, 50e9}};
    Environment env(c, t, 4);
    env.reset();
    const RegionTraversal tr = env.step_region(10.0);
    CHECK(tr.travel_time_s == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(tr.interval_count == 10);
    const IntervalStep first = env.step_interval(2);
    const IntervalStep second = env.step_interval(2);
    CHECK(first.delay.mig_s > 0.0);
    CHECK(second.delay.mig_s == 0.0);
    const IntervalStep local = env.step_interval(0);
    CHECK(local.delay.local_s > 0.0);
    CHECK(local.delay.com_s == 0.0);
    CHECK(local.delay.mec_s == 0.0);
    CHECK(local.delay.mig_s == 0.0);
  }

  TEST_CASE("clamped target is reflected in the traversal") {
    ScenarioConfig c = small_config();
    c.initial_velocity_mps = 20.0;
    Topology t;
    t.regions = {{1, Tier::cellular, 50.0, true, 10e9}, {2, Tier::cellular, 200.0, true, 10e9},
                 {3, Tier::satellite, 1000.0, true, 50e9}};
    Environment env(c, t, 4);
    env.reset();
    const RegionTraversal tr = env.step_region(5.0);
    CHECK(tr.clamped);
    CHECK(tr.target_velocity_mps > 5.0);
    CHECK(member(c.velocity_set_mps, tr.target_velocity_mps));
    while (!env.awaiting_velocity()) env.step_interval(0);
    CHECK(env.velocity_state().entry_velocity_mps == tr.exit_velocity_mps);
    CHECK(env.velocity_state().curr_region == 2);
  }
}
