#include "orbit_mec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "orbit_mec/delay_model.hpp"
#include "orbit_mec/errors.hpp"

namespace orbit_mec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const FixedDraws& draws_for(const DeterministicInstance& inst, int region_id) {
  for (const auto& d : *inst.config.fixed_draws) {
    if (d.region_id == region_id) return d;
  }
  throw InfeasibleInstance("guard", fmt::format("no fixed draws for region {}", region_id));
}

struct Slot {
  int region_id;
  int interval;  // 1-based within region
};

struct PathResult {
  double total = kInf;
  std::vector<int> servers;  // per slot
};

// Exact minimum over offloading decisions for a fixed interval sequence. The
// DP state is the server executed in the previous interval.
PathResult best_path(const DeterministicInstance& inst, const std::vector<Slot>& slots, int prev_server) {
  const int n_servers = inst.topology.size() + 1;
  std::vector<double> cost(static_cast<std::size_t>(n_servers), kInf);
  cost[static_cast<std::size_t>(prev_server)] = 0.0;
  std::vector<std::vector<int>> back(slots.size(), std::vector<int>(static_cast<std::size_t>(n_servers), -1));

  for (std::size_t k = 0; k < slots.size(); ++k) {
    const Slot& sl = slots[k];
    const bool available = inst.topology.region(sl.region_id).channel_available;
    const double bound = oracle_local_bound(inst, sl.region_id, sl.interval);
    std::vector<double> next(static_cast<std::size_t>(n_servers), kInf);
    for (int from = 0; from < n_servers; ++from) {
      const double base = cost[static_cast<std::size_t>(from)];
      if (base == kInf) continue;
      const int last = available ? n_servers - 1 : 0;
      for (int to = 0; to <= last; ++to) {
        const double t = oracle_interval_total(inst, sl.region_id, sl.interval, from, to);
        if (to != 0 && t > bound) continue;
        const double c = base + t;
        if (c < next[static_cast<std::size_t>(to)]) {
          next[static_cast<std::size_t>(to)] = c;
          back[k][static_cast<std::size_t>(to)] = from;
        }
      }
    }
    cost = std::move(next);
  }

  PathResult out;
  int end = 0;
  for (int m = 0; m < n_servers; ++m) {
    if (cost[static_cast<std::size_t>(m)] < out.total) {
      out.total = cost[static_cast<std::size_t>(m)];
      end = m;
    }
  }
  out.servers.assign(slots.size(), 0);
  for (std::size_t k = slots.size(); k-- > 0;) {
    out.servers[k] = end;
    end = back[k][static_cast<std::size_t>(end)];
  }
  return out;
}

std::vector<Slot> slots_of(int region_id, int interval_count) {
  std::vector<Slot> s;
  for (int l = 1; l <= interval_count; ++l) s.push_back({region_id, l});
  return s;
}

RegionTraversal traverse(const DeterministicInstance& inst, int region_id, double entry, double target) {
  const VelocityPlan plan{entry, target, inst.config.accel_mps2, inst.topology.region(region_id).length_m,
                          inst.config.interval_s};
  return traverse_region(plan, inst.config.velocity_set_mps);
}

long long power(long long base, int exp) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Decodes assignment index `code` into per-region velocity indices.
std::vector<int> assignment_of(long long code, int regions, int nv) {
  std::vector<int> idx(static_cast<std::size_t>(regions));
  for (int n = regions - 1; n >= 0; --n) {
    idx[static_cast<std::size_t>(n)] = static_cast<int>(code % nv);
    code /= nv;
  }
  return idx;
}

void fill_decisions(OracleSolution& sol, const std::vector<Slot>& slots, const std::vector<int>& servers) {
  sol.decisions.assign(sol.traversals.size(), {});
  for (std::size_t k = 0; k < slots.size(); ++k) {
    sol.decisions[static_cast<std::size_t>(slots[k].region_id - 1)].push_back(servers[k]);
  }
}

}  // namespace

DeterministicInstance DeterministicInstance::from_config(const ScenarioConfig& config) {
  config.validate();
  if (!config.explicit_regions) throw InfeasibleInstance("guard", "deterministic instance needs explicit regions");
  if (!config.fixed_draws) throw InfeasibleInstance("guard", "deterministic instance needs fixed draws");
  DeterministicInstance inst;
  inst.config = config;
  Rng unused(0);
  inst.topology = draw_topology(config, unused);
  const int n = inst.topology.size();
  if (n > kOracleMaxRegions) throw InfeasibleInstance("guard", fmt::format("{} regions exceed the limit of {}", n, kOracleMaxRegions));
  const int nv = static_cast<int>(config.velocity_set_mps.size());
  if (nv > kOracleMaxVelocities) {
    throw InfeasibleInstance("guard", fmt::format("{} velocities exceed the limit of {}", nv, kOracleMaxVelocities));
  }
  for (int id = 1; id <= n; ++id) draws_for(inst, id);
  const double work = inst.work_bound();
  if (work > kOracleMaxWork) throw InfeasibleInstance("guard", fmt::format("decision space {} exceeds {}", work, kOracleMaxWork));
  return inst;
}

double DeterministicInstance::work_bound() const {
  const int n = topology.size();
  const int nv = static_cast<int>(config.velocity_set_mps.size());
  double total = 0.0;
  for (long long code = 0; code < power(nv, n); ++code) {
    const auto idx = assignment_of(code, n, nv);
    double entry = config.initial_velocity_mps;
    for (int r = 1; r <= n; ++r) {
      const auto t = traverse(*this, r, entry, config.velocity_set_mps[static_cast<std::size_t>(idx[static_cast<std::size_t>(r - 1)])]);
      total += t.interval_count;
      entry = t.exit_velocity_mps;
    }
  }
  return total * (n + 1) * (n + 1);
}

double oracle_local_bound(const DeterministicInstance& inst, int region_id, int interval) {
  const FixedDraws& d = draws_for(inst, region_id);
  const auto k = static_cast<std::size_t>(interval - 1);
  return d.data_bits[k % d.data_bits.size()] * inst.config.cycles_per_bit / d.local_cpu_hz[k % d.local_cpu_hz.size()];
}

double oracle_interval_total(const DeterministicInstance& inst, int region_id, int interval, int prev_server,
                             int server) {
  const FixedDraws& d = draws_for(inst, region_id);
  const auto k = static_cast<std::size_t>(interval - 1);
  const double bits = d.data_bits[k % d.data_bits.size()];
  const auto& region = inst.topology.region(region_id);
  IntervalInputs in;
  in.task = TaskSpec{bits, inst.config.result_ratio * bits};
  in.compute.cycles_per_bit = inst.config.cycles_per_bit;
  in.compute.local_cpu_hz = d.local_cpu_hz[k % d.local_cpu_hz.size()];
  if (server != 0) in.compute.mec_cpu_hz = inst.topology.region(server).mec_cpu_hz;
  in.radio = inst.config.radio;
  in.migration = inst.config.migration;
  in.prev = prev_server == 0 ? OffloadTarget::local() : OffloadTarget::server(prev_server, inst.topology.server_tier(prev_server));
  in.curr = server == 0 ? OffloadTarget::local() : OffloadTarget::server(server, inst.topology.server_tier(server));
  in.region_tier = region.tier;
  in.channel_available = region.channel_available;
  return interval_delay(in).total_s;
}

OracleSolution solve_exact(const DeterministicInstance& inst) {
  const int n = inst.topology.size();
  const auto& vset = inst.config.velocity_set_mps;
  const int nv = static_cast<int>(vset.size());
  const double budget = inst.config.resolved_due_time();

  OracleSolution best;
  best.mean_completion_s = kInf;
  std::vector<Slot> best_slots;
  std::vector<int> best_servers;
  long long feasible = 0;
  const long long count = power(nv, n);
  for (long long code = 0; code < count; ++code) {
    const auto idx = assignment_of(code, n, nv);
    std::vector<RegionTraversal> trav;
    std::vector<Slot> slots;
    double entry = inst.config.initial_velocity_mps;
    double moving = 0.0;
    for (int r = 1; r <= n; ++r) {
      const auto t = traverse(inst, r, entry, vset[static_cast<std::size_t>(idx[static_cast<std::size_t>(r - 1)])]);
      trav.push_back(t);
      moving += t.travel_time_s;
      entry = t.exit_velocity_mps;
      for (const auto& s : slots_of(r, t.interval_count)) slots.push_back(s);
    }
    if (moving > budget) continue;
    ++feasible;
    const PathResult p = best_path(inst, slots, 0);
    const double mean = p.total / static_cast<double>(slots.size());
    if (mean < best.mean_completion_s) {
      best.mean_completion_s = mean;
      best.total_completion_s = p.total;
      best.interval_total = static_cast<int>(slots.size());
      best.velocities.clear();
      for (int i : idx) best.velocities.push_back(vset[static_cast<std::size_t>(i)]);
      best.traversals = trav;
      best_slots = slots;
      best_servers = p.servers;
    }
  }
  best.assignments = count;
  best.feasible_assignments = feasible;
  if (feasible == 0) {
    throw InfeasibleInstance("moving_time",
                             fmt::format("no velocity assignment finishes within the {} s moving-time budget", budget));
  }
  fill_decisions(best, best_slots, best_servers);
  best.audit = audit_solution(inst, best);
  return best;
}

OracleSolution solve_region_exact(const DeterministicInstance& inst, int region_id, double entry_velocity_mps,
                                  int prev_server) {
  const auto& vset = inst.config.velocity_set_mps;
  const auto& region = inst.topology.region(region_id);
  const double weight = region.length_m / inst.topology.total_length();
  const double budget = weight * inst.config.resolved_due_time();

  OracleSolution best;
  best.mean_completion_s = kInf;
  std::vector<Slot> best_slots;
  std::vector<int> best_servers;
  for (double v : vset) {
    ++best.assignments;
    const auto t = traverse(inst, region_id, entry_velocity_mps, v);
    if (t.travel_time_s > budget) continue;
    ++best.feasible_assignments;
    const auto slots = slots_of(region_id, t.interval_count);
    const PathResult p = best_path(inst, slots, prev_server);
    const double mean = p.total / static_cast<double>(slots.size());
    if (mean < best.mean_completion_s) {
      best.mean_completion_s = mean;
      best.total_completion_s = p.total;
      best.interval_total = static_cast<int>(slots.size());
      best.velocities = {v};
      best.traversals = {t};
      best_slots = slots;
      best_servers = p.servers;
    }
  }
  if (best.feasible_assignments == 0) {
    throw InfeasibleInstance("region_moving_time",
                             fmt::format("region {} cannot be crossed within its {} s share of the budget", region_id,
                                         budget));
  }
  best.decisions = {best_servers};
  best.audit.moving_time_s = best.traversals.front().travel_time_s;
  best.audit.budget_s = budget;
  return best;
}

OracleSolution solve_decomposed(const DeterministicInstance& inst) {
  OracleSolution out;
  double entry = inst.config.initial_velocity_mps;
  int prev = 0;
  for (int r = 1; r <= inst.topology.size(); ++r) {
    OracleSolution part = solve_region_exact(inst, r, entry, prev);
    entry = part.traversals.front().exit_velocity_mps;
    prev = part.decisions.front().empty() ? prev : part.decisions.front().back();
    out.velocities.push_back(part.velocities.front());
    out.traversals.push_back(part.traversals.front());
    out.decisions.push_back(part.decisions.front());
    out.interval_total += part.interval_total;
    out.total_completion_s += part.total_completion_s;
    out.assignments += part.assignments;
    out.feasible_assignments += part.feasible_assignments;
  }
  out.mean_completion_s = out.total_completion_s / out.interval_total;
  out.audit = audit_solution(inst, out);
  return out;
}

ConstraintAudit audit_solution(const DeterministicInstance& inst, const OracleSolution& sol) {
  ConstraintAudit a;
  a.budget_s = inst.config.resolved_due_time();
  int prev = 0;
  for (std::size_t r = 0; r < sol.traversals.size(); ++r) {
    const int region_id = static_cast<int>(r) + 1;
    a.moving_time_s += sol.traversals[r].travel_time_s;
    const auto& dec = sol.decisions[r];
    if (static_cast<int>(dec.size()) != sol.traversals[r].interval_count) a.single_target = false;
    const bool available = inst.topology.region(region_id).channel_available;
    for (std::size_t l = 0; l < dec.size(); ++l) {
      const int m = dec[l];
      if (m < 0 || m > inst.topology.size() || (m != 0 && !available)) {
        a.single_target = false;
        continue;
      }
      const int interval = static_cast<int>(l) + 1;
      if (oracle_interval_total(inst, region_id, interval, prev, m) > oracle_local_bound(inst, region_id, interval)) {
        a.completion_bound = false;
      }
      prev = m;
    }
  }
  a.moving_time = a.moving_time_s <= a.budget_s;
  return a;
}

nlohmann::json OracleSolution::to_json() const {
  nlohmann::json regions = nlohmann::json::array();
  for (std::size_t r = 0; r < traversals.size(); ++r) {
    regions.push_back({{"requested_velocity_mps", velocities[r]},
                       {"velocity_mps", traversals[r].target_velocity_mps},
                       {"travel_time_s", traversals[r].travel_time_s},
                       {"interval_count", traversals[r].interval_count},
                       {"servers", decisions[r]}});
  }
  return {{"mean_completion_s", mean_completion_s},
          {"total_completion_s", total_completion_s},
          {"interval_total", interval_total},
          {"regions", regions},
          {"assignments", assignments},
          {"feasible_assignments", feasible_assignments},
          {"audit",
           {{"completion_bound", audit.completion_bound},
            {"moving_time", audit.moving_time},
            {"single_target", audit.single_target},
            {"moving_time_s", audit.moving_time_s},
            {"budget_s", audit.budget_s}}}};
}

namespace {

ScenarioConfig desk_base(const std::string& name, std::vector<RegionDescriptor> regions, std::vector<FixedDraws> draws) {
  ScenarioConfig c = reference_preset();
  c.name = name;
  c.region_count = static_cast<int>(regions.size());
  c.satellite_ids.clear();
  for (const auto& r : regions) {
    if (r.tier == Tier::satellite) c.satellite_ids.push_back(r.region_id);
  }
  c.unavailable_count = static_cast<int>(std::count_if(regions.begin(), regions.end(),
                                                       [](const RegionDescriptor& r) { return !r.channel_available; }));
  c.explicit_regions = std::move(regions);
  c.fixed_draws = std::move(draws);
  c.velocity_set_mps = {5.0, 10.0, 15.0, 20.0};
  c.initial_velocity_mps = 5.0;
  c.replications = 1;
  return c;
}

}  // namespace

ScenarioConfig desk_instance_all_local() {
  ScenarioConfig c = desk_base("desk-all-local", {{1, Tier::cellular, 100.0, false, 10e9}}, {{1, {3.2e6}, {0.8e9}}});
  c.due_time_s = 19.0;
  return c;
}

ScenarioConfig desk_instance_fast_server() {
  ScenarioConfig c = desk_base("desk-fast-server", {{1, Tier::cellular, 100.0, true, 50e9}}, {{1, {3.2e6}, {0.8e9}}});
  c.due_time_s = 19.0;
  c.migration.migration_ratio = 0.0;
  return c;
}

ScenarioConfig desk_instance_dead_channel() {
  ScenarioConfig c = desk_base("desk-dead-channel",
                               {{1, Tier::cellular, 100.0, true, 19e9}, {2, Tier::cellular, 100.0, false, 10e9}},
                               {{1, {3.2e6}, {0.8e9}}, {2, {3.2e6}, {0.8e9}}});
  c.due_time_s = 30.0;
  return c;
}

}  // namespace orbit_mec
