#pragma once

// Exact solver for small deterministic instances. Every velocity assignment in
// V^N is enumerated; for each one the offloading decisions are optimized by a
// dynamic program over intervals whose state is the previously executed
// server, which is exact because migration cost only couples neighbours.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orbit_mec/mobility_model.hpp"
#include "orbit_mec/scenario.hpp"

namespace orbit_mec {

inline constexpr int kOracleMaxRegions = 3;
inline constexpr int kOracleMaxVelocities = 4;
inline constexpr double kOracleMaxWork = 1e7;

/// A scenario with an explicit region chain and fixed task draws.
struct DeterministicInstance {
  ScenarioConfig config;
  Topology topology;

  /// Throws InfeasibleInstance("guard", ...) when the instance is outside the
  /// desk-scale limits or lacks explicit regions / fixed draws.
  static DeterministicInstance from_config(const ScenarioConfig& config);

  /// |V|^N · (Σ L_n over the slowest assignment) · (N+1)^2: the DP work bound
  /// checked against kOracleMaxWork.
  double work_bound() const;
};

struct ConstraintAudit {
  bool completion_bound = true;  // every interval total <= its local bound
  bool moving_time = true;       // total travel time <= budget
  bool single_target = true;     // one legal executed target per interval
  double moving_time_s = 0.0;
  double budget_s = 0.0;
  bool all() const { return completion_bound && moving_time && single_target; }
};

struct OracleSolution {
  double mean_completion_s = 0.0;
  double total_completion_s = 0.0;
  int interval_total = 0;
  std::vector<double> velocities;            // requested per region
  std::vector<RegionTraversal> traversals;   // as executed (after clamping)
  std::vector<std::vector<int>> decisions;   // per region, per interval executed server
  ConstraintAudit audit;
  long long assignments = 0;           // enumerated
  long long feasible_assignments = 0;  // within the moving-time budget

  nlohmann::json to_json() const;
};

/// Minimizes the journey mean completion time under the per-interval local
/// bound and the total moving-time budget.
OracleSolution solve_exact(const DeterministicInstance& instance);

/// One region in isolation: minimizes the region's mean completion time under
/// T_goal <= k_n·T_move, starting from the given entry velocity and
/// previously executed server.
OracleSolution solve_region_exact(const DeterministicInstance& instance, int region_id, double entry_velocity_mps,
                                  int prev_server);

/// Chains solve_region_exact over regions 1..N, feeding each region's exit
/// velocity and last server into the next, and reports the concatenated
/// journey objective.
OracleSolution solve_decomposed(const DeterministicInstance& instance);

/// Replays the decisions of a solution and checks every constraint.
ConstraintAudit audit_solution(const DeterministicInstance& instance, const OracleSolution& solution);

/// The per-interval delay the oracle optimizes. Exposed for cross-checks.
double oracle_interval_total(const DeterministicInstance& instance, int region_id, int interval, int prev_server,
                             int server);
double oracle_local_bound(const DeterministicInstance& instance, int region_id, int interval);

/// Desk instances used by tests and the acceptance suite.
ScenarioConfig desk_instance_all_local();
ScenarioConfig desk_instance_fast_server();
ScenarioConfig desk_instance_dead_channel();

}  // namespace orbit_mec
