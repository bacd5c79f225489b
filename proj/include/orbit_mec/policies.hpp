#pragma once

// Baselines and ablations run through the same dual-agent machinery: each
// policy is an AgentConfig plus, for the simplified greedy search, an outer
// loop that picks the fixed per-region velocities.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "orbit_mec/qlearning.hpp"

namespace orbit_mec {

enum class PolicyTag { proposed, conventional, local_exec, simplified_greedy, case1, case2 };

struct PolicyKind {
  PolicyTag tag = PolicyTag::proposed;
  double velocity_mps = 0.0;  // conventional and local_exec only

  /// CLI form: proposed | conventional:<v> | local:<v> | greedy | case1 | case2.
  std::string label() const;
  friend bool operator==(const PolicyKind&, const PolicyKind&) = default;
};

/// Throws ConfigError("/policy", ...) on an unknown tag or a velocity outside
/// the configured set.
PolicyKind parse_policy(std::string_view text, const ScenarioConfig& config);
std::vector<PolicyKind> parse_policy_list(std::string_view comma_separated, const ScenarioConfig& config);

/// The fixed parts of a policy. Greedy gets its velocities from the search.
AgentConfig agent_for(const PolicyKind& kind, int region_count);

struct GreedySearch {
  std::vector<double> assignment;  // best whole-trajectory assignment seen
  double best_score = 0.0;         // its average region reward r_n
  int evaluations = 0;             // candidate episodes run
  int evaluations_per_pass = 0;    // |V|·N
  int passes = 0;
  int refine_episodes = 0;         // Q1-only episodes at the kept assignment
  std::vector<double> scores;      // episode score of every evaluation, in order
};

struct PolicyRun {
  PolicyKind kind;
  AgentConfig agent;
  QTable offload_table;
  QTable velocity_table;
  ConvergenceMonitor monitor;
  std::vector<double> reward_series;  // one per training episode; empty for local_exec
  EvalMetrics eval;
  GreedySearch greedy;  // simplified_greedy only
};

/// conventional:<v>: Q1 learned, velocity fixed at v in every region.
PolicyRun conventional_offloading(const ScenarioConfig& config, const Topology& topology, double velocity_mps,
                                  const Hyperparams& hyper, std::uint64_t seed);

/// Every interval computed locally at a fixed velocity; nothing is trained.
PolicyRun local_execution(const ScenarioConfig& config, const Topology& topology, double velocity_mps,
                          const Hyperparams& hyper, std::uint64_t seed);

/// Local search over per-region velocities with Q1 learning underneath. A
/// single pass of |V|·N episodes visits every region in order and tries every
/// velocity there with the others held, keeping the one with the best average
/// instantaneous reward in that region. The remaining episodes keep training
/// Q1 at the kept assignment, so the evaluated tables have seen the
/// velocities they are evaluated at.
PolicyRun simplified_greedy(const ScenarioConfig& config, const Topology& topology, const Hyperparams& hyper,
                            std::uint64_t seed);

/// case1: velocity by channel rule, offloading learned. case2: offloading by
/// channel rule, velocity learned.
PolicyRun case_rule_policy(const ScenarioConfig& config, const Topology& topology, PolicyTag which,
                           const Hyperparams& hyper, std::uint64_t seed);

PolicyRun proposed_scheme(const ScenarioConfig& config, const Topology& topology, const Hyperparams& hyper,
                          std::uint64_t seed);

/// Dispatches on kind.tag.
PolicyRun run_policy(const PolicyKind& kind, const ScenarioConfig& config, const Topology& topology,
                     const Hyperparams& hyper, std::uint64_t seed);

}  // namespace orbit_mec
