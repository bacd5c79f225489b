#pragma once

// Experiment runner: replications x policies on a worker pool, aggregated into
// plot-ready CSV plus a JSON manifest. Every output byte is a function of the
// scenario (its hash) and the master seed; thread count never leaks into it.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orbit_mec/oracle.hpp"
#include "orbit_mec/policies.hpp"

namespace orbit_mec {

inline constexpr const char* kManifestSchema = "orbit-mec.manifest/1";
inline constexpr const char* kUnitSchema = "orbit-mec.unit/1";
inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::size_t kRewardWindow = 100;

/// Seed of replication i: derive_seed(master, i). Topology and task draws of
/// the replication come from sub-streams of it.
std::uint64_t replication_seed(std::uint64_t master_seed, int replication);
Topology replication_topology(const ScenarioConfig& config, std::uint64_t replication_seed);

/// ORBIT_MEC_THREADS if set and positive, else the hardware concurrency.
int worker_count();

struct ExperimentOptions {
  std::vector<PolicyKind> policies;
  std::string out_dir;  // empty: nothing is written
  int threads = 0;      // 0: worker_count()
  bool save_tables = false;
  bool progress = false;  // one line per finished unit on stderr
  std::string command = "train";
};

/// One (policy, replication) result.
struct UnitResult {
  PolicyKind kind;
  int replication = 0;
  std::uint64_t seed = 0;
  EvalMetrics eval;
  std::vector<double> reward_series;
  long long q1_writes = 0;  // Q1 updates during training
  std::size_t q1_states = 0;
  std::size_t q2_states = 0;
  std::size_t violations = 0;
  double peak_q1 = 0.0;
  double peak_q2 = 0.0;
  double bound_q1 = 0.0;
  double bound_q2 = 0.0;
  std::vector<double> fixed_velocities;  // greedy's selected assignment

  nlohmann::json to_json(std::uint64_t config_hash) const;
  static UnitResult from_json(const nlohmann::json& j, const ScenarioConfig& config);
};

struct Stat {
  int n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; NaN for n < 2
  double ci95 = 0.0;    // Student-t half-width; NaN for n < 2
};

/// Pure aggregation over replications.
Stat describe(const std::vector<double>& values);

struct PolicySummary {
  std::string policy;
  Stat completion;
  Stat moving_time;
  Stat eval_reward;
};

std::vector<PolicySummary> summarize(const std::vector<UnitResult>& units, const std::vector<PolicyKind>& policies);

struct ExperimentResult {
  std::vector<UnitResult> units;  // policy-major, then replication
  std::vector<PolicySummary> summary;
  std::uint64_t config_hash = 0;
  int resumed_units = 0;
};

/// Trains and evaluates every policy on every replication. With out_dir set,
/// writes units/ (per-unit JSON, reused on rerun when hash and seed match),
/// rewards.csv, summary.csv, runs.csv, scatter.csv and manifest.json.
ExperimentResult run_experiment(const ScenarioConfig& config, const ExperimentOptions& options);

enum class SweepAxis { n_ch, rho, theta, delta_d };
SweepAxis parse_sweep_axis(const std::string& text);
std::string to_string(SweepAxis axis);

/// The scenario at one sweep point. delta_d is in MB (1 MB = 8e6 bits) and is
/// added to every data-size set member.
ScenarioConfig apply_axis(const ScenarioConfig& config, SweepAxis axis, double value);

struct SweepPoint {
  double value = 0.0;
  ExperimentResult result;
};

/// One experiment per value (each in <out>/<axis>-<value>/), same master seed,
/// merged into <out>/sweep_summary.csv and <out>/scatter.csv.
std::vector<SweepPoint> sweep(const ScenarioConfig& config, SweepAxis axis, const std::vector<double>& values,
                              const ExperimentOptions& options);

struct GapReport {
  OracleSolution oracle;
  OracleSolution decomposed;
  std::string policy;
  double policy_completion_s = 0.0;
  double policy_moving_time_s = 0.0;
  std::vector<double> policy_velocities;
  double gap = 0.0;  // (policy - oracle) / oracle
  bool policy_within_budget = true;

  nlohmann::json to_json() const;
};

/// Trains `policy` on a deterministic desk instance, evaluates it greedily and
/// compares with the exact optimum.
GapReport oracle_gap(const ScenarioConfig& config, const PolicyKind& policy, std::uint64_t seed);

/// Re-evaluates tables written by `train --save-tables`.
EvalMetrics evaluate_saved(const ScenarioConfig& config, const std::string& run_dir, const PolicyKind& policy,
                           int replication, std::uint64_t eval_seed, int episodes);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace orbit_mec
