#pragma once

// Dual-agent tabular Q-learning. Q1 (offloading) acts once per interval on
// OffloadState; Q2 (velocity) acts once per region on VelocityState and learns
// from the region's accumulated reward.

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "orbit_mec/environment.hpp"
#include "orbit_mec/hyperparams.hpp"
#include "orbit_mec/random.hpp"

namespace orbit_mec {

inline constexpr const char* kQTableSchema = "orbit-mec.qtable/1";

using StateKey = std::uint64_t;

/// Mixed-radix packing of a tuple of small indices into one StateKey.
class KeyLayout {
 public:
  struct Field {
    std::string name;
    std::uint32_t radix = 1;
  };

  KeyLayout() = default;
  explicit KeyLayout(std::vector<Field> fields);

  StateKey encode(std::span<const std::uint32_t> values) const;
  std::vector<std::uint32_t> decode(StateKey key) const;
  const std::vector<Field>& fields() const { return fields_; }

  friend bool operator==(const KeyLayout& a, const KeyLayout& b);

 private:
  std::vector<Field> fields_;
};

KeyLayout offload_key_layout(const ScenarioConfig& config, int region_count);
KeyLayout velocity_key_layout(const ScenarioConfig& config, int region_count);
StateKey offload_key(const KeyLayout& layout, const OffloadState& s);
StateKey velocity_key(const KeyLayout& layout, const VelocityState& s);

/// Sparse over states, dense over actions. Unvisited entries read as 0.
class QTable {
 public:
  QTable(KeyLayout layout, int action_count);

  double value(StateKey s, int a) const;
  /// Max over `actions`; 0 for a state never written.
  double best_value(StateKey s, std::span<const int> actions) const;
  /// Argmax over `actions`, ties to the lowest id.
  int best_action(StateKey s, std::span<const int> actions) const;
  double best_value_all(StateKey s) const;
  int best_action_all(StateKey s) const;

  void set(StateKey s, int a, double v);
  std::uint32_t visits(StateKey s, int a) const;

  double max_abs() const { return max_abs_; }
  int action_count() const { return action_count_; }
  std::size_t state_count() const { return rows_.size(); }
  /// Number of (state, action) entries written at least once.
  std::size_t entry_count() const;
  const KeyLayout& layout() const { return layout_; }

  /// Order-independent digest of every stored value and visit count.
  std::uint64_t checksum() const;

  nlohmann::json to_json(const std::string& table_name) const;
  static QTable from_json(const nlohmann::json& j);

 private:
  struct Row {
    std::vector<double> values;
    std::vector<std::uint32_t> visits;
  };

  const Row* find(StateKey s) const;

  KeyLayout layout_;
  int action_count_;
  std::unordered_map<StateKey, Row> rows_;
  double max_abs_ = 0.0;
};

/// Runtime check of the boundedness result: |Q1| <= r_max / (1 - gamma) and
/// |Q2| <= L_max r_max / (1 - gamma), with L_max the largest interval count
/// seen so far.
class ConvergenceMonitor {
 public:
  struct Violation {
    char table = '1';
    double value = 0.0;
    double bound = 0.0;
    long long write_index = 0;
  };

  explicit ConvergenceMonitor(double discount, double r_max = kRewardMax);

  void observe_interval_count(int interval_count);
  void check_offload(double value);
  void check_velocity(double value);

  double r_max() const { return r_max_; }
  int l_max() const { return l_max_; }
  double bound_q1() const { return r_max_ / (1.0 - discount_); }
  double bound_q2() const { return static_cast<double>(l_max_) * r_max_ / (1.0 - discount_); }
  long long q1_writes() const { return q1_writes_; }
  long long q2_writes() const { return q2_writes_; }
  double peak_q1() const { return peak_q1_; }
  double peak_q2() const { return peak_q2_; }
  const std::vector<Violation>& violations() const { return violations_; }

  nlohmann::json report() const;

 private:
  double discount_;
  double r_max_;
  int l_max_ = 1;
  long long q1_writes_ = 0;
  long long q2_writes_ = 0;
  double peak_q1_ = 0.0;
  double peak_q2_ = 0.0;
  std::vector<Violation> violations_;
};

/// Epsilon-greedy over `legal`. Skips the coin flip when epsilon is 0.
int select_action(const QTable& table, StateKey s, std::span<const int> legal, double epsilon, Rng& rng);

/// One TD(0) step on Q1. `next` is null at the end of the journey; the max
/// over next actions is restricted to `next_legal`.
double update_offload(QTable& q1, StateKey s, int a, double reward, const StateKey* next,
                      std::span<const int> next_legal, const Hyperparams& hyper);

/// One TD(0) step on Q2 with the region reward; `next` is null after the last region.
double update_velocity(QTable& q2, StateKey s, int a, double region_reward, const StateKey* next,
                       const Hyperparams& hyper);

enum class VelocityMode { learned, fixed, channel_rule };
enum class OffloadMode { learned, local_only, channel_rule };

/// Which parts of the dual agent learn and which follow a fixed rule.
struct AgentConfig {
  VelocityMode velocity = VelocityMode::learned;
  OffloadMode offload = OffloadMode::learned;
  std::vector<double> fixed_velocities;  // per region, used by VelocityMode::fixed
};

struct RegionSummary {
  int region_id = 0;
  double velocity_mps = 0.0;
  int interval_count = 0;
  double reward = 0.0;  // accumulated
  double mean_instant_reward = 0.0;
};

struct EpisodeStats {
  double mean_completion_s = 0.0;
  double moving_time_s = 0.0;
  double episode_reward = 0.0;  // mean of the accumulated region rewards
  int interval_total = 0;
  int illegal_actions = 0;
  std::vector<RegionSummary> regions;
};

/// Holds the two tables, the exploration stream and the epsilon clock of one
/// training run. Single-writer.
class DualAgentTrainer {
 public:
  DualAgentTrainer(const ScenarioConfig& config, const Topology& topology, const Hyperparams& hyper,
                   std::uint64_t seed, AgentConfig agent = {});

  /// One training episode (epsilon-greedy, both tables updated where learned).
  EpisodeStats train_episode();

  AgentConfig& agent() { return agent_; }
  const AgentConfig& agent() const { return agent_; }
  const QTable& offload_table() const { return q1_; }
  const QTable& velocity_table() const { return q2_; }
  QTable& offload_table() { return q1_; }
  QTable& velocity_table() { return q2_; }
  const ConvergenceMonitor& monitor() const { return monitor_; }
  Environment& environment() { return env_; }
  double epsilon() const { return hyper_.epsilon_at(steps_, episodes_); }
  long long steps() const { return steps_; }
  long long episodes() const { return episodes_; }

 private:
  Hyperparams hyper_;
  AgentConfig agent_;
  Environment env_;
  QTable q1_;
  QTable q2_;
  ConvergenceMonitor monitor_;
  Rng explore_;
  long long steps_ = 0;
  long long episodes_ = 0;
};

/// Greedy rollout of fixed tables: epsilon 0, no writes.
EpisodeStats run_greedy_episode(Environment& env, const QTable& q1, const QTable& q2, const AgentConfig& agent);

struct TrainingResult {
  QTable offload_table;
  QTable velocity_table;
  std::vector<double> reward_series;  // per-episode mean region reward
  std::vector<double> mean_completion_series;
  ConvergenceMonitor monitor;
  long long steps = 0;
};

TrainingResult train(const ScenarioConfig& config, const Topology& topology, const Hyperparams& hyper,
                     std::uint64_t seed, const AgentConfig& agent = {});

struct EvalMetrics {
  double mean_completion_s = 0.0;
  double mean_moving_time_s = 0.0;
  double mean_episode_reward = 0.0;
  int episodes = 0;
  std::vector<double> velocities;  // per region, from the last evaluation episode
};

EvalMetrics greedy_policy_eval(const QTable& q1, const QTable& q2, const ScenarioConfig& config,
                               const Topology& topology, std::uint64_t seed, int episodes,
                               const AgentConfig& agent = {});

/// Trailing moving average with the given window (shorter at the start).
std::vector<double> moving_average(std::span<const double> series, std::size_t window);

}  // namespace orbit_mec
