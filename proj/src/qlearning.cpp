#include "orbit_mec/qlearning.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <numeric>

#include "orbit_mec/errors.hpp"

namespace orbit_mec {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Keys

KeyLayout::KeyLayout(std::vector<Field> fields) : fields_(std::move(fields)) {
  long double capacity = 1.0L;
  for (const auto& f : fields_) {
    if (f.radix == 0) throw InvalidParameter("key field " + f.name + " has radix 0");
    capacity *= f.radix;
  }
  if (capacity > 1.8e19L) throw InvalidParameter("key layout does not fit in 64 bits");
}

StateKey KeyLayout::encode(std::span<const std::uint32_t> values) const {
  if (values.size() != fields_.size()) throw InvalidParameter("key arity mismatch");
  StateKey key = 0;
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (values[i] >= fields_[i].radix) {
      throw InvalidParameter("key field " + fields_[i].name + " out of range: " + std::to_string(values[i]));
    }
    key = key * fields_[i].radix + values[i];
  }
  return key;
}

std::vector<std::uint32_t> KeyLayout::decode(StateKey key) const {
  std::vector<std::uint32_t> out(fields_.size());
  for (std::size_t i = fields_.size(); i-- > 0;) {
    out[i] = static_cast<std::uint32_t>(key % fields_[i].radix);
    key /= fields_[i].radix;
  }
  return out;
}

bool operator==(const KeyLayout& a, const KeyLayout& b) {
  if (a.fields_.size() != b.fields_.size()) return false;
  for (std::size_t i = 0; i < a.fields_.size(); ++i) {
    if (a.fields_[i].name != b.fields_[i].name || a.fields_[i].radix != b.fields_[i].radix) return false;
  }
  return true;
}

KeyLayout offload_key_layout(const ScenarioConfig& config, int region_count) {
  const auto n = static_cast<std::uint32_t>(region_count);
  return KeyLayout({{"region", n + 1},
                    {"channel", 2},
                    {"data", static_cast<std::uint32_t>(config.data_set_bits.size())},
                    {"cpu", static_cast<std::uint32_t>(config.local_cpu_set_hz.size())},
                    {"velocity", static_cast<std::uint32_t>(config.velocity_set_mps.size())},
                    {"prev_server", n + 1}});
}

KeyLayout velocity_key_layout(const ScenarioConfig& config, int region_count) {
  const auto n = static_cast<std::uint32_t>(region_count);
  return KeyLayout({{"prev_region", n + 1},
                    {"curr_region", n + 1},
                    {"entry_velocity", static_cast<std::uint32_t>(config.velocity_set_mps.size())}});
}

StateKey offload_key(const KeyLayout& layout, const OffloadState& s) {
  const std::array<std::uint32_t, 6> v{static_cast<std::uint32_t>(s.region_id),
                                       s.channel_available ? 1u : 0u,
                                       static_cast<std::uint32_t>(s.data_index),
                                       static_cast<std::uint32_t>(s.cpu_index),
                                       static_cast<std::uint32_t>(s.velocity_index),
                                       static_cast<std::uint32_t>(s.prev_server)};
  return layout.encode(v);
}

StateKey velocity_key(const KeyLayout& layout, const VelocityState& s) {
  const std::array<std::uint32_t, 3> v{static_cast<std::uint32_t>(s.prev_region),
                                       static_cast<std::uint32_t>(s.curr_region),
                                       static_cast<std::uint32_t>(s.entry_velocity_index)};
  return layout.encode(v);
}

// ---------------------------------------------------------------------------
// QTable

QTable::QTable(KeyLayout layout, int action_count) : layout_(std::move(layout)), action_count_(action_count) {
  if (action_count < 1) throw InvalidParameter("a Q table needs at least one action");
}

const QTable::Row* QTable::find(StateKey s) const {
  auto it = rows_.find(s);
  return it == rows_.end() ? nullptr : &it->second;
}

double QTable::value(StateKey s, int a) const {
  const Row* r = find(s);
  return r ? r->values.at(static_cast<std::size_t>(a)) : 0.0;
}

double QTable::best_value(StateKey s, std::span<const int> actions) const {
  const Row* r = find(s);
  if (!r || actions.empty()) return 0.0;
  double best = r->values[static_cast<std::size_t>(actions[0])];
  for (int a : actions.subspan(1)) best = std::max(best, r->values[static_cast<std::size_t>(a)]);
  return best;
}

int QTable::best_action(StateKey s, std::span<const int> actions) const {
  if (actions.empty()) throw InvalidParameter("best_action over an empty action set");
  const Row* r = find(s);
  int best = actions[0];
  if (!r) return *std::min_element(actions.begin(), actions.end());
  double best_v = r->values[static_cast<std::size_t>(best)];
  for (int a : actions.subspan(1)) {
    const double v = r->values[static_cast<std::size_t>(a)];
    if (v > best_v || (v == best_v && a < best)) {
      best = a;
      best_v = v;
    }
  }
  return best;
}

double QTable::best_value_all(StateKey s) const {
  const Row* r = find(s);
  return r ? *std::max_element(r->values.begin(), r->values.end()) : 0.0;
}

int QTable::best_action_all(StateKey s) const {
  const Row* r = find(s);
  if (!r) return 0;
  return static_cast<int>(std::max_element(r->values.begin(), r->values.end()) - r->values.begin());
}

void QTable::set(StateKey s, int a, double v) {
  if (a < 0 || a >= action_count_) throw InvalidParameter("action id out of range");
  auto [it, inserted] = rows_.try_emplace(s);
  if (inserted) {
    it->second.values.assign(static_cast<std::size_t>(action_count_), 0.0);
    it->second.visits.assign(static_cast<std::size_t>(action_count_), 0);
  }
  it->second.values[static_cast<std::size_t>(a)] = v;
  ++it->second.visits[static_cast<std::size_t>(a)];
  max_abs_ = std::max(max_abs_, std::abs(v));
}

std::uint32_t QTable::visits(StateKey s, int a) const {
  const Row* r = find(s);
  return r ? r->visits.at(static_cast<std::size_t>(a)) : 0;
}

std::size_t QTable::entry_count() const {
  std::size_t n = 0;
  for (const auto& [key, row] : rows_) {
    n += static_cast<std::size_t>(std::count_if(row.visits.begin(), row.visits.end(), [](auto c) { return c > 0; }));
  }
  return n;
}

std::uint64_t QTable::checksum() const {
  std::uint64_t acc = 0;
  for (const auto& [key, row] : rows_) {
    for (std::size_t a = 0; a < row.values.size(); ++a) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &row.values[a], sizeof bits);
      acc += splitmix64(key * 131 + a) ^ splitmix64(bits + row.visits[a]);
    }
  }
  return acc;
}

json QTable::to_json(const std::string& table_name) const {
  json fields = json::array();
  for (const auto& f : layout_.fields()) fields.push_back({{"name", f.name}, {"radix", f.radix}});

  std::vector<StateKey> keys;
  keys.reserve(rows_.size());
  for (const auto& [key, row] : rows_) keys.push_back(key);
  std::sort(keys.begin(), keys.end());

  json entries = json::array();
  for (StateKey key : keys) {
    const Row& row = rows_.at(key);
    const auto decoded = layout_.decode(key);
    json state = json::object();
    for (std::size_t i = 0; i < decoded.size(); ++i) state[layout_.fields()[i].name] = decoded[i];
    for (std::size_t a = 0; a < row.values.size(); ++a) {
      if (row.visits[a] == 0) continue;
      entries.push_back({{"state", state}, {"action", a}, {"value", row.values[a]}, {"visits", row.visits[a]}});
    }
  }
  return json{{"schema", kQTableSchema},
              {"table", table_name},
              {"action_count", action_count_},
              {"key_fields", fields},
              {"entries", entries}};
}

QTable QTable::from_json(const json& j) {
  if (j.value("schema", "") != kQTableSchema) throw ConfigError("/schema", "not a Q-table snapshot");
  std::vector<KeyLayout::Field> fields;
  for (const auto& f : j.at("key_fields")) fields.push_back({f.at("name").get<std::string>(), f.at("radix").get<std::uint32_t>()});
  KeyLayout layout(fields);
  QTable t(layout, j.at("action_count").get<int>());
  for (const auto& e : j.at("entries")) {
    std::vector<std::uint32_t> vals;
    for (const auto& f : fields) vals.push_back(e.at("state").at(f.name).get<std::uint32_t>());
    const StateKey key = layout.encode(vals);
    const int a = e.at("action").get<int>();
    t.set(key, a, e.at("value").get<double>());
    auto& row = t.rows_.at(key);
    row.visits[static_cast<std::size_t>(a)] = e.at("visits").get<std::uint32_t>();
  }
  return t;
}

// ---------------------------------------------------------------------------
// Monitor

ConvergenceMonitor::ConvergenceMonitor(double discount, double r_max) : discount_(discount), r_max_(r_max) {}

void ConvergenceMonitor::observe_interval_count(int interval_count) { l_max_ = std::max(l_max_, interval_count); }

void ConvergenceMonitor::check_offload(double value) {
  ++q1_writes_;
  peak_q1_ = std::max(peak_q1_, std::abs(value));
  if (std::abs(value) > bound_q1()) violations_.push_back({'1', value, bound_q1(), q1_writes_});
}

void ConvergenceMonitor::check_velocity(double value) {
  ++q2_writes_;
  peak_q2_ = std::max(peak_q2_, std::abs(value));
  if (std::abs(value) > bound_q2()) violations_.push_back({'2', value, bound_q2(), q2_writes_});
}

json ConvergenceMonitor::report() const {
  return json{{"r_max", r_max_},
              {"l_max", l_max_},
              {"bound_q1", bound_q1()},
              {"bound_q2", bound_q2()},
              {"peak_q1", peak_q1_},
              {"peak_q2", peak_q2_},
              {"q1_writes", q1_writes_},
              {"q2_writes", q2_writes_},
              {"violations", violations_.size()}};
}

// ---------------------------------------------------------------------------
// Action selection and updates

int select_action(const QTable& table, StateKey s, std::span<const int> legal, double epsilon, Rng& rng) {
  if (legal.empty()) throw InvalidParameter("select_action needs a non-empty action set");
  if (epsilon > 0.0 && rng.uniform01() < epsilon) return legal[rng.uniform_index(legal.size())];
  return table.best_action(s, legal);
}

double update_offload(QTable& q1, StateKey s, int a, double reward, const StateKey* next,
                      std::span<const int> next_legal, const Hyperparams& hyper) {
  const double future = next ? q1.best_value(*next, next_legal) : 0.0;
  const double old = q1.value(s, a);
  const double updated = old + hyper.learning_rate * (reward + hyper.discount * future - old);
  q1.set(s, a, updated);
  return updated;
}

double update_velocity(QTable& q2, StateKey s, int a, double region_reward, const StateKey* next,
                       const Hyperparams& hyper) {
  const double future = next ? q2.best_value_all(*next) : 0.0;
  const double old = q2.value(s, a);
  const double updated = old + hyper.learning_rate * (region_reward - old + hyper.discount * future);
  q2.set(s, a, updated);
  return updated;
}

// ---------------------------------------------------------------------------
// Episode loop

namespace {

struct Learner {
  QTable* q1 = nullptr;
  QTable* q2 = nullptr;
  const Hyperparams* hyper = nullptr;
  ConvergenceMonitor* monitor = nullptr;
  Rng* explore = nullptr;
  long long* steps = nullptr;
  long long episodes_done = 0;

  double epsilon() const { return hyper->epsilon_at(*steps, episodes_done); }
};

int velocity_action_index(std::span<const double> set, double v) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i] == v) return static_cast<int>(i);
  }
  throw InvalidParameter("velocity " + std::to_string(v) + " is not in the velocity set");
}

EpisodeStats run_episode(Environment& env, const QTable& q1, const QTable& q2, const AgentConfig& agent,
                         Learner* learn) {
  const ScenarioConfig& cfg = env.config();
  const std::span<const double> vset = cfg.velocity_set_mps;
  std::vector<int> velocity_ids(vset.size());
  std::iota(velocity_ids.begin(), velocity_ids.end(), 0);

  const bool learn_q1 = learn && agent.offload == OffloadMode::learned;
  const bool learn_q2 = learn && agent.velocity == VelocityMode::learned;

  struct Pending {
    StateKey s = 0;
    int a = 0;
    double r = 0.0;
    bool active = false;
  };
  Pending p1, p2;

  Rng idle(0);  // greedy rollouts never draw from it
  Rng& rng = learn ? *learn->explore : idle;

  EpisodeStats stats;
  env.reset();
  while (!env.episode_done()) {
    // Region entry: velocity decision.
    const VelocityState vs = env.velocity_state();
    const StateKey vkey = velocity_key(q2.layout(), vs);
    if (learn_q2 && p2.active) {
      learn->monitor->check_velocity(update_velocity(*learn->q2, p2.s, p2.a, p2.r, &vkey, *learn->hyper));
    }
    const auto& region = env.topology().region(vs.curr_region);
    int vaction = 0;
    switch (agent.velocity) {
      case VelocityMode::learned:
        vaction = select_action(q2, vkey, velocity_ids, learn ? learn->epsilon() : 0.0, rng);
        break;
      case VelocityMode::fixed:
        vaction = velocity_action_index(vset, agent.fixed_velocities.at(static_cast<std::size_t>(vs.curr_region - 1)));
        break;
      case VelocityMode::channel_rule:
        vaction = region.channel_available ? 0 : static_cast<int>(vset.size()) - 1;
        break;
    }
    const RegionTraversal trav = env.step_region(vset[static_cast<std::size_t>(vaction)]);
    if (learn) learn->monitor->observe_interval_count(trav.interval_count);

    double region_sum = 0.0;
    for (;;) {
      const OffloadState& os = env.offload_state();
      const StateKey key = offload_key(q1.layout(), os);
      const std::span<const int> legal = env.legal_actions(os);
      if (learn_q1 && p1.active) {
        learn->monitor->check_offload(update_offload(*learn->q1, p1.s, p1.a, p1.r, &key, legal, *learn->hyper));
      }
      int action = 0;
      switch (agent.offload) {
        case OffloadMode::learned:
          action = select_action(q1, key, legal, learn ? learn->epsilon() : 0.0, rng);
          break;
        case OffloadMode::local_only:
          action = 0;
          break;
        case OffloadMode::channel_rule:
          action = os.channel_available ? os.region_id : 0;
          break;
      }
      const IntervalStep step = env.step_interval(action);
      if (learn) ++*learn->steps;
      region_sum += step.reward;
      p1 = {key, action, step.reward, true};
      if (step.region_done) break;
    }
    p2 = {vkey, vaction, region_sum, true};
    RegionSummary rs;
    rs.region_id = vs.curr_region;
    rs.velocity_mps = trav.target_velocity_mps;
    rs.interval_count = trav.interval_count;
    rs.reward = region_sum;
    rs.mean_instant_reward = region_sum / trav.interval_count;
    stats.regions.push_back(rs);
  }
  if (learn_q1 && p1.active) {
    learn->monitor->check_offload(update_offload(*learn->q1, p1.s, p1.a, p1.r, nullptr, {}, *learn->hyper));
  }
  if (learn_q2 && p2.active) {
    learn->monitor->check_velocity(update_velocity(*learn->q2, p2.s, p2.a, p2.r, nullptr, *learn->hyper));
  }

  const EpisodeTrace& tr = env.trace();
  stats.mean_completion_s = tr.mean_completion_s;
  stats.moving_time_s = tr.moving_time_s;
  stats.interval_total = tr.interval_total;
  stats.illegal_actions = tr.illegal_actions;
  double sum = 0.0;
  for (const auto& r : stats.regions) sum += r.reward;
  stats.episode_reward = sum / static_cast<double>(stats.regions.size());
  return stats;
}

}  // namespace

DualAgentTrainer::DualAgentTrainer(const ScenarioConfig& config, const Topology& topology, const Hyperparams& hyper,
                                   std::uint64_t seed, AgentConfig agent)
    : hyper_(hyper),
      agent_(std::move(agent)),
      env_(config, topology, derive_seed(seed, Stream::draws)),
      q1_(offload_key_layout(config, topology.size()), topology.size() + 1),
      q2_(velocity_key_layout(config, topology.size()), static_cast<int>(config.velocity_set_mps.size())),
      monitor_(hyper.discount),
      explore_(derive_seed(seed, Stream::exploration)) {
  hyper_.validate();
}

EpisodeStats DualAgentTrainer::train_episode() {
  Learner l{&q1_, &q2_, &hyper_, &monitor_, &explore_, &steps_, episodes_};
  EpisodeStats s = run_episode(env_, q1_, q2_, agent_, &l);
  ++episodes_;
  return s;
}

EpisodeStats run_greedy_episode(Environment& env, const QTable& q1, const QTable& q2, const AgentConfig& agent) {
  return run_episode(env, q1, q2, agent, nullptr);
}

TrainingResult train(const ScenarioConfig& config, const Topology& topology, const Hyperparams& hyper,
                     std::uint64_t seed, const AgentConfig& agent) {
  DualAgentTrainer trainer(config, topology, hyper, seed, agent);
  TrainingResult out{trainer.offload_table(), trainer.velocity_table(), {}, {}, trainer.monitor(), 0};
  out.reward_series.reserve(static_cast<std::size_t>(hyper.episodes));
  out.mean_completion_series.reserve(static_cast<std::size_t>(hyper.episodes));
  for (int e = 0; e < hyper.episodes; ++e) {
    const EpisodeStats s = trainer.train_episode();
    out.reward_series.push_back(s.episode_reward);
    out.mean_completion_series.push_back(s.mean_completion_s);
  }
  out.offload_table = std::move(trainer.offload_table());
  out.velocity_table = std::move(trainer.velocity_table());
  out.monitor = trainer.monitor();
  out.steps = trainer.steps();
  return out;
}

EvalMetrics greedy_policy_eval(const QTable& q1, const QTable& q2, const ScenarioConfig& config,
                               const Topology& topology, std::uint64_t seed, int episodes, const AgentConfig& agent) {
  if (episodes < 1) throw InvalidParameter("evaluation needs at least one episode");
  Environment env(config, topology, derive_seed(seed, Stream::evaluation));
  EvalMetrics m;
  m.episodes = episodes;
  for (int e = 0; e < episodes; ++e) {
    const EpisodeStats s = run_greedy_episode(env, q1, q2, agent);
    m.mean_completion_s += s.mean_completion_s;
    m.mean_moving_time_s += s.moving_time_s;
    m.mean_episode_reward += s.episode_reward;
    if (e + 1 == episodes) {
      for (const auto& r : s.regions) m.velocities.push_back(r.velocity_mps);
    }
  }
  m.mean_completion_s /= episodes;
  m.mean_moving_time_s /= episodes;
  m.mean_episode_reward /= episodes;
  return m;
}

std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
  std::vector<double> out(series.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i >= window) acc -= series[i - window];
    out[i] = acc / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

}  // namespace orbit_mec
