#include "orbit_mec/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "orbit_mec/errors.hpp"

namespace orbit_mec {

namespace {

bool in_set(const std::vector<double>& set, double v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

double parse_velocity(std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("/policy", "bad velocity \"" + std::string(text) + "\"");
  }
  return v;
}

PolicyRun finish(const PolicyKind& kind, AgentConfig agent, TrainingResult&& tr, const ScenarioConfig& config,
                 const Topology& topology, const Hyperparams& hyper, std::uint64_t seed) {
  PolicyRun run{kind, std::move(agent), std::move(tr.offload_table), std::move(tr.velocity_table),
                std::move(tr.monitor), std::move(tr.reward_series), {}, {}};
  run.eval = greedy_policy_eval(run.offload_table, run.velocity_table, config, topology, seed, hyper.eval_episodes,
                                run.agent);
  return run;
}

PolicyRun train_and_eval(const PolicyKind& kind, const ScenarioConfig& config, const Topology& topology,
                         const Hyperparams& hyper, std::uint64_t seed) {
  AgentConfig agent = agent_for(kind, topology.size());
  TrainingResult tr = train(config, topology, hyper, seed, agent);
  return finish(kind, std::move(agent), std::move(tr), config, topology, hyper, seed);
}

}  // namespace

std::string PolicyKind::label() const {
  switch (tag) {
    case PolicyTag::proposed:
      return "proposed";
    case PolicyTag::conventional:
      return fmt::format("conventional:{}", velocity_mps);
    case PolicyTag::local_exec:
      return fmt::format("local:{}", velocity_mps);
    case PolicyTag::simplified_greedy:
      return "greedy";
    case PolicyTag::case1:
      return "case1";
    case PolicyTag::case2:
      return "case2";
  }
  return "?";
}

PolicyKind parse_policy(std::string_view text, const ScenarioConfig& config) {
  PolicyKind k;
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const bool has_arg = colon != std::string_view::npos;
  if (head == "conventional" || head == "local") {
    if (!has_arg) throw ConfigError("/policy", std::string(head) + " needs a velocity, e.g. " + std::string(head) + ":10");
    k.tag = head == "conventional" ? PolicyTag::conventional : PolicyTag::local_exec;
    k.velocity_mps = parse_velocity(text.substr(colon + 1));
    if (!in_set(config.velocity_set_mps, k.velocity_mps)) {
      throw ConfigError("/policy", fmt::format("velocity {} is not in the velocity set", k.velocity_mps));
    }
    return k;
  }
  if (has_arg) throw ConfigError("/policy", "policy \"" + std::string(head) + "\" takes no argument");
  if (head == "proposed") {
    k.tag = PolicyTag::proposed;
  } else if (head == "greedy") {
    k.tag = PolicyTag::simplified_greedy;
  } else if (head == "case1") {
    k.tag = PolicyTag::case1;
  } else if (head == "case2") {
    k.tag = PolicyTag::case2;
  } else {
    throw ConfigError("/policy", "unknown policy \"" + std::string(text) + "\"");
  }
  return k;
}

std::vector<PolicyKind> parse_policy_list(std::string_view text, const ScenarioConfig& config) {
  std::vector<PolicyKind> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    if (!item.empty()) out.push_back(parse_policy(item, config));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("/policy", "no policy given");
  return out;
}

AgentConfig agent_for(const PolicyKind& kind, int region_count) {
  AgentConfig a;
  const auto n = static_cast<std::size_t>(region_count);
  switch (kind.tag) {
    case PolicyTag::proposed:
      break;
    case PolicyTag::conventional:
      a.velocity = VelocityMode::fixed;
      a.fixed_velocities.assign(n, kind.velocity_mps);
      break;
    case PolicyTag::local_exec:
      a.velocity = VelocityMode::fixed;
      a.offload = OffloadMode::local_only;
      a.fixed_velocities.assign(n, kind.velocity_mps);
      break;
    case PolicyTag::simplified_greedy:
      a.velocity = VelocityMode::fixed;
      break;
    case PolicyTag::case1:
      a.velocity = VelocityMode::channel_rule;
      break;
    case PolicyTag::case2:
      a.offload = OffloadMode::channel_rule;
      break;
  }
  return a;
}

PolicyRun proposed_scheme(const ScenarioConfig& config, const Topology& topology, const Hyperparams& hyper,
                          std::uint64_t seed) {
  return train_and_eval(PolicyKind{PolicyTag::proposed, 0.0}, config, topology, hyper, seed);
}

PolicyRun conventional_offloading(const ScenarioConfig& config, const Topology& topology, double velocity_mps,
                                  const Hyperparams& hyper, std::uint64_t seed) {
  if (!in_set(config.velocity_set_mps, velocity_mps)) throw InvalidParameter("velocity is not in the velocity set");
  return train_and_eval(PolicyKind{PolicyTag::conventional, velocity_mps}, config, topology, hyper, seed);
}

PolicyRun local_execution(const ScenarioConfig& config, const Topology& topology, double velocity_mps,
                          const Hyperparams& hyper, std::uint64_t seed) {
  if (!in_set(config.velocity_set_mps, velocity_mps)) throw InvalidParameter("velocity is not in the velocity set");
  const PolicyKind kind{PolicyTag::local_exec, velocity_mps};
  AgentConfig agent = agent_for(kind, topology.size());
  DualAgentTrainer idle(config, topology, hyper, seed, agent);
  PolicyRun run{kind, std::move(agent), idle.offload_table(), idle.velocity_table(), idle.monitor(), {}, {}, {}};
  run.eval = greedy_policy_eval(run.offload_table, run.velocity_table, config, topology, seed, hyper.eval_episodes,
                                run.agent);
  return run;
}

PolicyRun case_rule_policy(const ScenarioConfig& config, const Topology& topology, PolicyTag which,
                           const Hyperparams& hyper, std::uint64_t seed) {
  if (which != PolicyTag::case1 && which != PolicyTag::case2) throw InvalidParameter("expected case1 or case2");
  return train_and_eval(PolicyKind{which, 0.0}, config, topology, hyper, seed);
}

PolicyRun simplified_greedy(const ScenarioConfig& config, const Topology& topology, const Hyperparams& hyper,
                            std::uint64_t seed) {
  const PolicyKind kind{PolicyTag::simplified_greedy, 0.0};
  const std::vector<double>& vset = config.velocity_set_mps;
  const int nv = static_cast<int>(vset.size());
  const int n = topology.size();

  AgentConfig agent = agent_for(kind, n);
  agent.fixed_velocities.assign(static_cast<std::size_t>(n), vset.front());
  DualAgentTrainer trainer(config, topology, hyper, seed, agent);

  GreedySearch search;
  search.evaluations_per_pass = nv * n;
  search.assignment = agent.fixed_velocities;
  search.best_score = -INFINITY;
  search.scores.reserve(static_cast<std::size_t>(hyper.episodes));

  std::vector<double> reward_series;
  reward_series.reserve(static_cast<std::size_t>(hyper.episodes));
  std::vector<double> candidate(static_cast<std::size_t>(nv), 0.0);

  const int search_episodes = std::min(hyper.episodes, search.evaluations_per_pass);
  search.passes = 1;
  for (int e = 0; e < search_episodes; ++e) {
    const int slot = e % search.evaluations_per_pass;
    const auto region = static_cast<std::size_t>(slot / nv);
    const auto c = static_cast<std::size_t>(slot % nv);
    std::vector<double>& current = trainer.agent().fixed_velocities;
    current[region] = vset[c];

    const EpisodeStats s = trainer.train_episode();
    ++search.evaluations;
    reward_series.push_back(s.episode_reward);
    search.scores.push_back(s.episode_reward);
    candidate[c] = s.regions[region].mean_instant_reward;
    if (s.episode_reward > search.best_score) {
      search.best_score = s.episode_reward;
      search.assignment = current;
    }
    if (static_cast<int>(c) == nv - 1) {
      const auto best = std::max_element(candidate.begin(), candidate.end()) - candidate.begin();
      current[region] = vset[static_cast<std::size_t>(best)];
    }
  }

  trainer.agent().fixed_velocities = search.assignment;
  for (int e = search_episodes; e < hyper.episodes; ++e) {
    reward_series.push_back(trainer.train_episode().episode_reward);
    ++search.refine_episodes;
  }

  agent.fixed_velocities = search.assignment;
  PolicyRun run{kind, agent, std::move(trainer.offload_table()), std::move(trainer.velocity_table()),
                trainer.monitor(), std::move(reward_series), {}, std::move(search)};
  run.eval = greedy_policy_eval(run.offload_table, run.velocity_table, config, topology, seed, hyper.eval_episodes,
                                run.agent);
  return run;
}

PolicyRun run_policy(const PolicyKind& kind, const ScenarioConfig& config, const Topology& topology,
                     const Hyperparams& hyper, std::uint64_t seed) {
  switch (kind.tag) {
    case PolicyTag::proposed:
      return proposed_scheme(config, topology, hyper, seed);
    case PolicyTag::conventional:
      return conventional_offloading(config, topology, kind.velocity_mps, hyper, seed);
    case PolicyTag::local_exec:
      return local_execution(config, topology, kind.velocity_mps, hyper, seed);
    case PolicyTag::simplified_greedy:
      return simplified_greedy(config, topology, hyper, seed);
    case PolicyTag::case1:
    case PolicyTag::case2:
      return case_rule_policy(config, topology, kind.tag, hyper, seed);
  }
  throw InvalidParameter("unknown policy");
}

}  // namespace orbit_mec
