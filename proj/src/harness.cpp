#include "orbit_mec/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "orbit_mec/errors.hpp"

namespace orbit_mec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) { return fmt::format("{:.12g}", v); }

std::string file_label(const PolicyKind& k) {
  std::string s = k.label();
  for (char& c : s) {
    if (c == ':' || c == '.') c = '-';
  }
  return s;
}

std::string unit_stem(const PolicyKind& k, int replication) { return fmt::format("{}-r{}", file_label(k), replication); }

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, e.what());
  }
}

UnitResult run_unit(const ScenarioConfig& config, const PolicyKind& kind, int replication, const Topology& topology,
                    bool save_tables, const std::string& out_dir) {
  UnitResult u;
  u.kind = kind;
  u.replication = replication;
  u.seed = replication_seed(config.master_seed, replication);
  PolicyRun run = run_policy(kind, config, topology, config.hyper, u.seed);
  u.eval = std::move(run.eval);
  u.reward_series = std::move(run.reward_series);
  u.q1_writes = run.monitor.q1_writes();
  u.q1_states = run.offload_table.state_count();
  u.q2_states = run.velocity_table.state_count();
  u.violations = run.monitor.violations().size();
  u.peak_q1 = run.monitor.peak_q1();
  u.peak_q2 = run.monitor.peak_q2();
  u.bound_q1 = run.monitor.bound_q1();
  u.bound_q2 = run.monitor.bound_q2();
  if (kind.tag == PolicyTag::simplified_greedy) u.fixed_velocities = run.agent.fixed_velocities;
  if (save_tables && !out_dir.empty()) {
    const std::string stem = (fs::path(out_dir) / "tables" / unit_stem(kind, replication)).string();
    write_text_file(stem + "-q1.json", run.offload_table.to_json("offload").dump() + "\n");
    write_text_file(stem + "-q2.json", run.velocity_table.to_json("velocity").dump() + "\n");
  }
  return u;
}

std::string rewards_csv(const std::vector<UnitResult>& units, const std::vector<PolicyKind>& policies, int reps) {
  std::string out = "policy,episode,reward,moving_average\n";
  for (std::size_t p = 0; p < policies.size(); ++p) {
    std::vector<double> mean;
    for (int r = 0; r < reps; ++r) {
      const auto& s = units[p * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)].reward_series;
      if (mean.empty()) mean.assign(s.size(), 0.0);
      for (std::size_t e = 0; e < s.size() && e < mean.size(); ++e) mean[e] += s[e] / reps;
    }
    const auto ma = moving_average(mean, kRewardWindow);
    const std::string label = policies[p].label();
    for (std::size_t e = 0; e < mean.size(); ++e) {
      out += fmt::format("{},{},{},{}\n", label, e + 1, num(mean[e]), num(ma[e]));
    }
  }
  return out;
}

std::string summary_header() {
  return "policy,replications,t_mean_s,t_mean_std,t_mean_ci95,moving_time_s,moving_time_std,moving_time_ci95,"
         "eval_reward";
}

std::string summary_row(const PolicySummary& s) {
  return fmt::format("{},{},{},{},{},{},{},{},{}", s.policy, s.completion.n, num(s.completion.mean),
                     num(s.completion.stddev), num(s.completion.ci95), num(s.moving_time.mean),
                     num(s.moving_time.stddev), num(s.moving_time.ci95), num(s.eval_reward.mean));
}

std::string runs_csv(const std::vector<UnitResult>& units) {
  std::string out =
      "policy,replication,seed,t_mean_s,moving_time_s,eval_reward,q1_writes,q1_states,q2_states,violations,"
      "peak_q1,bound_q1,peak_q2,bound_q2,velocities\n";
  for (const auto& u : units) {
    std::string vel;
    for (std::size_t i = 0; i < u.eval.velocities.size(); ++i) vel += (i ? " " : "") + num(u.eval.velocities[i]);
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", u.kind.label(), u.replication, u.seed,
                       num(u.eval.mean_completion_s), num(u.eval.mean_moving_time_s), num(u.eval.mean_episode_reward),
                       u.q1_writes, u.q1_states, u.q2_states, u.violations, num(u.peak_q1), num(u.bound_q1),
                       num(u.peak_q2), num(u.bound_q2), vel);
  }
  return out;
}

std::string scatter_rows(const std::vector<UnitResult>& units, const std::string& parameter, double value) {
  std::string out;
  for (const auto& u : units) {
    out += fmt::format("{},{},{},{},{},{}\n", u.kind.label(), parameter, num(value), u.replication,
                       num(u.eval.mean_completion_s), num(u.eval.mean_moving_time_s));
  }
  return out;
}

constexpr const char* kScatterHeader = "policy,parameter,value,replication,t_mean_s,moving_time_s\n";

json manifest_json(const ScenarioConfig& config, const ExperimentOptions& options, std::uint64_t hash,
                   bool complete) {
  json seeds = json::array();
  for (int r = 0; r < config.replications; ++r) seeds.push_back(replication_seed(config.master_seed, r));
  json policies = json::array();
  for (const auto& p : options.policies) policies.push_back(p.label());
  return {{"schema", kManifestSchema},
          {"version", kVersion},
          {"command", options.command},
          {"config_hash", fmt::format("{:016x}", hash)},
          {"master_seed", config.master_seed},
          {"replications", config.replications},
          {"replication_seeds", seeds},
          {"policies", policies},
          {"episodes", config.hyper.episodes},
          {"eval_episodes", config.hyper.eval_episodes},
          {"due_time_s", config.resolved_due_time()},
          {"complete", complete},
          {"scenario", to_json(config)}};
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t master_seed, int replication) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(replication));
}

Topology replication_topology(const ScenarioConfig& config, std::uint64_t rep_seed) {
  Rng rng(derive_seed(rep_seed, Stream::topology));
  return draw_topology(config, rng);
}

int worker_count() {
  if (const char* env = std::getenv("ORBIT_MEC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_text_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(path, "cannot write");
  out << text;
  if (!out) throw ConfigError(path, "write failed");
}

json UnitResult::to_json(std::uint64_t config_hash) const {
  return {{"schema", kUnitSchema},
          {"config_hash", fmt::format("{:016x}", config_hash)},
          {"policy", kind.label()},
          {"replication", replication},
          {"seed", seed},
          {"eval",
           {{"mean_completion_s", eval.mean_completion_s},
            {"mean_moving_time_s", eval.mean_moving_time_s},
            {"mean_episode_reward", eval.mean_episode_reward},
            {"episodes", eval.episodes},
            {"velocities", eval.velocities}}},
          {"reward_series", reward_series},
          {"q1_writes", q1_writes},
          {"q1_states", q1_states},
          {"q2_states", q2_states},
          {"violations", violations},
          {"peak_q1", peak_q1},
          {"peak_q2", peak_q2},
          {"bound_q1", bound_q1},
          {"bound_q2", bound_q2},
          {"fixed_velocities", fixed_velocities}};
}

UnitResult UnitResult::from_json(const json& j, const ScenarioConfig& config) {
  UnitResult u;
  u.kind = parse_policy(j.at("policy").get<std::string>(), config);
  u.replication = j.at("replication").get<int>();
  u.seed = j.at("seed").get<std::uint64_t>();
  const json& e = j.at("eval");
  u.eval.mean_completion_s = e.at("mean_completion_s").get<double>();
  u.eval.mean_moving_time_s = e.at("mean_moving_time_s").get<double>();
  u.eval.mean_episode_reward = e.at("mean_episode_reward").get<double>();
  u.eval.episodes = e.at("episodes").get<int>();
  u.eval.velocities = e.at("velocities").get<std::vector<double>>();
  u.reward_series = j.at("reward_series").get<std::vector<double>>();
  u.q1_writes = j.at("q1_writes").get<long long>();
  u.q1_states = j.at("q1_states").get<std::size_t>();
  u.q2_states = j.at("q2_states").get<std::size_t>();
  u.violations = j.at("violations").get<std::size_t>();
  u.peak_q1 = j.at("peak_q1").get<double>();
  u.peak_q2 = j.at("peak_q2").get<double>();
  u.bound_q1 = j.at("bound_q1").get<double>();
  u.bound_q2 = j.at("bound_q2").get<double>();
  u.fixed_velocities = j.at("fixed_velocities").get<std::vector<double>>();
  return u;
}

Stat describe(const std::vector<double>& values) {
  Stat s;
  s.n = static_cast<int>(values.size());
  if (s.n == 0) return {0, kNaN, kNaN, kNaN};
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  if (s.n < 2) {
    s.stddev = kNaN;
    s.ci95 = kNaN;
    return s;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / (s.n - 1));
  const boost::math::students_t dist(s.n - 1);
  s.ci95 = boost::math::quantile(boost::math::complement(dist, 0.025)) * s.stddev / std::sqrt(static_cast<double>(s.n));
  return s;
}

std::vector<PolicySummary> summarize(const std::vector<UnitResult>& units, const std::vector<PolicyKind>& policies) {
  std::vector<PolicySummary> out;
  for (const auto& p : policies) {
    std::vector<double> t, m, r;
    for (const auto& u : units) {
      if (!(u.kind == p)) continue;
      t.push_back(u.eval.mean_completion_s);
      m.push_back(u.eval.mean_moving_time_s);
      r.push_back(u.eval.mean_episode_reward);
    }
    out.push_back({p.label(), describe(t), describe(m), describe(r)});
  }
  return out;
}

ExperimentResult run_experiment(const ScenarioConfig& config, const ExperimentOptions& options) {
  config.validate();
  if (options.policies.empty()) throw ConfigError("/policy", "no policy given");
  ExperimentResult res;
  res.config_hash = config_hash(config);
  const int reps = config.replications;
  const bool write = !options.out_dir.empty();
  const fs::path out(options.out_dir);
  if (write) write_text_file((out / "manifest.json").string(), manifest_json(config, options, res.config_hash, false).dump(2) + "\n");

  std::vector<Topology> topologies;
  for (int r = 0; r < reps; ++r) topologies.push_back(replication_topology(config, replication_seed(config.master_seed, r)));

  const std::size_t total = options.policies.size() * static_cast<std::size_t>(reps);
  std::vector<std::optional<UnitResult>> slots(total);
  const std::string hash_text = fmt::format("{:016x}", res.config_hash);

  // Resume: reuse unit files written by an identical configuration.
  if (write) {
    for (std::size_t i = 0; i < total; ++i) {
      const PolicyKind& k = options.policies[i / static_cast<std::size_t>(reps)];
      const int r = static_cast<int>(i % static_cast<std::size_t>(reps));
      const fs::path file = out / "units" / (unit_stem(k, r) + ".json");
      if (!fs::exists(file)) continue;
      if (options.save_tables && !fs::exists(out / "tables" / (unit_stem(k, r) + "-q1.json"))) continue;
      try {
        const json j = read_json_file(file.string());
        if (j.value("config_hash", std::string{}) != hash_text) continue;
        if (j.at("seed").get<std::uint64_t>() != replication_seed(config.master_seed, r)) continue;
        slots[i] = UnitResult::from_json(j, config);
        ++res.resumed_units;
      } catch (const std::exception&) {
        // Unreadable or stale unit: recompute it.
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  std::mutex log_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      if (slots[i]) continue;
      const PolicyKind& k = options.policies[i / static_cast<std::size_t>(reps)];
      const int r = static_cast<int>(i % static_cast<std::size_t>(reps));
      try {
        UnitResult u = run_unit(config, k, r, topologies[static_cast<std::size_t>(r)], options.save_tables,
                                options.out_dir);
        if (write) {
          write_text_file((out / "units" / (unit_stem(k, r) + ".json")).string(),
                          u.to_json(res.config_hash).dump() + "\n");
        }
        if (options.progress) {
          std::lock_guard lock(log_mu);
          std::fprintf(stderr, "[%s r%d] T_mean=%.4f s moving=%.1f s\n", k.label().c_str(), r,
                       u.eval.mean_completion_s, u.eval.mean_moving_time_s);
        }
        slots[i] = std::move(u);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(total);
      }
    }
  };
  const int threads = std::max(1, std::min<int>(options.threads > 0 ? options.threads : worker_count(),
                                                static_cast<int>(total)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  for (auto& s : slots) res.units.push_back(std::move(*s));
  res.summary = summarize(res.units, options.policies);

  if (write) {
    write_text_file((out / "rewards.csv").string(), rewards_csv(res.units, options.policies, reps));
    std::string summary = summary_header() + "\n";
    for (const auto& s : res.summary) summary += summary_row(s) + "\n";
    write_text_file((out / "summary.csv").string(), summary);
    write_text_file((out / "runs.csv").string(), runs_csv(res.units));
    write_text_file((out / "scatter.csv").string(), kScatterHeader + scatter_rows(res.units, "none", 0.0));
    write_text_file((out / "manifest.json").string(), manifest_json(config, options, res.config_hash, true).dump(2) + "\n");
  }
  return res;
}

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "NCH" || text == "nch" || text == "N_CH") return SweepAxis::n_ch;
  if (text == "rho") return SweepAxis::rho;
  if (text == "theta") return SweepAxis::theta;
  if (text == "deltaD" || text == "delta_d") return SweepAxis::delta_d;
  throw ConfigError("/sweep/axis", "expected NCH, rho, theta or deltaD, got \"" + text + "\"");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::n_ch:
      return "NCH";
    case SweepAxis::rho:
      return "rho";
    case SweepAxis::theta:
      return "theta";
    case SweepAxis::delta_d:
      return "deltaD";
  }
  return "?";
}

ScenarioConfig apply_axis(const ScenarioConfig& config, SweepAxis axis, double value) {
  ScenarioConfig c = config;
  switch (axis) {
    case SweepAxis::n_ch:
      if (value != std::floor(value)) throw ConfigError("/sweep/values", "NCH values must be integers");
      c.unavailable_count = static_cast<int>(value);
      break;
    case SweepAxis::rho:
      c.migration.migration_ratio = value;
      break;
    case SweepAxis::theta:
      c.theta = value;
      break;
    case SweepAxis::delta_d:
      for (double& d : c.data_set_bits) d += 8e6 * value;
      if (c.fixed_draws) {
        for (auto& fd : *c.fixed_draws) {
          for (double& d : fd.data_bits) d += 8e6 * value;
        }
      }
      break;
  }
  c.validate();
  return c;
}

std::vector<SweepPoint> sweep(const ScenarioConfig& config, SweepAxis axis, const std::vector<double>& values,
                              const ExperimentOptions& options) {
  if (values.empty()) throw ConfigError("/sweep/values", "no sweep values");
  std::vector<ScenarioConfig> configs;
  for (double v : values) configs.push_back(apply_axis(config, axis, v));

  std::vector<SweepPoint> points;
  std::string summary = "parameter,value," + summary_header() + "\n";
  std::string scatter = kScatterHeader;
  const std::string name = to_string(axis);
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentOptions o = options;
    o.command = "sweep";
    if (!options.out_dir.empty()) o.out_dir = (fs::path(options.out_dir) / fmt::format("{}-{}", name, num(values[i]))).string();
    SweepPoint p{values[i], run_experiment(configs[i], o)};
    for (const auto& s : p.result.summary) summary += fmt::format("{},{},", name, num(values[i])) + summary_row(s) + "\n";
    scatter += scatter_rows(p.result.units, name, values[i]);
    points.push_back(std::move(p));
  }
  if (!options.out_dir.empty()) {
    write_text_file((fs::path(options.out_dir) / "sweep_summary.csv").string(), summary);
    write_text_file((fs::path(options.out_dir) / "scatter.csv").string(), scatter);
  }
  return points;
}

json GapReport::to_json() const {
  return {{"policy", policy},
          {"policy_mean_completion_s", policy_completion_s},
          {"policy_moving_time_s", policy_moving_time_s},
          {"policy_velocities", policy_velocities},
          {"policy_within_budget", policy_within_budget},
          {"oracle", oracle.to_json()},
          {"decomposed", decomposed.to_json()},
          {"gap", gap}};
}

GapReport oracle_gap(const ScenarioConfig& config, const PolicyKind& policy, std::uint64_t seed) {
  const DeterministicInstance inst = DeterministicInstance::from_config(config);
  GapReport g;
  g.oracle = solve_exact(inst);
  try {
    g.decomposed = solve_decomposed(inst);
  } catch (const InfeasibleInstance&) {
    // A region might not fit its budget share even though the journey does.
    g.decomposed.mean_completion_s = kNaN;
  }
  const PolicyRun run = run_policy(policy, inst.config, inst.topology, inst.config.hyper, seed);
  g.policy = policy.label();
  g.policy_completion_s = run.eval.mean_completion_s;
  g.policy_moving_time_s = run.eval.mean_moving_time_s;
  g.policy_velocities = run.eval.velocities;
  g.policy_within_budget = run.eval.mean_moving_time_s <= inst.config.resolved_due_time();
  g.gap = (g.policy_completion_s - g.oracle.mean_completion_s) / g.oracle.mean_completion_s;
  return g;
}

EvalMetrics evaluate_saved(const ScenarioConfig& config, const std::string& run_dir, const PolicyKind& policy,
                           int replication, std::uint64_t eval_seed, int episodes) {
  const fs::path dir(run_dir);
  const std::string stem = unit_stem(policy, replication);
  const QTable q1 = QTable::from_json(read_json_file((dir / "tables" / (stem + "-q1.json")).string()));
  const QTable q2 = QTable::from_json(read_json_file((dir / "tables" / (stem + "-q2.json")).string()));
  const Topology topo = replication_topology(config, replication_seed(config.master_seed, replication));
  AgentConfig agent = agent_for(policy, topo.size());
  if (policy.tag == PolicyTag::simplified_greedy) {
    const json unit = read_json_file((dir / "units" / (stem + ".json")).string());
    agent.fixed_velocities = unit.at("fixed_velocities").get<std::vector<double>>();
  }
  return greedy_policy_eval(q1, q2, config, topo, eval_seed, episodes, agent);
}

}  // namespace orbit_mec
