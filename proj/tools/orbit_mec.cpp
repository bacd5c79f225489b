// orbit_mec: train, evaluate, sweep and oracle-gap runs over a scenario file.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "orbit_mec/errors.hpp"
#include "orbit_mec/harness.hpp"

using namespace orbit_mec;

namespace {

struct Common {
  std::string config_path;
  std::string policies = "proposed";
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<int> episodes;
  std::optional<int> eval_episodes;
  std::string out;
  bool quiet = false;
};

void add_common(CLI::App* app, Common& c, bool with_out_required) {
  app->add_option("--config", c.config_path, "Scenario JSON (default: reference preset)");
  app->add_option("--policy", c.policies, "Comma-separated policy tags: proposed, conventional:<v>, local:<v>, greedy, case1, case2");
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("--replications", c.replications, "Replication count")->check(CLI::PositiveNumber);
  app->add_option("--episodes", c.episodes, "Training episodes")->check(CLI::NonNegativeNumber);
  app->add_option("--eval-episodes", c.eval_episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  auto* out = app->add_option("--out", c.out, "Output directory");
  if (with_out_required) out->required();
  app->add_flag("--quiet", c.quiet, "No progress lines");
}

ScenarioConfig load(const Common& c) {
  ScenarioConfig cfg = c.config_path.empty() ? reference_preset() : load_scenario(c.config_path);
  if (c.seed) cfg.master_seed = *c.seed;
  if (c.replications) cfg.replications = *c.replications;
  if (c.episodes) cfg.hyper.episodes = *c.episodes;
  if (c.eval_episodes) cfg.hyper.eval_episodes = *c.eval_episodes;
  cfg.validate();
  return cfg;
}

void print_summary(const std::vector<PolicySummary>& summary) {
  for (const auto& s : summary) {
    fmt::print("{:<18} T_mean {:.4f} s (±{:.4f})  moving {:.1f} s  n={}\n", s.policy, s.completion.mean,
               s.completion.ci95, s.moving_time.mean, s.completion.n);
  }
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size()) throw ConfigError("/sweep/values", "bad number \"" + item + "\"");
      out.push_back(v);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint velocity control and task offloading simulator"};
  app.require_subcommand(1);

  Common train_opts;
  bool save_tables = false;
  auto* train_cmd = app.add_subcommand("train", "Train and evaluate policies over replications");
  add_common(train_cmd, train_opts, true);
  train_cmd->add_flag("--save-tables", save_tables, "Write Q-table snapshots for later evaluation");

  Common eval_opts;
  int eval_replication = 0;
  auto* eval_cmd = app.add_subcommand("evaluate", "Re-evaluate saved Q-tables from a train --save-tables run");
  add_common(eval_cmd, eval_opts, true);
  eval_cmd->add_option("--replication", eval_replication, "Replication whose tables to load")->check(CLI::NonNegativeNumber);

  Common sweep_opts;
  std::string axis_text;
  std::string values_text;
  auto* sweep_cmd = app.add_subcommand("sweep", "One experiment per value of a scenario parameter");
  add_common(sweep_cmd, sweep_opts, true);
  sweep_cmd->add_option("--axis", axis_text, "NCH | rho | theta | deltaD")->required();
  sweep_cmd->add_option("--values", values_text, "Comma-separated axis values")->required();

  Common gap_opts;
  std::string desk;
  auto* gap_cmd = app.add_subcommand("oracle-gap", "Compare a trained policy with the exact optimum on a desk instance");
  add_common(gap_cmd, gap_opts, false);
  gap_cmd->add_option("--desk", desk, "Built-in instance instead of --config: all-local | fast-server | dead-channel");

  bool reference = false;
  std::string preset_desk;
  std::string preset_out;
  auto* preset_cmd = app.add_subcommand("preset", "Print a built-in scenario as JSON");
  preset_cmd->add_flag("--paper-iv,--reference", reference, "The reference 20-AP deployment");
  preset_cmd->add_option("--desk", preset_desk, "all-local | fast-server | dead-channel");
  preset_cmd->add_option("--out", preset_out, "Write to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  auto desk_config = [](const std::string& name) {
    if (name == "all-local") return desk_instance_all_local();
    if (name == "fast-server") return desk_instance_fast_server();
    if (name == "dead-channel") return desk_instance_dead_channel();
    throw ConfigError("--desk", "unknown desk instance \"" + name + "\"");
  };

  try {
    if (*train_cmd) {
      const ScenarioConfig cfg = load(train_opts);
      ExperimentOptions o;
      o.policies = parse_policy_list(train_opts.policies, cfg);
      o.out_dir = train_opts.out;
      o.save_tables = save_tables;
      o.progress = !train_opts.quiet;
      const ExperimentResult r = run_experiment(cfg, o);
      if (!train_opts.quiet && r.resumed_units > 0) std::fprintf(stderr, "resumed %d units\n", r.resumed_units);
      print_summary(r.summary);
    } else if (*eval_cmd) {
      const ScenarioConfig cfg = load(eval_opts);
      const auto policies = parse_policy_list(eval_opts.policies, cfg);
      const std::uint64_t seed = eval_opts.seed.value_or(cfg.master_seed);
      for (const auto& p : policies) {
        const EvalMetrics m = evaluate_saved(cfg, eval_opts.out, p, eval_replication, seed, cfg.hyper.eval_episodes);
        const nlohmann::json j{{"policy", p.label()},
                               {"replication", eval_replication},
                               {"eval_seed", seed},
                               {"episodes", m.episodes},
                               {"mean_completion_s", m.mean_completion_s},
                               {"mean_moving_time_s", m.mean_moving_time_s},
                               {"mean_episode_reward", m.mean_episode_reward},
                               {"velocities", m.velocities}};
        std::cout << j.dump() << "\n";
      }
    } else if (*sweep_cmd) {
      const ScenarioConfig cfg = load(sweep_opts);
      ExperimentOptions o;
      o.policies = parse_policy_list(sweep_opts.policies, cfg);
      o.out_dir = sweep_opts.out;
      o.progress = !sweep_opts.quiet;
      const SweepAxis axis = parse_sweep_axis(axis_text);
      const auto points = sweep(cfg, axis, parse_values(values_text), o);
      for (const auto& p : points) {
        fmt::print("{} = {}\n", to_string(axis), p.value);
        print_summary(p.result.summary);
      }
    } else if (*gap_cmd) {
      if (desk.empty() && gap_opts.config_path.empty()) throw ConfigError("--config", "oracle-gap needs --config or --desk");
      Common c = gap_opts;
      ScenarioConfig cfg = desk.empty() ? load(c) : desk_config(desk);
      if (!desk.empty()) {
        if (c.seed) cfg.master_seed = *c.seed;
        if (c.episodes) cfg.hyper.episodes = *c.episodes;
        if (c.eval_episodes) cfg.hyper.eval_episodes = *c.eval_episodes;
      }
      const auto policies = parse_policy_list(gap_opts.policies, cfg);
      nlohmann::json all = nlohmann::json::array();
      for (const auto& p : policies) {
        const GapReport g = oracle_gap(cfg, p, cfg.master_seed);
        all.push_back(g.to_json());
        fmt::print("{:<18} policy {:.6f} s  optimum {:.6f} s  gap {:.3f}%{}\n", p.label(), g.policy_completion_s,
                   g.oracle.mean_completion_s, 100.0 * g.gap, g.policy_within_budget ? "" : "  (over the moving-time budget)");
      }
      if (!gap_opts.out.empty()) write_text_file(gap_opts.out + "/oracle_gap.json", all.dump(2) + "\n");
    } else if (*preset_cmd) {
      if (reference == !preset_desk.empty()) throw ConfigError("preset", "give exactly one of --reference or --desk");
      const ScenarioConfig cfg = reference ? reference_preset() : desk_config(preset_desk);
      const std::string text = to_json(cfg).dump(2) + "\n";
      if (preset_out.empty()) {
        std::cout << text;
      } else {
        write_text_file(preset_out, text);
      }
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const InfeasibleInstance& e) {
    std::fprintf(stderr, "infeasible (%s): %s\n", e.constraint().c_str(), e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
