// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   acceptance [--work-dir DIR] [--only N[,N...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "orbit_mec/delay_model.hpp"
#include "orbit_mec/harness.hpp"
#include "orbit_mec/mobility_model.hpp"
#include "orbit_mec/random.hpp"
#include "orbit_mec/reward_model.hpp"

using namespace orbit_mec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool within_rel(double value, double expected, double tol) {
  return std::fabs(value - expected) <= tol * std::fabs(expected);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---------------------------------------------------------------------------

Outcome delay_algebra() {
  const RadioParams radio;
  ComputeParams c;
  c.cycles_per_bit = 800.0;
  const MigrationParams mig{0.1, 0.5};
  const OffloadTarget cell2 = OffloadTarget::server(2, Tier::cellular);
  const OffloadTarget cell3 = OffloadTarget::server(3, Tier::cellular);
  const OffloadTarget sat9 = OffloadTarget::server(9, Tier::satellite);

  struct Row {
    const char* name;
    double value;
    double expected;
  };
  std::vector<Row> rows;
  rows.push_back({"cellular rate", cellular_rate(radio), 1.66096e8});
  rows.push_back({"satellite", satellite_com_delay({8e5, 8e4}, radio, sat9), 0.110133});
  c.local_cpu_hz = 1e9;
  rows.push_back({"local 5.6 Mbit @ 1 GHz", local_delay({5.6e6, 5.6e5}, c, OffloadTarget::local()), 4.48});
  c.local_cpu_hz = 0.5e9;
  rows.push_back({"local 0.8 Mbit @ 0.5 GHz", local_delay({8e5, 8e4}, c, OffloadTarget::local()), 1.28});
  c.mec_cpu_hz = 50e9;
  const double mec = mec_delay({3.2e6, 3.2e5}, c, sat9);
  rows.push_back({"MEC", mec, 0.0512});
  rows.push_back({"migration cell->cell", migration_delay(cell2, cell3, mec, mig), 0.00512});
  rows.push_back({"migration cell->sat", migration_delay(cell2, sat9, mec, mig), 0.50512});

  Outcome o{true, ""};
  for (const auto& r : rows) {
    const bool ok = within_rel(r.value, r.expected, 1e-3);
    o.pass = o.pass && ok;
    o.detail += fmt::format("{}{} {:.6g} (want {:.6g}){}", o.detail.empty() ? "" : "; ", r.name, r.value, r.expected,
                            ok ? "" : " MISS");
  }
  return o;
}

// Two-phase integration of dx / v(x) with v(x) = sqrt(v0^2 +- 2ax) on the ramp.
double integrated_travel_time(double v0, double vg, double a, double c) {
  const double sign = vg >= v0 ? 1.0 : -1.0;
  const double ramp = std::fabs(vg * vg - v0 * v0) / (2.0 * a);
  auto inv_v = [&](double x) { return 1.0 / std::sqrt(v0 * v0 + sign * 2.0 * a * x); };
  double ramp_time = 0.0;
  if (ramp > 0.0) {
    const int n = 4000;
    const double h = ramp / n;
    double s = inv_v(0.0) + inv_v(ramp);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * inv_v(i * h);
    ramp_time = s * h / 3.0;
  }
  return ramp_time + (c - ramp) / vg;
}

Outcome kinematics() {
  Rng rng(derive_seed(2, 0));
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); };
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    VelocityPlan p;
    p.entry_velocity_mps = uniform(5, 20);
    p.target_velocity_mps = uniform(5, 20);
    p.accel_mps2 = uniform(0.5, 4);
    p.interval_s = 1.0;
    p.region_length_m = ramp_distance(p) + uniform(0, 3000);
    const double integ =
        integrated_travel_time(p.entry_velocity_mps, p.target_velocity_mps, p.accel_mps2, p.region_length_m);
    worst = std::max(worst, std::fabs(region_travel_time(p) - integ) / integ);
  }
  const double a = region_travel_time({5, 20, 2, 300, 1});
  const double b = region_travel_time({20, 5, 2, 100, 1});
  const bool ok = worst <= 1e-9 && within_rel(a, 17.8125, 1e-12) && within_rel(b, 8.75, 1e-12);
  return {ok, fmt::format("worst relative error {:.3g} over 10^4 plans; examples {:.6f} s, {:.6f} s", worst, a, b)};
}

struct ReferenceRun {
  PolicyRun run;
};

ReferenceRun reference_training_run() {
  const ScenarioConfig c = reference_preset();
  const std::uint64_t seed = replication_seed(c.master_seed, 0);
  const Topology topo = replication_topology(c, seed);
  return {run_policy(PolicyKind{PolicyTag::proposed, 0.0}, c, topo, c.hyper, seed)};
}

Outcome boundedness(const ReferenceRun& r) {
  const ConvergenceMonitor& m = r.run.monitor;
  const bool ok = m.violations().empty() && m.peak_q1() <= m.bound_q1() && m.peak_q2() <= m.bound_q2() &&
                  r.run.reward_series.size() == 10000;
  return {ok, fmt::format("{} episodes, {} Q1 / {} Q2 writes, peak |Q1| {:.4f} <= {:.4f}, peak |Q2| {:.4f} <= {:.4f} "
                          "(L_max {}), {} violations",
                          r.run.reward_series.size(), m.q1_writes(), m.q2_writes(), m.peak_q1(), m.bound_q1(),
                          m.peak_q2(), m.bound_q2(), m.l_max(), m.violations().size())};
}

Outcome convergence(const ReferenceRun& r) {
  const auto ma = moving_average(r.run.reward_series, kRewardWindow);
  const std::size_t from = ma.size() - ma.size() / 4;
  const auto [lo, hi] = std::minmax_element(ma.begin() + static_cast<std::ptrdiff_t>(from), ma.end());
  double mean = 0.0;
  for (std::size_t i = from; i < ma.size(); ++i) mean += ma[i];
  mean /= static_cast<double>(ma.size() - from);
  const double range = *hi - *lo;
  return {range < 0.1 * std::fabs(mean),
          fmt::format("last-quartile moving average range {:.4f} over mean {:.4f} ({:.2f}%)", range, mean,
                      100.0 * range / std::fabs(mean))};
}

Outcome oracle_gaps() {
  struct Desk {
    const char* name;
    ScenarioConfig config;
  };
  const std::vector<Desk> desks{{"all-local", desk_instance_all_local()},
                                {"fast-server", desk_instance_fast_server()},
                                {"dead-channel", desk_instance_dead_channel()}};
  Outcome o{true, ""};
  for (const auto& d : desks) {
    const GapReport g = oracle_gap(d.config, PolicyKind{PolicyTag::proposed, 0.0}, d.config.master_seed);
    const bool ok = g.gap <= 0.05 && g.gap >= -1e-9;
    o.pass = o.pass && ok;
    std::string vel;
    for (double v : g.policy_velocities) vel += fmt::format("{}{}", vel.empty() ? "" : "/", v);
    std::string opt;
    for (double v : g.oracle.velocities) opt += fmt::format("{}{}", opt.empty() ? "" : "/", v);
    o.detail += fmt::format("{}{}: policy {:.6f} s at {} m/s, optimum {:.6f} s at {} m/s, gap {:.3f}%{}",
                            o.detail.empty() ? "" : "; ", d.name, g.policy_completion_s, vel,
                            g.oracle.mean_completion_s, opt, 100.0 * g.gap, ok ? "" : " MISS");
  }
  return o;
}

struct BaselineMeans {
  double proposed = 0.0;
  double greedy = 0.0;
  double conventional = 0.0;  // mean over the three velocities
  double local = 0.0;
  std::map<std::string, double> per_policy;
  int replications = 0;
};

BaselineMeans baseline_experiment(const fs::path& dir) {
  ScenarioConfig c = reference_preset();
  c.replications = 20;
  ExperimentOptions o;
  for (const char* t : {"proposed", "greedy", "conventional:5", "conventional:10", "conventional:20", "local:10"}) {
    o.policies.push_back(parse_policy(t, c));
  }
  o.out_dir = dir.string();
  const ExperimentResult res = run_experiment(c, o);
  BaselineMeans m;
  m.replications = c.replications;
  for (const auto& s : res.summary) m.per_policy[s.policy] = s.completion.mean;
  m.proposed = m.per_policy.at("proposed");
  m.greedy = m.per_policy.at("greedy");
  m.conventional =
      (m.per_policy.at("conventional:5") + m.per_policy.at("conventional:10") + m.per_policy.at("conventional:20")) /
      3.0;
  m.local = m.per_policy.at("local:10");
  return m;
}

Outcome baseline_ordering(const BaselineMeans& m) {
  const bool order = m.proposed < m.greedy && m.greedy < m.conventional && m.conventional < m.local;
  const double vs_conv = 1.0 - m.proposed / m.conventional;
  const double vs_local = 1.0 - m.proposed / m.local;
  const double vs_greedy = 1.0 - m.proposed / m.greedy;
  auto band = [](double r, double centre) { return std::fabs(100.0 * r - centre) <= 10.0; };
  const bool ratios = band(vs_conv, 16.0) && band(vs_local, 41.0) && band(vs_greedy, 11.0);
  return {order && ratios,
          fmt::format("{} replications; T_mean proposed {:.4f} < greedy {:.4f} < conventional {:.4f} "
                      "(5: {:.4f}, 10: {:.4f}, 20: {:.4f}) < local {:.4f}: {}; reductions vs conventional {:.1f}% "
                      "[6, 26], vs local {:.1f}% [31, 51], vs greedy {:.1f}% [1, 21]",
                      m.replications, m.proposed, m.greedy, m.conventional, m.per_policy.at("conventional:5"),
                      m.per_policy.at("conventional:10"), m.per_policy.at("conventional:20"), m.local,
                      order ? "ordered" : "NOT ordered", 100.0 * vs_conv, 100.0 * vs_local, 100.0 * vs_greedy)};
}

Outcome local_insensitivity(const fs::path& dir) {
  ScenarioConfig c = reference_preset();
  c.replications = 20;
  ExperimentOptions o;
  o.policies.push_back(parse_policy("local:10", c));
  o.out_dir = dir.string();
  const auto points = sweep(c, SweepAxis::n_ch, {2, 4, 6, 8}, o);
  std::vector<double> means;
  std::string detail;
  for (const auto& p : points) {
    means.push_back(p.result.summary.at(0).completion.mean);
    detail += fmt::format("{}N_CH={}: {:.5f} s", detail.empty() ? "" : ", ", p.value, means.back());
  }
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  const double spread = (*hi - *lo) / *lo;
  return {spread < 0.02, fmt::format("{}; spread {:.3f}%", detail, 100.0 * spread)};
}

Outcome determinism(const fs::path& dir) {
  ScenarioConfig c = reference_preset();
  c.region_count = 6;
  c.satellite_ids = {3, 4};
  c.unavailable_count = 2;
  c.replications = 3;
  c.hyper.episodes = 50;
  c.hyper.eval_episodes = 10;
  ExperimentOptions o;
  for (const char* t : {"proposed", "greedy", "conventional:10", "local:10", "case1", "case2"}) {
    o.policies.push_back(parse_policy(t, c));
  }
  const std::vector<std::string> files{"rewards.csv", "summary.csv", "runs.csv", "scatter.csv"};
  int compared = 0;
  bool same = true;
  auto run_pair = [&](const std::function<void(const fs::path&, int)>& run, const std::vector<std::string>& names) {
    fs::remove_all(dir / "a");
    fs::remove_all(dir / "b");
    run(dir / "a", 1);
    run(dir / "b", 4);
    for (const auto& f : names) {
      same = same && slurp(dir / "a" / f) == slurp(dir / "b" / f) && !slurp(dir / "a" / f).empty();
      ++compared;
    }
  };
  run_pair(
      [&](const fs::path& out, int threads) {
        ExperimentOptions x = o;
        x.out_dir = out.string();
        x.threads = threads;
        run_experiment(c, x);
      },
      files);
  run_pair(
      [&](const fs::path& out, int threads) {
        ExperimentOptions x = o;
        x.policies = {parse_policy("conventional:10", c)};
        x.out_dir = out.string();
        x.threads = threads;
        sweep(c, SweepAxis::rho, {0.0, 0.5, 1.0}, x);
      },
      {"sweep_summary.csv", "scatter.csv", "rho-0.5/runs.csv"});
  return {same, fmt::format("{} CSV files byte-identical across reruns (1 vs 4 workers)", compared)};
}

Outcome reward_remark() {
  Rng rng(derive_seed(9, 0));
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); };
  long long agree = 0, within = 0;
  const long long samples = 100000;
  for (long long i = 0; i < samples; ++i) {
    RewardParams p;
    p.preference_theta = uniform(0.0, 0.99);
    p.due_time_s = uniform(10, 3000);
    p.slowest_time_s = p.due_time_s * uniform(1.01, 5);
    p.interval_s = rng.uniform_index(2) ? 1.0 : 0.5;
    const int L = 1 + static_cast<int>(rng.uniform_index(600));
    const double k = uniform(1e-3, 1.0);
    const bool condition = p.interval_s * L <= k * p.due_time_s;
    const bool full = velocity_term(L, k, p) == p.preference_theta * std::exp(1.0);
    if (condition == full) ++agree;
    if (condition) ++within;
  }
  return {agree == samples, fmt::format("{} / {} tuples agree ({} satisfy dT·L <= k·T_move)", agree, samples, within)};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "orbit_mec_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work-dir" && i + 1 < argc) {
      work = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream s(argv[++i]);
      std::string item;
      while (std::getline(s, item, ',')) only.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: acceptance [--work-dir DIR] [--only N[,N...]]\n");
      return 2;
    }
  }
  fs::remove_all(work);
  fs::create_directories(work);
  auto wanted = [&](int n) { return only.empty() || only.count(n) > 0; };

  int failures = 0;
  auto report = [&](int n, const char* title, const std::function<Outcome()>& f) {
    if (!wanted(n)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", n, title, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "delay algebra", delay_algebra);
  report(2, "kinematics", kinematics);
  std::optional<ReferenceRun> ref;
  auto reference = [&]() -> const ReferenceRun& {
    if (!ref) ref = reference_training_run();
    return *ref;
  };
  report(3, "value bounds over a full training run", [&] { return boundedness(reference()); });
  report(4, "oracle gap on desk instances", oracle_gaps);
  report(5, "reward convergence", [&] { return convergence(reference()); });
  report(6, "baseline ordering and reductions", [&] { return baseline_ordering(baseline_experiment(work / "baselines")); });
  report(7, "local execution across N_CH", [&] { return local_insensitivity(work / "local_nch"); });
  report(8, "determinism", [&] { return determinism(work / "determinism"); });
  report(9, "reward full-speed condition", reward_remark);

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
