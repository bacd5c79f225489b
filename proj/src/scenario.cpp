#include "orbit_mec/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "orbit_mec/errors.hpp"

namespace orbit_mec {

using nlohmann::json;

std::string_view to_string(DecayUnit unit) noexcept {
  return unit == DecayUnit::episode ? "episode" : "step";
}

DecayUnit parse_decay_unit(std::string_view text) {
  if (text == "step") return DecayUnit::step;
  if (text == "episode") return DecayUnit::episode;
  throw ConfigError("/learning/epsilon_decay_unit", "expected \"step\" or \"episode\"");
}

void Hyperparams::validate() const {
  if (!(learning_rate > 0.0 && learning_rate < 1.0)) throw ConfigError("/learning/learning_rate", "must lie in (0, 1)");
  if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("/learning/discount", "must lie in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("/learning/epsilon", "must lie in [0, 1]");
  if (!(epsilon_decay >= 0.0)) throw ConfigError("/learning/epsilon_decay", "must be >= 0");
  if (episodes < 0) throw ConfigError("/learning/episodes", "must be >= 0");
  if (eval_episodes < 1) throw ConfigError("/learning/eval_episodes", "must be >= 1");
}

double Hyperparams::epsilon_at(long long steps, long long episodes_done) const {
  const double k = static_cast<double>(decay_unit == DecayUnit::step ? steps : episodes_done);
  return std::max(0.0, epsilon - k * epsilon_decay);
}

Tier ScenarioConfig::tier_of(int region_id) const {
  if (explicit_regions) {
    for (const auto& r : *explicit_regions) {
      if (r.region_id == region_id) return r.tier;
    }
  }
  return std::find(satellite_ids.begin(), satellite_ids.end(), region_id) != satellite_ids.end()
             ? Tier::satellite
             : Tier::cellular;
}

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void require_set(const std::vector<double>& v, const std::string& path) {
  if (v.empty()) throw ConfigError(path, "set must be non-empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] <= 0.0) throw ConfigError(path + "/" + std::to_string(i), "must be finite and > 0");
  }
}

}  // namespace

double ScenarioConfig::resolved_due_time() const {
  if (due_time_s) return *due_time_s;
  double expected_length = 0.0;
  if (explicit_regions) {
    for (const auto& r : *explicit_regions) expected_length += r.length_m;
  } else {
    for (int id = 1; id <= region_count; ++id) {
      expected_length += mean_of(tier_of(id) == Tier::satellite ? satellite.length_set_m : cellular.length_set_m);
    }
  }
  return expected_length / (0.5 * (v_min() + v_max()));
}

namespace {

// Tabular states index every observed value in its configured set.
void require_members(const std::vector<double>& values, const std::vector<double>& set, const std::string& path) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::find(set.begin(), set.end(), values[i]) == set.end()) {
      throw ConfigError(path + "/" + std::to_string(i), "value is not a member of the configured set");
    }
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (explicit_regions) {
    const auto& regs = *explicit_regions;
    if (regs.empty()) throw ConfigError("/regions/explicit", "region chain must be non-empty");
    for (std::size_t i = 0; i < regs.size(); ++i) {
      const std::string p = "/regions/explicit/" + std::to_string(i);
      if (regs[i].region_id != static_cast<int>(i) + 1) throw ConfigError(p + "/id", "region ids must be 1..N in order");
      if (regs[i].tier == Tier::none) throw ConfigError(p + "/tier", "must be cellular or satellite");
      if (!(regs[i].length_m > 0.0)) throw ConfigError(p + "/length_m", "must be > 0");
      if (!(regs[i].mec_cpu_hz > 0.0)) throw ConfigError(p + "/mec_cpu_hz", "must be > 0");
    }
  } else {
    if (region_count < 1) throw ConfigError("/regions/count", "region chain must be non-empty");
    for (std::size_t i = 0; i < satellite_ids.size(); ++i) {
      if (satellite_ids[i] < 1 || satellite_ids[i] > region_count) {
        throw ConfigError("/regions/satellite_ids/" + std::to_string(i), "id outside 1..count");
      }
    }
    require_set(cellular.length_set_m, "/regions/cellular/length_set_m");
    require_set(cellular.mec_cpu_set_hz, "/regions/cellular/mec_cpu_set_hz");
    if (!satellite_ids.empty()) {
      require_set(satellite.length_set_m, "/regions/satellite/length_set_m");
      require_set(satellite.mec_cpu_set_hz, "/regions/satellite/mec_cpu_set_hz");
    }
    if (unavailable_count < 0 || unavailable_count > region_count) {
      throw ConfigError("/regions/unavailable_count", "must lie in 0..count");
    }
  }
  try {
    radio.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError("/radio", e.what());
  }
  if (!(cycles_per_bit > 0.0)) throw ConfigError("/compute/cycles_per_bit", "must be > 0");
  require_set(local_cpu_set_hz, "/compute/local_cpu_set_hz");
  require_set(data_set_bits, "/compute/data_set_bits");
  if (!(result_ratio >= 0.0) || !std::isfinite(result_ratio)) throw ConfigError("/compute/result_ratio", "must be >= 0");
  try {
    migration.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError("/migration", e.what());
  }
  require_set(velocity_set_mps, "/velocity/set_mps");
  if (!std::is_sorted(velocity_set_mps.begin(), velocity_set_mps.end()) ||
      std::adjacent_find(velocity_set_mps.begin(), velocity_set_mps.end()) != velocity_set_mps.end()) {
    throw ConfigError("/velocity/set_mps", "must be strictly ascending");
  }
  if (!(accel_mps2 > 0.0)) throw ConfigError("/velocity/accel_mps2", "must be > 0");
  if (!(interval_s > 0.0)) throw ConfigError("/velocity/interval_s", "must be > 0");
  if (!(initial_velocity_mps > 0.0)) throw ConfigError("/velocity/initial_mps", "must be > 0");
  if (std::find(velocity_set_mps.begin(), velocity_set_mps.end(), initial_velocity_mps) == velocity_set_mps.end()) {
    throw ConfigError("/velocity/initial_mps", "must be a member of the velocity set");
  }
  if (!(theta >= 0.0 && theta < 1.0)) throw ConfigError("/reward/theta", "must lie in [0, 1)");
  if (due_time_s && !(*due_time_s > 0.0)) throw ConfigError("/reward/due_time_s", "must be > 0");
  hyper.validate();
  if (replications < 1) throw ConfigError("/replications", "must be >= 1");
  if (fixed_draws) {
    const int n = explicit_regions ? static_cast<int>(explicit_regions->size()) : region_count;
    std::set<int> seen;
    for (std::size_t i = 0; i < fixed_draws->size(); ++i) {
      const auto& fd = (*fixed_draws)[i];
      const std::string p = "/fixed_draws/" + std::to_string(i);
      if (fd.region_id < 1 || fd.region_id > n) throw ConfigError(p + "/region", "id outside 1..N");
      if (!seen.insert(fd.region_id).second) throw ConfigError(p + "/region", "duplicate region");
      require_set(fd.data_bits, p + "/data_bits");
      require_set(fd.local_cpu_hz, p + "/local_cpu_hz");
      require_members(fd.data_bits, data_set_bits, p + "/data_bits");
      require_members(fd.local_cpu_hz, local_cpu_set_hz, p + "/local_cpu_hz");
    }
    if (static_cast<int>(seen.size()) != n) throw ConfigError("/fixed_draws", "every region needs an entry");
  }
}

namespace {

std::vector<double> range_set(double first, double step, int count, double scale) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back((first + step * i) * scale);
  return out;
}

}  // namespace

ScenarioConfig reference_preset() {
  ScenarioConfig c;
  c.name = "reference";
  c.region_count = 20;
  c.satellite_ids = {8, 9, 10, 11, 12, 13};
  c.cellular.length_set_m = {100.0, 200.0, 300.0};
  c.cellular.mec_cpu_set_hz = range_set(10, 1, 10, 1e9);
  c.satellite.length_set_m = {1000.0, 2000.0, 3000.0};
  c.satellite.mec_cpu_set_hz = range_set(50, 1, 10, 1e9);
  c.unavailable_count = 4;
  c.radio = RadioParams{};
  c.cycles_per_bit = 800.0;
  // 0.5, 0.6, ..., 1.0 GHz, written out to avoid accumulated rounding.
  c.local_cpu_set_hz = {0.5e9, 0.6e9, 0.7e9, 0.8e9, 0.9e9, 1.0e9};
  // 100, 250, 400, 550, 700 KB with 1 KB = 8000 bit.
  c.data_set_bits = {0.8e6, 2.0e6, 3.2e6, 4.4e6, 5.6e6};
  c.result_ratio = 0.1;
  c.migration = MigrationParams{0.1, 0.5};
  c.velocity_set_mps = range_set(5, 1, 16, 1.0);
  c.accel_mps2 = 2.0;
  c.interval_s = 1.0;
  c.initial_velocity_mps = 5.0;
  c.theta = 0.1;
  c.hyper = Hyperparams{};
  c.replications = 10;
  c.master_seed = 2023;
  return c;
}

double Topology::total_length() const {
  double s = 0.0;
  for (const auto& r : regions) s += r.length_m;
  return s;
}

int Topology::unavailable_count() const {
  return static_cast<int>(std::count_if(regions.begin(), regions.end(), [](const auto& r) { return !r.channel_available; }));
}

Topology draw_topology(const ScenarioConfig& config, Rng& rng) {
  config.validate();
  Topology t;
  if (config.explicit_regions) {
    t.regions = *config.explicit_regions;
    return t;
  }
  t.regions.reserve(static_cast<std::size_t>(config.region_count));
  for (int id = 1; id <= config.region_count; ++id) {
    RegionDescriptor r;
    r.region_id = id;
    r.tier = config.tier_of(id);
    const TierSpec& spec = r.tier == Tier::satellite ? config.satellite : config.cellular;
    r.length_m = spec.length_set_m[rng.uniform_index(spec.length_set_m.size())];
    r.mec_cpu_hz = spec.mec_cpu_set_hz[rng.uniform_index(spec.mec_cpu_set_hz.size())];
    t.regions.push_back(r);
  }
  // Partial Fisher-Yates: the first unavailable_count slots are the dead regions.
  std::vector<int> order(static_cast<std::size_t>(config.region_count));
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < config.unavailable_count; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) + rng.uniform_index(order.size() - static_cast<std::size_t>(i));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
    t.regions[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].channel_available = false;
  }
  return t;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Tier parse_tier(const std::string& s, const std::string& path) {
  if (s == "cellular") return Tier::cellular;
  if (s == "satellite") return Tier::satellite;
  throw ConfigError(path, "expected \"cellular\" or \"satellite\"");
}

// Field readers with JSON-pointer diagnostics. Absent keys keep the default.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  std::string at(const char* key) const { return path_ + "/" + key; }
  Reader child(const char* key) const { return Reader(j_.at(key), at(key)); }
  const json& raw(const char* key) const { return j_.at(key); }

  template <typename T>
  void get(const char* key, T& out) const {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(at(key), std::string("wrong type: ") + e.what());
    }
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) const {
    if (!has(key)) return;
    T v{};
    get(key, v);
    out = v;
  }

 private:
  const json& j_;
  std::string path_;
};

json tier_json(const TierSpec& t) {
  return json{{"length_set_m", t.length_set_m}, {"mec_cpu_set_hz", t.mec_cpu_set_hz}};
}

void read_tier(const Reader& r, TierSpec& t) {
  r.get("length_set_m", t.length_set_m);
  r.get("mec_cpu_set_hz", t.mec_cpu_set_hz);
}

}  // namespace

json to_json(const ScenarioConfig& c) {
  json regions{{"count", c.region_count},
               {"satellite_ids", c.satellite_ids},
               {"cellular", tier_json(c.cellular)},
               {"satellite", tier_json(c.satellite)},
               {"unavailable_count", c.unavailable_count}};
  if (c.explicit_regions) {
    json list = json::array();
    for (const auto& r : *c.explicit_regions) {
      list.push_back({{"id", r.region_id},
                      {"tier", to_string(r.tier)},
                      {"length_m", r.length_m},
                      {"channel_available", r.channel_available},
                      {"mec_cpu_hz", r.mec_cpu_hz}});
    }
    regions["explicit"] = list;
  }
  const auto& rp = c.radio;
  json j{
      {"schema", kScenarioSchema},
      {"name", c.name},
      {"regions", regions},
      {"radio",
       {{"bandwidth_hz", rp.bandwidth_hz},
        {"tx_power_w", rp.tx_power_w},
        {"channel_gain_sq", rp.channel_gain_sq},
        {"noise_power_w", rp.noise_power_w},
        {"sat_uplink_bps", rp.sat_uplink_bps},
        {"sat_downlink_bps", rp.sat_downlink_bps},
        {"sat_dist_gs_m", rp.sat_dist_gs_m},
        {"sat_dist_se_m", rp.sat_dist_se_m},
        {"light_speed_mps", rp.light_speed_mps}}},
      {"compute",
       {{"cycles_per_bit", c.cycles_per_bit},
        {"local_cpu_set_hz", c.local_cpu_set_hz},
        {"data_set_bits", c.data_set_bits},
        {"result_ratio", c.result_ratio}}},
      {"migration", {{"ratio", c.migration.migration_ratio}, {"cross_tier_cost_s", c.migration.cross_tier_cost_s}}},
      {"velocity",
       {{"set_mps", c.velocity_set_mps},
        {"accel_mps2", c.accel_mps2},
        {"interval_s", c.interval_s},
        {"initial_mps", c.initial_velocity_mps}}},
      {"reward", {{"theta", c.theta}, {"due_time_s", c.due_time_s ? json(*c.due_time_s) : json(nullptr)}}},
      {"learning",
       {{"learning_rate", c.hyper.learning_rate},
        {"discount", c.hyper.discount},
        {"epsilon", c.hyper.epsilon},
        {"epsilon_decay", c.hyper.epsilon_decay},
        {"epsilon_decay_unit", std::string(to_string(c.hyper.decay_unit))},
        {"episodes", c.hyper.episodes},
        {"eval_episodes", c.hyper.eval_episodes}}},
      {"replications", c.replications},
      {"master_seed", c.master_seed},
  };
  if (c.fixed_draws) {
    json list = json::array();
    for (const auto& fd : *c.fixed_draws) {
      list.push_back({{"region", fd.region_id}, {"data_bits", fd.data_bits}, {"local_cpu_hz", fd.local_cpu_hz}});
    }
    j["fixed_draws"] = list;
  }
  return j;
}

ScenarioConfig scenario_from_json(const json& j) {
  const Reader root(j, "");
  std::string schema;
  root.get("schema", schema);
  if (schema != kScenarioSchema) {
    throw ConfigError("/schema", "expected \"" + std::string(kScenarioSchema) + "\", got \"" + schema + "\"");
  }
  // Absent sections fall back to the reference preset.
  ScenarioConfig c = reference_preset();
  root.get("name", c.name);
  if (root.has("regions")) {
    const Reader r = root.child("regions");
    r.get("count", c.region_count);
    r.get("satellite_ids", c.satellite_ids);
    if (r.has("cellular")) read_tier(r.child("cellular"), c.cellular);
    if (r.has("satellite")) read_tier(r.child("satellite"), c.satellite);
    r.get("unavailable_count", c.unavailable_count);
    if (r.has("explicit")) {
      const json& list = r.raw("explicit");
      if (!list.is_array()) throw ConfigError(r.at("explicit"), "expected an array");
      std::vector<RegionDescriptor> regs;
      for (std::size_t i = 0; i < list.size(); ++i) {
        const Reader e(list[i], r.at("explicit") + "/" + std::to_string(i));
        RegionDescriptor d;
        d.region_id = static_cast<int>(i) + 1;
        e.get("id", d.region_id);
        std::string tier = "cellular";
        e.get("tier", tier);
        d.tier = parse_tier(tier, e.at("tier"));
        e.get("length_m", d.length_m);
        e.get("channel_available", d.channel_available);
        e.get("mec_cpu_hz", d.mec_cpu_hz);
        regs.push_back(d);
      }
      c.region_count = static_cast<int>(regs.size());
      c.explicit_regions = std::move(regs);
    }
  }
  if (root.has("radio")) {
    const Reader r = root.child("radio");
    auto& rp = c.radio;
    r.get("bandwidth_hz", rp.bandwidth_hz);
    r.get("tx_power_w", rp.tx_power_w);
    r.get("channel_gain_sq", rp.channel_gain_sq);
    r.get("noise_power_w", rp.noise_power_w);
    r.get("sat_uplink_bps", rp.sat_uplink_bps);
    r.get("sat_downlink_bps", rp.sat_downlink_bps);
    r.get("sat_dist_gs_m", rp.sat_dist_gs_m);
    r.get("sat_dist_se_m", rp.sat_dist_se_m);
    r.get("light_speed_mps", rp.light_speed_mps);
  }
  if (root.has("compute")) {
    const Reader r = root.child("compute");
    r.get("cycles_per_bit", c.cycles_per_bit);
    r.get("local_cpu_set_hz", c.local_cpu_set_hz);
    r.get("data_set_bits", c.data_set_bits);
    r.get("result_ratio", c.result_ratio);
  }
  if (root.has("migration")) {
    const Reader r = root.child("migration");
    r.get("ratio", c.migration.migration_ratio);
    r.get("cross_tier_cost_s", c.migration.cross_tier_cost_s);
  }
  if (root.has("velocity")) {
    const Reader r = root.child("velocity");
    r.get("set_mps", c.velocity_set_mps);
    r.get("accel_mps2", c.accel_mps2);
    r.get("interval_s", c.interval_s);
    r.get("initial_mps", c.initial_velocity_mps);
  }
  if (root.has("reward")) {
    const Reader r = root.child("reward");
    r.get("theta", c.theta);
    r.get("due_time_s", c.due_time_s);
  }
  if (root.has("learning")) {
    const Reader r = root.child("learning");
    r.get("learning_rate", c.hyper.learning_rate);
    r.get("discount", c.hyper.discount);
    r.get("epsilon", c.hyper.epsilon);
    r.get("epsilon_decay", c.hyper.epsilon_decay);
    std::string unit(to_string(c.hyper.decay_unit));
    r.get("epsilon_decay_unit", unit);
    c.hyper.decay_unit = parse_decay_unit(unit);
    r.get("episodes", c.hyper.episodes);
    r.get("eval_episodes", c.hyper.eval_episodes);
  }
  root.get("replications", c.replications);
  root.get("master_seed", c.master_seed);
  if (root.has("fixed_draws")) {
    const json& list = root.raw("fixed_draws");
    if (!list.is_array()) throw ConfigError("/fixed_draws", "expected an array");
    std::vector<FixedDraws> draws;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Reader e(list[i], "/fixed_draws/" + std::to_string(i));
      FixedDraws fd;
      e.get("region", fd.region_id);
      e.get("data_bits", fd.data_bits);
      e.get("local_cpu_hz", fd.local_cpu_hz);
      draws.push_back(std::move(fd));
    }
    c.fixed_draws = std::move(draws);
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("", path + ": " + e.what());
  }
  return scenario_from_json(j);
}

std::uint64_t config_hash(const ScenarioConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace orbit_mec
