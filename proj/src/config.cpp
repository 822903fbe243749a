#include "mmsleep/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "mmsleep/errors.hpp"

namespace mmsleep {

using nlohmann::json;

namespace {

// Strict reader over one JSON object: typed lookups plus a final check that
// no unexpected key was present.
class Section {
 public:
  Section(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const char* key) const { return j_->contains(key); }

  template <class T>
  void get(const char* key, T& out) {
    if (!j_->contains(key)) return;
    used_.insert(key);
    const json& v = (*j_)[key];
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw type_error(key, "a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw type_error(key, "a non-negative integer");
      }
      out = v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw type_error(key, "a number");
      out = v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw type_error(key, "a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (!v.is_array()) throw type_error(key, "an array of strings");
      out.clear();
      for (const json& e : v) {
        if (!e.is_string()) throw type_error(key, "an array of strings");
        out.push_back(e.get<std::string>());
      }
    } else if constexpr (std::is_same_v<T, Extent>) {
      if (!v.is_array() || v.size() != 3) throw type_error(key, "[x, y, z]");
      for (const json& e : v) {
        if (!e.is_number()) throw type_error(key, "[x, y, z]");
      }
      out = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
      if (!v.is_array()) throw type_error(key, "an array of non-negative integers");
      out.clear();
      for (const json& e : v) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < 0) {
          throw type_error(key, "an array of non-negative integers");
        }
        out.push_back(e.get<std::size_t>());
      }
    } else {
      static_assert(sizeof(T) == 0, "unsupported config field type");
    }
  }

  Section child(const char* key) {
    used_.insert(key);
    const std::string path = path_.empty() ? std::string(key) : path_ + "." + key;
    if (!j_->contains(key)) return Section(empty(), path);
    return Section((*j_)[key], path);
  }

  void finish() const {
    for (const auto& [k, v] : j_->items()) {
      if (!used_.count(k)) throw ConfigError(where() + ": unknown key '" + k + "'");
    }
  }

  std::string where() const { return path_.empty() ? "config" : path_; }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }
  ConfigError type_error(const char* key, const char* expected) const {
    return ConfigError(where() + "." + key + ": expected " + expected);
  }

  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace

const std::vector<std::string>& known_policies() {
  static const std::vector<std::string> p{"cmab", "allon", "random", "greedy", "ucb", "load"};
  return p;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void validate(const ExperimentConfig& c) {
  if (c.n_bs == 0) throw ConfigError("network.n_bs must be >= 1");
  if (c.ue_count == 0) throw ConfigError("network.ue_count must be >= 1");
  if (c.k_clusters == 0) throw ConfigError("network.k_clusters must be >= 1");
  if (!(c.alpha_off >= 0.0 && c.alpha_off <= 1.0)) throw ConfigError("network.alpha_off must lie in [0, 1]");
  if (c.kmeans_max_iters == 0) throw ConfigError("network.kmeans_max_iters must be >= 1");
  if (c.iterations == 0) throw ConfigError("run.iterations must be >= 1");
  if (c.moving_average_window == 0) throw ConfigError("run.moving_average_window must be >= 1");
  if (c.policies.empty()) throw ConfigError("run.policies must name at least one policy");
  std::set<std::string> seen;
  for (const std::string& p : c.policies) {
    const auto& known = known_policies();
    if (std::find(known.begin(), known.end(), p) == known.end()) {
      throw ConfigError("unknown policy '" + p + "'");
    }
    if (!seen.insert(p).second) throw ConfigError("policy '" + p + "' listed twice");
  }
  if (!(c.discount > 0.0 && c.discount <= 1.0)) throw ConfigError("run.discount must lie in (0, 1]");
  if (!(c.agents.greedy_epsilon >= 0.0 && c.agents.greedy_epsilon <= 1.0)) {
    throw ConfigError("agents.greedy.epsilon must lie in [0, 1]");
  }
  if (!(c.agents.ucb_delta >= 0.0)) throw ConfigError("agents.ucb.delta must be >= 0");
  if (!(c.agents.bandit_reward_scale > 0.0)) throw ConfigError("agents.bandit_reward_scale must be > 0");
  const CmabConfig& m = c.agents.cmab;
  if (!(m.epsilon_initial >= 0.0 && m.epsilon_initial <= 1.0) ||
      !(m.epsilon_decay > 0.0 && m.epsilon_decay <= 1.0) ||
      !(m.epsilon_min >= 0.0 && m.epsilon_min <= 1.0)) {
    throw ConfigError("agents.cmab epsilon parameters out of range");
  }
  if (m.update_every == 0 || m.batch_size == 0 || m.buffer_capacity == 0) {
    throw ConfigError("agents.cmab update_every, batch_size and buffer_capacity must be >= 1");
  }
  for (std::size_t h : m.hidden_layers) {
    if (h == 0) throw ConfigError("agents.cmab.hidden_layers entries must be >= 1");
  }
  if (!(m.adam.learning_rate > 0.0) || !(m.adam.l2_lambda >= 0.0) ||
      !(m.adam.beta1 >= 0.0 && m.adam.beta1 < 1.0) || !(m.adam.beta2 >= 0.0 && m.adam.beta2 < 1.0) ||
      !(m.adam.epsilon > 0.0)) {
    throw ConfigError("agents.cmab.adam parameters out of range");
  }
  validate(c.radio);
  validate(c.power);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["version"] = kConfigVersion;
  const SceneParams& g = c.scene.generate;
  if (c.scene.file) {
    j["scene"] = {{"file", *c.scene.file}};
  } else {
    j["scene"] = {{"generate",
                   {{"extent", {g.extent.x, g.extent.y, g.extent.z}},
                    {"resolution", g.resolution},
                    {"building_count", g.building_count},
                    {"ue_height", g.ue_height},
                    {"min_width", g.min_width},
                    {"max_width", g.max_width},
                    {"min_height", g.min_height},
                    {"max_height", g.max_height},
                    {"min_gap_cells", g.min_gap_cells},
                    {"max_attempts", g.max_attempts}}}};
  }
  j["network"] = {{"n_bs", c.n_bs},
                  {"ue_count", c.ue_count},
                  {"k_clusters", c.k_clusters},
                  {"alpha_off", c.alpha_off},
                  {"ue_snapshot_pool", c.ue_snapshot_pool},
                  {"kmeans_max_iters", c.kmeans_max_iters}};
  j["run"] = {{"iterations", c.iterations},
              {"policies", c.policies},
              {"moving_average_window", c.moving_average_window},
              {"regret", c.regret},
              {"regret_cap", c.regret_cap},
              {"action_cap", c.action_cap},
              {"record_wall_time", c.record_wall_time},
              {"discount", c.discount}};
  j["seeds"] = {{"scene", c.seeds.scene}, {"ue", c.seeds.ue}, {"agent", c.seeds.agent}, {"nn", c.seeds.nn}};
  const RadioConfig& r = c.radio;
  j["radio"] = {{"carrier_ghz", r.carrier_ghz},
                {"tx_power_dbm", r.tx_power_dbm},
                {"total_bandwidth_hz", r.total_bandwidth_hz},
                {"boltzmann", r.boltzmann},
                {"temperature_k", r.temperature_k},
                {"noise_figure_db", r.noise_figure_db},
                {"main_lobe_gain_db", r.main_lobe_gain_db},
                {"side_lobe_gain_db", r.side_lobe_gain_db},
                {"sensitivity_dbm", r.sensitivity_dbm}};
  const PowerModelConfig& p = c.power;
  j["power"] = {{"p_bbu_w", p.p_bbu_w},
                {"p_aau_w", p.p_aau_w},
                {"cooling_loss", p.cooling_loss},
                {"dc_loss", p.dc_loss},
                {"sleep_power_w", p.sleep_power_w}};
  const CmabConfig& m = c.agents.cmab;
  j["agents"] = {{"bandit_reward_scale", c.agents.bandit_reward_scale},
                 {"ucb", {{"delta", c.agents.ucb_delta}}},
                 {"greedy", {{"epsilon", c.agents.greedy_epsilon}}},
                 {"cmab",
                  {{"epsilon_initial", m.epsilon_initial},
                   {"epsilon_decay", m.epsilon_decay},
                   {"epsilon_min", m.epsilon_min},
                   {"update_every", m.update_every},
                   {"batch_size", m.batch_size},
                   {"buffer_capacity", m.buffer_capacity},
                   {"hidden_layers", m.hidden_layers},
                   {"adam",
                    {{"learning_rate", m.adam.learning_rate},
                     {"beta1", m.adam.beta1},
                     {"beta2", m.adam.beta2},
                     {"epsilon", m.adam.epsilon},
                     {"l2_lambda", m.adam.l2_lambda}}}}}};
  return j;
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  Section root(j, "");
  if (root.has("version")) {
    int version = 0;
    root.get("version", version);
    if (version != kConfigVersion) {
      throw ConfigError("unsupported config version " + std::to_string(version));
    }
  }

  {
    Section s = root.child("scene");
    if (s.has("file") && s.has("generate")) {
      throw ConfigError("scene: give either 'file' or 'generate', not both");
    }
    if (s.has("file")) {
      std::string file;
      s.get("file", file);
      std::filesystem::path p(file);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      c.scene.file = p.string();
    }
    Section g = s.child("generate");
    SceneParams& sp = c.scene.generate;
    g.get("extent", sp.extent);
    g.get("resolution", sp.resolution);
    g.get("building_count", sp.building_count);
    g.get("ue_height", sp.ue_height);
    g.get("min_width", sp.min_width);
    g.get("max_width", sp.max_width);
    g.get("min_height", sp.min_height);
    g.get("max_height", sp.max_height);
    g.get("min_gap_cells", sp.min_gap_cells);
    g.get("max_attempts", sp.max_attempts);
    g.finish();
    s.finish();
  }
  {
    Section s = root.child("network");
    s.get("n_bs", c.n_bs);
    s.get("ue_count", c.ue_count);
    s.get("k_clusters", c.k_clusters);
    s.get("alpha_off", c.alpha_off);
    s.get("ue_snapshot_pool", c.ue_snapshot_pool);
    s.get("kmeans_max_iters", c.kmeans_max_iters);
    s.finish();
  }
  {
    Section s = root.child("run");
    s.get("iterations", c.iterations);
    s.get("policies", c.policies);
    s.get("moving_average_window", c.moving_average_window);
    s.get("regret", c.regret);
    s.get("regret_cap", c.regret_cap);
    s.get("action_cap", c.action_cap);
    s.get("record_wall_time", c.record_wall_time);
    s.get("discount", c.discount);
    s.finish();
  }
  {
    Section s = root.child("seeds");
    s.get("scene", c.seeds.scene);
    s.get("ue", c.seeds.ue);
    s.get("agent", c.seeds.agent);
    s.get("nn", c.seeds.nn);
    s.finish();
  }
  {
    Section s = root.child("radio");
    RadioConfig& r = c.radio;
    s.get("carrier_ghz", r.carrier_ghz);
    s.get("tx_power_dbm", r.tx_power_dbm);
    s.get("total_bandwidth_hz", r.total_bandwidth_hz);
    s.get("boltzmann", r.boltzmann);
    s.get("temperature_k", r.temperature_k);
    s.get("noise_figure_db", r.noise_figure_db);
    s.get("main_lobe_gain_db", r.main_lobe_gain_db);
    s.get("side_lobe_gain_db", r.side_lobe_gain_db);
    s.get("sensitivity_dbm", r.sensitivity_dbm);
    s.finish();
  }
  {
    Section s = root.child("power");
    PowerModelConfig& p = c.power;
    s.get("p_bbu_w", p.p_bbu_w);
    s.get("p_aau_w", p.p_aau_w);
    s.get("cooling_loss", p.cooling_loss);
    s.get("dc_loss", p.dc_loss);
    s.get("sleep_power_w", p.sleep_power_w);
    s.finish();
  }
  {
    Section s = root.child("agents");
    s.get("bandit_reward_scale", c.agents.bandit_reward_scale);
    Section ucb = s.child("ucb");
    ucb.get("delta", c.agents.ucb_delta);
    ucb.finish();
    Section greedy = s.child("greedy");
    greedy.get("epsilon", c.agents.greedy_epsilon);
    greedy.finish();
    Section cm = s.child("cmab");
    CmabConfig& m = c.agents.cmab;
    cm.get("epsilon_initial", m.epsilon_initial);
    cm.get("epsilon_decay", m.epsilon_decay);
    cm.get("epsilon_min", m.epsilon_min);
    cm.get("update_every", m.update_every);
    cm.get("batch_size", m.batch_size);
    cm.get("buffer_capacity", m.buffer_capacity);
    cm.get("hidden_layers", m.hidden_layers);
    Section adam = cm.child("adam");
    adam.get("learning_rate", m.adam.learning_rate);
    adam.get("beta1", m.adam.beta1);
    adam.get("beta2", m.adam.beta2);
    adam.get("epsilon", m.adam.epsilon);
    adam.get("l2_lambda", m.adam.l2_lambda);
    adam.finish();
    cm.finish();
    s.finish();
  }
  root.finish();
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  // A run manifest carries the full config and can be replayed directly.
  if (j.is_object() && j.value("format", "") == "mmsleep-manifest" && j.contains("config")) {
    return config_from_json(j["config"], path.parent_path());
  }
  return config_from_json(j, path.parent_path());
}

}  // namespace mmsleep
