#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmsleep/actions.hpp"
#include "mmsleep/agents.hpp"
#include "mmsleep/radio.hpp"
#include "mmsleep/scene.hpp"

namespace mmsleep {

inline constexpr int kConfigVersion = 1;

struct SceneSource {
  // Used when `file` is empty. The generator seed comes from Seeds::scene.
  SceneParams generate{};
  std::optional<std::string> file;
};

struct Seeds {
  std::uint64_t scene = 7;
  std::uint64_t ue = 11;
  std::uint64_t agent = 13;
  std::uint64_t nn = 17;
};

struct AgentParams {
  double ucb_delta = 4.0;
  double greedy_epsilon = 0.4;
  // Scale applied to rewards before the UCB / greedy statistics (bps -> Mbps).
  double bandit_reward_scale = 1e-6;
  CmabConfig cmab{};
};

struct ExperimentConfig {
  SceneSource scene{};
  std::size_t n_bs = 15;
  std::size_t ue_count = 70;
  std::size_t k_clusters = 10;
  double alpha_off = 0.3;
  // 0 = fresh UE drop every iteration; otherwise iterations draw uniformly
  // from this many snapshots frozen up front.
  std::size_t ue_snapshot_pool = 0;
  std::size_t kmeans_max_iters = 100;

  std::size_t iterations = 2000;
  std::vector<std::string> policies{"cmab", "allon", "random", "greedy", "ucb", "load"};
  std::size_t moving_average_window = 200;
  bool regret = false;
  std::size_t regret_cap = kDefaultRegretCap;
  std::uint64_t action_cap = kDefaultActionCap;
  bool record_wall_time = false;
  // Discount for the reported discounted cumulative reward; not used in learning.
  double discount = 0.99;

  Seeds seeds{};
  RadioConfig radio{};
  PowerModelConfig power{};
  AgentParams agents{};
};

const std::vector<std::string>& known_policies();

/// Structural checks that need no scene (values, policy names). Throws ConfigError.
void validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys and wrong types throw
/// ConfigError. Relative scene-file paths resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

std::vector<std::string> split_list(const std::string& text);

}  // namespace mmsleep
