#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmsleep/actions.hpp"
#include "mmsleep/context.hpp"
#include "mmsleep/nn.hpp"
#include "mmsleep/radio.hpp"
#include "mmsleep/random.hpp"

namespace mmsleep {

struct Experience {
  std::vector<double> context;
  std::size_t action = 0;
  double reward = 0.0;
};

/// Fixed-capacity FIFO of experiences.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000);

  void push(Experience e);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return entries_.size(); }
  /// i = 0 is the oldest retained entry.
  const Experience& at(std::size_t i) const;
  /// Uniform draw with replacement.
  std::vector<const Experience*> sample(std::size_t n, Rng& rng) const;

 private:
  std::vector<Experience> entries_;
  std::size_t head_ = 0;  // slot of the oldest entry
  std::size_t size_ = 0;
};

/// What an agent sees when asked for an action at iteration t (1-based).
struct Decision {
  const ContextVector& context;
  std::size_t t = 1;
  // All-on evaluation of the current snapshot; only the load-based policy
  // reads it.
  const LinkReport* all_on_report = nullptr;
};

struct Feedback {
  const ContextVector& context;
  std::size_t action = 0;
  double reward_bps = 0.0;
  std::size_t t = 1;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  /// An index into the action space, or kAllOnAction.
  virtual std::size_t select(const Decision& decision) = 0;
  virtual void observe(const Feedback&) {}
  /// Current exploration rate, for policies that have one.
  virtual std::optional<double> epsilon() const { return std::nullopt; }
};

class AllOnAgent final : public Agent {
 public:
  std::string name() const override { return "allon"; }
  std::size_t select(const Decision&) override { return kAllOnAction; }
};

class RandomAgent final : public Agent {
 public:
  RandomAgent(std::size_t n_actions, std::uint64_t seed);
  std::string name() const override { return "random"; }
  std::size_t select(const Decision&) override;

 private:
  std::size_t n_actions_;
  Rng rng_;
};

/// Running per-arm count and reward sum.
struct ArmStats {
  explicit ArmStats(std::size_t n_arms) : counts(n_arms, 0), sums(n_arms, 0.0) {}
  void record(std::size_t arm, double reward) {
    ++counts[arm];
    sums[arm] += reward;
  }
  double mean(std::size_t arm) const {
    return counts[arm] ? sums[arm] / static_cast<double>(counts[arm]) : 0.0;
  }
  std::vector<double> means() const;

  std::vector<std::size_t> counts;
  std::vector<double> sums;
};

/// mean + delta * sqrt(2 ln t / n).
double ucb_score(double mean, std::size_t count, std::size_t t, double delta);

/// Unplayed arms first (lowest index), otherwise the highest UCB score.
std::size_t ucb_select(std::span<const double> means, std::span<const std::size_t> counts,
                       std::size_t t, double delta);

/// Highest mean; unplayed arms count as +inf. Ties go to the lowest index.
std::size_t greedy_argmax(std::span<const double> means, std::span<const std::size_t> counts);

// Bandit baselines keep their statistics in reward_bps * reward_scale
// (Mbps by default) so that the UCB exploration term is commensurate.
class UcbAgent final : public Agent {
 public:
  UcbAgent(std::size_t n_actions, double delta = 4.0, double reward_scale = 1e-6);
  std::string name() const override { return "ucb"; }
  std::size_t select(const Decision& d) override;
  void observe(const Feedback& f) override;
  const ArmStats& stats() const { return stats_; }

 private:
  ArmStats stats_;
  double delta_;
  double reward_scale_;
};

class EpsilonGreedyAgent final : public Agent {
 public:
  EpsilonGreedyAgent(std::size_t n_actions, double epsilon, std::uint64_t seed,
                     double reward_scale = 1e-6);
  std::string name() const override { return "greedy"; }
  std::size_t select(const Decision& d) override;
  void observe(const Feedback& f) override;
  std::optional<double> epsilon() const override { return epsilon_; }
  const ArmStats& stats() const { return stats_; }

 private:
  ArmStats stats_;
  double epsilon_;
  double reward_scale_;
  Rng rng_;
};

/// L_i = 1 / (number of BSs that serve or interfere with UE i), 0 if uncovered.
std::vector<double> ue_load_factors(const LinkReport& report);
/// L_j = sum of L_i over the UEs served by BS j.
std::vector<double> bs_loads(const LinkReport& report);
/// Sleeps the k_off least-loaded BSs (ties to the lowest index).
std::size_t load_based_select(const LinkReport& all_on_report, const ActionSpace& space);

class LoadBasedAgent final : public Agent {
 public:
  explicit LoadBasedAgent(const ActionSpace& space) : space_(&space) {}
  std::string name() const override { return "load"; }
  std::size_t select(const Decision& d) override;

 private:
  const ActionSpace* space_;
};

struct CmabConfig {
  double epsilon_initial = 0.7;
  double epsilon_decay = 0.9;
  double epsilon_min = 0.01;
  std::size_t update_every = 8;
  std::size_t batch_size = 256;
  std::size_t buffer_capacity = 10000;
  std::vector<std::size_t> hidden_layers{128, 64};
  AdamConfig adam{};
};

/// Neural contextual bandit: one network output per action predicting the
/// (normalized) reward, epsilon-decay exploration, and periodic minibatch
/// training from a replay buffer. Rewards are divided by the running maximum
/// reward before training so targets stay in [0, 1].
class CmabAgent final : public Agent {
 public:
  CmabAgent(const CmabConfig& config, std::size_t context_size, std::size_t n_actions,
            std::uint64_t agent_seed, std::uint64_t nn_seed);

  std::string name() const override { return "cmab"; }
  std::size_t select(const Decision& d) override;
  void observe(const Feedback& f) override;
  std::optional<double> epsilon() const override { return epsilon_; }

  void set_epsilon(double e) { epsilon_ = e; }
  const MlpModel& model() const { return model_; }
  MlpModel& model() { return model_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::size_t training_steps() const { return training_steps_; }
  double last_loss() const { return last_loss_; }
  double reward_max() const { return reward_max_; }

 private:
  CmabConfig config_;
  std::size_t n_actions_;
  MlpModel model_;
  ReplayBuffer buffer_;
  Rng rng_;
  double epsilon_;
  double reward_max_ = 0.0;
  std::size_t training_steps_ = 0;
  double last_loss_ = 0.0;
};

inline constexpr std::size_t kDefaultRegretCap = 200;

struct RegretLedger {
  std::vector<double> optimal;
  std::vector<double> chosen;
  std::vector<double> cumulative;

  double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  /// Regret accumulated over iterations [begin, end).
  double window(std::size_t begin, std::size_t end) const;
};

/// Scores every action with `reward_of`, appends rho* and the chosen reward,
/// and returns the increment rho* - rho_c. Throws DiagnosticDisabled when the
/// action space exceeds `cap`.
double compute_regret(RegretLedger& ledger, const std::function<double(std::size_t)>& reward_of,
                      std::size_t n_actions, double chosen_reward,
                      std::size_t cap = kDefaultRegretCap);

/// Same, with the per-action rewards already computed.
double record_regret(RegretLedger& ledger, std::span<const double> action_rewards,
                     double chosen_reward);

}  // namespace mmsleep
