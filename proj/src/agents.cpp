#include "mmsleep/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mmsleep/errors.hpp"

namespace mmsleep {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : entries_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Experience e) {
  const std::size_t cap = entries_.size();
  if (size_ < cap) {
    entries_[(head_ + size_) % cap] = std::move(e);
    ++size_;
  } else {
    entries_[head_] = std::move(e);
    head_ = (head_ + 1) % cap;
  }
}

const Experience& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay buffer index out of range");
  return entries_[(head_ + i) % entries_.size()];
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (size_ == 0) throw std::logic_error("sampling from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<const Experience*> out(n);
  for (auto& p : out) p = &at(pick(rng));
  return out;
}

RandomAgent::RandomAgent(std::size_t n_actions, std::uint64_t seed)
    : n_actions_(n_actions), rng_(make_rng(seed, 0x7a4d)) {
  if (n_actions == 0) throw ConfigError("random agent needs a non-empty action space");
}

std::size_t RandomAgent::select(const Decision&) {
  return std::uniform_int_distribution<std::size_t>(0, n_actions_ - 1)(rng_);
}

std::vector<double> ArmStats::means() const {
  std::vector<double> m(counts.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = mean(k);
  return m;
}

double ucb_score(double mean, std::size_t count, std::size_t t, double delta) {
  if (count == 0) return std::numeric_limits<double>::infinity();
  const double log_t = std::log(static_cast<double>(std::max<std::size_t>(t, 1)));
  return mean + delta * std::sqrt(2.0 * log_t / static_cast<double>(count));
}

std::size_t ucb_select(std::span<const double> means, std::span<const std::size_t> counts,
                       std::size_t t, double delta) {
  if (means.empty() || means.size() != counts.size()) {
    throw std::invalid_argument("ucb_select: mismatched or empty statistics");
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) return k;
  }
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < means.size(); ++k) {
    const double s = ucb_score(means[k], counts[k], t, delta);
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return best;
}

std::size_t greedy_argmax(std::span<const double> means, std::span<const std::size_t> counts) {
  if (means.empty() || means.size() != counts.size()) {
    throw std::invalid_argument("greedy_argmax: mismatched or empty statistics");
  }
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < means.size(); ++k) {
    const double v = counts[k] == 0 ? std::numeric_limits<double>::infinity() : means[k];
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  return best;
}

UcbAgent::UcbAgent(std::size_t n_actions, double delta, double reward_scale)
    : stats_(n_actions), delta_(delta), reward_scale_(reward_scale) {
  if (n_actions == 0) throw ConfigError("UCB agent needs a non-empty action space");
}

std::size_t UcbAgent::select(const Decision& d) {
  return ucb_select(stats_.means(), stats_.counts, d.t, delta_);
}

void UcbAgent::observe(const Feedback& f) { stats_.record(f.action, f.reward_bps * reward_scale_); }

EpsilonGreedyAgent::EpsilonGreedyAgent(std::size_t n_actions, double epsilon, std::uint64_t seed,
                                       double reward_scale)
    : stats_(n_actions), epsilon_(epsilon), reward_scale_(reward_scale), rng_(make_rng(seed, 0x96ee)) {
  if (n_actions == 0) throw ConfigError("greedy agent needs a non-empty action space");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("greedy epsilon must lie in [0, 1]");
}

std::size_t EpsilonGreedyAgent::select(const Decision&) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  if (u < epsilon_) {
    return std::uniform_int_distribution<std::size_t>(0, stats_.counts.size() - 1)(rng_);
  }
  return greedy_argmax(stats_.means(), stats_.counts);
}

void EpsilonGreedyAgent::observe(const Feedback& f) {
  stats_.record(f.action, f.reward_bps * reward_scale_);
}

std::vector<double> ue_load_factors(const LinkReport& report) {
  std::vector<double> out(report.serving.size(), 0.0);
  for (std::size_t u = 0; u < out.size(); ++u) {
    const std::size_t n = (report.serving[u] ? 1 : 0) + report.interferers[u].size();
    out[u] = n ? 1.0 / static_cast<double>(n) : 0.0;
  }
  return out;
}

std::vector<double> bs_loads(const LinkReport& report) {
  const std::vector<double> ue = ue_load_factors(report);
  std::vector<double> loads(report.active.size(), 0.0);
  for (std::size_t u = 0; u < ue.size(); ++u) {
    if (report.serving[u]) loads[*report.serving[u]] += ue[u];
  }
  return loads;
}

std::size_t load_based_select(const LinkReport& all_on_report, const ActionSpace& space) {
  const std::vector<double> loads = bs_loads(all_on_report);
  if (loads.size() != space.n_bs()) {
    throw std::invalid_argument("load report and action space disagree on BS count");
  }
  std::vector<std::size_t> order(loads.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return loads[a] < loads[b]; });
  std::vector<std::size_t> sleep(order.begin(), order.begin() + static_cast<long>(space.k_off()));
  std::sort(sleep.begin(), sleep.end());
  return space.index_of(sleep);
}

std::size_t LoadBasedAgent::select(const Decision& d) {
  if (!d.all_on_report) throw std::logic_error("load-based policy needs the all-on report");
  return load_based_select(*d.all_on_report, *space_);
}

CmabAgent::CmabAgent(const CmabConfig& config, std::size_t context_size, std::size_t n_actions,
                     std::uint64_t agent_seed, std::uint64_t nn_seed)
    : config_(config),
      n_actions_(n_actions),
      buffer_(config.buffer_capacity),
      rng_(make_rng(agent_seed, 0xc3ab)),
      epsilon_(config.epsilon_initial) {
  if (n_actions == 0) throw ConfigError("C-MAB agent needs a non-empty action space");
  if (!(config.epsilon_initial >= 0.0 && config.epsilon_initial <= 1.0) ||
      !(config.epsilon_decay > 0.0 && config.epsilon_decay <= 1.0) ||
      !(config.epsilon_min >= 0.0 && config.epsilon_min <= 1.0)) {
    throw ConfigError("C-MAB epsilon parameters out of range");
  }
  if (config.update_every == 0 || config.batch_size == 0) {
    throw ConfigError("C-MAB update interval and batch size must be positive");
  }
  std::vector<std::size_t> sizes{context_size};
  sizes.insert(sizes.end(), config.hidden_layers.begin(), config.hidden_layers.end());
  sizes.push_back(n_actions);
  model_ = init_weights(sizes, nn_seed, config.adam);
}

std::size_t CmabAgent::select(const Decision& d) {
  std::size_t action;
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  if (u < epsilon_) {
    action = std::uniform_int_distribution<std::size_t>(0, n_actions_ - 1)(rng_);
  } else {
    const std::vector<double> predicted = model_.forward(d.context.values);
    action = static_cast<std::size_t>(
        std::distance(predicted.begin(), std::max_element(predicted.begin(), predicted.end())));
  }
  epsilon_ = std::max(epsilon_ * config_.epsilon_decay, config_.epsilon_min);
  return action;
}

void CmabAgent::observe(const Feedback& f) {
  if (f.action >= n_actions_) throw std::invalid_argument("C-MAB feedback for an unknown action");
  buffer_.push({f.context.values, f.action, f.reward_bps});
  reward_max_ = std::max(reward_max_, f.reward_bps);
  if (f.t % config_.update_every != 0 || buffer_.size() < config_.batch_size) return;

  const auto picks = buffer_.sample(config_.batch_size, rng_);
  std::vector<TrainSample> batch;
  batch.reserve(picks.size());
  for (const Experience* e : picks) {
    const double target = reward_max_ > 0.0 ? e->reward / reward_max_ : 0.0;
    batch.push_back({e->context, e->action, target});
  }
  last_loss_ = train_step(model_, batch);
  ++training_steps_;
}

double RegretLedger::window(std::size_t begin, std::size_t end) const {
  end = std::min(end, cumulative.size());
  if (begin >= end) return 0.0;
  return cumulative[end - 1] - (begin ? cumulative[begin - 1] : 0.0);
}

double record_regret(RegretLedger& ledger, std::span<const double> action_rewards,
                     double chosen_reward) {
  if (action_rewards.empty()) throw std::invalid_argument("regret needs at least one action");
  const double best = *std::max_element(action_rewards.begin(), action_rewards.end());
  const double inc = best - chosen_reward;
  ledger.optimal.push_back(best);
  ledger.chosen.push_back(chosen_reward);
  ledger.cumulative.push_back(ledger.total() + inc);
  return inc;
}

double compute_regret(RegretLedger& ledger, const std::function<double(std::size_t)>& reward_of,
                      std::size_t n_actions, double chosen_reward, std::size_t cap) {
  if (n_actions > cap) {
    throw DiagnosticDisabled("regret diagnostic disabled: " + std::to_string(n_actions) +
                             " actions exceed cap " + std::to_string(cap));
  }
  std::vector<double> rewards(n_actions);
  for (std::size_t a = 0; a < n_actions; ++a) rewards[a] = reward_of(a);
  return record_regret(ledger, rewards, chosen_reward);
}

}  // namespace mmsleep
