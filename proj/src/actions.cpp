#include "mmsleep/actions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mmsleep/errors.hpp"

namespace mmsleep {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    // result * num / i is exact at every step; guard the multiplication.
    if (result > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = result * num / i;
  }
  return result;
}

std::size_t sleeping_count(std::size_t n_bs, double alpha_off) {
  return static_cast<std::size_t>(std::floor(alpha_off * static_cast<double>(n_bs) + 1e-9));
}

ActionSpace::ActionSpace(std::size_t n_bs, double alpha_off, std::uint64_t cap)
    : n_bs_(n_bs), alpha_off_(alpha_off) {
  if (n_bs == 0) throw ConfigError("action space needs at least one BS");
  if (!(alpha_off >= 0.0 && alpha_off <= 1.0)) throw ConfigError("alpha_off must lie in [0, 1]");
  k_off_ = sleeping_count(n_bs, alpha_off);
  const std::uint64_t total = binomial(n_bs, k_off_);
  if (total > cap) {
    throw ActionSpaceTooLarge("action space C(" + std::to_string(n_bs) + "," +
                              std::to_string(k_off_) + ") = " + std::to_string(total) +
                              " exceeds cap " + std::to_string(cap));
  }

  all_on_.assign(n_bs, 1);
  masks_.reserve(static_cast<std::size_t>(total));
  std::vector<std::size_t> combo(k_off_);
  for (std::size_t i = 0; i < k_off_; ++i) combo[i] = i;
  while (true) {
    ActionMask m(n_bs, 1);
    for (std::size_t s : combo) m[s] = 0;
    masks_.push_back(std::move(m));
    // Advance to the next combination in lexicographic order.
    std::size_t i = k_off_;
    while (i > 0 && combo[i - 1] == n_bs - k_off_ + (i - 1)) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t j = i; j < k_off_; ++j) combo[j] = combo[j - 1] + 1;
  }
}

const ActionMask& ActionSpace::mask(std::size_t index) const {
  if (index == kAllOnAction) return all_on_;
  if (index >= masks_.size()) throw std::out_of_range("action index out of range");
  return masks_[index];
}

std::vector<std::size_t> ActionSpace::sleeping(std::size_t index) const {
  const ActionMask& m = mask(index);
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < m.size(); ++b) {
    if (!m[b]) out.push_back(b);
  }
  return out;
}

std::size_t ActionSpace::index_of(std::span<const std::size_t> set) const {
  if (set.size() != k_off_) throw std::invalid_argument("sleeping set has the wrong size");
  std::uint64_t rank = 0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i] >= n_bs_ || set[i] < next) {
      throw std::invalid_argument("sleeping set must be strictly ascending and in range");
    }
    for (std::size_t v = next; v < set[i]; ++v) rank += binomial(n_bs_ - 1 - v, k_off_ - 1 - i);
    next = set[i] + 1;
  }
  return static_cast<std::size_t>(rank);
}

}  // namespace mmsleep
