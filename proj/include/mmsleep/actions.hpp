#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mmsleep/radio.hpp"

namespace mmsleep {

/// Sentinel action: every BS active, outside the constrained action space.
inline constexpr std::size_t kAllOnAction = std::numeric_limits<std::size_t>::max();

inline constexpr std::uint64_t kDefaultActionCap = 100000;

/// n choose k; saturates at UINT64_MAX on overflow.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// floor(alpha * n) with a small guard so that products such as 0.29 * 100
/// land on the intended integer.
std::size_t sleeping_count(std::size_t n_bs, double alpha_off);

/// All masks that sleep exactly floor(alpha * N) of N base stations, in
/// lexicographic order of the sleeping index sets.
class ActionSpace {
 public:
  ActionSpace(std::size_t n_bs, double alpha_off, std::uint64_t cap = kDefaultActionCap);

  std::size_t n_bs() const { return n_bs_; }
  double alpha_off() const { return alpha_off_; }
  std::size_t k_off() const { return k_off_; }
  std::size_t size() const { return masks_.size(); }

  /// Mask for an index; kAllOnAction yields the all-active mask.
  const ActionMask& mask(std::size_t index) const;
  const ActionMask& all_on() const { return all_on_; }
  /// Sleeping set of an action, ascending.
  std::vector<std::size_t> sleeping(std::size_t index) const;
  /// Lexicographic rank of an ascending sleeping set.
  std::size_t index_of(std::span<const std::size_t> sleeping_set) const;

 private:
  std::size_t n_bs_;
  double alpha_off_;
  std::size_t k_off_;
  std::vector<ActionMask> masks_;
  ActionMask all_on_;
};

inline ActionSpace enumerate_actions(std::size_t n_bs, double alpha_off,
                                     std::uint64_t cap = kDefaultActionCap) {
  return ActionSpace(n_bs, alpha_off, cap);
}

}  // namespace mmsleep
