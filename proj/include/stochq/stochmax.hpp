#pragma once

// Sub-linear stochastic maximization over a discrete action set.
//
// A query draws a uniform random subset R of the n actions (default size
// ceil(log2 n)), unions it with a small memory M of recently exploited
// actions, and maximizes only over C = R u M.

#include <compare>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "stochq/errors.hpp"
#include "stochq/rng.hpp"

namespace stochq {

struct ActionId {
  std::size_t index = 0;

  friend constexpr auto operator<=>(ActionId, ActionId) = default;
};

/// ceil(log2 n) for n >= 1; ceil_log2(1) == 0.
constexpr std::size_t ceil_log2(std::size_t n) noexcept {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  return bits;
}

/// Default random-subset size for n actions: ceil(log2 n), at least 1.
constexpr std::size_t default_subset_size(std::size_t n) noexcept {
  const std::size_t k = ceil_log2(n);
  return k == 0 ? 1 : k;
}

/// Draws k distinct indices from [0, n) uniformly over all k-subsets in O(k)
/// expected work (Floyd's algorithm). Appends to `out`.
void sample_distinct(std::size_t n, std::size_t k, Rng& rng, std::vector<std::size_t>& out);

/// Ordered list of distinct actions; insertion order is preserved.
class CandidateSet {
 public:
  CandidateSet() = default;
  explicit CandidateSet(std::span<const ActionId> actions);

  /// Returns false when the action was already present.
  bool insert(ActionId action);
  bool contains(ActionId action) const noexcept;
  void clear() noexcept { actions_.clear(); }

  std::span<const ActionId> actions() const noexcept { return actions_; }
  std::size_t size() const noexcept { return actions_.size(); }
  bool empty() const noexcept { return actions_.empty(); }

  /// The full action set {0, ..., n-1}.
  static CandidateSet all(std::size_t n);

 private:
  std::vector<ActionId> actions_;
};

/// Uniform k-subset sampler over n actions with its own random stream.
class SubsetSampler {
 public:
  /// Throws invalid_config unless 1 <= k <= n.
  SubsetSampler(std::size_t n, std::size_t k, std::uint64_t seed);

  /// Sampler with k = ceil(log2 n).
  static SubsetSampler with_default_size(std::size_t n, std::uint64_t seed);

  CandidateSet sample();
  /// Appends a fresh subset to `out` (duplicates with prior contents skipped).
  void sample_into(CandidateSet& out);

  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return k_; }

 private:
  std::size_t n_;
  std::size_t k_;
  Rng rng_;
  std::vector<std::size_t> scratch_;
};

enum class MemoryMode { per_state, global, none };

/// The memory set M.
///
/// per_state: for each discrete state, the `capacity` most recently exploited
///   actions (most recent first).
/// global: a FIFO mirror of the replay buffer's action column; a recall
///   returns min(sample_size, stored) uniformly chosen stored entries.
/// none: always empty.
class ActionMemory {
 public:
  static ActionMemory per_state(std::size_t n_states, std::size_t capacity = 2);
  static ActionMemory global(std::size_t store_capacity, std::size_t sample_size,
                             std::uint64_t seed);
  static ActionMemory none();

  MemoryMode mode() const noexcept { return mode_; }

  /// per_state: records an exploited action at `state`.
  /// global: pushes the action into the FIFO store (`state` ignored).
  void remember(std::size_t state, ActionId action);

  /// Appends this query's memory actions to `out`.
  void recall_into(std::size_t state, CandidateSet& out);
  std::vector<ActionId> recall(std::size_t state);

  /// Number of actions currently stored (global) or stored at `state`.
  std::size_t stored(std::size_t state = 0) const;

 private:
  explicit ActionMemory(MemoryMode mode) : mode_(mode) {}

  MemoryMode mode_;
  std::size_t capacity_ = 0;
  std::size_t sample_size_ = 0;
  std::vector<std::vector<ActionId>> per_state_;
  std::vector<ActionId> store_;
  std::size_t store_head_ = 0;
  Rng rng_;
  std::vector<std::size_t> scratch_;
};

/// C = R u M with duplicates removed; R is always freshly drawn.
CandidateSet build_candidates(SubsetSampler& sampler, ActionMemory& memory, std::size_t state);

enum class Maximization { stochastic, exact };

/// Outcome of one policy query.
struct Selection {
  ActionId action;
  bool exploited = false;
  /// Candidate set C at the queried state (stochastic variants), else empty.
  CandidateSet candidates;
};

template <class F>
concept ValueOracle = std::invocable<F&, ActionId> &&
    std::convertible_to<std::invoke_result_t<F&, ActionId>, double>;

/// Maximizer over `candidates` and its value; ties go to the lowest ActionId.
template <ValueOracle F>
std::pair<ActionId, double> stoch_best(F&& value, const CandidateSet& candidates) {
  if (candidates.empty()) {
    throw Error(ErrorCode::empty_candidates, "stochastic maximization over an empty set");
  }
  auto it = candidates.actions().begin();
  ActionId best = *it;
  double best_value = value(best);
  for (++it; it != candidates.actions().end(); ++it) {
    const double v = value(*it);
    if (v > best_value || (v == best_value && *it < best)) {
      best = *it;
      best_value = v;
    }
  }
  return {best, best_value};
}

template <ValueOracle F>
double stoch_max(F&& value, const CandidateSet& candidates) {
  return stoch_best(std::forward<F>(value), candidates).second;
}

template <ValueOracle F>
ActionId stoch_argmax(F&& value, const CandidateSet& candidates) {
  return stoch_best(std::forward<F>(value), candidates).first;
}

/// Exact maximizer over all n actions, lowest index on ties.
template <ValueOracle F>
std::pair<ActionId, double> exact_best(F&& value, std::size_t n) {
  if (n == 0) {
    throw Error(ErrorCode::empty_candidates, "exact maximization over zero actions");
  }
  ActionId best{0};
  double best_value = value(best);
  for (std::size_t i = 1; i < n; ++i) {
    const double v = value(ActionId{i});
    if (v > best_value) {
      best = ActionId{i};
      best_value = v;
    }
  }
  return {best, best_value};
}

}  // namespace stochq
