#include "stochq/stochmax.hpp"

#include <algorithm>
#include <string>

namespace stochq {

namespace {

constexpr std::size_t kLinearScanLimit = 32;

}  // namespace

void sample_distinct(std::size_t n, std::size_t k, Rng& rng, std::vector<std::size_t>& out) {
  const std::size_t first = out.size();
  if (k > kLinearScanLimit) {
    // Large k: partial Fisher-Yates over an explicit index table.
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + uniform_index(rng, n - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return;
  }
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = uniform_index(rng, j + 1);
    const bool seen = std::find(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(), t) != out.end();
    out.push_back(seen ? j : t);
  }
}

CandidateSet::CandidateSet(std::span<const ActionId> actions) {
  actions_.reserve(actions.size());
  for (ActionId a : actions) insert(a);
}

bool CandidateSet::insert(ActionId action) {
  if (contains(action)) return false;
  actions_.push_back(action);
  return true;
}

bool CandidateSet::contains(ActionId action) const noexcept {
  return std::find(actions_.begin(), actions_.end(), action) != actions_.end();
}

CandidateSet CandidateSet::all(std::size_t n) {
  CandidateSet c;
  c.actions_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) c.actions_.push_back(ActionId{i});
  return c;
}

SubsetSampler::SubsetSampler(std::size_t n, std::size_t k, std::uint64_t seed)
    : n_(n), k_(k), rng_(seed) {
  if (k < 1 || k > n) {
    throw Error(ErrorCode::invalid_config,
                "subset size k=" + std::to_string(k) + " must satisfy 1 <= k <= n=" + std::to_string(n));
  }
  scratch_.reserve(k);
}

SubsetSampler SubsetSampler::with_default_size(std::size_t n, std::uint64_t seed) {
  return SubsetSampler(n, default_subset_size(n), seed);
}

CandidateSet SubsetSampler::sample() {
  CandidateSet c;
  sample_into(c);
  return c;
}

void SubsetSampler::sample_into(CandidateSet& out) {
  scratch_.clear();
  sample_distinct(n_, k_, rng_, scratch_);
  for (std::size_t i : scratch_) out.insert(ActionId{i});
}

ActionMemory ActionMemory::per_state(std::size_t n_states, std::size_t capacity) {
  if (capacity < 1) throw Error(ErrorCode::invalid_config, "per-state memory capacity must be >= 1");
  ActionMemory m(MemoryMode::per_state);
  m.capacity_ = capacity;
  m.per_state_.resize(n_states);
  return m;
}

ActionMemory ActionMemory::global(std::size_t store_capacity, std::size_t sample_size,
                                  std::uint64_t seed) {
  if (store_capacity < 1 || sample_size < 1) {
    throw Error(ErrorCode::invalid_config, "global memory needs positive capacity and sample size");
  }
  ActionMemory m(MemoryMode::global);
  m.capacity_ = store_capacity;
  m.sample_size_ = sample_size;
  m.store_.reserve(store_capacity);
  m.rng_.seed(seed);
  return m;
}

ActionMemory ActionMemory::none() { return ActionMemory(MemoryMode::none); }

void ActionMemory::remember(std::size_t state, ActionId action) {
  switch (mode_) {
    case MemoryMode::per_state: {
      if (state >= per_state_.size()) {
        throw Error(ErrorCode::index_out_of_range, "memory state " + std::to_string(state));
      }
      auto& recent = per_state_[state];
      auto it = std::find(recent.begin(), recent.end(), action);
      if (it != recent.end()) recent.erase(it);
      recent.insert(recent.begin(), action);
      if (recent.size() > capacity_) recent.pop_back();
      break;
    }
    case MemoryMode::global:
      if (store_.size() < capacity_) {
        store_.push_back(action);
      } else {
        store_[store_head_] = action;
        store_head_ = (store_head_ + 1) % capacity_;
      }
      break;
    case MemoryMode::none:
      break;
  }
}

void ActionMemory::recall_into(std::size_t state, CandidateSet& out) {
  switch (mode_) {
    case MemoryMode::per_state:
      if (state >= per_state_.size()) {
        throw Error(ErrorCode::index_out_of_range, "memory state " + std::to_string(state));
      }
      for (ActionId a : per_state_[state]) out.insert(a);
      break;
    case MemoryMode::global: {
      scratch_.clear();
      sample_distinct(store_.size(), std::min(sample_size_, store_.size()), rng_, scratch_);
      for (std::size_t slot : scratch_) out.insert(store_[slot]);
      break;
    }
    case MemoryMode::none:
      break;
  }
}

std::vector<ActionId> ActionMemory::recall(std::size_t state) {
  switch (mode_) {
    case MemoryMode::per_state:
      if (state >= per_state_.size()) {
        throw Error(ErrorCode::index_out_of_range, "memory state " + std::to_string(state));
      }
      return per_state_[state];
    case MemoryMode::global: {
      scratch_.clear();
      sample_distinct(store_.size(), std::min(sample_size_, store_.size()), rng_, scratch_);
      std::vector<ActionId> picked;
      picked.reserve(scratch_.size());
      for (std::size_t slot : scratch_) picked.push_back(store_[slot]);
      return picked;
    }
    case MemoryMode::none:
      break;
  }
  return {};
}

std::size_t ActionMemory::stored(std::size_t state) const {
  switch (mode_) {
    case MemoryMode::per_state:
      return state < per_state_.size() ? per_state_[state].size() : 0;
    case MemoryMode::global:
      return store_.size();
    case MemoryMode::none:
      break;
  }
  return 0;
}

CandidateSet build_candidates(SubsetSampler& sampler, ActionMemory& memory, std::size_t state) {
  CandidateSet c;
  sampler.sample_into(c);
  memory.recall_into(state, c);
  return c;
}

}  // namespace stochq
