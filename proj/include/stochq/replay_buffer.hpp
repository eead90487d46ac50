#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "stochq/errors.hpp"
#include "stochq/rng.hpp"
#include "stochq/stochmax.hpp"

namespace stochq {

/// Bounded FIFO store with uniform sampling without replacement.
template <class T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw Error(ErrorCode::invalid_config, "replay buffer capacity must be positive");
    items_.reserve(capacity_);
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }

  /// Evicts the oldest entry once full.
  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[head_] = std::move(item);
      head_ = (head_ + 1) % capacity_;
    }
  }

  /// i-th entry counted from the oldest.
  const T& at(std::size_t i) const {
    if (i >= items_.size()) throw Error(ErrorCode::index_out_of_range, "replay buffer index");
    return items_[(head_ + i) % items_.size()];
  }

  /// min(batch, size()) distinct entries, uniformly chosen.
  std::vector<const T*> sample(std::size_t batch, Rng& rng) const {
    std::vector<std::size_t> slots;
    sample_distinct(items_.size(), std::min(batch, items_.size()), rng, slots);
    std::vector<const T*> out;
    out.reserve(slots.size());
    for (std::size_t s : slots) out.push_back(&items_[s]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::vector<T> items_;
  std::size_t head_ = 0;
};

}  // namespace stochq
