// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>

namespace myo::runtime {

enum class Backpressure {
  Block,      // producer waits for space
  DropOldest, // producer evicts the oldest queued item and counts it
};

/// Bounded single-producer single-consumer queue.
template <typename T> class BoundedQueue {
public:
  BoundedQueue(std::size_t capacity, Backpressure policy) : capacity_(capacity), policy_(policy) {
    if (capacity == 0) {
      throw std::invalid_argument("queue capacity must be positive");
    }
  }

  void push(T item) {
    std::unique_lock lock(mu_);
    if (policy_ == Backpressure::Block) {
      not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
    } else if (items_.size() == capacity_) {
      items_.pop_front();
      ++dropped_;
    }
    if (closed_) {
      return;
    }
    items_.push_back(std::move(item));
    not_empty_.notify_one();
  }

  /// Blocks until an item is available; nullopt once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) {
      return std::nullopt;
    }
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  std::size_t dropped() const {
    std::lock_guard lock(mu_);
    return dropped_;
  }

  std::size_t capacity() const { return capacity_; }

private:
  const std::size_t capacity_;
  const Backpressure policy_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  std::size_t dropped_ = 0;
  bool closed_ = false;
};

} // namespace myo::runtime
