#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

namespace fim::mr {

// Multi-producer queue of batches whose capacity is measured in elements
// across all queued batches. A producer blocks while its batch would push the
// buffered total past the capacity; batches must not exceed the capacity.
template <class T>
class BoundedBatchQueue {
 public:
  explicit BoundedBatchQueue(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

  // Returns false if the queue was aborted.
  bool push(std::vector<T> batch) {
    const std::size_t n = batch.size();
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return aborted_ || buffered_ + n <= capacity_; });
    if (aborted_) return false;
    buffered_ += n;
    high_water_ = std::max(high_water_, buffered_);
    batches_.push_back(std::move(batch));
    not_empty_.notify_one();
    return true;
  }

  // Empty optional once closed and drained, or aborted.
  std::optional<std::vector<T>> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return aborted_ || closed_ || !batches_.empty(); });
    if (aborted_ || batches_.empty()) return std::nullopt;
    auto batch = std::move(batches_.front());
    batches_.pop_front();
    buffered_ -= batch.size();
    not_full_.notify_all();
    return batch;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
  }

  void abort() {
    std::lock_guard lock(mu_);
    aborted_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  std::size_t capacity() const noexcept { return capacity_; }

  std::size_t high_water_mark() const {
    std::lock_guard lock(mu_);
    return high_water_;
  }

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<std::vector<T>> batches_;
  std::size_t buffered_ = 0;
  std::size_t high_water_ = 0;
  bool closed_ = false;
  bool aborted_ = false;
};

}  // namespace fim::mr
