#pragma once

// Sequential reference queue and a coarse-locked concurrent wrapper.
// Both serve as ground truth: the reference for replay checks, the
// locked variant as a baseline in benchmarks.

#include <map>
#include <mutex>
#include <optional>

#include "pipq/worker_heap.hpp"

namespace pipq {

// Ordered multiset of (key, value); equal keys are interchangeable, so
// delete-min may return any pair holding the minimal key.
class SeqPQ {
 public:
  void insert(Key k, Value v) { m_.emplace(k, v); }

  std::optional<HeapEntry> delete_min() {
    if (m_.empty()) return std::nullopt;
    auto it = m_.begin();
    HeapEntry e{it->first, it->second};
    m_.erase(it);
    return e;
  }

  std::optional<Key> peek_min() const {
    if (m_.empty()) return std::nullopt;
    return m_.begin()->first;
  }

  // Removes one exact pair; used by the linearizability checker to undo
  // and to pin delete results to pairs that were really present.
  bool erase_pair(Key k, Value v) {
    auto [lo, hi] = m_.equal_range(k);
    for (auto it = lo; it != hi; ++it) {
      if (it->second == v) {
        m_.erase(it);
        return true;
      }
    }
    return false;
  }

  std::size_t size() const { return m_.size(); }
  bool empty() const { return m_.empty(); }

 private:
  std::multimap<Key, Value> m_;
};

// Mutex around SeqPQ with the same thread-id call shape as the main
// queue, so harness code can drive either.
class CoarseLockPq {
 public:
  explicit CoarseLockPq(int /*threads*/) {}

  void insert(ThreadId, Key k, Value v) {
    std::lock_guard<std::mutex> g(mu_);
    pq_.insert(k, v);
  }

  std::optional<HeapEntry> delete_min(ThreadId) {
    std::lock_guard<std::mutex> g(mu_);
    return pq_.delete_min();
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> g(mu_);
    return pq_.size();
  }

 private:
  mutable std::mutex mu_;
  SeqPQ pq_;
};

}  // namespace pipq
