#pragma once

#include <bit>
#include <cassert>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "pipq/config.hpp"
#include "pipq/seqlock.hpp"

namespace pipq {

struct HeapEntry {
  Key key;
  Value val;
};

// Per-thread binary min-heap. Storage is a chain of segments treated as one
// flat array; the first segment holds `segment_capacity` entries and each
// later one doubles the previous, so index -> segment is a bit_width away.
// Never synchronized internally: every call happens under `lk`.
class WorkerHeap {
 public:
  explicit WorkerHeap(std::size_t segment_capacity)
      : cap0_(segment_capacity ? segment_capacity : 1) {
    add_segment();
  }

  WorkerHeap(const WorkerHeap&) = delete;
  WorkerHeap& operator=(const WorkerHeap&) = delete;

  void insert(Key key, Value val) {
    if (size_ == capacity_) add_segment();
    if (size_ == 0) {
      at(0) = {key, val};
      ++size_;
      return;
    }
    std::size_t idx = size_;
    std::size_t p_idx = (idx - 1) / 2;
    while (idx > 0 && key < at(p_idx).key) {
      at(idx) = at(p_idx);
      idx = p_idx;
      p_idx = (idx - 1) / 2;
    }
    at(idx) = {key, val};
    ++size_;
  }

  std::optional<HeapEntry> delete_min() {
    if (size_ == 0) return std::nullopt;
    if (size_ == 1) {
      size_ = 0;
      return at(0);
    }
    HeapEntry ret = at(0);
    HeapEntry last = at(size_ - 1);
    --size_;
    std::size_t idx = 0;
    std::size_t left = 1, right = 2;
    // Moves the hole down, preferring the right child on key ties.
    while ((left < size_ && last.key > at(left).key) ||
           (right < size_ && last.key > at(right).key)) {
      if (right < size_ && at(left).key >= at(right).key) {
        at(idx) = at(right);
        idx = right;
      } else {
        at(idx) = at(left);
        idx = left;
      }
      left = 2 * idx + 1;
      right = 2 * idx + 2;
    }
    at(idx) = last;
    return ret;
  }

  std::optional<Key> peek_min() const {
    if (size_ == 0) return std::nullopt;
    return at(0).key;
  }

  std::size_t size() const { return size_; }

  HeapEntry entry_at(std::size_t i) const {
    assert(i < size_);
    return at(i);
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < size_; ++i) f(at(i));
  }

  bool heap_order_ok() const {
    for (std::size_t i = 1; i < size_; ++i)
      if (at((i - 1) / 2).key > at(i).key) return false;
    return true;
  }

  std::size_t segment_count() const { return segs_.size(); }

  SeqLock lk;

 private:
  // Logical index -> (segment, offset): segment capacities are cap0 << s, so
  // the segment holding i is bit_width(i / cap0 + 1) - 1.
  HeapEntry& at(std::size_t i) {
    std::size_t q = i / cap0_;
    std::size_t s = static_cast<std::size_t>(std::bit_width(q + 1)) - 1;
    return segs_[s][i - cap0_ * ((std::size_t{1} << s) - 1)];
  }
  const HeapEntry& at(std::size_t i) const {
    return const_cast<WorkerHeap*>(this)->at(i);
  }

  void add_segment() {
    std::size_t cap = cap0_ << segs_.size();
    store_.push_back(std::make_unique<HeapEntry[]>(cap));
    segs_.push_back(store_.back().get());
    capacity_ += cap;
  }

  std::size_t cap0_;
  std::size_t size_ = 0;
  std::size_t capacity_ = 0;
  std::vector<HeapEntry*> segs_;
  std::vector<std::unique_ptr<HeapEntry[]>> store_;
};

}  // namespace pipq
