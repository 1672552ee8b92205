#pragma once

// Per-thread node pools plus epoch-based deferred reclamation for the
// leader list. Unlinked nodes are retired, not freed; a retired node is
// recycled only after every thread has moved two epochs past the retire
// point, so no traversal can still hold a reference. A pluggable liveness
// filter additionally defers nodes that are still reachable through a
// per-thread largest-element handle, which may lag behind the list state.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <type_traits>
#include <vector>

#include "pipq/config.hpp"
#include "pipq/spin.hpp"

namespace pipq {

// Arena-backed allocator. Each thread owns an arena and a freelist;
// alloc() is owner-only, release() may be called by any thread and pushes
// onto the owning thread's freelist (multi-producer, single-consumer
// Treiber stack; the single popper makes the pop CAS ABA-free).
// Node must expose `std::atomic<std::uintptr_t> next` (reused as the
// freelist link) and `ThreadId pool_owner`.
template <class Node>
class NodePool {
  static_assert(std::is_trivially_destructible_v<Node>);

 public:
  explicit NodePool(int threads, std::size_t block_nodes = 256)
      : block_nodes_(block_nodes) {
    per_.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) per_.push_back(std::make_unique<PerThread>());
  }

  NodePool(const NodePool&) = delete;
  NodePool& operator=(const NodePool&) = delete;

  // Owner-only.
  Node* alloc(ThreadId tid) {
    PerThread& p = *per_[static_cast<std::size_t>(tid)];
    Node* head = p.free_head.load(std::memory_order_acquire);
    while (head != nullptr) {
      Node* next = reinterpret_cast<Node*>(head->next.load(std::memory_order_relaxed));
      if (p.free_head.compare_exchange_weak(head, next, std::memory_order_acquire,
                                            std::memory_order_acquire)) {
        p.live += 1;
        head->pool_owner = tid;
        return head;
      }
    }
    if (p.bump_left == 0) {
      p.blocks.push_back(std::make_unique<Node[]>(block_nodes_));
      p.bump = p.blocks.back().get();
      p.bump_left = block_nodes_;
    }
    Node* n = p.bump++;
    p.bump_left -= 1;
    p.live += 1;
    n->pool_owner = tid;
    return n;
  }

  // Any thread.
  void release(Node* n) {
    PerThread& p = *per_[static_cast<std::size_t>(n->pool_owner)];
    Node* head = p.free_head.load(std::memory_order_relaxed);
    do {
      n->next.store(reinterpret_cast<std::uintptr_t>(head), std::memory_order_relaxed);
    } while (!p.free_head.compare_exchange_weak(head, n, std::memory_order_release,
                                                std::memory_order_relaxed));
  }

  // Owner-only bookkeeping; release() from other threads is not yet
  // reflected, so this is an upper bound on nodes the owner handed out.
  std::size_t allocated(ThreadId tid) const {
    return per_[static_cast<std::size_t>(tid)]->live;
  }

 private:
  struct alignas(64) PerThread {
    std::atomic<Node*> free_head{nullptr};
    std::vector<std::unique_ptr<Node[]>> blocks;
    Node* bump = nullptr;
    std::size_t bump_left = 0;
    std::size_t live = 0;
  };

  std::size_t block_nodes_;
  std::vector<std::unique_ptr<PerThread>> per_;
};

// Epoch-based reclamation with a two-epoch grace period. Threads pin the
// current epoch around list traversals; retire() tags a node with the
// epoch at removal and flush() recycles nodes once the global epoch has
// advanced at least two past the tag. Advancement requires every pinned
// thread to have observed the current epoch.
template <class Node>
class EpochReclaimer {
 public:
  EpochReclaimer(int threads, NodePool<Node>& pool) : pool_(pool) {
    per_.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) per_.push_back(std::make_unique<PerThread>());
  }

  EpochReclaimer(const EpochReclaimer&) = delete;
  EpochReclaimer& operator=(const EpochReclaimer&) = delete;

  void pin(ThreadId tid) {
    std::atomic<std::uint64_t>& slot = per_[static_cast<std::size_t>(tid)]->reserved;
    PIPQ_CHECK(slot.load(std::memory_order_relaxed) == kIdle, "nested epoch pin");
    for (;;) {
      std::uint64_t e = global_.load(std::memory_order_acquire);
      slot.store(e, std::memory_order_relaxed);
      std::atomic_thread_fence(std::memory_order_seq_cst);
      if (global_.load(std::memory_order_acquire) == e) return;
    }
  }

  void unpin(ThreadId tid) {
    per_[static_cast<std::size_t>(tid)]->reserved.store(kIdle, std::memory_order_release);
  }

  // Owner-only. Caller must have already made the node unreachable from
  // the list head (retired nodes may still be referenced by in-flight
  // traversals and by lagging largest-handles; both are handled here).
  void retire(ThreadId tid, Node* n) {
    PerThread& p = *per_[static_cast<std::size_t>(tid)];
    p.retired.push_back({n, global_.load(std::memory_order_relaxed)});
    if (p.retired.size() >= kFlushThreshold) flush(tid);
  }

  // Nodes for which the filter returns true stay deferred even after the
  // grace period (re-tagged with the current epoch and retried later).
  void set_live_filter(std::function<bool(const Node*)> f) { live_ = std::move(f); }

  bool try_advance() {
    std::uint64_t g = global_.load(std::memory_order_acquire);
    for (const auto& p : per_) {
      std::uint64_t v = p->reserved.load(std::memory_order_acquire);
      if (v != kIdle && v != g) return false;
    }
    return global_.compare_exchange_strong(g, g + 1, std::memory_order_acq_rel,
                                           std::memory_order_relaxed);
  }

  // Owner-only.
  void flush(ThreadId tid) {
    try_advance();
    std::uint64_t g = global_.load(std::memory_order_acquire);
    PerThread& p = *per_[static_cast<std::size_t>(tid)];
    std::size_t kept = 0;
    for (Retired& r : p.retired) {
      if (r.epoch + 2 <= g) {
        if (live_ && live_(r.node)) {
          r.epoch = g;  // still rooted by a handle, try again later
          p.retired[kept++] = r;
        } else {
          pool_.release(r.node);
        }
      } else {
        p.retired[kept++] = r;
      }
    }
    p.retired.resize(kept);
  }

  std::size_t deferred_count(ThreadId tid) const {
    return per_[static_cast<std::size_t>(tid)]->retired.size();
  }

  std::uint64_t epoch() const { return global_.load(std::memory_order_acquire); }

 private:
  static constexpr std::uint64_t kIdle = ~std::uint64_t{0};
  static constexpr std::size_t kFlushThreshold = 64;

  struct Retired {
    Node* node;
    std::uint64_t epoch;
  };

  struct alignas(64) PerThread {
    std::atomic<std::uint64_t> reserved{kIdle};
    std::vector<Retired> retired;
  };

  NodePool<Node>& pool_;
  std::atomic<std::uint64_t> global_{0};
  std::function<bool(const Node*)> live_;
  std::vector<std::unique_ptr<PerThread>> per_;
};

// RAII pin for one traversal.
template <class Node>
class EpochGuard {
 public:
  EpochGuard(EpochReclaimer<Node>& r, ThreadId tid) : r_(r), tid_(tid) { r_.pin(tid_); }
  ~EpochGuard() { r_.unpin(tid_); }
  EpochGuard(const EpochGuard&) = delete;
  EpochGuard& operator=(const EpochGuard&) = delete;

 private:
  EpochReclaimer<Node>& r_;
  ThreadId tid_;
};

}  // namespace pipq
