#pragma once

// The concurrent priority queue. Two levels: per-thread binary min-heaps
// under sequence locks, and one shared sorted lock-free list holding each
// thread's leading elements. Every delete-min is served from the list by
// a combining coordinator elected through two tiers of sequence locks
// (per-NUMA-node, then global). Inserts run under the caller's own heap
// lock and pick one of three paths depending on where the key belongs and
// how many of the caller's elements the list already holds.
//
// Invariant tying the levels together: every active list element of a
// thread has a key no larger than that thread's heap minimum, so the list
// minimum is the global minimum.

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "pipq/config.hpp"
#include "pipq/leader_list.hpp"
#include "pipq/seqlock.hpp"
#include "pipq/spin.hpp"
#include "pipq/topology.hpp"
#include "pipq/worker_heap.hpp"

namespace pipq {

// Per-coordinator-stint service counts. Written only under the global
// coordinator lock, read at quiescence.
struct BatchStats {
  std::uint64_t stints = 0;         // times a coordinator scanned its node
  std::uint64_t stints_served = 0;  // stints that served at least one slot
  std::uint64_t total_served = 0;
  std::vector<std::uint64_t> histogram;  // index = slots served in a stint

  double mean_per_serving_stint() const {
    return stints_served == 0
               ? 0.0
               : static_cast<double>(total_served) / static_cast<double>(stints_served);
  }
};

struct DrainStats {
  PathCounters paths;
  BatchStats batch;
};

// Quiescent view of the whole structure for audits.
struct PipqSnapshot {
  std::vector<std::vector<HeapEntry>> heaps;       // per tid, unordered
  std::vector<long long> l_counts;                 // per tid
  std::vector<std::optional<Key>> largest_keys;    // per tid, handle target
  std::vector<LeaderScanEntry> list_nodes;         // physical list order
};

class Pipq {
 public:
  Pipq(const Config& cfg, TopologyMap topo)
      : cfg_(cfg), topo_(std::move(topo)), list_(cfg.threads, cfg.max_offset) {
    PIPQ_CHECK(config_validate(cfg_) == std::nullopt, "invalid queue config");
    PIPQ_CHECK(topo_.threads() == cfg_.threads, "topology does not cover all threads");
    per_.reserve(static_cast<size_t>(cfg_.threads));
    std::vector<int> next_slot(static_cast<size_t>(topo_.numa_nodes), 0);
    for (int t = 0; t < cfg_.threads; ++t) {
      auto p = std::make_unique<PerThread>(cfg_.heap_segment_capacity);
      p->node = topo_.node_of(t);
      p->slot = next_slot[static_cast<size_t>(p->node)]++;
      per_.push_back(std::move(p));
    }
    announce_.resize(static_cast<size_t>(topo_.numa_nodes));
    for (int n = 0; n < topo_.numa_nodes; ++n) {
      announce_[static_cast<size_t>(n)] =
          std::make_unique<AnnounceSlot[]>(static_cast<size_t>(
              topo_.threads_per_node[static_cast<size_t>(n)]));
    }
    compete_locks_ = std::make_unique<PaddedSeqLock[]>(
        static_cast<size_t>(topo_.numa_nodes));
    batch_.histogram.assign(static_cast<size_t>(cfg_.threads) + 1, 0);
    list_.reclaimer().set_live_filter([this](const LeaderNode* n) {
      for (const auto& p : per_) {
        if (p->largest.load(std::memory_order_relaxed) == n) return true;
      }
      return false;
    });
  }

  Pipq(const Pipq&) = delete;
  Pipq& operator=(const Pipq&) = delete;

  int threads() const { return cfg_.threads; }
  const Config& config() const { return cfg_; }
  const TopologyMap& topology() const { return topo_; }

  class Handle {
   public:
    Handle() = default;
    void insert(Key k, Value v) { q_->insert(tid_, k, v); }
    std::optional<HeapEntry> delete_min() { return q_->delete_min(tid_); }
    ThreadId tid() const { return tid_; }

   private:
    friend class Pipq;
    Handle(Pipq* q, ThreadId t) : q_(q), tid_(t) {}
    Pipq* q_ = nullptr;
    ThreadId tid_ = -1;
  };

  Handle register_thread(ThreadId tid) {
    PIPQ_CHECK(tid >= 0 && tid < cfg_.threads, "tid out of range");
    return Handle(this, tid);
  }

  void insert(ThreadId tid, Key key, Value val) {
    PIPQ_CHECK(key >= kKeyMinUser && key <= kKeyMaxUser, "key outside user range");
    PerThread& me = *per_[static_cast<size_t>(tid)];
    me.heap.lk.lock();
    std::optional<Key> hmin = me.heap.peek_min();
    if (!hmin.has_value() || key < *hmin) {
      // the element belongs ahead of the heap, compare to the list side
      if (me.l_count.load(std::memory_order_acquire) == cfg_.cntr_max) {
        LeaderNode* lg = me.largest.load(std::memory_order_relaxed);
        if (lg != nullptr && key >= lg->key) {
          me.heap.insert(key, val);
          me.paths.fast += 1;
        } else {
          list_.insert(key, val, tid, me.largest, tid);
          HeapEntry moved = list_.delete_maxp(me.largest, tid);
          me.heap.insert(moved.key, moved.val);
          me.paths.slowest += 1;
        }
      } else {
        list_.insert(key, val, tid, me.largest, tid);
        me.l_count.fetch_add(1, std::memory_order_acq_rel);
        me.paths.slower += 1;
      }
    } else {
      me.heap.insert(key, val);
      me.paths.fast += 1;
    }
    if (cfg_.helping == HelpingSite::on_insert) upsert_body_locked(tid);
    me.heap.lk.unlock();
  }

  std::optional<HeapEntry> delete_min(ThreadId tid) {
    PerThread& me = *per_[static_cast<size_t>(tid)];
    AnnounceSlot& slot = announce_[static_cast<size_t>(me.node)][static_cast<size_t>(me.slot)];
    slot.key = kKeyPosInf;  // empty-result sentinel, overwritten on service
    slot.val = 0;
    slot.status.store(true, std::memory_order_release);
    try_compete_coordinator(tid);
    // every exit path above observed (or performed) the status reset,
    // which orders these plain reads after the coordinator's writes
    if (slot.key == kKeyPosInf) return std::nullopt;
    return HeapEntry{slot.key, slot.val};
  }

  // Moves the caller's heap minimum into the list when the caller's list
  // credit runs low. One element per call, single lock attempt.
  void help_upsert(ThreadId tid) {
    PerThread& me = *per_[static_cast<size_t>(tid)];
    if (me.l_count.load(std::memory_order_acquire) >= cfg_.cntr_min) return;
    if (!me.heap.lk.try_lock()) return;
    upsert_body_locked(tid);
    me.heap.lk.unlock();
  }

  // ---- introspection (quiescent unless noted) ----

  PathCounters path_counters(ThreadId tid) const {
    return per_[static_cast<size_t>(tid)]->paths;
  }

  PathCounters path_counters_total() const {
    PathCounters total;
    for (const auto& p : per_) total += p->paths;
    return total;
  }

  const BatchStats& batch_stats() const { return batch_; }

  DrainStats drain_stats() const { return {path_counters_total(), batch_}; }

  long long leader_count(ThreadId tid) const {
    return per_[static_cast<size_t>(tid)]->l_count.load(std::memory_order_acquire);
  }

  PipqSnapshot debug_snapshot() const {
    PipqSnapshot s;
    s.heaps.resize(static_cast<size_t>(cfg_.threads));
    for (int t = 0; t < cfg_.threads; ++t) {
      const PerThread& p = *per_[static_cast<size_t>(t)];
      p.heap.for_each([&](const HeapEntry& e) {
        s.heaps[static_cast<size_t>(t)].push_back(e);
      });
      s.l_counts.push_back(p.l_count.load(std::memory_order_acquire));
      LeaderNode* lg = p.largest.load(std::memory_order_relaxed);
      s.largest_keys.push_back(lg == nullptr ? std::optional<Key>{}
                                             : std::optional<Key>{lg->key});
    }
    s.list_nodes = list_.scan();
    return s;
  }

  const LeaderList& leader_list() const { return list_; }

  // Runs epoch maintenance for every thread slot; quiescent only.
  void quiescent_reclaim() {
    for (int round = 0; round < 4; ++round) {
      for (int t = 0; t < cfg_.threads; ++t) list_.flush_reclamation(t);
    }
  }

  // Fault-injection hook for the auditors' negative tests.
  void test_set_leader_count(ThreadId tid, long long v) {
    per_[static_cast<size_t>(tid)]->l_count.store(v, std::memory_order_release);
  }

 private:
  friend struct PipqTestPeer;

  struct alignas(64) AnnounceSlot {
    std::atomic<bool> status{false};
    Key key = kKeyPosInf;
    Value val = 0;
  };

  struct alignas(64) PaddedSeqLock {
    SeqLock lk;
  };

  struct alignas(64) PerThread {
    explicit PerThread(std::uint64_t hls) : heap(hls) {}
    WorkerHeap heap;
    std::atomic<long long> l_count{0};
    LargestHandle largest{nullptr};
    PathCounters paths;
    int node = 0;
    int slot = 0;
  };

  void try_compete_coordinator(ThreadId tid) {
    PerThread& me = *per_[static_cast<size_t>(tid)];
    SeqLock& node_lock = compete_locks_[static_cast<size_t>(me.node)].lk;
    AnnounceSlot& slot =
        announce_[static_cast<size_t>(me.node)][static_cast<size_t>(me.slot)];
    for (;;) {
      std::uint64_t lv = node_lock.load();
      if (!SeqLock::is_locked(lv)) {
        if (node_lock.try_lock_from(lv)) {
          // node leader; now compete with other nodes' leaders
          try_become_coordinator(tid);
          node_lock.unlock();
          return;
        }
      } else {
        Spinner sp;
        while (node_lock.load() == lv) {
          help_upsert(tid);
          if (!slot.status.load(std::memory_order_acquire)) return;
          sp.spin();
        }
      }
    }
  }

  void try_become_coordinator(ThreadId tid) {
    for (;;) {
      std::uint64_t lv = coord_lock_.load();
      if (!SeqLock::is_locked(lv)) {
        if (coord_lock_.try_lock_from(lv)) {
          coordinate(tid);
          coord_lock_.unlock();
          return;
        }
      } else {
        // no own-status recheck here: only this node's leader can serve
        // this node's slots, and that leader is us
        Spinner sp;
        while (coord_lock_.load() == lv) {
          help_upsert(tid);
          sp.spin();
        }
      }
    }
  }

  void coordinate(ThreadId tid) {
    PerThread& me = *per_[static_cast<size_t>(tid)];
    AnnounceSlot* slots = announce_[static_cast<size_t>(me.node)].get();
    int workers = topo_.threads_per_node[static_cast<size_t>(me.node)];
    std::uint64_t served = 0;
    for (int idx = 0; idx < workers; ++idx) {
      if (slots[idx].status.load(std::memory_order_acquire)) {
        execute_announced(tid, me.node, idx);
        slots[idx].status.store(false, std::memory_order_release);
        served += 1;
      }
    }
    if (cfg_.instrument) {
      batch_.stints += 1;
      if (served > 0) {
        batch_.stints_served += 1;
        batch_.total_served += served;
        size_t bin = served < batch_.histogram.size() ? static_cast<size_t>(served)
                                                      : batch_.histogram.size() - 1;
        batch_.histogram[bin] += 1;
      }
    }
  }

  void execute_announced(ThreadId self, int node, int idx) {
    auto m = list_.delete_min(self);
    if (!m.has_value()) return;  // slot keeps its empty sentinel
    PerThread& owner = *per_[static_cast<size_t>(m->tid)];
    owner.l_count.fetch_add(-1, std::memory_order_acq_rel);
    AnnounceSlot& slot = announce_[static_cast<size_t>(node)][static_cast<size_t>(idx)];
    slot.key = m->key;
    slot.val = m->val;
    if (owner.l_count.load(std::memory_order_acquire) >= 2) return;
    // pull a replacement up from the owner's heap so its list credit
    // stays above the interference floor
    if (m->tid == self) {
      // own heap: nobody else can be holding our lock, skip it
      refill_from_heap(owner, m->tid, self);
      return;
    }
    for (;;) {
      std::uint64_t lv = owner.heap.lk.load();
      if (!SeqLock::is_locked(lv)) {
        if (owner.heap.lk.try_lock_from(lv)) {
          refill_from_heap(owner, m->tid, self);
          owner.heap.lk.unlock();
          return;
        }
      } else {
        Spinner sp;
        while (owner.heap.lk.load() == lv) {
          if (owner.l_count.load(std::memory_order_acquire) >= 2) {
            return;  // the owner upserted meanwhile
          }
          sp.spin();
        }
      }
    }
  }

  // Caller holds (or legitimately owns) the owner's heap lock.
  void refill_from_heap(PerThread& owner, ThreadId owner_tid, ThreadId self) {
    std::optional<HeapEntry> e = owner.heap.delete_min();
    if (owner.l_count.load(std::memory_order_acquire) == 0) {
      // stale handle would poison the next insert's comparison
      owner.largest.store(nullptr, std::memory_order_relaxed);
    }
    if (e.has_value()) {
      list_.insert(e->key, e->val, owner_tid, owner.largest, self);
      owner.l_count.fetch_add(1, std::memory_order_acq_rel);
    }
  }

  // Help-upsert body with the caller's heap lock already held.
  void upsert_body_locked(ThreadId tid) {
    PerThread& me = *per_[static_cast<size_t>(tid)];
    if (me.l_count.load(std::memory_order_acquire) >= cfg_.cntr_min) return;
    std::optional<HeapEntry> e = me.heap.delete_min();
    if (e.has_value()) {
      list_.insert(e->key, e->val, tid, me.largest, tid);
      me.l_count.fetch_add(1, std::memory_order_acq_rel);
    }
  }

  Config cfg_;
  TopologyMap topo_;
  LeaderList list_;
  std::vector<std::unique_ptr<PerThread>> per_;
  std::vector<std::unique_ptr<AnnounceSlot[]>> announce_;  // [node][slot]
  std::unique_ptr<PaddedSeqLock[]> compete_locks_;
  alignas(64) SeqLock coord_lock_;
  BatchStats batch_;
};

}  // namespace pipq
