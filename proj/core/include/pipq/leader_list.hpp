#pragma once

// Sorted lock-free singly linked list holding each thread's leading
// elements. Serves every delete-min; also supports removing the largest
// element of one thread (to demote it back into that thread's heap).
//
// Two bits are stolen from each next word. Bit 0 (CLAIM) set on a node's
// next word means the node's successor has been taken by delete-min; the
// claimed nodes accumulate as a frozen prefix that is batch-unlinked once
// it grows past max_offset. Bit 1 (MOVING) set on a node's own next word
// means that node is being relocated to its owner's heap and is unlinked
// from the middle of the list.
//
// Usage contract (callers enforce it): any number of concurrent inserts;
// one delete_min caller system wide; delete_maxp for a given owner thread
// only under that thread's heap lock, and only while the owner holds at
// least two active list elements, which keeps the two deletion kinds off
// the same node.

#include <atomic>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pipq/config.hpp"
#include "pipq/reclaim.hpp"
#include "pipq/spin.hpp"
#include "pipq/worker_heap.hpp"

namespace pipq {

struct LeaderNode {
  Key key = 0;
  Value val = 0;
  ThreadId tid = -1;
  ThreadId pool_owner = -1;
  std::atomic<std::uintptr_t> next{0};
};

using LargestHandle = std::atomic<LeaderNode*>;

namespace mark {

inline constexpr std::uintptr_t kClaim = 1;   // successor taken by delete-min
inline constexpr std::uintptr_t kMoving = 2;  // this node is being relocated
inline constexpr std::uintptr_t kBits = kClaim | kMoving;

inline bool is_logdel_ref(std::uintptr_t w) { return (w & kClaim) != 0; }
inline bool is_moving_ref(std::uintptr_t w) { return (w & kMoving) != 0; }
inline bool is_marked_ref(std::uintptr_t w) { return (w & kBits) != 0; }
inline std::uintptr_t get_logdel_ref(std::uintptr_t w) { return w | kClaim; }
inline std::uintptr_t get_moving_ref(std::uintptr_t w) { return w | kMoving; }
inline std::uintptr_t get_notlogdel_ref(std::uintptr_t w) { return w & ~kClaim; }
inline std::uintptr_t get_unmarked_ref(std::uintptr_t w) { return w & ~kBits; }
inline LeaderNode* node_of(std::uintptr_t w) {
  return reinterpret_cast<LeaderNode*>(w & ~kBits);
}
inline std::uintptr_t word_of(const LeaderNode* n) {
  return reinterpret_cast<std::uintptr_t>(n);
}

}  // namespace mark

struct LeaderMin {
  Key key;
  Value val;
  ThreadId tid;
};

// Snapshot of one node for quiescent audits.
struct LeaderScanEntry {
  Key key;
  Value val;
  ThreadId tid;
  bool claimed;  // bit 0 of the incoming edge
  bool moving;   // bit 1 of the node's own next word
};

class LeaderList {
 public:
  explicit LeaderList(int threads, int max_offset = 32)
      : max_offset_(max_offset), pool_(threads), ebr_(threads, pool_) {
    head_.key = kKeyNegInf;
    tail_.key = kKeyPosInf;
    head_.next.store(mark::word_of(&tail_), std::memory_order_relaxed);
    tail_.next.store(0, std::memory_order_relaxed);
  }

  LeaderList(const LeaderList&) = delete;
  LeaderList& operator=(const LeaderList&) = delete;

  EpochReclaimer<LeaderNode>& reclaimer() { return ebr_; }

  // Inserts (key,val) tagged with owner `tid` and refreshes the owner's
  // largest-element handle. `caller` is the reclamation identity of the
  // executing thread (a helper may insert on the owner's behalf, under
  // the owner's heap lock).
  void insert(Key key, Value val, ThreadId tid, LargestHandle& lead_largest,
              ThreadId caller) {
    EpochGuard<LeaderNode> g(ebr_, caller);
    for (;;) {
      auto [l_node, r_node] = search(key);
      LeaderNode* new_node = pool_.alloc(caller);
      new_node->key = key;
      new_node->val = val;
      new_node->tid = tid;
      new_node->next.store(mark::word_of(r_node), std::memory_order_relaxed);
      std::uintptr_t expect = mark::word_of(r_node);
      if (l_node->next.compare_exchange_strong(expect, mark::word_of(new_node),
                                               std::memory_order_acq_rel,
                                               std::memory_order_acquire)) {
        LeaderNode* cur = lead_largest.load(std::memory_order_relaxed);
        if (cur == nullptr || key > cur->key) {
          lead_largest.store(new_node, std::memory_order_relaxed);
        }
        return;
      }
      pool_.release(new_node);  // never published
    }
  }

  // Coordinator only. Claims the first active node by setting the claim
  // bit on its predecessor's next word; batch-unlinks the claimed prefix
  // once it exceeds max_offset.
  std::optional<LeaderMin> delete_min(ThreadId caller) {
    EpochGuard<LeaderNode> g(ebr_, caller);
    int offset = 0;
    LeaderNode* x = &head_;
    std::uintptr_t x_next;
    for (;;) {
      offset += 1;
      x_next = x->next.load(std::memory_order_acquire);
      PIPQ_CHECK(!mark::is_moving_ref(x_next), "claim walk crossed a moving node");
      if (mark::node_of(mark::get_notlogdel_ref(x_next)) == &tail_) {
        return std::nullopt;
      }
      if (!mark::is_logdel_ref(x_next)) {
        x_next = x->next.fetch_or(mark::kClaim, std::memory_order_acq_rel);
        PIPQ_CHECK(!mark::is_moving_ref(x_next), "claimed a moving node's edge");
        if (!mark::is_logdel_ref(x_next)) {
          x = mark::node_of(x_next);
          // best-effort interference probe: the node just claimed must not
          // be mid-relocation (the usage contract forbids the overlap)
          PIPQ_CHECK(!mark::is_moving_ref(x->next.load(std::memory_order_acquire)),
                     "claimed a node being relocated");
          break;
        }
      }
      x = mark::node_of(x_next);
    }
    LeaderNode* new_head = x;
    if (offset > max_offset_) {
      std::uintptr_t old_first =
          head_.next.load(std::memory_order_relaxed);  // stable: we own bit 0 here
      // single writer of head.next, so a plain store suffices; inserts
      // cannot land inside the frozen prefix (every claim bit is set)
      head_.next.store(mark::get_logdel_ref(mark::word_of(new_head)),
                       std::memory_order_release);
      retire_prefix(mark::node_of(old_first), new_head, caller);
    }
    return LeaderMin{x->key, x->val, x->tid};
  }

  // Owner only, under the owner's heap lock. Removes the node designated
  // by lead_largest, resets the handle to the nearest preceding active
  // node of the same owner, and returns the removed pair.
  HeapEntry delete_maxp(LargestHandle& lead_largest, ThreadId tid) {
    EpochGuard<LeaderNode> g(ebr_, tid);
    LeaderNode* start_lead_largest = lead_largest.load(std::memory_order_relaxed);
    PIPQ_CHECK(start_lead_largest != nullptr, "delete_maxp with empty handle");
    LeaderNode* l_node = nullptr;
    LeaderNode* r_node = nullptr;
    std::uintptr_t r_node_next;
    for (;;) {
      auto [l, r] = search_delete(lead_largest, start_lead_largest, tid);
      l_node = l;
      r_node = r;
      r_node_next = r_node->next.load(std::memory_order_acquire);
      if (!mark::is_marked_ref(r_node_next)) {
        if (r_node->next.compare_exchange_strong(
                r_node_next, mark::get_moving_ref(r_node_next),
                std::memory_order_acq_rel, std::memory_order_acquire)) {
          // best-effort interference probe: a claim bit pointing at the
          // node we just marked means delete-min took it concurrently
          std::uintptr_t l_now = l_node->next.load(std::memory_order_acquire);
          PIPQ_CHECK(!(mark::is_logdel_ref(l_now) && mark::node_of(l_now) == r_node),
                     "relocating a node claimed by delete-min");
          break;
        }
      }
    }
    std::uintptr_t expect = mark::word_of(r_node);
    if (!l_node->next.compare_exchange_strong(expect, r_node_next,
                                              std::memory_order_acq_rel,
                                              std::memory_order_acquire)) {
      search_phys_del(r_node);
    }
    HeapEntry out{r_node->key, r_node->val};
    ebr_.retire(tid, r_node);
    return out;
  }

  // Convenient for tests and the queue teardown path.
  void flush_reclamation(ThreadId caller) { ebr_.flush(caller); }

  // Quiescent-only. Walks the raw words and returns every node still
  // physically linked, with its mark state.
  std::vector<LeaderScanEntry> scan() const {
    std::vector<LeaderScanEntry> out;
    std::uintptr_t w = head_.next.load(std::memory_order_acquire);
    for (;;) {
      LeaderNode* n = mark::node_of(w);
      if (n == &tail_) break;
      std::uintptr_t own = n->next.load(std::memory_order_acquire);
      out.push_back(LeaderScanEntry{n->key, n->val, n->tid,
                                    mark::is_logdel_ref(w),
                                    mark::is_moving_ref(own)});
      w = own;
    }
    return out;
  }

  // Quiescent-only textual rendering, one node per "key(tid)[D|M]" item.
  std::string debug_dump() const {
    std::ostringstream os;
    bool first = true;
    for (const LeaderScanEntry& e : scan()) {
      if (!first) os << " ";
      first = false;
      os << e.key << "(" << e.tid << ")";
      if (e.claimed) os << "[D]";
      if (e.moving) os << "[M]";
    }
    return os.str();
  }

  // Quiescent-only structural audit: claimed prefix then sorted active
  // suffix, no node carrying both bits on one word, no moving leftovers.
  bool structure_ok(std::string* why = nullptr) const {
    std::uintptr_t w = head_.next.load(std::memory_order_acquire);
    bool in_prefix = true;
    Key prev_active = kKeyNegInf;
    for (;;) {
      LeaderNode* n = mark::node_of(w);
      if (n == &tail_) break;
      std::uintptr_t own = n->next.load(std::memory_order_acquire);
      if (mark::is_logdel_ref(own) && mark::is_moving_ref(own)) {
        if (why) *why = "next word carries both mark bits";
        return false;
      }
      if (mark::is_moving_ref(own)) {
        if (why) *why = "moving node still linked at quiescence";
        return false;
      }
      bool claimed = mark::is_logdel_ref(w);
      if (claimed && !in_prefix) {
        if (why) *why = "claimed node after an active node";
        return false;
      }
      if (!claimed) {
        in_prefix = false;
        if (n->key < prev_active) {
          if (why) *why = "active suffix out of order";
          return false;
        }
        prev_active = n->key;
      }
      w = own;
    }
    return true;
  }

 private:
  friend struct LeaderListTestPeer;

  // Locates adjacent (l_node, r_node) with l_node.key < key <= r_node.key
  // among active nodes, skipping the claimed prefix and unlinking any
  // moving span it runs into.
  std::pair<LeaderNode*, LeaderNode*> search(Key key) {
    for (;;) {
      bool prev_log_del = false;
      LeaderNode* x = &head_;
      std::uintptr_t x_next = x->next.load(std::memory_order_acquire);
      LeaderNode* l_node = nullptr;
      std::uintptr_t l_node_next = 0;
      for (;;) {
        if (!mark::is_moving_ref(x_next)) {
          l_node = x;
          l_node_next = mark::get_notlogdel_ref(x_next);
        }
        x = mark::node_of(x_next);
        if (x == &tail_) break;
        prev_log_del = mark::is_logdel_ref(x_next);
        x_next = x->next.load(std::memory_order_acquire);
        if (x->key >= key && !mark::is_moving_ref(x_next) && !prev_log_del) break;
      }
      LeaderNode* r_node = x;
      if (l_node_next == mark::word_of(r_node)) {
        if (revalidate_fails(l_node, r_node)) continue;
        return {l_node, r_node};
      }
      // unlink the moving span between l_node and r_node
      std::uintptr_t expect = l_node_next;
      if (l_node->next.compare_exchange_strong(expect, mark::word_of(r_node),
                                               std::memory_order_acq_rel,
                                               std::memory_order_acquire)) {
        if (revalidate_fails(l_node, r_node)) continue;
        return {l_node, r_node};
      }
    }
  }

  bool revalidate_fails(LeaderNode* l_node, LeaderNode* r_node) {
    std::uintptr_t l_now = l_node->next.load(std::memory_order_acquire);
    std::uintptr_t r_now = r_node->next.load(std::memory_order_acquire);
    return mark::is_logdel_ref(l_now) || (r_now != 0 && mark::is_moving_ref(r_now));
  }

  // Traverses from the head looking for the owner's node designated by
  // start_lead_largest, tracking the nearest preceding active node of the
  // same owner to reseat the handle. If the designated node is gone, the
  // owner's last reachable node stands in for it.
  std::pair<LeaderNode*, LeaderNode*> search_delete(LargestHandle& lead_largest,
                                                    LeaderNode* start_lead_largest,
                                                    ThreadId tid) {
    LeaderNode* r_node = &head_;
    LeaderNode* x = &head_;
    std::uintptr_t x_next = x->next.load(std::memory_order_acquire);
    for (;;) {
      LeaderNode* new_lead_largest = nullptr;
      LeaderNode* cur_l_node = nullptr;
      std::uintptr_t cur_l_node_next = 0;
      LeaderNode* l_node = nullptr;
      std::uintptr_t l_node_next = 0;
      bool found_any = false;
      for (;;) {
        if (!mark::is_moving_ref(x_next)) {
          cur_l_node = x;
          cur_l_node_next = mark::get_notlogdel_ref(x_next);
        }
        x = mark::node_of(x_next);
        if (x == &tail_) break;
        x_next = x->next.load(std::memory_order_acquire);
        if (!mark::is_moving_ref(x_next) && x->tid == tid) {
          new_lead_largest = r_node;
          l_node = cur_l_node;
          l_node_next = cur_l_node_next;
          r_node = x;
          found_any = true;
          if (x == start_lead_largest) break;
        }
      }
      PIPQ_CHECK(found_any, "delete_maxp found no node of the owner");
      // the handle update is covered by the owner's heap lock
      lead_largest.store(new_lead_largest == &head_ ? nullptr : new_lead_largest,
                         std::memory_order_relaxed);
      if (l_node_next == mark::word_of(r_node)) return {l_node, r_node};
      std::uintptr_t expect = l_node_next;
      if (l_node->next.compare_exchange_strong(expect, mark::word_of(r_node),
                                               std::memory_order_acq_rel,
                                               std::memory_order_acquire)) {
        return {l_node, r_node};
      }
      x = &head_;
      x_next = x->next.load(std::memory_order_acquire);
      r_node = new_lead_largest == nullptr ? &head_ : new_lead_largest;
    }
  }

  // Guarantees search_node is physically unlinked before returning; a
  // no-op if some other traversal already removed it.
  void search_phys_del(LeaderNode* search_node) {
    for (;;) {
      bool prev_log_del = false;
      bool found = false;
      LeaderNode* x = &head_;
      std::uintptr_t x_next = x->next.load(std::memory_order_acquire);
      LeaderNode* l_node = nullptr;
      std::uintptr_t l_node_next = 0;
      for (;;) {
        if (!mark::is_moving_ref(x_next)) {
          l_node = x;
          l_node_next = mark::get_notlogdel_ref(x_next);
        }
        x = mark::node_of(x_next);
        if (x == &tail_) break;
        if (x == search_node) found = true;
        prev_log_del = mark::is_logdel_ref(x_next);
        x_next = x->next.load(std::memory_order_acquire);
        if (found && !mark::is_moving_ref(x_next) && !prev_log_del) break;
      }
      if (!found) return;  // already removed by another traversal
      LeaderNode* r_node = x;
      std::uintptr_t expect = l_node_next;
      if (l_node->next.compare_exchange_strong(expect, mark::word_of(r_node),
                                               std::memory_order_acq_rel,
                                               std::memory_order_acquire)) {
        return;
      }
    }
  }

  // Retires the frozen claimed prefix [first, new_head) after the head
  // swing; every next word in it carries the claim bit, so the chain is
  // immutable and safe to walk.
  void retire_prefix(LeaderNode* first, LeaderNode* new_head, ThreadId caller) {
    LeaderNode* n = first;
    while (n != new_head) {
      std::uintptr_t w = n->next.load(std::memory_order_relaxed);
      PIPQ_CHECK(mark::is_logdel_ref(w), "prefix node without claim bit");
      PIPQ_CHECK(!mark::is_moving_ref(w), "prefix node marked moving");
      LeaderNode* nxt = mark::node_of(w);
      ebr_.retire(caller, n);
      n = nxt;
    }
  }

  int max_offset_;
  NodePool<LeaderNode> pool_;
  EpochReclaimer<LeaderNode> ebr_;
  alignas(64) LeaderNode head_;
  alignas(64) LeaderNode tail_;
};

}  // namespace pipq
