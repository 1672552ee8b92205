#pragma once

// Quiescent-state auditors: structural invariants of a parked queue plus
// multiset conservation against an externally kept ledger of completed
// operations.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pipq/pipq.hpp"

namespace pipq {

// Per-thread record of every completed insert and successful delete.
// Each thread writes only its own shard; merging happens at quiescence.
class ConservationLedger {
 public:
  explicit ConservationLedger(int threads);

  ConservationLedger(const ConservationLedger&) = delete;
  ConservationLedger& operator=(const ConservationLedger&) = delete;

  void note_insert(ThreadId tid, Key k, Value v);
  void note_delete(ThreadId tid, Key k, Value v);

  std::vector<std::pair<Key, Value>> inserted_sorted() const;
  std::vector<std::pair<Key, Value>> deleted_sorted() const;
  std::size_t insert_count() const;
  std::size_t delete_count() const;
  void clear();

 private:
  struct alignas(64) Shard {
    std::vector<std::pair<Key, Value>> ins;
    std::vector<std::pair<Key, Value>> del;
  };
  std::vector<std::unique_ptr<Shard>> shards_;
};

struct AuditCheck {
  std::string name;
  bool ok = false;
  std::string detail;  // first violation found, empty when ok
};

struct AuditReport {
  std::vector<AuditCheck> checks;

  bool ok() const {
    for (const AuditCheck& c : checks)
      if (!c.ok) return false;
    return true;
  }
  std::string to_string() const;
};

// All worker threads must be parked. Verifies, in order:
//   inter-level-ordering  every active list element of a thread keys at
//                         or below that thread's heap minimum
//   credit-floor          a thread with a non-empty heap holds at least
//                         two list elements
//   sorted-active-list    the active suffix of the list is key-sorted
//                         behind the claimed prefix
//   mark-exclusion        no next word carries both mark bits, and no
//                         relocation mark survives quiescence
//   counter-accuracy      each leader counter equals the thread's active
//                         node population and stays within bounds
//   conservation          inserted multiset equals deleted multiset plus
//                         residual contents (heaps and active list nodes);
//                         vacuous when no ledger is supplied
AuditReport audit_quiescent(const Pipq& q,
                            const ConservationLedger* ledger = nullptr);

}  // namespace pipq
