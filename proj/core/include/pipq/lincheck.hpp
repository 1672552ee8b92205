#pragma once

// Small-history linearizability checker for priority-queue semantics:
// depth-first search over the orders permitted by real-time precedence,
// replaying candidates against the sequential reference. Equal keys are
// interchangeable, but a delete result must name a pair that was really
// available. Exponential, intended for histories of a few dozen ops.

#include <cstdint>
#include <string>
#include <vector>

#include "pipq/history.hpp"

namespace pipq {

struct LinOp {
  int id = 0;  // index into the paired-op array
  ThreadId tid = 0;
  OpKind op = OpKind::insert;
  Key key = 0;    // insert argument
  Value val = 0;  // insert argument
  bool empty_result = false;
  Key rkey = 0;  // delete result
  Value rval = 0;
  std::uint64_t inv_ts = 0;
  std::uint64_t resp_ts = 0;
};

enum class LinVerdict { linearizable, not_linearizable, budget_exceeded };

const char* to_string(LinVerdict v);

struct LinResult {
  LinVerdict verdict = LinVerdict::linearizable;
  std::vector<int> witness;         // op ids in a legal order, on success
  std::vector<int> failing_prefix;  // ids of a minimal-by-response-count
                                    // sub-history that already fails
  std::uint64_t nodes = 0;          // search tree size
  std::string detail;
};

// Groups invoke/respond events into completed operations. Throws
// std::invalid_argument on unpaired or out-of-order events.
std::vector<LinOp> pair_history(const std::vector<HistoryEvent>& events);

// At most 64 operations (the memo table is a bitmask per subset).
// The prefix minimization fixes each operation's observed result, so it
// is diagnostic rather than exact; the top-level verdict is exact.
LinResult check_linearizable(const std::vector<LinOp>& ops,
                             std::uint64_t node_budget = 4000000);
LinResult check_linearizable(const std::vector<HistoryEvent>& events,
                             std::uint64_t node_budget = 4000000);

}  // namespace pipq
