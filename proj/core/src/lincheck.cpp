#include "pipq/lincheck.hpp"

#include <algorithm>
#include <bit>
#include <optional>
#include <stdexcept>
#include <unordered_set>

#include "pipq/oracle.hpp"

namespace pipq {

const char* to_string(LinVerdict v) {
  switch (v) {
    case LinVerdict::linearizable: return "linearizable";
    case LinVerdict::not_linearizable: return "not-linearizable";
    case LinVerdict::budget_exceeded: return "budget-exceeded";
  }
  return "?";
}

std::vector<LinOp> pair_history(const std::vector<HistoryEvent>& events) {
  std::vector<HistoryEvent> ev = events;
  std::sort(ev.begin(), ev.end(),
            [](const HistoryEvent& a, const HistoryEvent& b) { return a.ts < b.ts; });
  std::vector<LinOp> out;
  // one op in flight per thread: threads are sequential
  std::vector<std::optional<LinOp>> pending;
  for (const HistoryEvent& e : ev) {
    if (e.tid < 0) throw std::invalid_argument("negative thread id in history");
    if (static_cast<size_t>(e.tid) >= pending.size())
      pending.resize(static_cast<size_t>(e.tid) + 1);
    auto& slot = pending[static_cast<size_t>(e.tid)];
    if (e.phase == Phase::invoke) {
      if (slot.has_value())
        throw std::invalid_argument("thread " + std::to_string(e.tid) +
                                    " invokes while an op is in flight");
      LinOp op;
      op.tid = e.tid;
      op.op = e.op;
      op.inv_ts = e.ts;
      if (e.op == OpKind::insert) {
        op.key = e.key;
        op.val = e.val;
      }
      slot = op;
    } else {
      if (!slot.has_value() || slot->op != e.op)
        throw std::invalid_argument("thread " + std::to_string(e.tid) +
                                    " responds without a matching invoke");
      slot->resp_ts = e.ts;
      if (e.op == OpKind::delete_min) {
        if (e.key == kKeyPosInf) {
          slot->empty_result = true;
        } else {
          slot->rkey = e.key;
          slot->rval = e.val;
        }
      }
      slot->id = static_cast<int>(out.size());
      out.push_back(*slot);
      slot.reset();
    }
  }
  for (const auto& slot : pending)
    if (slot.has_value())
      throw std::invalid_argument("incomplete history: thread " +
                                  std::to_string(slot->tid) +
                                  " never responded");
  return out;
}

namespace {

struct SearchCtx {
  const std::vector<LinOp>* ops = nullptr;
  std::uint64_t included = 0;   // ops participating in this sub-history
  std::uint64_t mandatory = 0;  // ops that must appear in the order
  std::uint64_t budget = 0;
  std::uint64_t nodes = 0;
  bool exceeded = false;
  std::unordered_set<std::uint64_t> dead;  // done-masks proven stuck
  std::vector<int> order;
  SeqPQ state;

  // ops past the response cutoff act as still-pending: they may
  // linearize but never constrain anyone through their response time
  std::uint64_t eff_resp(int i) const {
    return (mandatory >> i) & 1 ? (*ops)[static_cast<size_t>(i)].resp_ts
                                : ~std::uint64_t{0};
  }
};

bool dfs(SearchCtx& c, std::uint64_t done) {
  if ((done & c.mandatory) == c.mandatory) return true;
  if (++c.nodes > c.budget) {
    c.exceeded = true;
    return false;
  }
  if (!c.dead.insert(done).second) return false;
  const std::vector<LinOp>& ops = *c.ops;
  std::uint64_t todo = c.included & ~done;
  std::uint64_t min_resp = ~std::uint64_t{0};
  for (std::uint64_t m = todo; m != 0; m &= m - 1) {
    int i = std::countr_zero(m);
    min_resp = std::min(min_resp, c.eff_resp(i));
  }
  for (std::uint64_t m = todo; m != 0; m &= m - 1) {
    int i = std::countr_zero(m);
    const LinOp& op = ops[static_cast<size_t>(i)];
    if (op.inv_ts >= min_resp) continue;  // someone responded before this invoked
    bool applied = false;
    if (op.op == OpKind::insert) {
      c.state.insert(op.key, op.val);
      applied = true;
    } else if (op.empty_result) {
      applied = c.state.empty();
    } else {
      std::optional<Key> mn = c.state.peek_min();
      applied = mn.has_value() && *mn == op.rkey && c.state.erase_pair(op.rkey, op.rval);
    }
    if (applied) {
      c.order.push_back(i);
      if (dfs(c, done | (std::uint64_t{1} << i))) return true;
      c.order.pop_back();
      // undo
      if (op.op == OpKind::insert) {
        c.state.erase_pair(op.key, op.val);
      } else if (!op.empty_result) {
        c.state.insert(op.rkey, op.rval);
      }
    }
    if (c.exceeded) return false;
  }
  return false;
}

}  // namespace

LinResult check_linearizable(const std::vector<LinOp>& ops,
                             std::uint64_t node_budget) {
  if (ops.size() > 64)
    throw std::invalid_argument("history too large: checker handles at most 64 ops");
  LinResult res;
  std::uint64_t all = ops.size() == 64 ? ~std::uint64_t{0}
                                       : (std::uint64_t{1} << ops.size()) - 1;
  SearchCtx c;
  c.ops = &ops;
  c.included = all;
  c.mandatory = all;
  c.budget = node_budget;
  bool ok = dfs(c, 0);
  res.nodes = c.nodes;
  if (ok) {
    res.verdict = LinVerdict::linearizable;
    res.witness = c.order;
    return res;
  }
  if (c.exceeded) {
    res.verdict = LinVerdict::budget_exceeded;
    res.detail = "search budget of " + std::to_string(node_budget) +
                 " nodes exhausted before a verdict";
    return res;
  }
  res.verdict = LinVerdict::not_linearizable;
  // shrink: earliest response-count cutoff whose sub-history already
  // fails, with later-responding overlappers treated as pending
  std::vector<int> by_resp(ops.size());
  for (size_t i = 0; i < ops.size(); ++i) by_resp[i] = static_cast<int>(i);
  std::sort(by_resp.begin(), by_resp.end(), [&](int a, int b) {
    return ops[static_cast<size_t>(a)].resp_ts < ops[static_cast<size_t>(b)].resp_ts;
  });
  for (size_t m = 1; m <= ops.size(); ++m) {
    std::uint64_t cutoff = ops[static_cast<size_t>(by_resp[m - 1])].resp_ts;
    SearchCtx pc;
    pc.ops = &ops;
    pc.budget = node_budget;
    for (size_t i = 0; i < ops.size(); ++i) {
      if (ops[i].resp_ts <= cutoff) {
        pc.mandatory |= std::uint64_t{1} << i;
        pc.included |= std::uint64_t{1} << i;
      } else if (ops[i].inv_ts < cutoff) {
        pc.included |= std::uint64_t{1} << i;
      }
    }
    bool sub_ok = dfs(pc, 0);
    res.nodes += pc.nodes;
    if (pc.exceeded) {
      res.detail = "failing-prefix minimization ran out of budget";
      break;
    }
    if (!sub_ok) {
      for (size_t i = 1; i <= m; ++i)
        res.failing_prefix.push_back(by_resp[i - 1]);
      res.detail = "no legal order exists for the first " + std::to_string(m) +
                   " completed operation(s)";
      break;
    }
  }
  return res;
}

LinResult check_linearizable(const std::vector<HistoryEvent>& events,
                             std::uint64_t node_budget) {
  return check_linearizable(pair_history(events), node_budget);
}

}  // namespace pipq
