#include "pipq/audit.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace pipq {

ConservationLedger::ConservationLedger(int threads) {
  PIPQ_CHECK(threads > 0, "ledger needs at least one shard");
  shards_.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) shards_.push_back(std::make_unique<Shard>());
}

void ConservationLedger::note_insert(ThreadId tid, Key k, Value v) {
  shards_[static_cast<size_t>(tid)]->ins.emplace_back(k, v);
}

void ConservationLedger::note_delete(ThreadId tid, Key k, Value v) {
  shards_[static_cast<size_t>(tid)]->del.emplace_back(k, v);
}

std::vector<std::pair<Key, Value>> ConservationLedger::inserted_sorted() const {
  std::vector<std::pair<Key, Value>> out;
  for (const auto& s : shards_) out.insert(out.end(), s->ins.begin(), s->ins.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<Key, Value>> ConservationLedger::deleted_sorted() const {
  std::vector<std::pair<Key, Value>> out;
  for (const auto& s : shards_) out.insert(out.end(), s->del.begin(), s->del.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t ConservationLedger::insert_count() const {
  std::size_t n = 0;
  for (const auto& s : shards_) n += s->ins.size();
  return n;
}

std::size_t ConservationLedger::delete_count() const {
  std::size_t n = 0;
  for (const auto& s : shards_) n += s->del.size();
  return n;
}

void ConservationLedger::clear() {
  for (auto& s : shards_) {
    s->ins.clear();
    s->del.clear();
  }
}

std::string AuditReport::to_string() const {
  std::ostringstream os;
  for (const AuditCheck& c : checks) {
    os << (c.ok ? "  [pass] " : "  [FAIL] ") << c.name;
    if (!c.ok && !c.detail.empty()) os << ": " << c.detail;
    os << '\n';
  }
  return os.str();
}

AuditReport audit_quiescent(const Pipq& q, const ConservationLedger* ledger) {
  AuditReport rep;
  PipqSnapshot s = q.debug_snapshot();
  int threads = q.threads();

  auto add = [&rep](const char* name, bool ok, std::string detail) {
    rep.checks.push_back(AuditCheck{name, ok, ok ? "" : std::move(detail)});
  };

  std::vector<std::vector<Key>> active(static_cast<size_t>(threads));
  for (const LeaderScanEntry& n : s.list_nodes)
    if (!n.claimed) active[static_cast<size_t>(n.tid)].push_back(n.key);

  {
    bool ok = true;
    std::string why;
    for (int t = 0; t < threads && ok; ++t) {
      std::optional<Key> hmin;
      for (const HeapEntry& e : s.heaps[static_cast<size_t>(t)])
        if (!hmin || e.key < *hmin) hmin = e.key;
      if (!hmin) continue;
      for (Key k : active[static_cast<size_t>(t)]) {
        if (k > *hmin) {
          ok = false;
          std::ostringstream os;
          os << "thread " << t << " holds list key " << k
             << " above its heap minimum " << *hmin;
          why = os.str();
          break;
        }
      }
    }
    add("inter-level-ordering", ok, why);
  }

  {
    bool ok = true;
    std::string why;
    for (int t = 0; t < threads; ++t) {
      if (!s.heaps[static_cast<size_t>(t)].empty() &&
          s.l_counts[static_cast<size_t>(t)] < 2) {
        ok = false;
        std::ostringstream os;
        os << "thread " << t << " has " << s.heaps[static_cast<size_t>(t)].size()
           << " heap elements but a leader credit of "
           << s.l_counts[static_cast<size_t>(t)];
        why = os.str();
        break;
      }
    }
    add("credit-floor", ok, why);
  }

  {
    bool ok = true;
    std::string why;
    bool in_prefix = true;
    Key prev = kKeyNegInf;
    for (const LeaderScanEntry& n : s.list_nodes) {
      if (n.claimed) {
        if (!in_prefix) {
          ok = false;
          why = "claimed node found behind an active node";
          break;
        }
        continue;
      }
      in_prefix = false;
      if (n.key < prev) {
        ok = false;
        std::ostringstream os;
        os << "active keys out of order: " << prev << " precedes " << n.key;
        why = os.str();
        break;
      }
      prev = n.key;
    }
    add("sorted-active-list", ok, why);
  }

  {
    bool ok = true;
    std::string why;
    for (const LeaderScanEntry& n : s.list_nodes) {
      if (n.claimed && n.moving) {
        ok = false;
        std::ostringstream os;
        os << "node with key " << n.key << " is both claimed and relocating";
        why = os.str();
        break;
      }
      if (n.moving) {
        ok = false;
        std::ostringstream os;
        os << "node with key " << n.key << " still carries a relocation mark";
        why = os.str();
        break;
      }
    }
    add("mark-exclusion", ok, why);
  }

  {
    bool ok = true;
    std::string why;
    for (int t = 0; t < threads; ++t) {
      long long cnt = s.l_counts[static_cast<size_t>(t)];
      long long pop = static_cast<long long>(active[static_cast<size_t>(t)].size());
      if (cnt != pop || cnt < 0 || cnt > q.config().cntr_max) {
        ok = false;
        std::ostringstream os;
        os << "thread " << t << " counter reads " << cnt << " but " << pop
           << " active nodes are present (bounds 0.." << q.config().cntr_max
           << ")";
        why = os.str();
        break;
      }
    }
    add("counter-accuracy", ok, why);
  }

  {
    bool ok = true;
    std::string why;
    if (ledger != nullptr) {
      std::vector<std::pair<Key, Value>> have = ledger->deleted_sorted();
      for (int t = 0; t < threads; ++t)
        for (const HeapEntry& e : s.heaps[static_cast<size_t>(t)])
          have.emplace_back(e.key, e.val);
      for (const LeaderScanEntry& n : s.list_nodes)
        if (!n.claimed) have.emplace_back(n.key, n.val);
      std::sort(have.begin(), have.end());
      std::vector<std::pair<Key, Value>> want = ledger->inserted_sorted();
      if (have != want) {
        ok = false;
        std::ostringstream os;
        os << "inserted " << want.size() << " pairs but deleted+residual covers "
           << have.size();
        if (have.size() == want.size()) os << " with differing contents";
        why = os.str();
      }
    }
    add("conservation", ok, why);
  }

  return rep;
}

}  // namespace pipq
