#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "pipq/pipq.hpp"

using namespace pipq;

namespace pipq {
struct PipqTestPeer {
  static SeqLock& heap_lock(Pipq& q, ThreadId tid) {
    return q.per_[static_cast<size_t>(tid)]->heap.lk;
  }
};
}  // namespace pipq

namespace {

Config cfg_threads(int threads, int cmin = 2, int cmax = 100) {
  Config c;
  c.threads = threads;
  c.cntr_min = cmin;
  c.cntr_max = cmax;
  return c;
}

std::vector<Key> active_keys_of(const PipqSnapshot& s, ThreadId tid) {
  std::vector<Key> out;
  for (const auto& n : s.list_nodes)
    if (!n.claimed && n.tid == tid) out.push_back(n.key);
  return out;
}

std::vector<Key> active_keys(const PipqSnapshot& s) {
  std::vector<Key> out;
  for (const auto& n : s.list_nodes)
    if (!n.claimed) out.push_back(n.key);
  return out;
}

// The quiescent structural audit used throughout: list shape, the
// inter-level key invariant, the credit floor for non-empty heaps, and
// counter accuracy against the actual active node population.
void check_quiescent(Pipq& q) {
  PipqSnapshot s = q.debug_snapshot();
  std::string why;
  CHECK_MESSAGE(q.leader_list().structure_ok(&why), why);
  for (int t = 0; t < q.threads(); ++t) {
    std::vector<Key> mine = active_keys_of(s, t);
    std::optional<Key> heap_min;
    for (const HeapEntry& e : s.heaps[static_cast<size_t>(t)])
      if (!heap_min || e.key < *heap_min) heap_min = e.key;
    if (heap_min) {
      for (Key k : mine) {
        CHECK_MESSAGE(k <= *heap_min, "thread ", t, " list key ", k,
                      " above its heap min ", *heap_min);
      }
      CHECK_MESSAGE(s.l_counts[static_cast<size_t>(t)] >= 2,
                    "thread ", t, " has heap elements but credit ",
                    s.l_counts[static_cast<size_t>(t)]);
    }
    CHECK(s.l_counts[static_cast<size_t>(t)] ==
          static_cast<long long>(mine.size()));
    CHECK(s.l_counts[static_cast<size_t>(t)] >= 0);
    CHECK(s.l_counts[static_cast<size_t>(t)] <= q.config().cntr_max);
  }
}

using PairVec = std::vector<std::pair<Key, Value>>;

PairVec residual_pairs(const PipqSnapshot& s) {
  PairVec out;
  for (size_t t = 0; t < s.heaps.size(); ++t)
    for (const HeapEntry& e : s.heaps[t]) out.emplace_back(e.key, e.val);
  for (const auto& n : s.list_nodes)
    if (!n.claimed) out.emplace_back(n.key, n.val);
  return out;
}

}  // namespace

TEST_CASE("first insert of a fresh instance goes to the shared list") {
  Pipq q(cfg_threads(1), flat_topology(1));
  Pipq::Handle h = q.register_thread(0);
  h.insert(42, 7);
  PipqSnapshot s = q.debug_snapshot();
  CHECK(s.l_counts[0] == 1);
  CHECK(active_keys_of(s, 0) == std::vector<Key>{42});
  CHECK(s.heaps[0].empty());
  CHECK(q.path_counters(0).slower == 1);
  CHECK(q.path_counters(0).fast == 0);
  CHECK(q.path_counters(0).slowest == 0);
}

TEST_CASE("keys at or above the heap minimum stay in the local heap") {
  Pipq q(cfg_threads(1, 2, 2), flat_topology(1));
  Pipq::Handle h = q.register_thread(0);
  h.insert(1, 0);
  h.insert(2, 0);  // list credit now at its cap
  h.insert(10, 0); // cap reached and 10 >= largest(2): heap
  h.insert(50, 0); // 50 >= heap min 10: heap
  PipqSnapshot s = q.debug_snapshot();
  CHECK(s.l_counts[0] == 2);
  CHECK(active_keys(s) == std::vector<Key>{1, 2});
  CHECK(s.heaps[0].size() == 2);
  CHECK(q.path_counters(0).fast == 2);
  CHECK(q.path_counters(0).slower == 2);
}

TEST_CASE("a leading key demotes the owner's largest list element") {
  Pipq q(cfg_threads(1, 2, 2), flat_topology(1));
  Pipq::Handle h = q.register_thread(0);
  h.insert(10, 0);
  h.insert(30, 0);  // list {10,30}, largest handle on 30
  h.insert(20, 0);  // leads the (empty) heap, cap reached, 20 < 30
  PipqSnapshot s = q.debug_snapshot();
  CHECK(q.path_counters(0).slowest == 1);
  CHECK(s.l_counts[0] == 2);
  CHECK(active_keys(s) == std::vector<Key>{10, 20});
  REQUIRE(s.heaps[0].size() == 1);
  CHECK(s.heaps[0][0].key == 30);  // demoted
  REQUIRE(s.largest_keys[0].has_value());
  CHECK(*s.largest_keys[0] == 20);
  check_quiescent(q);
}

TEST_CASE("single-thread drain returns sorted pairs then empty") {
  Pipq q(cfg_threads(1), flat_topology(1));
  Pipq::Handle h = q.register_thread(0);
  h.insert(9, 90);
  h.insert(5, 50);
  auto a = h.delete_min();
  REQUIRE(a.has_value());
  CHECK(a->key == 5);
  CHECK(a->val == 50);
  auto b = h.delete_min();
  REQUIRE(b.has_value());
  CHECK(b->key == 9);
  CHECK(b->val == 90);
  CHECK_FALSE(h.delete_min().has_value());
}

TEST_CASE("delete-min on a fresh instance reports empty") {
  Pipq q(cfg_threads(1), flat_topology(1));
  CHECK_FALSE(q.register_thread(0).delete_min().has_value());
}

TEST_CASE("the coordinator refills the owner's list credit from its heap") {
  Pipq q(cfg_threads(1, 2, 2), flat_topology(1));
  Pipq::Handle h = q.register_thread(0);
  h.insert(3, 0);
  h.insert(5, 0);
  h.insert(17, 0);  // cap reached, 17 >= largest(5): heap
  auto r = h.delete_min();
  REQUIRE(r.has_value());
  CHECK(r->key == 3);
  PipqSnapshot s = q.debug_snapshot();
  CHECK(s.l_counts[0] == 2);  // dropped to 1, then 17 pulled up
  CHECK(active_keys(s) == std::vector<Key>{5, 17});
  CHECK(s.heaps[0].empty());
  check_quiescent(q);
}

TEST_CASE("a drained owner with an empty heap keeps a low credit") {
  Pipq q(cfg_threads(1, 2, 2), flat_topology(1));
  Pipq::Handle h = q.register_thread(0);
  h.insert(3, 0);
  h.insert(5, 0);
  auto r = h.delete_min();
  REQUIRE(r.has_value());
  CHECK(r->key == 3);
  CHECK(q.leader_count(0) == 1);  // nothing in the heap to pull up
  r = h.delete_min();
  REQUIRE(r.has_value());
  CHECK(r->key == 5);
  CHECK(q.leader_count(0) == 0);
  PipqSnapshot s = q.debug_snapshot();
  CHECK_FALSE(s.largest_keys[0].has_value());  // handle reset on zero credit
  CHECK_FALSE(h.delete_min().has_value());
}

TEST_CASE("the upsert helper moves the heap minimum when credit is low") {
  Pipq q(cfg_threads(1, 2, 2), flat_topology(1));
  Pipq::Handle h = q.register_thread(0);
  h.insert(3, 0);
  h.insert(5, 0);
  h.insert(12, 0);  // heap {12}
  // pretend one list element was consumed so the credit sits below the floor
  q.test_set_leader_count(0, 1);
  q.help_upsert(0);
  CHECK(q.leader_count(0) == 2);
  PipqSnapshot s = q.debug_snapshot();
  CHECK(s.heaps[0].empty());
  std::vector<Key> act = active_keys(s);
  CHECK(std::count(act.begin(), act.end(), 12) == 1);
}

TEST_CASE("the upsert helper leaves sufficient credit and empty heaps alone") {
  Pipq q(cfg_threads(1, 2, 4), flat_topology(1));
  Pipq::Handle h = q.register_thread(0);
  q.help_upsert(0);  // credit 0 but nothing anywhere
  CHECK(q.leader_count(0) == 0);
  h.insert(3, 0);
  h.insert(5, 0);  // credit 2 == floor
  PipqSnapshot before = q.debug_snapshot();
  q.help_upsert(0);
  PipqSnapshot after = q.debug_snapshot();
  CHECK(after.l_counts[0] == before.l_counts[0]);
  CHECK(active_keys(after) == active_keys(before));
}

TEST_CASE("designated mode helps from the insert tail") {
  Config c = cfg_threads(1, 3, 4);
  c.helping = HelpingSite::on_insert;
  Pipq q(c, flat_topology(1));
  Pipq::Handle h = q.register_thread(0);
  for (Key k = 1; k <= 4; ++k) h.insert(k, 0);  // all to the list, credit 4
  h.insert(5, 0);
  h.insert(6, 0);  // heap {5,6}
  REQUIRE(h.delete_min()->key == 1);  // credit 3, no refill (>= 2)
  REQUIRE(h.delete_min()->key == 2);  // credit 2
  CHECK(q.leader_count(0) == 2);
  h.insert(7, 0);  // fast path, then the in-insert help moves 5 up
  PipqSnapshot s = q.debug_snapshot();
  CHECK(s.l_counts[0] == 3);
  std::vector<Key> act = active_keys(s);
  CHECK(std::count(act.begin(), act.end(), 5) == 1);
  std::vector<Key> heap_keys;
  for (const HeapEntry& e : s.heaps[0]) heap_keys.push_back(e.key);
  std::sort(heap_keys.begin(), heap_keys.end());
  CHECK(heap_keys == std::vector<Key>{6, 7});
  check_quiescent(q);
}

TEST_CASE("the coordinator backs off when the owner restores its credit") {
  Pipq q(cfg_threads(2, 2, 2), flat_topology(2));
  q.insert(1, 10, 0);
  q.insert(1, 20, 0);
  q.insert(1, 30, 0);  // thread 1: list {10,20}, heap {30}
  SeqLock& lk = PipqTestPeer::heap_lock(q, 1);
  REQUIRE(lk.try_lock());  // stand in for thread 1 being mid-insert
  std::atomic<bool> done{false};
  std::thread coord([&] {
    auto r = q.delete_min(0);
    CHECK(r.has_value());
    if (r) CHECK(r->key == 10);
    done.store(true);
  });
  // keep the credit looking restored until the coordinator gives up the wait
  while (!done.load()) {
    q.test_set_leader_count(1, 2);
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  coord.join();
  lk.unlock();
  q.test_set_leader_count(1, 1);  // actual active population: {20}
  auto r = q.delete_min(0);
  REQUIRE(r.has_value());
  CHECK(r->key == 20);
  r = q.delete_min(0);
  REQUIRE(r.has_value());
  CHECK(r->key == 30);
  CHECK_FALSE(q.delete_min(0).has_value());
}

TEST_CASE("four simultaneous delete-mins each receive a distinct minimum") {
  constexpr int kRepeats = 100;
  std::uint64_t combined = 0;
  for (int rep = 0; rep < kRepeats; ++rep) {
    Pipq q(cfg_threads(4), flat_topology(4));
    for (Key k = 1; k <= 4; ++k) q.insert(0, k, k * 10);
    std::atomic<int> ready{0};
    std::vector<std::optional<HeapEntry>> got(4);
    std::vector<std::thread> ts;
    for (int t = 0; t < 4; ++t) {
      ts.emplace_back([&, t] {
        ready.fetch_add(1);
        while (ready.load() != 4) cpu_relax();
        got[static_cast<size_t>(t)] = q.delete_min(t);
      });
    }
    for (auto& th : ts) th.join();
    std::vector<Key> keys;
    for (auto& g : got) {
      REQUIRE(g.has_value());
      keys.push_back(g->key);
      CHECK(g->val == g->key * 10);
    }
    std::sort(keys.begin(), keys.end());
    CHECK(keys == std::vector<Key>{1, 2, 3, 4});
    const BatchStats& b = q.batch_stats();
    CHECK(b.total_served == 4);  // the empty-result probe below adds one more
    for (size_t bin = 2; bin < b.histogram.size(); ++bin)
      combined += b.histogram[bin];
    CHECK_FALSE(q.delete_min(0).has_value());
  }
  // combining is schedule-dependent; surface it without failing on a
  // degenerate all-singletons run
  WARN_MESSAGE(combined > 0, "no multi-request coordinator batch observed in ",
               kRepeats, " repeats");
}

TEST_CASE("two emulated numa nodes elect independently and both get served") {
  for (int rep = 0; rep < 50; ++rep) {
    Pipq q(cfg_threads(2), synthetic_topology(2, 2));
    REQUIRE(q.topology().numa_nodes == 2);
    q.insert(0, 1, 11);
    q.insert(0, 2, 22);
    std::atomic<int> ready{0};
    std::vector<std::optional<HeapEntry>> got(2);
    std::vector<std::thread> ts;
    for (int t = 0; t < 2; ++t) {
      ts.emplace_back([&, t] {
        ready.fetch_add(1);
        while (ready.load() != 2) cpu_relax();
        got[static_cast<size_t>(t)] = q.delete_min(t);
      });
    }
    for (auto& th : ts) th.join();
    REQUIRE(got[0].has_value());
    REQUIRE(got[1].has_value());
    std::vector<Key> keys{got[0]->key, got[1]->key};
    std::sort(keys.begin(), keys.end());
    CHECK(keys == std::vector<Key>{1, 2});
    CHECK_FALSE(q.delete_min(1).has_value());
  }
}

TEST_CASE("quiescent audits hold through a scripted mixed workload") {
  Pipq q(cfg_threads(1, 2, 4), flat_topology(1));
  Pipq::Handle h = q.register_thread(0);
  std::mt19937_64 rng(11);
  std::multiset<Key> model;
  for (int i = 0; i < 2000; ++i) {
    if (model.empty() || rng() % 3 != 0) {
      Key k = 1 + rng() % 100;
      h.insert(k, 0);
      model.insert(k);
    } else {
      auto r = h.delete_min();
      REQUIRE(r.has_value());
      REQUIRE(r->key == *model.begin());
      model.erase(model.begin());
    }
    if (i % 257 == 0) check_quiescent(q);
  }
  check_quiescent(q);
  while (!model.empty()) {
    auto r = h.delete_min();
    REQUIRE(r.has_value());
    REQUIRE(r->key == *model.begin());
    model.erase(model.begin());
  }
  CHECK_FALSE(h.delete_min().has_value());
}

TEST_CASE("concurrent churn conserves the multiset and drains monotone") {
  constexpr int kThreads = 4;
  constexpr int kOps = 8000;
  Pipq q(cfg_threads(kThreads, 4, 16), flat_topology(kThreads));
  std::vector<PairVec> ins(kThreads), del(kThreads);
  std::atomic<int> ready{0};
  std::vector<std::thread> ts;
  for (int t = 0; t < kThreads; ++t) {
    ts.emplace_back([&, t] {
      Pipq::Handle h = q.register_thread(t);
      std::mt19937_64 rng(static_cast<std::uint64_t>(t) * 7919 + 13);
      std::uint64_t seq = 0;
      ready.fetch_add(1);
      while (ready.load() != kThreads) cpu_relax();
      for (int i = 0; i < kOps; ++i) {
        // insert-heavy first half, delete-heavy second half
        bool do_insert = (i < kOps / 2) ? (rng() % 4 != 0) : (rng() % 4 == 0);
        if (do_insert) {
          Key k = 1 + rng() % 512;
          Value v = (static_cast<Value>(t) << 32) | seq++;
          h.insert(k, v);
          ins[static_cast<size_t>(t)].emplace_back(k, v);
        } else {
          auto r = h.delete_min();
          if (r) del[static_cast<size_t>(t)].emplace_back(r->key, r->val);
        }
      }
    });
  }
  for (auto& th : ts) th.join();

  check_quiescent(q);

  // strict-min checkpoint: with everyone stopped, one delete-min must
  // return the smallest residual key
  PairVec residual = residual_pairs(q.debug_snapshot());
  if (!residual.empty()) {
    Key expect = std::min_element(residual.begin(), residual.end())->first;
    auto r = q.delete_min(0);
    REQUIRE(r.has_value());
    CHECK(r->key == expect);
    del[0].emplace_back(r->key, r->val);
  }

  // monotone single-threaded drain
  PairVec drained;
  Key last = 0;
  while (auto r = q.delete_min(0)) {
    CHECK(r->key >= last);
    last = r->key;
    drained.emplace_back(r->key, r->val);
  }

  PairVec inserted, removed;
  for (int t = 0; t < kThreads; ++t) {
    inserted.insert(inserted.end(), ins[static_cast<size_t>(t)].begin(),
                    ins[static_cast<size_t>(t)].end());
    removed.insert(removed.end(), del[static_cast<size_t>(t)].begin(),
                   del[static_cast<size_t>(t)].end());
  }
  removed.insert(removed.end(), drained.begin(), drained.end());
  std::sort(inserted.begin(), inserted.end());
  std::sort(removed.begin(), removed.end());
  CHECK(inserted.size() == removed.size());
  CHECK(inserted == removed);

  PathCounters paths = q.path_counters_total();
  CHECK(paths.total() == inserted.size());
  q.quiescent_reclaim();
}

TEST_CASE("pure-producer and pure-consumer threads settle to the oracle") {
  constexpr int kItems = 6000;
  Config c = cfg_threads(2, 2, 8);
  c.helping = HelpingSite::on_insert;
  Pipq q(c, flat_topology(2));
  std::vector<std::pair<Key, Value>> taken;
  std::atomic<bool> stop{false};
  std::thread consumer([&] {
    Pipq::Handle h = q.register_thread(1);
    while (!stop.load(std::memory_order_acquire)) {
      if (auto r = h.delete_min()) taken.emplace_back(r->key, r->val);
    }
    while (auto r = h.delete_min()) taken.emplace_back(r->key, r->val);
  });
  {
    Pipq::Handle h = q.register_thread(0);
    std::mt19937_64 rng(5);
    for (int i = 0; i < kItems; ++i)
      h.insert(1 + rng() % 64, static_cast<Value>(i));
    stop.store(true, std::memory_order_release);
  }
  consumer.join();
  CHECK(taken.size() == kItems);
  std::vector<Value> vals;
  for (auto& p : taken) vals.push_back(p.second);
  std::sort(vals.begin(), vals.end());
  for (int i = 0; i < kItems; ++i) CHECK(vals[static_cast<size_t>(i)] == static_cast<Value>(i));
  check_quiescent(q);
}
