#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "pipq/worker_heap.hpp"

using namespace pipq;

namespace {

// Reference behavior: the heap drained repeatedly must emit the sorted
// multiset that went in, payloads attached to their keys.
std::vector<HeapEntry> drain(WorkerHeap& h) {
  std::vector<HeapEntry> out;
  while (auto e = h.delete_min()) out.push_back(*e);
  return out;
}

}  // namespace

TEST_CASE("empty heap") {
  WorkerHeap h(8);
  CHECK(!h.delete_min().has_value());
  CHECK(!h.peek_min().has_value());
  CHECK(h.size() == 0);
  h.delete_min();  // delete on empty never mutates
  CHECK(h.size() == 0);
}

TEST_CASE("single element") {
  WorkerHeap h(8);
  h.insert(5, 0xa);
  CHECK(h.size() == 1);
  CHECK(*h.peek_min() == 5);
  auto e = h.delete_min();
  REQUIRE(e.has_value());
  CHECK(e->key == 5);
  CHECK(e->val == 0xa);
  CHECK(h.size() == 0);
}

TEST_CASE("sift up") {
  WorkerHeap h(8);
  h.insert(5, 1);
  h.insert(3, 2);
  CHECK(*h.peek_min() == 3);
  CHECK(h.heap_order_ok());
}

TEST_CASE("single element (9,x) returns and empties") {
  WorkerHeap h(4);
  h.insert(9, 77);
  auto e = h.delete_min();
  REQUIRE(e);
  CHECK(e->key == 9);
  CHECK(e->val == 77);
  CHECK(!h.delete_min());
}

TEST_CASE("duplicates preserved") {
  WorkerHeap h(8);
  for (Key k : {4, 1, 7, 1}) h.insert(k, k * 10);
  auto out = drain(h);
  REQUIRE(out.size() == 4);
  CHECK(out[0].key == 1);
  CHECK(out[1].key == 1);
  CHECK(out[2].key == 4);
  CHECK(out[3].key == 7);
  CHECK(out[0].val == 10);
  CHECK(out[1].val == 10);
}

TEST_CASE("sift-down prefers right child on ties") {
  // Root removal with equal children must promote the right child.
  WorkerHeap h(8);
  h.insert(1, 0);
  h.insert(2, 111);  // left child
  h.insert(2, 222);  // right child
  auto e = h.delete_min();
  REQUIRE(e);
  CHECK(e->key == 1);
  // After removing the root, (2,222) from the right slot moved to the root.
  CHECK(h.entry_at(0).val == 222);
  CHECK(h.heap_order_ok());
}

TEST_CASE("1000 random keys drain sorted") {
  std::mt19937_64 rng(42);
  for (int round = 0; round < 5; ++round) {
    WorkerHeap h(16);
    std::vector<HeapEntry> ref;
    for (int i = 0; i < 1000; ++i) {
      Key k = rng() % 500 + 1;
      h.insert(k, i);
      ref.push_back({k, static_cast<Value>(i)});
      CHECK(h.heap_order_ok());
    }
    std::stable_sort(ref.begin(), ref.end(),
                     [](auto& a, auto& b) { return a.key < b.key; });
    auto out = drain(h);
    REQUIRE(out.size() == ref.size());
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i].key == ref[i].key);
    // Payload multiset must survive, not just keys.
    auto by_pair = [](auto& a, auto& b) {
      return a.key != b.key ? a.key < b.key : a.val < b.val;
    };
    std::sort(out.begin(), out.end(), by_pair);
    std::sort(ref.begin(), ref.end(), by_pair);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i].key == ref[i].key);
      CHECK(out[i].val == ref[i].val);
    }
  }
}

TEST_CASE("mixed op sequence tracks oracle") {
  std::mt19937_64 rng(7);
  WorkerHeap h(8);
  std::multiset<std::pair<Key, Value>> oracle;
  for (int i = 0; i < 20000; ++i) {
    if (oracle.empty() || rng() % 100 < 60) {
      Key k = rng() % 64 + 1;
      Value v = rng();
      h.insert(k, v);
      oracle.insert({k, v});
    } else {
      auto e = h.delete_min();
      REQUIRE(e.has_value());
      CHECK(e->key == oracle.begin()->first);
      // Equal keys are interchangeable; remove the exact pair we got.
      auto it = oracle.find({e->key, e->val});
      REQUIRE(it != oracle.end());
      oracle.erase(it);
    }
    CHECK(h.size() == oracle.size());
  }
  CHECK(h.heap_order_ok());
}

TEST_CASE("segment chaining growth") {
  WorkerHeap h(4);
  CHECK(h.segment_count() == 1);
  std::vector<Key> keys;
  for (int i = 0; i < 100; ++i) {
    Key k = static_cast<Key>(100 - i);
    h.insert(k, i);
    keys.push_back(k);
    CHECK(h.heap_order_ok());
  }
  // 4 + 8 + 16 + 32 + 64 = 124 capacity over 5 segments.
  CHECK(h.segment_count() == 5);
  std::sort(keys.begin(), keys.end());
  auto out = drain(h);
  REQUIRE(out.size() == keys.size());
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i].key == keys[i]);
}

TEST_CASE("lock parity encoding") {
  WorkerHeap h(8);
  CHECK(h.lk.load() == 0);
  CHECK(h.lk.try_lock());
  CHECK(h.lk.load() == 1);
  CHECK(SeqLock::is_locked(h.lk.load()));
  CHECK(!h.lk.try_lock());  // second contender fails while odd
  h.lk.unlock();
  CHECK(h.lk.load() == 2);
  CHECK(!SeqLock::is_locked(h.lk.load()));
  // Generations strictly increase: 6 -> 7 -> 8 pattern over repeated cycles.
  for (int i = 0; i < 3; ++i) {
    std::uint64_t before = h.lk.load();
    h.lk.lock();
    CHECK(h.lk.load() == before + 1);
    h.lk.unlock();
    CHECK(h.lk.load() == before + 2);
  }
}

TEST_CASE("try_lock_from stale value fails") {
  SeqLock lk;
  std::uint64_t v = lk.load();
  lk.lock();
  lk.unlock();
  CHECK(!lk.try_lock_from(v));  // counter moved to v+2
  CHECK(lk.try_lock_from(v + 2));
  lk.unlock();
}
