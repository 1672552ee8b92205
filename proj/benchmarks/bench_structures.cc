// Microbenchmarks for the building blocks and the assembled queue:
// worker heap alone, leader list alone, the full queue against the
// coarse-locked baseline across thread counts, and the shortest-path
// solver. Throughput is reported through items_per_second; threaded
// cases use real time so the rate is aggregate.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "pipq/bench.hpp"
#include "pipq/leader_list.hpp"
#include "pipq/oracle.hpp"
#include "pipq/pipq.hpp"
#include "pipq/sssp.hpp"
#include "pipq/topology.hpp"
#include "pipq/worker_heap.hpp"

using namespace pipq;

namespace {

std::vector<Key> random_keys(std::size_t n, Key key_max, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Key> keys(n);
  for (Key& k : keys) k = 1 + rng() % key_max;
  return keys;
}

void BM_WorkerHeapFillDrain(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<Key> keys = random_keys(n, 1000000, 7);
  for (auto _ : state) {
    WorkerHeap h(1024);
    for (std::size_t i = 0; i < n; ++i) h.insert(keys[i], i);
    while (h.delete_min()) {
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * n));
}
BENCHMARK(BM_WorkerHeapFillDrain)->Arg(1024)->Arg(65536)->Arg(1 << 20);

// One insert plus one delete-min per iteration at a held size, so the
// cost of the segment chain shows up at depth.
void BM_WorkerHeapSteady(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  WorkerHeap h(1024);
  std::mt19937_64 rng(7);
  for (std::size_t i = 0; i < n; ++i) h.insert(1 + rng() % 1000000, i);
  std::vector<Key> keys = random_keys(8192, 1000000, 8);
  std::size_t i = 0;
  for (auto _ : state) {
    h.insert(keys[i & 8191], i);
    benchmark::DoNotOptimize(h.delete_min());
    ++i;
  }
  state.SetItemsProcessed(state.iterations() * 2);
}
BENCHMARK(BM_WorkerHeapSteady)->Arg(1 << 10)->Arg(1 << 20);

// The list is held small in production (a few dozen leaders per
// thread); larger sizes here expose the linear-search growth.
void BM_LeaderListFillDrain(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<Key> keys = random_keys(static_cast<std::size_t>(n), 100000, 3);
  for (auto _ : state) {
    LeaderList list(1);
    LargestHandle largest{nullptr};
    for (int i = 0; i < n; ++i)
      list.insert(keys[static_cast<std::size_t>(i)], i, 0, largest, 0);
    while (list.delete_min(0)) {
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * n));
}
BENCHMARK(BM_LeaderListFillDrain)->Arg(16)->Arg(128)->Arg(1024);

// Cost of evicting the owner's largest node, the displacement step of
// a bounded-credit insert.
void BM_LeaderListDisplaceLargest(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<Key> keys = random_keys(static_cast<std::size_t>(n), 100000, 4);
  for (auto _ : state) {
    LeaderList list(1);
    LargestHandle largest{nullptr};
    for (int i = 0; i < n; ++i)
      list.insert(keys[static_cast<std::size_t>(i)], i, 0, largest, 0);
    for (int i = 0; i < n; ++i)
      benchmark::DoNotOptimize(list.delete_maxp(largest, 0));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_LeaderListDisplaceLargest)->Arg(16)->Arg(128);

Pipq* g_q = nullptr;

// range(0) is the insert percentage. Thread 0 builds the queue and
// prefills it before the iteration barrier; every thread then runs the
// mix with its own deterministic stream.
void BM_PipqMixed(benchmark::State& state) {
  const int pct = static_cast<int>(state.range(0));
  if (state.thread_index() == 0) {
    Config cfg;
    cfg.threads = state.threads();
    g_q = new Pipq(cfg, detect_topology(state.threads()));
    std::mt19937_64 rng(12);
    for (std::uint64_t i = 0; i < 100000; ++i)
      g_q->insert(0, 1 + rng() % 1000000, i);
  }
  ThreadId tid = state.thread_index();
  OpStream os(99, 0, tid);
  std::uint64_t i = 0;
  for (auto _ : state) {
    if (os.next_is_insert(pct)) {
      g_q->insert(tid, os.next_key(1000000), i++);
    } else {
      benchmark::DoNotOptimize(g_q->delete_min(tid));
    }
  }
  state.SetItemsProcessed(state.iterations());
  if (state.thread_index() == 0) {
    delete g_q;
    g_q = nullptr;
  }
}
BENCHMARK(BM_PipqMixed)
    ->Arg(50)
    ->Arg(95)
    ->Arg(100)
    ->ThreadRange(1, 8)
    ->UseRealTime();

CoarseLockPq* g_coarse = nullptr;

void BM_CoarseLockMixed(benchmark::State& state) {
  const int pct = static_cast<int>(state.range(0));
  if (state.thread_index() == 0) {
    g_coarse = new CoarseLockPq(state.threads());
    std::mt19937_64 rng(12);
    for (std::uint64_t i = 0; i < 100000; ++i)
      g_coarse->insert(0, 1 + rng() % 1000000, i);
  }
  ThreadId tid = state.thread_index();
  OpStream os(99, 0, tid);
  std::uint64_t i = 0;
  for (auto _ : state) {
    if (os.next_is_insert(pct)) {
      g_coarse->insert(tid, os.next_key(1000000), i++);
    } else {
      benchmark::DoNotOptimize(g_coarse->delete_min(tid));
    }
  }
  state.SetItemsProcessed(state.iterations());
  if (state.thread_index() == 0) {
    delete g_coarse;
    g_coarse = nullptr;
  }
}
BENCHMARK(BM_CoarseLockMixed)
    ->Arg(50)
    ->Arg(95)
    ->Arg(100)
    ->ThreadRange(1, 8)
    ->UseRealTime();

const Graph& bench_graph() {
  static Graph g = random_graph(20000, 120000, 17);
  return g;
}

void BM_SsspSequential(benchmark::State& state) {
  const Graph& g = bench_graph();
  for (auto _ : state) {
    benchmark::DoNotOptimize(sssp_sequential(g, 0));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.n));
}
BENCHMARK(BM_SsspSequential)->Unit(benchmark::kMillisecond);

// range(0) is the worker count; workers are spawned inside the solver.
void BM_SsspParallel(benchmark::State& state) {
  const int nt = static_cast<int>(state.range(0));
  const Graph& g = bench_graph();
  Config cfg;
  cfg.threads = nt;
  for (auto _ : state) {
    Pipq q(cfg, synthetic_topology(nt, 1));
    SsspResult r = sssp_parallel(g, 0, nt, q);
    benchmark::DoNotOptimize(r.processed);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.n));
}
BENCHMARK(BM_SsspParallel)
    ->Arg(1)
    ->Arg(2)
    ->Arg(4)
    ->Arg(8)
    ->UseRealTime()
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
