#include "pipq/sssp.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <charconv>
#include <chrono>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>

#include "pipq/spin.hpp"

namespace pipq {
namespace {

struct RawEdge {
  std::uint64_t u, v;
  std::uint32_t w;
};

struct DenseEdge {
  std::uint32_t u, v, w;
};

[[noreturn]] void parse_fail(const std::string& label, std::uint64_t line,
                             const char* msg) {
  throw std::runtime_error(label + ":" + std::to_string(line) + ": " + msg);
}

bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

// Counting sort by source node, stable, so edge order within a node
// matches input order.
Graph assemble(std::uint32_t n, const std::vector<DenseEdge>& es,
               std::vector<std::uint64_t> orig) {
  Graph g;
  g.n = n;
  g.orig_id = std::move(orig);
  g.offsets.assign(static_cast<size_t>(n) + 1, 0);
  for (const DenseEdge& e : es) ++g.offsets[e.u + 1];
  std::partial_sum(g.offsets.begin(), g.offsets.end(), g.offsets.begin());
  g.edges.resize(es.size());
  std::vector<std::uint64_t> next(g.offsets.begin(), g.offsets.end() - 1);
  for (const DenseEdge& e : es) g.edges[next[e.u]++] = GraphEdge{e.v, e.w};
  return g;
}

}  // namespace

std::optional<std::uint32_t> Graph::find_node(std::uint64_t original) const {
  auto it = std::lower_bound(orig_id.begin(), orig_id.end(), original);
  if (it == orig_id.end() || *it != original) return std::nullopt;
  return static_cast<std::uint32_t>(it - orig_id.begin());
}

Graph parse_edge_list(const std::string& text, const std::string& label,
                      bool undirected,
                      std::optional<std::uint64_t> random_weight_seed) {
  std::mt19937_64 wrng(random_weight_seed.value_or(0));
  std::vector<RawEdge> raw;
  std::uint64_t lineno = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const char* p = text.data() + pos;
    const char* end = text.data() + eol;
    pos = eol + 1;
    ++lineno;
    while (p < end && is_ws(*p)) ++p;
    if (p == end || *p == '#') continue;
    std::uint64_t tok[3];
    int ntok = 0;
    while (p < end) {
      if (ntok == 3) parse_fail(label, lineno, "expected 'u v [w]'");
      auto [np, ec] = std::from_chars(p, end, tok[ntok]);
      if (ec != std::errc{} || (np < end && !is_ws(*np)))
        parse_fail(label, lineno, "expected 'u v [w]'");
      ++ntok;
      p = np;
      while (p < end && is_ws(*p)) ++p;
    }
    if (ntok < 2) parse_fail(label, lineno, "expected 'u v [w]'");
    std::uint32_t w;
    if (ntok == 3) {
      if (tok[2] < 1) parse_fail(label, lineno, "weight must be >= 1");
      if (tok[2] > std::numeric_limits<std::uint32_t>::max())
        parse_fail(label, lineno, "weight too large");
      w = static_cast<std::uint32_t>(tok[2]);
    } else if (random_weight_seed) {
      w = static_cast<std::uint32_t>(1 + wrng() % 255);
    } else {
      w = 1;
    }
    raw.push_back(RawEdge{tok[0], tok[1], w});
  }
  if (raw.empty()) throw std::runtime_error(label + ": no edges");

  std::vector<std::uint64_t> ids;
  ids.reserve(raw.size() * 2);
  for (const RawEdge& e : raw) {
    ids.push_back(e.u);
    ids.push_back(e.v);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() > std::numeric_limits<std::uint32_t>::max())
    throw std::runtime_error(label + ": too many nodes");
  auto n = static_cast<std::uint32_t>(ids.size());
  auto dense = [&ids](std::uint64_t id) {
    return static_cast<std::uint32_t>(
        std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };

  std::vector<DenseEdge> es;
  es.reserve(raw.size() * (undirected ? 2 : 1));
  for (const RawEdge& e : raw) {
    std::uint32_t du = dense(e.u), dv = dense(e.v);
    es.push_back(DenseEdge{du, dv, e.w});
    if (undirected) es.push_back(DenseEdge{dv, du, e.w});
  }
  return assemble(n, es, std::move(ids));
}

Graph load_edge_list(const std::string& path, bool undirected,
                     std::optional<std::uint64_t> random_weight_seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_edge_list(text, path, undirected, random_weight_seed);
}

std::string format_edge_list(const Graph& g) {
  std::string out;
  out.reserve(g.edges.size() * 8);
  char buf[64];
  for (std::uint32_t u = 0; u < g.n; ++u) {
    for (std::uint64_t i = g.offsets[u]; i < g.offsets[u + 1]; ++i) {
      const GraphEdge& e = g.edges[i];
      int len = std::snprintf(buf, sizeof buf, "%u %u %u\n", u, e.to, e.weight);
      out.append(buf, static_cast<size_t>(len));
    }
  }
  return out;
}

Graph random_graph(std::uint32_t n, std::uint64_t m, std::uint64_t seed,
                   std::uint32_t max_weight) {
  PIPQ_CHECK(n >= 1, "graph needs at least one node");
  PIPQ_CHECK(max_weight >= 1, "max_weight must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<DenseEdge> es;
  es.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    auto u = static_cast<std::uint32_t>(rng() % n);
    auto v = static_cast<std::uint32_t>(rng() % n);
    auto w = static_cast<std::uint32_t>(1 + rng() % max_weight);
    es.push_back(DenseEdge{u, v, w});
  }
  std::vector<std::uint64_t> orig(n);
  std::iota(orig.begin(), orig.end(), 0);
  return assemble(n, es, std::move(orig));
}

std::vector<std::uint64_t> sssp_sequential(const Graph& g,
                                           std::uint32_t source) {
  PIPQ_CHECK(source < g.n, "sssp source out of range");
  std::vector<std::uint64_t> dist(g.n, kDistInf);
  dist[source] = 0;
  using Item = std::pair<std::uint64_t, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  pq.emplace(0, source);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (std::uint64_t i = g.offsets[u]; i < g.offsets[u + 1]; ++i) {
      const GraphEdge& e = g.edges[i];
      std::uint64_t nd = d + e.weight;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        pq.emplace(nd, e.to);
      }
    }
  }
  return dist;
}

SsspResult sssp_parallel(const Graph& g, std::uint32_t source, int nthreads,
                         Pipq& q) {
  PIPQ_CHECK(source < g.n, "sssp source out of range");
  PIPQ_CHECK(nthreads >= 1 && nthreads <= q.threads(),
             "sssp thread count exceeds queue config");
  DistTable dist(g.n, source);

  // Counts entries inserted but not yet fully expanded. Incremented
  // before each insert and decremented only after the expansion that a
  // pop triggers finishes, so 0 means the queue is empty and nobody is
  // about to refill it. Queue keys are distance+1: key 0 is reserved.
  std::atomic<std::uint64_t> in_flight{1};
  q.insert(0, 1, source);

  std::vector<std::uint64_t> processed(static_cast<size_t>(nthreads), 0);
  std::vector<std::uint64_t> stale(static_cast<size_t>(nthreads), 0);
  std::barrier<> gate(nthreads + 1);
  std::vector<std::thread> ts;
  ts.reserve(static_cast<size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t) {
    ts.emplace_back([&, t] {
      std::uint64_t nproc = 0, nstale = 0;
      gate.arrive_and_wait();
      Spinner sp;
      while (true) {
        auto e = q.delete_min(t);
        if (!e) {
          if (in_flight.load(std::memory_order_acquire) == 0) break;
          sp.spin();
          continue;
        }
        sp = Spinner{};
        ++nproc;
        std::uint64_t d = e->key - 1;
        auto node = static_cast<std::uint32_t>(e->val);
        if (d > dist.load(node)) {
          ++nstale;
        } else {
          for (std::uint64_t i = g.offsets[node]; i < g.offsets[node + 1];
               ++i) {
            const GraphEdge& ed = g.edges[i];
            std::uint64_t nd = d + ed.weight;
            if (dist.relax(ed.to, nd)) {
              in_flight.fetch_add(1, std::memory_order_relaxed);
              q.insert(t, nd + 1, ed.to);
            }
          }
        }
        in_flight.fetch_sub(1, std::memory_order_acq_rel);
      }
      processed[static_cast<size_t>(t)] = nproc;
      stale[static_cast<size_t>(t)] = nstale;
    });
  }
  gate.arrive_and_wait();
  auto t0 = std::chrono::steady_clock::now();
  for (auto& th : ts) th.join();
  auto t1 = std::chrono::steady_clock::now();

  SsspResult res;
  res.dist = dist.values();
  for (int t = 0; t < nthreads; ++t) {
    res.processed += processed[static_cast<size_t>(t)];
    res.stale += stale[static_cast<size_t>(t)];
  }
  res.seconds = std::chrono::duration<double>(t1 - t0).count();
  return res;
}

std::uint64_t dist_checksum(const std::vector<std::uint64_t>& dist) {
  std::uint64_t sum = 0;
  for (std::uint64_t d : dist)
    if (d != kDistInf) sum += d;
  return sum;
}

std::uint64_t finite_count(const std::vector<std::uint64_t>& dist) {
  std::uint64_t c = 0;
  for (std::uint64_t d : dist)
    if (d != kDistInf) ++c;
  return c;
}

}  // namespace pipq
