#pragma once

// Single-source shortest paths on top of the queue: edge-list ingestion
// with dense id remapping, a parallel Dijkstra that skips stale entries,
// and a sequential reference for exact validation.

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pipq/pipq.hpp"

namespace pipq {

inline constexpr std::uint64_t kDistInf = ~std::uint64_t{0};

struct GraphEdge {
  std::uint32_t to;
  std::uint32_t weight;  // always >= 1
};

// Compressed adjacency: the out-edges of node u occupy
// edges[offsets[u] .. offsets[u+1]). Node ids from the input file are
// remapped to 0..n-1 in ascending id order; orig_id maps back.
struct Graph {
  std::uint32_t n = 0;
  std::vector<std::uint64_t> offsets;  // n + 1 entries
  std::vector<GraphEdge> edges;
  std::vector<std::uint64_t> orig_id;  // dense index -> id in the input

  std::uint64_t edge_count() const { return edges.size(); }
  // Dense index for an input-file id, if the id occurred at all.
  std::optional<std::uint32_t> find_node(std::uint64_t original) const;
};

// Parses whitespace-separated "u v [w]" lines; '#' starts a comment line
// and blank lines are skipped. Explicit weights must be >= 1. Lines
// without a weight get 1, or a uniform draw from [1, 255] seeded by
// random_weight_seed when that is set. With undirected=true every edge
// is also added reversed with the same weight. Malformed input throws
// std::runtime_error naming the offending line; so does an input with
// no edges. The label prefixes error messages (use the file path).
Graph parse_edge_list(const std::string& text, const std::string& label,
                      bool undirected = false,
                      std::optional<std::uint64_t> random_weight_seed = std::nullopt);

// parse_edge_list over the contents of the file at path.
Graph load_edge_list(const std::string& path, bool undirected = false,
                     std::optional<std::uint64_t> random_weight_seed = std::nullopt);

// One "u v w" line per edge in dense ids. Parsing the result back as a
// directed list reproduces any parsed graph exactly; nodes with no
// incident edges have no edge-list representation.
std::string format_edge_list(const Graph& g);

// Uniform random digraph: m edges with independently chosen endpoints,
// weights uniform in [1, max_weight]. Same arguments, same graph.
Graph random_graph(std::uint32_t n, std::uint64_t m, std::uint64_t seed,
                   std::uint32_t max_weight = 255);

// Distance estimates shared by the workers. Entries only ever decrease;
// relax() is an atomic fetch-min.
class DistTable {
 public:
  DistTable(std::uint32_t n, std::uint32_t source)
      : d_(std::make_unique<std::atomic<std::uint64_t>[]>(n)), n_(n) {
    for (std::uint32_t i = 0; i < n; ++i)
      d_[i].store(kDistInf, std::memory_order_relaxed);
    d_[source].store(0, std::memory_order_relaxed);
  }

  std::uint64_t load(std::uint32_t i) const {
    return d_[i].load(std::memory_order_relaxed);
  }

  // Lowers entry i to cand if cand is smaller; true iff it improved.
  bool relax(std::uint32_t i, std::uint64_t cand) {
    std::uint64_t cur = d_[i].load(std::memory_order_relaxed);
    while (cand < cur) {
      if (d_[i].compare_exchange_weak(cur, cand, std::memory_order_relaxed))
        return true;
    }
    return false;
  }

  std::uint32_t size() const { return n_; }

  std::vector<std::uint64_t> values() const {
    std::vector<std::uint64_t> out(n_);
    for (std::uint32_t i = 0; i < n_; ++i) out[i] = load(i);
    return out;
  }

 private:
  std::unique_ptr<std::atomic<std::uint64_t>[]> d_;
  std::uint32_t n_;
};

struct SsspResult {
  std::vector<std::uint64_t> dist;  // kDistInf where unreachable
  std::uint64_t processed = 0;      // non-empty delete-mins across all threads
  std::uint64_t stale = 0;          // of those, entries beaten by a better path
  double seconds = 0;
};

// Parallel Dijkstra: workers pop (distance+1, node), skip the entry if
// the table already beats it, otherwise relax every out-edge and insert
// the improved neighbors. Runs until the queue is empty and no popped
// entry is still being expanded (atomic in-flight count). Uses queue
// tids 0..nthreads-1, so q must be configured for at least that many
// threads and must be otherwise idle.
SsspResult sssp_parallel(const Graph& g, std::uint32_t source, int nthreads,
                         Pipq& q);

// Textbook sequential Dijkstra, the oracle for the parallel runs.
std::vector<std::uint64_t> sssp_sequential(const Graph& g, std::uint32_t source);

// Sum of the finite entries, the cross-run comparison checksum.
std::uint64_t dist_checksum(const std::vector<std::uint64_t>& dist);

// How many entries are finite (reached).
std::uint64_t finite_count(const std::vector<std::uint64_t>& dist);

}  // namespace pipq
