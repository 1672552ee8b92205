#pragma once

// NUMA discovery and thread placement. Threads are assigned to nodes in
// contiguous blocks, filling node 0 first, which mirrors a node-by-node
// pinning policy. A synthetic mode emulates multi-node layouts on flat
// machines so the two-tier coordinator election stays testable.

#include <string>
#include <vector>

#include "pipq/config.hpp"

namespace pipq {

enum class PinMode { node_by_node, none, synthetic };

struct TopologyMap {
  int numa_nodes = 1;
  PinMode pinning = PinMode::none;
  std::vector<int> node_of_thread;             // indexed by tid
  std::vector<int> threads_per_node;           // indexed by node
  std::vector<std::vector<int>> cpus_of_node;  // real cpu ids, auto mode only

  int node_of(ThreadId tid) const { return node_of_thread[static_cast<size_t>(tid)]; }
  int threads() const { return static_cast<int>(node_of_thread.size()); }
};

// Real machine layout from /sys, degrading to one node holding every cpu.
TopologyMap detect_topology(int threads);

// Emulated layout: `nodes` dense nodes, threads in contiguous blocks of
// ceil(threads/nodes). Never touches OS affinity.
TopologyMap synthetic_topology(int threads, int nodes);

// Single node, no pinning.
TopologyMap flat_topology(int threads);

// Parses "auto", "off" or "synthetic:<n>". Throws std::invalid_argument.
TopologyMap topology_from_mode(const std::string& mode, int threads);

// Best-effort affinity for the calling thread; true when applied or when
// the map's mode never pins.
bool pin_current_thread(const TopologyMap& map, ThreadId tid);

}  // namespace pipq
