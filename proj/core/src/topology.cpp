#include "pipq/topology.hpp"

#include <pthread.h>
#include <sched.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pipq {

namespace {

// "0-3,8,10-11" -> {0,1,2,3,8,10,11}
std::vector<int> parse_cpulist(const std::string& text) {
  std::vector<int> cpus;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    size_t dash = part.find('-');
    if (dash == std::string::npos) {
      cpus.push_back(std::stoi(part));
    } else {
      int lo = std::stoi(part.substr(0, dash));
      int hi = std::stoi(part.substr(dash + 1));
      for (int c = lo; c <= hi; ++c) cpus.push_back(c);
    }
  }
  return cpus;
}

std::vector<std::vector<int>> read_sys_nodes() {
  std::vector<std::vector<int>> nodes;
  namespace fs = std::filesystem;
  const fs::path base("/sys/devices/system/node");
  std::error_code ec;
  for (int i = 0;; ++i) {
    fs::path dir = base / ("node" + std::to_string(i));
    if (!fs::exists(dir, ec) || ec) break;
    std::ifstream f(dir / "cpulist");
    if (!f) break;
    std::string line;
    std::getline(f, line);
    std::vector<int> cpus = parse_cpulist(line);
    if (cpus.empty()) break;
    nodes.push_back(std::move(cpus));
  }
  return nodes;
}

void assign_blocks(TopologyMap& map, int threads, int nodes) {
  int per_node = (threads + nodes - 1) / nodes;
  map.node_of_thread.resize(static_cast<size_t>(threads));
  map.threads_per_node.assign(static_cast<size_t>(nodes), 0);
  for (int t = 0; t < threads; ++t) {
    int n = (t / per_node) % nodes;
    map.node_of_thread[static_cast<size_t>(t)] = n;
    map.threads_per_node[static_cast<size_t>(n)] += 1;
  }
}

}  // namespace

TopologyMap detect_topology(int threads) {
  TopologyMap map;
  map.pinning = PinMode::node_by_node;
  map.cpus_of_node = read_sys_nodes();
  if (map.cpus_of_node.empty()) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    std::vector<int> all;
    for (int c = 0; c < hw; ++c) all.push_back(c);
    map.cpus_of_node.push_back(std::move(all));
  }
  map.numa_nodes = static_cast<int>(map.cpus_of_node.size());

  // node-by-node: thread t lands on the node holding the t-th cpu in
  // node order, wrapping once every cpu is taken
  std::vector<int> node_of_slot;
  for (int n = 0; n < map.numa_nodes; ++n) {
    for (size_t i = 0; i < map.cpus_of_node[static_cast<size_t>(n)].size(); ++i) {
      node_of_slot.push_back(n);
    }
  }
  map.node_of_thread.resize(static_cast<size_t>(threads));
  map.threads_per_node.assign(static_cast<size_t>(map.numa_nodes), 0);
  for (int t = 0; t < threads; ++t) {
    int n = node_of_slot[static_cast<size_t>(t) % node_of_slot.size()];
    map.node_of_thread[static_cast<size_t>(t)] = n;
    map.threads_per_node[static_cast<size_t>(n)] += 1;
  }
  return map;
}

TopologyMap synthetic_topology(int threads, int nodes) {
  if (nodes < 1) throw std::invalid_argument("synthetic topology needs >= 1 node");
  if (nodes > threads) nodes = threads;  // no empty nodes
  TopologyMap map;
  map.pinning = PinMode::synthetic;
  map.numa_nodes = nodes;
  assign_blocks(map, threads, nodes);
  return map;
}

TopologyMap flat_topology(int threads) {
  TopologyMap map;
  map.pinning = PinMode::none;
  map.numa_nodes = 1;
  assign_blocks(map, threads, 1);
  return map;
}

TopologyMap topology_from_mode(const std::string& mode, int threads) {
  if (mode == "auto") return detect_topology(threads);
  if (mode == "off") return flat_topology(threads);
  const std::string prefix = "synthetic:";
  if (mode.rfind(prefix, 0) == 0) {
    int n = 0;
    try {
      n = std::stoi(mode.substr(prefix.size()));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad synthetic node count in '" + mode + "'");
    }
    return synthetic_topology(threads, n);
  }
  throw std::invalid_argument("unknown topology mode '" + mode +
                              "' (expected auto, off or synthetic:<n>)");
}

bool pin_current_thread(const TopologyMap& map, ThreadId tid) {
  if (map.pinning != PinMode::node_by_node) return true;  // nothing to do
  std::vector<int> slots;
  for (const auto& cpus : map.cpus_of_node) {
    slots.insert(slots.end(), cpus.begin(), cpus.end());
  }
  if (slots.empty()) return true;
  int cpu = slots[static_cast<size_t>(tid) % slots.size()];
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(cpu, &set);
  int rc = pthread_setaffinity_np(pthread_self(), sizeof(set), &set);
  if (rc != 0) {
    std::fprintf(stderr, "warning: cpu pinning unavailable (tid %d, cpu %d)\n", tid,
                 cpu);
    return false;
  }
  return true;
}

}  // namespace pipq
