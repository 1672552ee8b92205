#pragma once

// Workload generators and metric collection: a timed mixed workload with
// path tracking and sampled latency, a designated-role workload where
// every thread either inserts or deletes, and a two-phase fill/drain
// workload with conservation auditing.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pipq/pipq.hpp"

namespace pipq {

enum class WorkloadKind { mixed, designated, phased };

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::mixed;
  int insert_pct = 50;           // mixed: share of inserts, 0..100
  double delete_fraction = 0.5;  // designated: deleters ~= round(n * d)
  std::uint64_t insert_count = 0;  // phased
  std::uint64_t delete_count = 0;  // phased
  double duration_s = 5.0;  // per trial, mixed and designated
  double warmup_s = 1.0;    // untimed, once, mixed and designated
  int trials = 3;
  Key key_max = 1000000;  // keys uniform in [1, key_max]
  std::uint64_t seed = 1;
  int latency_every = 64;  // sample every Kth operation
};

// Deterministic per-(seed, trial, thread) operation stream. Fixed seeds
// reproduce the exact same decision and key sequences.
class OpStream {
 public:
  OpStream(std::uint64_t seed, int trial, ThreadId tid)
      : rng_(seed * 1000003 + static_cast<std::uint64_t>(trial) * 8191 +
             static_cast<std::uint64_t>(tid)) {}

  bool next_is_insert(int insert_pct) {
    return static_cast<int>(rng_() % 100) < insert_pct;
  }
  Key next_key(Key key_max) { return 1 + rng_() % key_max; }

 private:
  std::mt19937_64 rng_;
};

// How many of n threads delete under fraction d: at least one, at most
// n-1 so both roles stay populated.
int designated_deleters(int nthreads, double d);

struct LatencySummary {
  double mean_us = 0;
  double p50_us = 0;
  double p99_us = 0;
  std::uint64_t samples = 0;
};

struct TrialResult {
  double seconds = 0;
  std::uint64_t ops = 0;
  double mops() const { return seconds > 0 ? ops / seconds / 1e6 : 0; }
};

struct MetricsReport {
  std::string workload;
  int threads = 0;
  std::uint64_t seed = 0;
  std::vector<TrialResult> trials;
  double insert_mops = 0;  // designated split
  double delete_mops = 0;
  LatencySummary insert_latency;
  LatencySummary delete_latency;
  double frac_fast = 0;  // insert path distribution over the timed window
  double frac_slower = 0;
  double frac_slowest = 0;
  double batch_mean = 0;  // served announce slots per serving stint
  std::uint64_t empties = 0;
  double phase1_mops = 0;
  double phase2_mops = 0;
  bool conservation_ok = true;

  double mops_mean() const {
    if (trials.empty()) return 0;
    double s = 0;
    for (const TrialResult& t : trials) s += t.mops();
    return s / static_cast<double>(trials.size());
  }
};

std::string metrics_csv_header();
std::string metrics_csv_rows(const MetricsReport& r);  // one line per trial
std::string metrics_json(const MetricsReport& r);

// Timed insert/delete mix per spec.insert_pct. Warmup runs once,
// untimed; trials then share the same queue, so later trials start from
// the steady state the earlier ones reached.
MetricsReport run_mixed(Pipq& q, const WorkloadSpec& spec, int nthreads);

// Fixed roles: the last designated_deleters(n, d) threads delete, the
// rest insert. Requires nthreads >= 2 and a queue built with on-insert
// helping. Conservation is checked by order-insensitive checksums plus
// the structural audit (a full multiset ledger would dwarf the run).
MetricsReport run_designated(Pipq& q, const WorkloadSpec& spec, int nthreads);

// Phase 1 inserts insert_count keys split across threads, phase 2
// deletes delete_count; requires delete_count <= insert_count, a fresh
// queue, and finishes with a full audit plus a monotone residual drain.
MetricsReport run_phased(Pipq& q, const WorkloadSpec& spec, int nthreads);

}  // namespace pipq
