#include "pipq/bench.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pipq/audit.hpp"
#include "pipq/topology.hpp"

namespace pipq {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

// Order-insensitive multiset fingerprint; the xor of mixed pairs makes
// insert-side and delete-side fingerprints comparable piecewise.
struct PairChecksum {
  std::uint64_t count = 0;
  std::uint64_t key_sum = 0;
  std::uint64_t mix = 0;

  void add(Key k, Value v) {
    count += 1;
    key_sum += k;
    std::uint64_t h = (k + 0x9e3779b97f4a7c15ULL) * 0xbf58476d1ce4e5b9ULL;
    h ^= (v + 0x94d049bb133111ebULL) * 0xff51afd7ed558ccdULL;
    mix ^= h ^ (h >> 29);
  }
  PairChecksum& operator+=(const PairChecksum& o) {
    count += o.count;
    key_sum += o.key_sum;
    mix ^= o.mix;
    return *this;
  }
};

struct LatencyShard {
  std::vector<double> ins_us;
  std::vector<double> del_us;
};

LatencySummary summarize(std::vector<double> v) {
  LatencySummary s;
  s.samples = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double sum = 0;
  for (double x : v) sum += x;
  s.mean_us = sum / static_cast<double>(v.size());
  s.p50_us = v[v.size() / 2];
  s.p99_us = v[std::min(v.size() - 1, v.size() * 99 / 100)];
  return s;
}

LatencySummary merge_summarize(const std::vector<LatencyShard>& shards,
                               bool inserts) {
  std::vector<double> all;
  for (const LatencyShard& s : shards) {
    const std::vector<double>& src = inserts ? s.ins_us : s.del_us;
    all.insert(all.end(), src.begin(), src.end());
  }
  return summarize(std::move(all));
}

struct BatchWindow {
  std::uint64_t served = 0;
  std::uint64_t stints = 0;
};

BatchWindow batch_window(const BatchStats& b) {
  return {b.total_served, b.stints_served};
}

double batch_mean_delta(BatchWindow before, const BatchStats& after) {
  std::uint64_t served = after.total_served - before.served;
  std::uint64_t stints = after.stints_served - before.stints;
  return stints == 0 ? 0.0
                     : static_cast<double>(served) / static_cast<double>(stints);
}

void set_path_fractions(MetricsReport& rep, const PathCounters& pd) {
  if (pd.total() == 0) return;
  rep.frac_fast = static_cast<double>(pd.fast) / static_cast<double>(pd.total());
  rep.frac_slower =
      static_cast<double>(pd.slower) / static_cast<double>(pd.total());
  rep.frac_slowest =
      static_cast<double>(pd.slowest) / static_cast<double>(pd.total());
}

PairChecksum residual_checksum(const Pipq& q) {
  PairChecksum c;
  PipqSnapshot s = q.debug_snapshot();
  for (const auto& heap : s.heaps)
    for (const HeapEntry& e : heap) c.add(e.key, e.val);
  for (const LeaderScanEntry& n : s.list_nodes)
    if (!n.claimed) c.add(n.key, n.val);
  return c;
}

}  // namespace

int designated_deleters(int nthreads, double d) {
  int k = static_cast<int>(std::llround(nthreads * d));
  return std::max(1, std::min(nthreads - 1, k));
}

std::string metrics_csv_header() {
  return "workload,threads,seed,trial,seconds,ops,mops,insert_mops,delete_mops,"
         "frac_fast,frac_slower,frac_slowest,batch_mean,empties,"
         "ins_lat_mean_us,ins_lat_p50_us,ins_lat_p99_us,"
         "del_lat_mean_us,del_lat_p50_us,del_lat_p99_us,"
         "phase1_mops,phase2_mops,conservation_ok";
}

std::string metrics_csv_rows(const MetricsReport& r) {
  std::ostringstream os;
  for (size_t i = 0; i < r.trials.size(); ++i) {
    const TrialResult& t = r.trials[i];
    os << r.workload << ',' << r.threads << ',' << r.seed << ',' << i << ','
       << t.seconds << ',' << t.ops << ',' << t.mops() << ',' << r.insert_mops
       << ',' << r.delete_mops << ',' << r.frac_fast << ',' << r.frac_slower
       << ',' << r.frac_slowest << ',' << r.batch_mean << ',' << r.empties
       << ',' << r.insert_latency.mean_us << ',' << r.insert_latency.p50_us
       << ',' << r.insert_latency.p99_us << ',' << r.delete_latency.mean_us
       << ',' << r.delete_latency.p50_us << ',' << r.delete_latency.p99_us
       << ',' << r.phase1_mops << ',' << r.phase2_mops << ','
       << (r.conservation_ok ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string metrics_json(const MetricsReport& r) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"workload\": \"" << r.workload << "\",\n";
  os << "  \"threads\": " << r.threads << ",\n";
  os << "  \"seed\": " << r.seed << ",\n";
  os << "  \"trials\": [";
  for (size_t i = 0; i < r.trials.size(); ++i) {
    if (i) os << ", ";
    os << "{\"seconds\": " << r.trials[i].seconds
       << ", \"ops\": " << r.trials[i].ops
       << ", \"mops\": " << r.trials[i].mops() << "}";
  }
  os << "],\n";
  os << "  \"mops_mean\": " << r.mops_mean() << ",\n";
  os << "  \"insert_mops\": " << r.insert_mops << ",\n";
  os << "  \"delete_mops\": " << r.delete_mops << ",\n";
  os << "  \"path_fractions\": {\"fast\": " << r.frac_fast
     << ", \"slower\": " << r.frac_slower << ", \"slowest\": " << r.frac_slowest
     << "},\n";
  os << "  \"batch_mean\": " << r.batch_mean << ",\n";
  os << "  \"empties\": " << r.empties << ",\n";
  os << "  \"insert_latency_us\": {\"mean\": " << r.insert_latency.mean_us
     << ", \"p50\": " << r.insert_latency.p50_us
     << ", \"p99\": " << r.insert_latency.p99_us
     << ", \"samples\": " << r.insert_latency.samples << "},\n";
  os << "  \"delete_latency_us\": {\"mean\": " << r.delete_latency.mean_us
     << ", \"p50\": " << r.delete_latency.p50_us
     << ", \"p99\": " << r.delete_latency.p99_us
     << ", \"samples\": " << r.delete_latency.samples << "},\n";
  os << "  \"phase1_mops\": " << r.phase1_mops << ",\n";
  os << "  \"phase2_mops\": " << r.phase2_mops << ",\n";
  os << "  \"conservation_ok\": " << (r.conservation_ok ? "true" : "false")
     << "\n";
  os << "}\n";
  return os.str();
}

MetricsReport run_mixed(Pipq& q, const WorkloadSpec& spec, int nthreads) {
  if (spec.insert_pct < 0 || spec.insert_pct > 100)
    throw std::invalid_argument("insert_pct must lie in [0,100]");
  if (nthreads < 1 || nthreads > q.threads())
    throw std::invalid_argument("thread count outside the queue's capacity");

  MetricsReport rep;
  rep.workload = "mixed" + std::to_string(spec.insert_pct);
  rep.threads = nthreads;
  rep.seed = spec.seed;

  const TopologyMap& topo = q.topology();
  std::vector<LatencyShard> lat(static_cast<size_t>(nthreads));
  std::vector<std::uint64_t> ops(static_cast<size_t>(nthreads));
  std::vector<std::uint64_t> empt(static_cast<size_t>(nthreads));
  std::atomic<bool> stop{false};
  std::barrier<> gate(nthreads + 1);

  // trial -1 is the untimed warmup
  auto body = [&](int t, int trial, bool sample) {
    pin_current_thread(topo, t);
    Pipq::Handle h = q.register_thread(t);
    OpStream os(spec.seed, trial + 1, t);
    std::uint64_t n = 0, e = 0;
    std::uint64_t vseq = (static_cast<std::uint64_t>(t) << 40) |
                         (static_cast<std::uint64_t>(trial + 1) << 32);
    gate.arrive_and_wait();
    while (!stop.load(std::memory_order_relaxed)) {
      bool is_ins = os.next_is_insert(spec.insert_pct);
      bool timed = sample && spec.latency_every > 0 &&
                   n % static_cast<std::uint64_t>(spec.latency_every) == 0;
      Clock::time_point t0;
      if (timed) t0 = Clock::now();
      if (is_ins) {
        h.insert(os.next_key(spec.key_max), vseq++);
      } else if (!h.delete_min()) {
        ++e;
      }
      if (timed) {
        double us = seconds_between(t0, Clock::now()) * 1e6;
        (is_ins ? lat[static_cast<size_t>(t)].ins_us
                : lat[static_cast<size_t>(t)].del_us)
            .push_back(us);
      }
      ++n;
    }
    ops[static_cast<size_t>(t)] = n;
    empt[static_cast<size_t>(t)] = e;
    gate.arrive_and_wait();
  };

  auto run_window = [&](int trial, double dur, bool sample) {
    stop.store(false, std::memory_order_relaxed);
    std::vector<std::thread> ts;
    for (int t = 0; t < nthreads; ++t) ts.emplace_back(body, t, trial, sample);
    gate.arrive_and_wait();
    Clock::time_point t0 = Clock::now();
    std::this_thread::sleep_for(std::chrono::duration<double>(dur));
    stop.store(true, std::memory_order_relaxed);
    gate.arrive_and_wait();
    double secs = seconds_between(t0, Clock::now());
    for (auto& th : ts) th.join();
    TrialResult tr;
    tr.seconds = secs;
    for (std::uint64_t o : ops) tr.ops += o;
    for (std::uint64_t x : empt) rep.empties += x;
    return tr;
  };

  if (spec.warmup_s > 0) run_window(-1, spec.warmup_s, false);
  rep.empties = 0;

  PathCounters paths0 = q.path_counters_total();
  BatchWindow bw0 = batch_window(q.batch_stats());
  for (int trial = 0; trial < spec.trials; ++trial)
    rep.trials.push_back(run_window(trial, spec.duration_s, true));
  set_path_fractions(rep, q.path_counters_total() - paths0);
  rep.batch_mean = batch_mean_delta(bw0, q.batch_stats());
  rep.insert_latency = merge_summarize(lat, true);
  rep.delete_latency = merge_summarize(lat, false);
  return rep;
}

MetricsReport run_designated(Pipq& q, const WorkloadSpec& spec, int nthreads) {
  if (nthreads < 2)
    throw std::invalid_argument("designated roles need at least 2 threads");
  if (nthreads > q.threads())
    throw std::invalid_argument("thread count outside the queue's capacity");
  if (q.config().helping != HelpingSite::on_insert)
    throw std::invalid_argument(
        "designated workload requires a queue with on-insert helping");

  int deleters = designated_deleters(nthreads, spec.delete_fraction);
  int inserters = nthreads - deleters;

  MetricsReport rep;
  rep.workload = "designated";
  rep.threads = nthreads;
  rep.seed = spec.seed;

  const TopologyMap& topo = q.topology();
  std::vector<LatencyShard> lat(static_cast<size_t>(nthreads));
  std::vector<std::uint64_t> ops(static_cast<size_t>(nthreads));
  std::vector<std::uint64_t> empt(static_cast<size_t>(nthreads));
  std::vector<PairChecksum> ins_sum(static_cast<size_t>(nthreads));
  std::vector<PairChecksum> del_sum(static_cast<size_t>(nthreads));
  std::atomic<bool> stop{false};
  std::barrier<> gate(nthreads + 1);

  auto body = [&](int t, int trial, bool sample) {
    pin_current_thread(topo, t);
    Pipq::Handle h = q.register_thread(t);
    bool deleter = t >= inserters;
    OpStream os(spec.seed, trial + 1, t);
    std::uint64_t n = 0, e = 0;
    std::uint64_t vseq = (static_cast<std::uint64_t>(t) << 40) |
                         (static_cast<std::uint64_t>(trial + 1) << 32);
    gate.arrive_and_wait();
    while (!stop.load(std::memory_order_relaxed)) {
      bool timed = sample && spec.latency_every > 0 &&
                   n % static_cast<std::uint64_t>(spec.latency_every) == 0;
      Clock::time_point t0;
      if (timed) t0 = Clock::now();
      if (!deleter) {
        Key k = os.next_key(spec.key_max);
        Value v = vseq++;
        h.insert(k, v);
        ins_sum[static_cast<size_t>(t)].add(k, v);
      } else if (auto r = h.delete_min()) {
        del_sum[static_cast<size_t>(t)].add(r->key, r->val);
      } else {
        ++e;
      }
      if (timed) {
        double us = seconds_between(t0, Clock::now()) * 1e6;
        (deleter ? lat[static_cast<size_t>(t)].del_us
                 : lat[static_cast<size_t>(t)].ins_us)
            .push_back(us);
      }
      ++n;
    }
    ops[static_cast<size_t>(t)] = n;
    empt[static_cast<size_t>(t)] = e;
    gate.arrive_and_wait();
  };

  double timed_secs = 0;
  auto run_window = [&](int trial, double dur, bool sample) {
    stop.store(false, std::memory_order_relaxed);
    std::vector<std::thread> ts;
    for (int t = 0; t < nthreads; ++t) ts.emplace_back(body, t, trial, sample);
    gate.arrive_and_wait();
    Clock::time_point t0 = Clock::now();
    std::this_thread::sleep_for(std::chrono::duration<double>(dur));
    stop.store(true, std::memory_order_relaxed);
    gate.arrive_and_wait();
    double secs = seconds_between(t0, Clock::now());
    for (auto& th : ts) th.join();
    TrialResult tr;
    tr.seconds = secs;
    for (std::uint64_t o : ops) tr.ops += o;
    for (std::uint64_t x : empt) rep.empties += x;
    return tr;
  };

  if (spec.warmup_s > 0) run_window(-1, spec.warmup_s, false);
  rep.empties = 0;

  BatchWindow bw0 = batch_window(q.batch_stats());
  PathCounters paths0 = q.path_counters_total();
  std::uint64_t ins_ops = 0, del_ops = 0;
  for (int trial = 0; trial < spec.trials; ++trial) {
    TrialResult tr = run_window(trial, spec.duration_s, true);
    rep.trials.push_back(tr);
    timed_secs += tr.seconds;
    for (int t = 0; t < nthreads; ++t)
      (t >= inserters ? del_ops : ins_ops) += ops[static_cast<size_t>(t)];
  }
  set_path_fractions(rep, q.path_counters_total() - paths0);
  rep.insert_mops = timed_secs > 0 ? ins_ops / timed_secs / 1e6 : 0;
  rep.delete_mops = timed_secs > 0 ? del_ops / timed_secs / 1e6 : 0;
  rep.batch_mean = batch_mean_delta(bw0, q.batch_stats());
  rep.insert_latency = merge_summarize(lat, true);
  rep.delete_latency = merge_summarize(lat, false);

  PairChecksum ins_total, del_total;
  for (int t = 0; t < nthreads; ++t) {
    ins_total += ins_sum[static_cast<size_t>(t)];
    del_total += del_sum[static_cast<size_t>(t)];
  }
  PairChecksum res = residual_checksum(q);
  bool sums_ok = ins_total.count == del_total.count + res.count &&
                 ins_total.key_sum == del_total.key_sum + res.key_sum &&
                 ins_total.mix == (del_total.mix ^ res.mix);
  rep.conservation_ok = sums_ok && audit_quiescent(q).ok();
  return rep;
}

MetricsReport run_phased(Pipq& q, const WorkloadSpec& spec, int nthreads) {
  if (spec.insert_count == 0 || spec.delete_count == 0)
    throw std::invalid_argument("phased workload needs positive phase counts");
  if (spec.delete_count > spec.insert_count)
    throw std::invalid_argument("phased delete count exceeds the insert count");
  if (nthreads < 1 || nthreads > q.threads())
    throw std::invalid_argument("thread count outside the queue's capacity");

  MetricsReport rep;
  rep.workload = "phased";
  rep.threads = nthreads;
  rep.seed = spec.seed;

  const TopologyMap& topo = q.topology();
  ConservationLedger ledger(q.threads());
  std::vector<std::uint64_t> empt(static_cast<size_t>(nthreads));
  std::barrier<> gate(nthreads + 1);

  auto share = [nthreads](std::uint64_t total, int t) {
    std::uint64_t base = total / static_cast<std::uint64_t>(nthreads);
    return base + (static_cast<std::uint64_t>(t) < total % nthreads ? 1 : 0);
  };

  auto body = [&](int t) {
    pin_current_thread(topo, t);
    Pipq::Handle h = q.register_thread(t);
    OpStream os(spec.seed, 1, t);
    std::uint64_t vseq = static_cast<std::uint64_t>(t) << 40;
    std::uint64_t my_ins = share(spec.insert_count, t);
    std::uint64_t my_del = share(spec.delete_count, t);
    gate.arrive_and_wait();  // phase 1 start
    for (std::uint64_t i = 0; i < my_ins; ++i) {
      Key k = os.next_key(spec.key_max);
      Value v = vseq++;
      h.insert(k, v);
      ledger.note_insert(t, k, v);
    }
    gate.arrive_and_wait();  // phase 1 end
    gate.arrive_and_wait();  // phase 2 start
    std::uint64_t e = 0;
    for (std::uint64_t i = 0; i < my_del; ++i) {
      if (auto r = h.delete_min()) {
        ledger.note_delete(t, r->key, r->val);
      } else {
        ++e;
      }
    }
    empt[static_cast<size_t>(t)] = e;
    gate.arrive_and_wait();  // phase 2 end
  };

  std::vector<std::thread> ts;
  for (int t = 0; t < nthreads; ++t) ts.emplace_back(body, t);
  gate.arrive_and_wait();
  Clock::time_point p1 = Clock::now();
  gate.arrive_and_wait();
  double phase1_s = seconds_between(p1, Clock::now());
  gate.arrive_and_wait();
  Clock::time_point p2 = Clock::now();
  gate.arrive_and_wait();
  double phase2_s = seconds_between(p2, Clock::now());
  for (auto& th : ts) th.join();

  for (std::uint64_t x : empt) rep.empties += x;
  rep.phase1_mops =
      phase1_s > 0 ? static_cast<double>(spec.insert_count) / phase1_s / 1e6 : 0;
  rep.phase2_mops =
      phase2_s > 0 ? static_cast<double>(spec.delete_count) / phase2_s / 1e6 : 0;
  TrialResult t1{phase1_s, spec.insert_count};
  TrialResult t2{phase2_s, spec.delete_count};
  rep.trials = {t1, t2};
  set_path_fractions(rep, q.path_counters_total());  // queue started fresh
  rep.batch_mean = q.batch_stats().mean_per_serving_stint();

  AuditReport audit = audit_quiescent(q, &ledger);
  bool drain_sorted = true;
  Key last = 0;
  while (auto r = q.delete_min(0)) {
    if (r->key < last) drain_sorted = false;
    last = r->key;
    ledger.note_delete(0, r->key, r->val);
  }
  bool emptied = ledger.insert_count() == ledger.delete_count();
  rep.conservation_ok = audit.ok() && drain_sorted && emptied;
  return rep;
}

}  // namespace pipq
