// Command-line front end: benchmarks, shortest paths, linearizability
// campaigns, stress audits. Exit 0 on success, 1 when a verification
// fails, 2 on usage errors.

#include <CLI11.hpp>

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pipq/audit.hpp"
#include "pipq/bench.hpp"
#include "pipq/history.hpp"
#include "pipq/lincheck.hpp"
#include "pipq/pipq.hpp"
#include "pipq/spin.hpp"
#include "pipq/sssp.hpp"
#include "pipq/topology.hpp"

using namespace pipq;

namespace {

enum class OutFormat { table, csv, json };

// Queue and output flags shared by every subcommand. Option pointers let
// us tell "explicitly passed" from "left at default": the precedence is
// built-in defaults, then PIPQ_CONFIG, then --config, then flags.
struct CommonFlags {
  std::string config_path;
  int threads = 0;
  std::uint64_t hls = 0;
  int cmin = 0, cmax = 0, moff = 0, nodes = 0;
  std::string helping;
  bool noinstr = false;
  std::string topology;
  std::string format = "auto";
  std::string out_path;
  std::uint64_t seed = 1;

  CLI::Option *o_config = nullptr, *o_threads = nullptr, *o_hls = nullptr,
              *o_cmin = nullptr, *o_cmax = nullptr, *o_moff = nullptr,
              *o_nodes = nullptr, *o_helping = nullptr, *o_topology = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  f.o_config = cmd->add_option("--config", f.config_path,
                               "key=value config file, applied over PIPQ_CONFIG");
  f.o_threads = cmd->add_option("--threads", f.threads, "worker thread count")
                    ->check(CLI::PositiveNumber);
  f.o_hls = cmd->add_option("--heap-capacity", f.hls,
                            "first worker-heap segment capacity")
                ->check(CLI::PositiveNumber);
  f.o_cmin = cmd->add_option("--cntr-min", f.cmin,
                             "leader count refill threshold (>= 2)");
  f.o_cmax = cmd->add_option("--cntr-max", f.cmax, "leader count cap");
  f.o_moff = cmd->add_option("--max-offset", f.moff,
                             "list search restart offset");
  f.o_nodes = cmd->add_option("--numa-nodes", f.nodes,
                              "emulated node count (implies synthetic topology)")
                  ->check(CLI::PositiveNumber);
  f.o_helping = cmd->add_option("--helping", f.helping,
                                "upsert helping site: wait|insert")
                    ->check(CLI::IsMember({"wait", "insert"}));
  cmd->add_flag("--no-instrument", f.noinstr,
                "skip path and batch counters");
  f.o_topology = cmd->add_option("--topology", f.topology,
                                 "auto|off|synthetic:<n>");
  cmd->add_option("--format", f.format, "table|csv|json (default: by tty)")
      ->check(CLI::IsMember({"auto", "table", "csv", "json"}));
  cmd->add_option("--out", f.out_path, "write the payload to this file");
  cmd->add_option("--seed", f.seed, "workload stream seed");
}

Config resolve_config(const CommonFlags& f, Config base) {
  Config cfg = base;
  if (const char* env = std::getenv("PIPQ_CONFIG")) {
    if (*env) cfg = config_from_file(env, cfg);
  }
  if (f.o_config->count()) cfg = config_from_file(f.config_path, cfg);
  if (f.o_threads->count()) cfg.threads = f.threads;
  if (f.o_hls->count()) cfg.heap_segment_capacity = f.hls;
  if (f.o_cmin->count()) cfg.cntr_min = f.cmin;
  if (f.o_cmax->count()) cfg.cntr_max = f.cmax;
  if (f.o_moff->count()) cfg.max_offset = f.moff;
  if (f.o_nodes->count()) cfg.numa_nodes = f.nodes;
  if (f.o_helping->count())
    cfg.helping = f.helping == "insert" ? HelpingSite::on_insert
                                        : HelpingSite::on_delete_min_wait;
  if (f.noinstr) cfg.instrument = false;
  if (auto err = config_validate(cfg))
    throw std::invalid_argument(std::string("bad config: ") + to_string(*err));
  return cfg;
}

TopologyMap resolve_topology(const CommonFlags& f, Config& cfg) {
  TopologyMap topo;
  if (f.o_topology->count())
    topo = topology_from_mode(f.topology, cfg.threads);
  else if (cfg.numa_nodes > 1)
    topo = synthetic_topology(cfg.threads, cfg.numa_nodes);
  else
    topo = detect_topology(cfg.threads);
  cfg.numa_nodes = topo.numa_nodes;  // keep the header truthful
  return topo;
}

OutFormat resolve_format(const std::string& f) {
  if (f == "table") return OutFormat::table;
  if (f == "csv") return OutFormat::csv;
  if (f == "json") return OutFormat::json;
  return isatty(fileno(stdout)) ? OutFormat::table : OutFormat::csv;
}

const char* format_name(OutFormat f) {
  switch (f) {
    case OutFormat::table: return "table";
    case OutFormat::csv: return "csv";
    default: return "json";
  }
}

// The resolved-config line every run prints. Keys match the config-file
// vocabulary so the line can be pasted back into one.
std::string config_header(const std::string& cmd, const Config& c,
                          const CommonFlags& f, OutFormat fmt,
                          const std::string& extra) {
  std::ostringstream os;
  os << "# pipq " << cmd << " threads=" << c.threads
     << " heap_segment_capacity=" << c.heap_segment_capacity
     << " cntr_min=" << c.cntr_min << " cntr_max=" << c.cntr_max
     << " max_offset=" << c.max_offset << " numa_nodes=" << c.numa_nodes
     << " helping="
     << (c.helping == HelpingSite::on_insert ? "on_insert"
                                             : "on_delete_min_wait")
     << " instrument=" << (c.instrument ? "true" : "false")
     << " seed=" << f.seed << " format=" << format_name(fmt);
  if (!extra.empty()) os << ' ' << extra;
  return os.str();
}

// Header goes to the console before the run starts; the payload goes to
// --out when given. A bare json run keeps stdout parseable by moving
// the header to stderr.
void emit_header(const CommonFlags& f, OutFormat fmt,
                 const std::string& header) {
  bool json_on_stdout = fmt == OutFormat::json && f.out_path.empty();
  (json_on_stdout ? std::cerr : std::cout) << header << std::endl;
}

void emit_payload(const CommonFlags& f, const std::string& payload) {
  if (f.out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(f.out_path);
  if (!out) throw std::runtime_error(f.out_path + ": cannot write");
  out << payload;
}

std::string metrics_table(const MetricsReport& r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << "workload          " << r.workload << "\n";
  os << "threads           " << r.threads << "\n";
  for (size_t i = 0; i < r.trials.size(); ++i)
    os << "trial " << i << "           " << r.trials[i].mops() << " Mops/s ("
       << r.trials[i].ops << " ops in " << r.trials[i].seconds << " s)\n";
  os << "mean throughput   " << r.mops_mean() << " Mops/s\n";
  if (r.insert_mops != 0 || r.delete_mops != 0)
    os << "role throughput   insert " << r.insert_mops << " / delete "
       << r.delete_mops << " Mops/s\n";
  os << "insert paths      fast " << r.frac_fast * 100 << "% / slower "
     << r.frac_slower * 100 << "% / slowest " << r.frac_slowest * 100
     << "%\n";
  os << "batch mean        " << r.batch_mean << "\n";
  os << "empty deletes     " << r.empties << "\n";
  if (r.insert_latency.samples)
    os << "insert latency    mean " << r.insert_latency.mean_us << " / p50 "
       << r.insert_latency.p50_us << " / p99 " << r.insert_latency.p99_us
       << " us\n";
  if (r.delete_latency.samples)
    os << "delete latency    mean " << r.delete_latency.mean_us << " / p50 "
       << r.delete_latency.p50_us << " / p99 " << r.delete_latency.p99_us
       << " us\n";
  if (r.phase1_mops != 0 || r.phase2_mops != 0)
    os << "phase throughput  fill " << r.phase1_mops << " / drain "
       << r.phase2_mops << " Mops/s\n";
  os << "conservation      " << (r.conservation_ok ? "ok" : "FAILED") << "\n";
  return os.str();
}

std::string metrics_payload(const MetricsReport& r, OutFormat fmt) {
  switch (fmt) {
    case OutFormat::table: return metrics_table(r);
    case OutFormat::csv: return metrics_csv_header() + "\n" + metrics_csv_rows(r);
    default: return metrics_json(r);
  }
}

int run_bench(const std::string& name, const CommonFlags& f, Config base,
              const WorkloadSpec& ws) {
  Config cfg = resolve_config(f, base);
  TopologyMap topo = resolve_topology(f, cfg);
  OutFormat fmt = resolve_format(f.format);
  std::ostringstream extra;
  switch (ws.kind) {
    case WorkloadKind::mixed:
      extra << "insert_pct=" << ws.insert_pct << " seconds=" << ws.duration_s
            << " warmup=" << ws.warmup_s << " trials=" << ws.trials
            << " key_max=" << ws.key_max;
      break;
    case WorkloadKind::designated:
      extra << "delete_fraction=" << ws.delete_fraction
            << " seconds=" << ws.duration_s << " warmup=" << ws.warmup_s
            << " trials=" << ws.trials << " key_max=" << ws.key_max;
      break;
    case WorkloadKind::phased:
      extra << "inserts=" << ws.insert_count << " deletes=" << ws.delete_count
            << " key_max=" << ws.key_max;
      break;
  }
  emit_header(f, fmt, config_header(name, cfg, f, fmt, extra.str()));
  Pipq q(cfg, topo);
  WorkloadSpec spec = ws;
  spec.seed = f.seed;
  MetricsReport rep;
  switch (ws.kind) {
    case WorkloadKind::mixed: rep = run_mixed(q, spec, cfg.threads); break;
    case WorkloadKind::designated:
      rep = run_designated(q, spec, cfg.threads);
      break;
    case WorkloadKind::phased: rep = run_phased(q, spec, cfg.threads); break;
  }
  emit_payload(f, metrics_payload(rep, fmt));
  if (!rep.conservation_ok) {
    std::cerr << "pipq: conservation check failed\n";
    return 1;
  }
  return 0;
}

struct SsspFlags {
  std::string graph;
  std::uint64_t source = 0;
  bool undirected = false;
  std::string weights = "unit";
};

int run_sssp(const CommonFlags& f, const SsspFlags& sf) {
  std::optional<std::uint64_t> wseed;
  if (sf.weights != "unit") {
    if (sf.weights.rfind("random:", 0) != 0)
      throw std::invalid_argument("--weights takes unit or random:<seed>");
    try {
      wseed = std::stoull(sf.weights.substr(7));
    } catch (...) {
      throw std::invalid_argument("--weights takes unit or random:<seed>");
    }
  }
  Config cfg = resolve_config(f, Config{});
  TopologyMap topo = resolve_topology(f, cfg);
  OutFormat fmt = resolve_format(f.format);
  std::ostringstream extra;
  extra << "graph=" << sf.graph << " source=" << sf.source
        << " undirected=" << (sf.undirected ? "true" : "false")
        << " weights=" << sf.weights;
  emit_header(f, fmt, config_header("sssp", cfg, f, fmt, extra.str()));

  Graph g = load_edge_list(sf.graph, sf.undirected, wseed);
  std::optional<std::uint32_t> src = g.find_node(sf.source);
  if (!src)
    throw std::invalid_argument("source id " + std::to_string(sf.source) +
                                " does not occur in the graph");
  Pipq q(cfg, topo);
  SsspResult r = sssp_parallel(g, *src, cfg.threads, q);
  std::uint64_t reached = finite_count(r.dist);
  std::uint64_t sum = dist_checksum(r.dist);
  double inflation =
      reached ? static_cast<double>(r.processed) / static_cast<double>(reached)
              : 0.0;

  std::ostringstream os;
  switch (fmt) {
    case OutFormat::table:
      os.setf(std::ios::fixed);
      os.precision(3);
      os << "nodes             " << g.n << "\n";
      os << "edges             " << g.edge_count() << "\n";
      os << "reached           " << reached << "\n";
      os << "seconds           " << r.seconds << "\n";
      os << "checksum          " << sum << "\n";
      os << "processed         " << r.processed << " (" << r.stale
         << " stale, inflation " << inflation << ")\n";
      break;
    case OutFormat::csv:
      os << "graph,threads,source,nodes,edges,reached,seconds,checksum,"
            "processed,stale,inflation\n";
      os << sf.graph << ',' << cfg.threads << ',' << sf.source << ',' << g.n
         << ',' << g.edge_count() << ',' << reached << ',' << r.seconds << ','
         << sum << ',' << r.processed << ',' << r.stale << ',' << inflation
         << "\n";
      break;
    case OutFormat::json:
      os << "{\n  \"graph\": \"" << sf.graph << "\",\n  \"threads\": "
         << cfg.threads << ",\n  \"source\": " << sf.source
         << ",\n  \"nodes\": " << g.n << ",\n  \"edges\": " << g.edge_count()
         << ",\n  \"reached\": " << reached << ",\n  \"seconds\": "
         << r.seconds << ",\n  \"checksum\": " << sum
         << ",\n  \"processed\": " << r.processed << ",\n  \"stale\": "
         << r.stale << ",\n  \"inflation\": " << inflation << "\n}\n";
      break;
  }
  emit_payload(f, os.str());
  return 0;
}

struct CampaignFlags {
  int iters = 1;
  std::uint64_t ops = 0;
  int insert_pct = 50;
  Key key_max = 1;
};

// Runs `ops` mixed operations split across the queue's threads; inserts
// and successful deletes are noted in the ledger when one is supplied.
double run_campaign(Pipq& q, ConservationLedger* ledger,
                    const CampaignFlags& cf, std::uint64_t seed, int round) {
  int n = q.threads();
  std::atomic<int> ready{0};
  std::vector<std::thread> ts;
  auto t0 = std::chrono::steady_clock::now();
  for (int t = 0; t < n; ++t) {
    std::uint64_t share = cf.ops / static_cast<std::uint64_t>(n) +
                          (static_cast<std::uint64_t>(t) <
                                   cf.ops % static_cast<std::uint64_t>(n)
                               ? 1
                               : 0);
    ts.emplace_back([&, t, share] {
      OpStream os(seed, round, t);
      ready.fetch_add(1);
      while (ready.load() != n) cpu_relax();
      for (std::uint64_t i = 0; i < share; ++i) {
        if (os.next_is_insert(cf.insert_pct)) {
          Key k = os.next_key(cf.key_max);
          Value v = (static_cast<Value>(round) << 48) |
                    (static_cast<Value>(t) << 40) | i;
          q.insert(t, k, v);
          if (ledger) ledger->note_insert(t, k, v);
        } else {
          auto r = q.delete_min(t);
          if (r && ledger) ledger->note_delete(t, r->key, r->val);
        }
      }
    });
  }
  for (auto& th : ts) th.join();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

int run_stress(const CommonFlags& f, const CampaignFlags& cf) {
  Config base;
  base.threads = 8;
  Config cfg = resolve_config(f, base);
  TopologyMap topo = resolve_topology(f, cfg);
  OutFormat fmt = resolve_format(f.format);
  std::ostringstream extra;
  extra << "iters=" << cf.iters << " ops=" << cf.ops
        << " insert_pct=" << cf.insert_pct << " key_max=" << cf.key_max;
  emit_header(f, fmt, config_header("stress", cfg, f, fmt, extra.str()));

  int failures = 0;
  std::ostringstream os;
  if (fmt == OutFormat::csv)
    os << "campaign,threads,ops,seconds,mops,audit_ok\n";
  if (fmt == OutFormat::json) os << "[\n";
  for (int c = 0; c < cf.iters; ++c) {
    Pipq q(cfg, topo);
    ConservationLedger ledger(cfg.threads);
    double secs = run_campaign(q, &ledger, cf, f.seed, c);
    AuditReport rep = audit_quiescent(q, &ledger);
    bool ok = rep.ok();
    if (!ok) {
      ++failures;
      std::cerr << "campaign " << c << " audit failed:\n" << rep.to_string();
    }
    double mops = secs > 0 ? static_cast<double>(cf.ops) / secs / 1e6 : 0;
    switch (fmt) {
      case OutFormat::table:
        os << "campaign " << c << "  ops " << cf.ops << "  " << secs
           << " s  " << mops << " Mops/s  audit "
           << (ok ? "pass" : "FAIL") << "\n";
        break;
      case OutFormat::csv:
        os << c << ',' << cfg.threads << ',' << cf.ops << ',' << secs << ','
           << mops << ',' << (ok ? 1 : 0) << "\n";
        break;
      case OutFormat::json:
        os << "  {\"campaign\": " << c << ", \"threads\": " << cfg.threads
           << ", \"ops\": " << cf.ops << ", \"seconds\": " << secs
           << ", \"mops\": " << mops << ", \"audit_ok\": "
           << (ok ? "true" : "false") << "}"
           << (c + 1 < cf.iters ? ",\n" : "\n");
        break;
    }
  }
  if (fmt == OutFormat::json) os << "]\n";
  emit_payload(f, os.str());
  if (failures) {
    std::cerr << "pipq: " << failures << " of " << cf.iters
              << " campaigns failed the audit\n";
    return 1;
  }
  return 0;
}

int run_audit(const CommonFlags& f, const CampaignFlags& cf) {
  Config base;
  base.threads = 4;
  Config cfg = resolve_config(f, base);
  TopologyMap topo = resolve_topology(f, cfg);
  OutFormat fmt = resolve_format(f.format);
  std::ostringstream extra;
  extra << "ops=" << cf.ops << " insert_pct=" << cf.insert_pct
        << " key_max=" << cf.key_max;
  emit_header(f, fmt, config_header("audit", cfg, f, fmt, extra.str()));

  Pipq q(cfg, topo);
  ConservationLedger ledger(cfg.threads);
  double secs = run_campaign(q, &ledger, cf, f.seed, 0);
  AuditReport rep = audit_quiescent(q, &ledger);
  DrainStats ds = q.drain_stats();
  std::uint64_t residual = ledger.insert_count() - ledger.delete_count();

  std::ostringstream os;
  switch (fmt) {
    case OutFormat::table:
      os << rep.to_string();
      os << "  ops " << cf.ops << " in " << secs << " s, residual pairs "
         << residual << "\n";
      os << "  insert paths fast " << ds.paths.fast << " / slower "
         << ds.paths.slower << " / slowest " << ds.paths.slowest << "\n";
      os << "  coordinator stints " << ds.batch.stints << " serving "
         << ds.batch.total_served << " (mean "
         << ds.batch.mean_per_serving_stint() << " per serving stint)\n";
      break;
    case OutFormat::csv:
      os << "check,ok,detail\n";
      for (const AuditCheck& c : rep.checks) {
        std::string d = c.detail;
        for (char& ch : d)
          if (ch == ',' || ch == '\n') ch = ';';
        os << c.name << ',' << (c.ok ? 1 : 0) << ',' << d << "\n";
      }
      break;
    case OutFormat::json: {
      os << "{\n  \"checks\": [\n";
      for (size_t i = 0; i < rep.checks.size(); ++i) {
        const AuditCheck& c = rep.checks[i];
        std::string d = c.detail;
        for (char& ch : d)
          if (ch == '"' || ch == '\\') ch = '\'';
        os << "    {\"name\": \"" << c.name << "\", \"ok\": "
           << (c.ok ? "true" : "false") << ", \"detail\": \"" << d << "\"}"
           << (i + 1 < rep.checks.size() ? ",\n" : "\n");
      }
      os << "  ],\n  \"ops\": " << cf.ops << ",\n  \"seconds\": " << secs
         << ",\n  \"residual_pairs\": " << residual
         << ",\n  \"paths\": {\"fast\": " << ds.paths.fast << ", \"slower\": "
         << ds.paths.slower << ", \"slowest\": " << ds.paths.slowest
         << "},\n  \"batch_mean\": " << ds.batch.mean_per_serving_stint()
         << "\n}\n";
      break;
    }
  }
  emit_payload(f, os.str());
  return rep.ok() ? 0 : 1;
}

struct LincheckFlags {
  int iters = 500;
  int ops = 24;
  int insert_pct = 50;
  Key key_max = 6;
};

int run_lincheck(const CommonFlags& f, const LincheckFlags& lf) {
  Config base;
  base.threads = 3;
  base.cntr_min = 2;
  base.cntr_max = 4;  // tiny credits force promotion traffic
  Config cfg = resolve_config(f, base);
  TopologyMap topo = resolve_topology(f, cfg);
  OutFormat fmt = resolve_format(f.format);
  if (lf.ops > 64)
    throw std::invalid_argument("histories are capped at 64 operations");
  std::ostringstream extra;
  extra << "iters=" << lf.iters << " ops=" << lf.ops
        << " insert_pct=" << lf.insert_pct << " key_max=" << lf.key_max;
  emit_header(f, fmt, config_header("lincheck", cfg, f, fmt, extra.str()));

  int n = cfg.threads;
  int good = 0, bad = 0, undecided = 0;
  std::uint64_t nodes_total = 0;
  for (int it = 0; it < lf.iters; ++it) {
    Pipq q(cfg, topo);
    HistoryRecorder rec(n);
    std::atomic<int> ready{0};
    std::vector<std::thread> ts;
    for (int t = 0; t < n; ++t) {
      int share = lf.ops / n + (t < lf.ops % n ? 1 : 0);
      ts.emplace_back([&, t, it, share] {
        OpStream os(f.seed, it, t);
        ready.fetch_add(1);
        while (ready.load() != n) cpu_relax();
        for (int i = 0; i < share; ++i) {
          if (os.next_is_insert(lf.insert_pct)) {
            Key k = os.next_key(lf.key_max);
            Value v = (static_cast<Value>(it) << 20) |
                      (static_cast<Value>(t) << 12) |
                      static_cast<Value>(i);
            rec.invoke(t, OpKind::insert, k, v);
            q.insert(t, k, v);
            rec.respond(t, OpKind::insert, k, v);
          } else {
            rec.invoke(t, OpKind::delete_min);
            auto r = q.delete_min(t);
            if (r)
              rec.respond(t, OpKind::delete_min, r->key, r->val);
            else
              rec.respond_empty(t);
          }
        }
      });
    }
    for (auto& th : ts) th.join();
    LinResult r = check_linearizable(rec.merged());
    nodes_total += r.nodes;
    if (r.verdict == LinVerdict::linearizable) {
      ++good;
    } else if (r.verdict == LinVerdict::not_linearizable) {
      ++bad;
      std::cerr << "iteration " << it << ": " << r.detail << "\nhistory:\n"
                << rec.dump();
    } else {
      ++undecided;
      std::cerr << "iteration " << it << ": search budget exceeded\n";
    }
  }
  double mean_nodes =
      lf.iters ? static_cast<double>(nodes_total) / lf.iters : 0;

  std::ostringstream os;
  switch (fmt) {
    case OutFormat::table:
      os << "histories         " << lf.iters << "\n";
      os << "linearizable      " << good << "\n";
      os << "violations        " << bad << "\n";
      os << "budget exceeded   " << undecided << "\n";
      os << "mean search nodes " << mean_nodes << "\n";
      break;
    case OutFormat::csv:
      os << "histories,threads,ops,linearizable,violations,budget_exceeded,"
            "mean_nodes\n";
      os << lf.iters << ',' << n << ',' << lf.ops << ',' << good << ',' << bad
         << ',' << undecided << ',' << mean_nodes << "\n";
      break;
    case OutFormat::json:
      os << "{\n  \"histories\": " << lf.iters << ",\n  \"threads\": " << n
         << ",\n  \"ops\": " << lf.ops << ",\n  \"linearizable\": " << good
         << ",\n  \"violations\": " << bad << ",\n  \"budget_exceeded\": "
         << undecided << ",\n  \"mean_nodes\": " << mean_nodes << "\n}\n";
      break;
  }
  emit_payload(f, os.str());
  return (bad || undecided) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-level concurrent priority queue workbench"};
  app.require_subcommand(1);

  CommonFlags cm, cd, cp, cs, cl, cst, cau;

  WorkloadSpec wm;
  wm.kind = WorkloadKind::mixed;
  CLI::App* mixed = app.add_subcommand(
      "bench-mixed", "timed random insert/delete mix on every thread");
  add_common_flags(mixed, cm);
  mixed->add_option("--insert-pct", wm.insert_pct, "insert share, 0..100")
      ->check(CLI::Range(0, 100));
  mixed->add_option("--seconds", wm.duration_s, "timed window per trial");
  mixed->add_option("--warmup", wm.warmup_s, "untimed warmup window");
  mixed->add_option("--trials", wm.trials, "timed repetitions")
      ->check(CLI::PositiveNumber);
  mixed->add_option("--key-max", wm.key_max, "keys drawn from [1, key-max]")
      ->check(CLI::PositiveNumber);
  mixed->add_option("--latency-every", wm.latency_every,
                    "sample every Kth operation")
      ->check(CLI::PositiveNumber);

  WorkloadSpec wd;
  wd.kind = WorkloadKind::designated;
  CLI::App* desig = app.add_subcommand(
      "bench-designated", "fixed roles: each thread only inserts or deletes");
  add_common_flags(desig, cd);
  desig->add_option("--delete-fraction", wd.delete_fraction,
                    "share of threads that delete")
      ->check(CLI::Range(0.0, 1.0));
  desig->add_option("--seconds", wd.duration_s, "timed window per trial");
  desig->add_option("--warmup", wd.warmup_s, "untimed warmup window");
  desig->add_option("--trials", wd.trials, "timed repetitions")
      ->check(CLI::PositiveNumber);
  desig->add_option("--key-max", wd.key_max, "keys drawn from [1, key-max]")
      ->check(CLI::PositiveNumber);
  desig->add_option("--latency-every", wd.latency_every,
                    "sample every Kth operation")
      ->check(CLI::PositiveNumber);

  WorkloadSpec wp;
  wp.kind = WorkloadKind::phased;
  wp.insert_count = 1000000;
  wp.delete_count = 1000000;
  CLI::App* phased = app.add_subcommand(
      "bench-phased", "fill phase then drain phase, conservation audited");
  add_common_flags(phased, cp);
  phased->add_option("--inserts", wp.insert_count, "phase-1 insert count")
      ->check(CLI::PositiveNumber);
  phased->add_option("--deletes", wp.delete_count, "phase-2 delete count")
      ->check(CLI::PositiveNumber);
  phased->add_option("--key-max", wp.key_max, "keys drawn from [1, key-max]")
      ->check(CLI::PositiveNumber);

  SsspFlags sf;
  CLI::App* sssp = app.add_subcommand(
      "sssp", "single-source shortest paths over an edge-list graph");
  add_common_flags(sssp, cs);
  sssp->add_option("--graph", sf.graph, "edge-list file, 'u v [w]' lines")
      ->required();
  sssp->add_option("--source", sf.source, "source node id (as in the file)");
  sssp->add_flag("--undirected", sf.undirected,
                 "add the reverse of every edge");
  sssp->add_option("--weights", sf.weights,
                   "unit or random:<seed> for weightless lines");

  LincheckFlags lf;
  CLI::App* lin = app.add_subcommand(
      "lincheck", "record randomized histories and check linearizability");
  add_common_flags(lin, cl);
  lin->add_option("--iters", lf.iters, "histories to record")
      ->check(CLI::PositiveNumber);
  lin->add_option("--ops", lf.ops, "operations per history, split over threads")
      ->check(CLI::PositiveNumber);
  lin->add_option("--insert-pct", lf.insert_pct, "insert share, 0..100")
      ->check(CLI::Range(0, 100));
  lin->add_option("--key-max", lf.key_max, "keys drawn from [1, key-max]")
      ->check(CLI::PositiveNumber);

  CampaignFlags stf;
  stf.ops = 1000000;
  stf.key_max = 1000000;
  CLI::App* stress = app.add_subcommand(
      "stress", "mixed campaigns with a full quiescent audit after each");
  add_common_flags(stress, cst);
  stress->add_option("--iters", stf.iters, "campaigns to run")
      ->check(CLI::PositiveNumber);
  stress->add_option("--ops", stf.ops, "operations per campaign")
      ->check(CLI::PositiveNumber);
  stress->add_option("--insert-pct", stf.insert_pct, "insert share, 0..100")
      ->check(CLI::Range(0, 100));
  stress->add_option("--key-max", stf.key_max, "keys drawn from [1, key-max]")
      ->check(CLI::PositiveNumber);

  CampaignFlags auf;
  auf.ops = 100000;
  auf.key_max = 1000000;
  CLI::App* audit = app.add_subcommand(
      "audit", "one seeded workload, itemized quiescent audit report");
  add_common_flags(audit, cau);
  audit->add_option("--ops", auf.ops, "operations to apply")
      ->check(CLI::PositiveNumber);
  audit->add_option("--insert-pct", auf.insert_pct, "insert share, 0..100")
      ->check(CLI::Range(0, 100));
  audit->add_option("--key-max", auf.key_max, "keys drawn from [1, key-max]")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(mixed)) {
      Config base;
      base.threads = 4;
      return run_bench("bench-mixed", cm, base, wm);
    }
    if (app.got_subcommand(desig)) {
      Config base;
      base.threads = 4;
      base.helping = HelpingSite::on_insert;  // what this workload calls for
      return run_bench("bench-designated", cd, base, wd);
    }
    if (app.got_subcommand(phased)) {
      Config base;
      base.threads = 4;
      return run_bench("bench-phased", cp, base, wp);
    }
    if (app.got_subcommand(sssp)) return run_sssp(cs, sf);
    if (app.got_subcommand(lin)) return run_lincheck(cl, lf);
    if (app.got_subcommand(stress)) return run_stress(cst, stf);
    if (app.got_subcommand(audit)) return run_audit(cau, auf);
  } catch (const std::exception& e) {
    std::cerr << "pipq: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
