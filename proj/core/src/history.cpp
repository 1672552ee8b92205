#include "pipq/history.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "pipq/spin.hpp"

namespace pipq {

HistoryRecorder::HistoryRecorder(int threads, std::size_t reserve_per_thread) {
  PIPQ_CHECK(threads > 0, "recorder needs at least one shard");
  shards_.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    auto s = std::make_unique<Shard>();
    s->ev.reserve(reserve_per_thread);
    shards_.push_back(std::move(s));
  }
}

void HistoryRecorder::invoke(ThreadId tid, OpKind op, Key k, Value v) {
  std::uint64_t ts = clock_.fetch_add(1, std::memory_order_acq_rel);
  shards_[static_cast<size_t>(tid)]->ev.push_back(
      HistoryEvent{ts, tid, Phase::invoke, op, k, v});
}

void HistoryRecorder::respond(ThreadId tid, OpKind op, Key k, Value v) {
  std::uint64_t ts = clock_.fetch_add(1, std::memory_order_acq_rel);
  shards_[static_cast<size_t>(tid)]->ev.push_back(
      HistoryEvent{ts, tid, Phase::respond, op, k, v});
}

void HistoryRecorder::respond_empty(ThreadId tid) {
  respond(tid, OpKind::delete_min, kKeyPosInf, 0);
}

std::size_t HistoryRecorder::total_events() const {
  std::size_t n = 0;
  for (const auto& s : shards_) n += s->ev.size();
  return n;
}

std::vector<HistoryEvent> HistoryRecorder::merged() const {
  std::vector<HistoryEvent> out;
  out.reserve(total_events());
  for (const auto& s : shards_) out.insert(out.end(), s->ev.begin(), s->ev.end());
  std::sort(out.begin(), out.end(),
            [](const HistoryEvent& a, const HistoryEvent& b) { return a.ts < b.ts; });
  return out;
}

void HistoryRecorder::clear() {
  for (auto& s : shards_) s->ev.clear();
  clock_.store(0, std::memory_order_release);
}

std::string format_history(const std::vector<HistoryEvent>& events) {
  std::ostringstream os;
  for (const HistoryEvent& e : events) {
    os << e.ts << ' ' << e.tid << ' '
       << (e.phase == Phase::invoke ? "inv" : "res") << ' '
       << (e.op == OpKind::insert ? "ins" : "del") << ' ' << e.key << ' '
       << e.val << '\n';
  }
  return os.str();
}

std::string HistoryRecorder::dump() const { return format_history(merged()); }

std::vector<HistoryEvent> HistoryRecorder::parse(const std::string& text) {
  std::vector<HistoryEvent> out;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    HistoryEvent e{};
    std::string phase, op;
    if (!(ls >> e.ts >> e.tid >> phase >> op >> e.key >> e.val)) {
      throw std::invalid_argument("history line " + std::to_string(line_no) +
                                  ": expected 'ts tid phase op key val'");
    }
    if (phase == "inv") {
      e.phase = Phase::invoke;
    } else if (phase == "res") {
      e.phase = Phase::respond;
    } else {
      throw std::invalid_argument("history line " + std::to_string(line_no) +
                                  ": unknown phase '" + phase + "'");
    }
    if (op == "ins") {
      e.op = OpKind::insert;
    } else if (op == "del") {
      e.op = OpKind::delete_min;
    } else {
      throw std::invalid_argument("history line " + std::to_string(line_no) +
                                  ": unknown op '" + op + "'");
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace pipq
