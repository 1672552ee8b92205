#pragma once

// Concurrent operation-history capture for linearizability checking.
// Threads append invoke/respond events to private shards; timestamps come
// from one global fetch-add clock, so real-time precedence between a
// response and a later invocation is always preserved in the merge.

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pipq/config.hpp"

namespace pipq {

enum class Phase : std::uint8_t { invoke, respond };
enum class OpKind : std::uint8_t { insert, delete_min };

struct HistoryEvent {
  std::uint64_t ts;
  ThreadId tid;
  Phase phase;
  OpKind op;
  Key key;  // insert argument, or delete result; kKeyPosInf marks an
            // empty delete result
  Value val;

  bool operator==(const HistoryEvent&) const = default;
};

class HistoryRecorder {
 public:
  explicit HistoryRecorder(int threads, std::size_t reserve_per_thread = 4096);

  HistoryRecorder(const HistoryRecorder&) = delete;
  HistoryRecorder& operator=(const HistoryRecorder&) = delete;

  void invoke(ThreadId tid, OpKind op, Key k = 0, Value v = 0);
  void respond(ThreadId tid, OpKind op, Key k, Value v);
  void respond_empty(ThreadId tid);  // delete-min that found nothing

  std::size_t total_events() const;
  // All shards merged into timestamp order.
  std::vector<HistoryEvent> merged() const;
  void clear();

  // Line format: "ts tid phase op key val", phase in {inv,res}, op in
  // {ins,del}.
  std::string dump() const;
  static std::vector<HistoryEvent> parse(const std::string& text);

 private:
  struct alignas(64) Shard {
    std::vector<HistoryEvent> ev;
  };
  std::atomic<std::uint64_t> clock_{0};
  std::vector<std::unique_ptr<Shard>> shards_;
};

std::string format_history(const std::vector<HistoryEvent>& events);

}  // namespace pipq
