#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pipq {

// Priorities are unsigned 64-bit, smaller = higher priority. The extreme
// values are reserved for the list sentinels (and the empty-result marker),
// so user keys live in [1, 2^64-2].
using Key = std::uint64_t;
using Value = std::uint64_t;
using ThreadId = int;

inline constexpr Key kKeyNegInf = 0;
inline constexpr Key kKeyPosInf = ~Key{0};
inline constexpr Key kKeyMinUser = 1;
inline constexpr Key kKeyMaxUser = kKeyPosInf - 1;

// Where the upsert helping work runs: by default in the delete-min wait
// loops; in designated-thread workloads it moves into the tail of insert.
enum class HelpingSite { on_delete_min_wait, on_insert };

struct Config {
  std::uint64_t heap_segment_capacity = 1024;  // first heap segment, later ones double
  int threads = 1;
  int cntr_min = 10;
  int cntr_max = 100;
  int max_offset = 32;
  int numa_nodes = 1;
  bool instrument = true;  // path counters + coordinator batch sizes
  HelpingSite helping = HelpingSite::on_delete_min_wait;
};

enum class ConfigError {
  hls_not_positive,
  threads_not_positive,
  cntr_min_below_two,
  cntr_min_exceeds_cntr_max,
  max_offset_not_positive,
  numa_nodes_not_positive,
};

const char* to_string(ConfigError e);

// Returns the first violated constraint, or nullopt when the config is usable.
std::optional<ConfigError> config_validate(const Config& cfg);

// Applies one "key=value" setting. Unknown keys and unparsable values throw
// std::invalid_argument. Recognized keys: heap_segment_capacity (alias hls),
// threads, cntr_min, cntr_max, max_offset, numa_nodes, instrument, helping.
void config_apply_kv(Config& cfg, std::string_view key, std::string_view value);

// Loads "key=value" lines ('#' comments and blank lines skipped) on top of
// the given defaults. Parse failures throw with the offending line number.
Config config_from_file(const std::string& path, Config defaults = {});

struct PathCounters {
  std::uint64_t fast = 0;
  std::uint64_t slower = 0;
  std::uint64_t slowest = 0;

  std::uint64_t total() const { return fast + slower + slowest; }
  PathCounters operator-(const PathCounters& o) const {
    return {fast - o.fast, slower - o.slower, slowest - o.slowest};
  }
  PathCounters& operator+=(const PathCounters& o) {
    fast += o.fast;
    slower += o.slower;
    slowest += o.slowest;
    return *this;
  }
};

}  // namespace pipq
