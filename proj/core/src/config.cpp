#include "pipq/config.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace pipq {

const char* to_string(ConfigError e) {
  switch (e) {
    case ConfigError::hls_not_positive: return "hls_not_positive";
    case ConfigError::threads_not_positive: return "threads_not_positive";
    case ConfigError::cntr_min_below_two: return "cntr_min_below_two";
    case ConfigError::cntr_min_exceeds_cntr_max: return "cntr_min_exceeds_cntr_max";
    case ConfigError::max_offset_not_positive: return "max_offset_not_positive";
    case ConfigError::numa_nodes_not_positive: return "numa_nodes_not_positive";
  }
  return "unknown";
}

std::optional<ConfigError> config_validate(const Config& cfg) {
  if (cfg.heap_segment_capacity == 0) return ConfigError::hls_not_positive;
  if (cfg.threads <= 0) return ConfigError::threads_not_positive;
  if (cfg.cntr_min < 2) return ConfigError::cntr_min_below_two;
  if (cfg.cntr_min > cfg.cntr_max) return ConfigError::cntr_min_exceeds_cntr_max;
  if (cfg.max_offset <= 0) return ConfigError::max_offset_not_positive;
  if (cfg.numa_nodes <= 0) return ConfigError::numa_nodes_not_positive;
  return std::nullopt;
}

namespace {

template <class T>
T parse_int(std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw std::invalid_argument("bad integer value '" + std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw std::invalid_argument("bad boolean value '" + std::string(v) + "'");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

void config_apply_kv(Config& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "heap_segment_capacity" || key == "hls") {
    cfg.heap_segment_capacity = parse_int<std::uint64_t>(value);
  } else if (key == "threads") {
    cfg.threads = parse_int<int>(value);
  } else if (key == "cntr_min") {
    cfg.cntr_min = parse_int<int>(value);
  } else if (key == "cntr_max") {
    cfg.cntr_max = parse_int<int>(value);
  } else if (key == "max_offset") {
    cfg.max_offset = parse_int<int>(value);
  } else if (key == "numa_nodes") {
    cfg.numa_nodes = parse_int<int>(value);
  } else if (key == "instrument") {
    cfg.instrument = parse_bool(value);
  } else if (key == "helping") {
    if (value == "on_delete_min_wait") cfg.helping = HelpingSite::on_delete_min_wait;
    else if (value == "on_insert") cfg.helping = HelpingSite::on_insert;
    else throw std::invalid_argument("bad helping value '" + std::string(value) + "'");
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

Config config_from_file(const std::string& path, Config defaults) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  Config cfg = defaults;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    try {
      config_apply_kv(cfg, sv.substr(0, eq), sv.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

}  // namespace pipq
