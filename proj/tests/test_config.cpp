#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "pipq/config.hpp"

using namespace pipq;

TEST_CASE("defaults validate") {
  Config cfg;
  CHECK(!config_validate(cfg).has_value());
}

TEST_CASE("reference config validates") {
  Config cfg;
  cfg.heap_segment_capacity = 1024;
  cfg.threads = 4;
  cfg.cntr_min = 10;
  cfg.cntr_max = 100;
  cfg.max_offset = 32;
  cfg.numa_nodes = 1;
  CHECK(!config_validate(cfg).has_value());
}

TEST_CASE("cntr_min below two rejected") {
  Config cfg;
  cfg.cntr_min = 1;
  auto err = config_validate(cfg);
  REQUIRE(err.has_value());
  CHECK(*err == ConfigError::cntr_min_below_two);
  CHECK(std::string(to_string(*err)) == "cntr_min_below_two");
}

TEST_CASE("cntr_min above cntr_max rejected") {
  Config cfg;
  cfg.cntr_min = 50;
  cfg.cntr_max = 10;
  auto err = config_validate(cfg);
  REQUIRE(err.has_value());
  CHECK(*err == ConfigError::cntr_min_exceeds_cntr_max);
}

TEST_CASE("first violation reported") {
  Config cfg;
  cfg.threads = 0;
  cfg.cntr_min = 0;
  auto err = config_validate(cfg);
  REQUIRE(err.has_value());
  CHECK(*err == ConfigError::threads_not_positive);
}

TEST_CASE("remaining bound checks") {
  Config cfg;
  cfg.heap_segment_capacity = 0;
  CHECK(*config_validate(cfg) == ConfigError::hls_not_positive);
  cfg = Config{};
  cfg.max_offset = 0;
  CHECK(*config_validate(cfg) == ConfigError::max_offset_not_positive);
  cfg = Config{};
  cfg.numa_nodes = -1;
  CHECK(*config_validate(cfg) == ConfigError::numa_nodes_not_positive);
}

TEST_CASE("kv application") {
  Config cfg;
  config_apply_kv(cfg, "threads", "8");
  config_apply_kv(cfg, "hls", "64");
  config_apply_kv(cfg, "cntr_min", "3");
  config_apply_kv(cfg, "cntr_max", "7");
  config_apply_kv(cfg, "instrument", "off");
  config_apply_kv(cfg, "helping", "on_insert");
  CHECK(cfg.threads == 8);
  CHECK(cfg.heap_segment_capacity == 64);
  CHECK(cfg.cntr_min == 3);
  CHECK(cfg.cntr_max == 7);
  CHECK(cfg.instrument == false);
  CHECK(cfg.helping == HelpingSite::on_insert);
  CHECK_THROWS_AS(config_apply_kv(cfg, "bogus", "1"), std::invalid_argument);
  CHECK_THROWS_AS(config_apply_kv(cfg, "threads", "x"), std::invalid_argument);
}

TEST_CASE("config file round trip") {
  const char* path = "pipq_test_config.tmp";
  {
    std::ofstream out(path);
    out << "# comment\n\nthreads = 6\nmax_offset=2\n";
  }
  Config cfg = config_from_file(path);
  CHECK(cfg.threads == 6);
  CHECK(cfg.max_offset == 2);
  CHECK(cfg.cntr_min == 10);  // untouched default
  {
    std::ofstream out(path);
    out << "threads\n";
  }
  CHECK_THROWS_WITH_AS(Config c2 = config_from_file(path),
                       doctest::Contains(":1:"), std::runtime_error);
  std::remove(path);
}

TEST_CASE("path counters arithmetic") {
  PathCounters a{10, 5, 1};
  PathCounters b{4, 2, 1};
  CHECK(a.total() == 16);
  auto d = a - b;
  CHECK(d.fast == 6);
  CHECK(d.slower == 3);
  CHECK(d.slowest == 0);
  b += d;
  CHECK(b.fast == a.fast);
}
