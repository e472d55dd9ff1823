#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "actordb/common/clock.hpp"
#include "actordb/engine/options.hpp"
#include "actordb/smartmart/smartmart.hpp"

namespace actordb::bench {

struct BenchmarkConfig {
  int sections_total = 8;
  int sections_per_order = 8;
  int items_per_section_order = 4;
  int inventory_items_per_section = 500;
  int history_rows_per_item = 30;
  int carts = 1;
  int workers = 1;
  int group_managers = 10;
  int customers_per_cart = 30;
  std::int64_t max_order_quantity = 10;
  smartmart::DiscountParams discount;  // k = 15 at desk scale

  int epochs = 5;
  double epoch_seconds = 1.0;
  int warmup_epochs = 1;
  /// When > 0 each worker stops after this many committed interactions and the run is
  /// reported as a single epoch of its actual length.
  int interactions = 0;

  DispatchMode mode = DispatchMode::Async;
  ClockKind clock = ClockKind::Monotonic;
  std::uint64_t seed = 42;
  bool durability = false;
  std::string log_path = "actordb.log";
  /// Pool for Store_Section actors in async mode.
  std::string section_pool = "dedicated:1";
  std::int64_t scan_granule = 1;
  std::string csv_dir;

  static BenchmarkConfig full_scale();

  /// Throws ConfigError.
  void validate() const;
  /// Non-fatal problems, e.g. fewer cores than busy threads.
  std::vector<std::string> warnings() const;

  smartmart::StoreConfig store() const;
  EngineOptions engine_options() const;

  /// Sets one field by key. Throws ConfigError for unknown keys and bad values.
  void set(std::string_view key, std::string_view value);
  std::map<std::string, std::string> to_map() const;
};

/// `key = value` lines; `#` starts a comment; [section] headers are ignored. Throws ConfigError.
BenchmarkConfig parse_config(std::string_view text, BenchmarkConfig base = {});
/// Throws IoError, ConfigError.
BenchmarkConfig load_config(const std::string& path, BenchmarkConfig base = {});

}  // namespace actordb::bench
