#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "actordb/common/clock.hpp"
#include "actordb/durability/redo_log.hpp"

namespace actordb {

enum class DispatchMode : std::uint8_t { Sync, Async };
std::string_view to_string(DispatchMode m);
/// Throws ConfigError.
DispatchMode parse_dispatch_mode(std::string_view s);

/// Maps actors matching `pattern` ("Type/name", shell wildcards) to a pool. Pool is a name from
/// ExecutorConfig::pools, "inline" (run on the caller's stream) or "dedicated:<width>" (one
/// private pool per matching actor).
struct PoolRule {
  std::string pattern;
  std::string pool;
};

struct ExecutorConfig {
  std::map<std::string, unsigned> pools;
  std::vector<PoolRule> rules;  // first match wins
  std::string fallback = "inline";
  /// Optional CPU affinity hints per named pool; applied best effort.
  std::map<std::string, std::vector<int>> affinity;
};

struct DurabilityOptions {
  bool enabled = false;
  durability::LogOptions log;
  /// "Type/name" -> durable, overriding the type's annotation.
  std::map<std::string, bool> actor_overrides;
};

enum class DetachedMode : std::uint8_t { Background, Manual };

struct EngineOptions {
  DispatchMode mode = DispatchMode::Async;
  ClockKind clock = ClockKind::Monotonic;
  ExecutorConfig executors;
  DurabilityOptions durability;
  DetachedMode detached = DetachedMode::Background;
  unsigned detached_retry_limit = 10;
  std::chrono::microseconds detached_backoff{1000};
  std::size_t audit_capacity = 1 << 16;
  bool audit_allowed_calls = false;
  /// Width of the key buckets used for scan validation on indexed columns.
  std::int64_t scan_granule = 1;
};

}  // namespace actordb
