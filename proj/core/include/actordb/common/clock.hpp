#pragma once

#include <atomic>
#include <cstdint>

#include "actordb/common/value.hpp"

namespace actordb {

enum class ClockKind { Monotonic, Logical };

/// Engine time source. Logical clocks tick by one microsecond per reading, which makes
/// runs with identical inputs produce identical timestamps.
class EngineClock {
 public:
  explicit EngineClock(ClockKind kind = ClockKind::Monotonic, std::int64_t logical_start = 1'000'000'000);

  Timestamp now();
  /// Next value now() would return for a logical clock; current time for a monotonic one.
  Timestamp peek() const;
  ClockKind kind() const noexcept { return kind_; }

 private:
  ClockKind kind_;
  std::atomic<std::int64_t> logical_;
};

}  // namespace actordb
