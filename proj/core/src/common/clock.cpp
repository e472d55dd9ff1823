#include "actordb/common/clock.hpp"

#include <chrono>

namespace actordb {

EngineClock::EngineClock(ClockKind kind, std::int64_t logical_start) : kind_(kind), logical_(logical_start) {}

namespace {

std::int64_t steady_micros() {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

Timestamp EngineClock::now() {
  if (kind_ == ClockKind::Logical) return Timestamp{logical_.fetch_add(1, std::memory_order_relaxed)};
  return Timestamp{steady_micros()};
}

Timestamp EngineClock::peek() const {
  if (kind_ == ClockKind::Logical) return Timestamp{logical_.load(std::memory_order_relaxed)};
  return Timestamp{steady_micros()};
}

}  // namespace actordb
