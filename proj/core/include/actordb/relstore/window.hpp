#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "actordb/common/value.hpp"

namespace actordb::rel {

/// Recency-window statistics of one group.
struct WindowStats {
  Value key;
  double mean = 0.0;
  double sample_stddev = 0.0;
  std::int64_t window_count = 0;

  bool operator==(const WindowStats&) const = default;
};

/// One candidate row of a window: its ordering value, record id (tie-break) and measured value.
struct WindowSample {
  std::int64_t order = 0;
  std::uint64_t record_id = 0;
  double value = 0.0;
};

/// Keeps the min(k, n) most recent samples (largest order, then largest record id) and returns
/// their mean and sample standard deviation (divisor n-1; 0 when n <= 1).
WindowStats window_of(Value key, std::vector<WindowSample> samples, std::int64_t k);

/// Mean and sample standard deviation of `values` in the given order; 0/0 for empty input.
std::pair<double, double> mean_and_sample_stddev(std::span<const double> values);

}  // namespace actordb::rel
