#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "actordb/bench/config.hpp"
#include "actordb/engine/engine.hpp"

namespace actordb::bench {

enum class AbortBucket : std::uint8_t { Read, Scan, Racy, App };
inline constexpr std::size_t kAbortBuckets = 4;
AbortBucket bucket_of(const CallResult& r);

struct EpochStats {
  int epoch = 0;
  std::uint64_t committed = 0;
  std::array<std::uint64_t, kAbortBuckets> aborted{};
  double mean_latency_us = 0.0;
  double throughput_per_s = 0.0;

  std::uint64_t aborted_total() const;
  bool operator==(const EpochStats&) const = default;
};

struct Report {
  std::map<std::string, std::string> config;
  std::vector<EpochStats> epochs;
  double throughput_mean = 0.0;
  double throughput_stddev = 0.0;
  double latency_mean_us = 0.0;
  double latency_stddev_us = 0.0;
  /// Aborted / attempted interactions over the measured epochs, in [0, 1].
  double abort_rate = 0.0;
  std::vector<std::string> warnings;

  bool operator==(const Report&) const = default;
};

/// Fills the cross-epoch aggregates from `epochs`.
void finalize(Report& report);

enum class ReportFormat { Csv, Json };
/// Throws ConfigError.
ReportFormat parse_format(std::string_view s);
std::string to_csv(const Report& report);
std::string to_json(const Report& report);
/// Throws InvalidArgument.
Report report_from_json(const std::string& text);
/// Throws IoError.
void emit_report(const Report& report, ReportFormat format, const std::string& path);

/// One add_items + checkout attempt.
struct Outcome {
  std::int64_t end_us = 0;
  std::int64_t latency_us = 0;
  bool committed = false;
  AbortBucket bucket = AbortBucket::App;
};

/// Generates a worker's orders: distinct sections, distinct items per section, uniform customer.
class OrderGenerator {
 public:
  OrderGenerator(const BenchmarkConfig& cfg, int worker);

  std::int64_t next_customer();
  std::vector<smartmart::OrderLine> next_order();

 private:
  const BenchmarkConfig* cfg_;
  std::mt19937_64 rng_;
};

/// A loaded store plus the closed-loop driver.
class Workload {
 public:
  /// Validates, builds the engine, registers the types and loads the store.
  explicit Workload(BenchmarkConfig config);
  ~Workload();

  Engine& engine() { return *engine_; }
  const BenchmarkConfig& config() const { return config_; }

  /// One interaction on the worker's cart.
  Outcome interact(int worker, OrderGenerator& gen);
  /// Runs the configured epochs (or the count-bounded variant) and drains detached work.
  Report run();

  std::uint64_t committed_total() const { return committed_.load(); }

 private:
  BenchmarkConfig config_;
  std::unique_ptr<Engine> engine_;
  std::atomic<std::uint64_t> committed_{0};
};

/// Workload(config).run().
Report run_benchmark(const BenchmarkConfig& config);

}  // namespace actordb::bench
