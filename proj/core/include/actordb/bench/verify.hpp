#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "actordb/bench/config.hpp"

namespace actordb {
class Engine;
}

namespace actordb::bench {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double max_error = 0.0;
  double seconds = 0.0;
  std::string detail;  // first failure, or a summary
};

/// variable_discount against a from-scratch window mean/stddev.
SuiteResult discount_suite(std::size_t cases = 1000, std::uint64_t seed = 1);

/// add_items + checkout on small random stores against a sequential re-implementation.
SuiteResult checkout_suite(std::size_t stores = 200, std::uint64_t seed = 2);

/// Interleaved read/write transactions over shared registers; committed outcome must match
/// some serial order of the committed transactions.
SuiteResult serializability_suite(std::size_t schedules = 500, std::uint64_t seed = 3);

/// Inventory and history totals of every section, plus store visit count.
struct StoreImage {
  std::map<std::int64_t, std::int64_t> stock;         // i_id -> quantity
  std::map<std::int64_t, std::int64_t> sold;          // i_id -> sum of history quantities
  std::map<std::int64_t, std::int64_t> history_rows;  // i_id -> rows
  std::size_t store_visits = 0;
};
StoreImage capture_store(Engine& engine);

/// Stock lost equals history gained per item; store visits grew by `committed` rows.
SuiteResult conservation_audit(const StoreImage& before, const StoreImage& after, std::uint64_t committed);

/// Count-bounded concurrent run with replenishment off, then the audit above.
SuiteResult conservation_suite(int workers = 4, int interactions = 200, std::uint64_t seed = 4,
                               DispatchMode mode = DispatchMode::Async);

std::vector<SuiteResult> run_all_suites(std::uint64_t seed = 1);

}  // namespace actordb::bench
