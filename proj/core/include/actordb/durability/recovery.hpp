#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actordb/durability/log_format.hpp"

namespace actordb::durability {

struct RecoveryReport {
  std::uint64_t tids_replayed = 0;
  std::uint64_t truncated_tail_bytes = 0;
  std::uint64_t detached_restored = 0;

  bool operator==(const RecoveryReport&) const = default;
};

struct RecoveredTransaction {
  std::uint64_t tid = 0;
  std::vector<LogRecord> writes;
  std::vector<txn::DetachedSpec> enqueued;
  std::vector<std::uint64_t> completed_specs;
};

struct LogScan {
  std::vector<RecoveredTransaction> transactions;  // tid order
  std::uint64_t valid_bytes = 0;                   // end of the last complete transaction
  std::uint64_t total_bytes = 0;
};

/// Reads a log, keeping only transactions terminated by a Commit frame. A torn or uncommitted
/// tail is reported, not an error. A checksum failure followed by further intact frames is
/// corruption and throws CorruptLog. A missing file scans as empty.
LogScan scan_log(const std::string& path);

/// Cuts the file back to `valid_bytes` so later appends continue after the last commit.
void truncate_log(const std::string& path, std::uint64_t valid_bytes);

/// Detached specs whose enqueue was logged but whose completion was not, in log order.
std::vector<txn::DetachedSpec> outstanding_specs(const LogScan& scan);

}  // namespace actordb::durability
