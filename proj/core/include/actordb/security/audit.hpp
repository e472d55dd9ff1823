#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "actordb/security/access.hpp"

namespace actordb::security {

struct AuditRecord {
  std::uint64_t seq = 0;
  std::int64_t time_us = 0;
  std::optional<CallerFrame> caller;  // nullopt: external client
  CallTarget target;
  Decision decision = Decision::Allow;
  std::uint64_t txn = 0;  // transaction context id
  std::string note;

  bool operator==(const AuditRecord&) const = default;
};

/// Append-only audit trail; the newest `capacity` records are retained.
class AuditLog {
 public:
  explicit AuditLog(std::size_t capacity = 1 << 16) : capacity_(capacity) {}

  std::uint64_t append(AuditRecord record);
  std::vector<AuditRecord> tail(std::size_t n) const;
  std::uint64_t total() const;
  void clear();

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<AuditRecord> records_;
  std::uint64_t next_seq_ = 1;
};

std::string to_json_line(const AuditRecord& record);
std::string to_json_lines(const std::vector<AuditRecord>& records);
AuditRecord audit_from_json(const std::string& line);

}  // namespace actordb::security
