#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "actordb/common/address.hpp"
#include "actordb/common/value.hpp"
#include "actordb/relstore/relation.hpp"
#include "actordb/txn/detached.hpp"

namespace actordb::durability {

// On-disk layout: a sequence of frames
//   u32 payload_length | u32 crc32(payload) | payload
// where payload starts with a FrameKind byte followed by the u64 tid. All integers are
// little-endian. The frames of one tid are contiguous and end with a Commit frame.

enum class FrameKind : std::uint8_t { Write = 1, DetachEnqueue = 2, DetachDone = 3, Commit = 4 };

/// Redo record: post-image of one committed write to a durable actor's relation.
struct LogRecord {
  std::uint64_t tid = 0;
  ActorAddress actor;
  std::string relation;
  rel::WriteOp op = rel::WriteOp::Insert;
  rel::RecordId record = 0;
  Row image;

  bool operator==(const LogRecord&) const = default;
};

/// Everything one commit contributes to the log.
struct CommitBatch {
  std::vector<LogRecord> writes;
  std::vector<txn::DetachedSpec> enqueued;
  std::vector<std::uint64_t> completed_specs;

  bool empty() const { return writes.empty() && enqueued.empty() && completed_specs.empty(); }
};

inline constexpr std::size_t kFrameHeader = 8;

std::uint32_t crc32(std::string_view bytes);

/// Serializes `batch` under `tid` as contiguous frames ending in a Commit frame.
std::string encode_batch(std::uint64_t tid, const CommitBatch& batch);

void encode_value(std::string& out, const Value& v);

struct DecodedFrame {
  FrameKind kind;
  std::uint64_t tid;
  LogRecord write;            // Write
  txn::DetachedSpec spec;     // DetachEnqueue
  std::uint64_t spec_id = 0;  // DetachDone
  std::uint32_t count = 0;    // Commit: number of frames it closes
};

/// Decodes one payload (without the 8-byte frame header). Throws CorruptLog on malformed input.
DecodedFrame decode_payload(std::string_view payload);

}  // namespace actordb::durability
