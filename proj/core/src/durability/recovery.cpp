#include "actordb/durability/recovery.hpp"

#include <unistd.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>

#include "actordb/common/error.hpp"

namespace actordb::durability {

namespace {

std::uint32_t read_u32(const std::string& s, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(s[pos + i])) << (8 * i);
  return v;
}

// A frame that fits, checksums and decodes.
std::optional<DecodedFrame> intact_at(const std::string& data, std::size_t pos, std::size_t& next) {
  if (data.size() - pos < kFrameHeader) return std::nullopt;
  std::uint32_t len = read_u32(data, pos);
  std::uint32_t crc = read_u32(data, pos + 4);
  if (len == 0 || data.size() - pos - kFrameHeader < len) return std::nullopt;
  std::string_view payload(data.data() + pos + kFrameHeader, len);
  if (crc32(payload) != crc) return std::nullopt;
  try {
    auto f = decode_payload(payload);
    next = pos + kFrameHeader + len;
    return f;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

LogScan scan_log(const std::string& path) {
  LogScan scan;
  std::ifstream in(path, std::ios::binary);
  if (!in) return scan;
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  scan.total_bytes = data.size();

  RecoveredTransaction open;
  std::uint32_t open_frames = 0;
  std::uint64_t last_tid = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    std::size_t next = 0;
    auto frame = intact_at(data, pos, next);
    if (!frame) {
      // Damage with intact frames after it is not a torn append.
      if (data.size() - pos >= kFrameHeader) {
        std::size_t skip = pos + kFrameHeader + read_u32(data, pos);
        std::size_t ignored = 0;
        if (skip < data.size() && skip > pos && intact_at(data, skip, ignored))
          raise(ErrorCode::CorruptLog, "checksum mismatch at offset " + std::to_string(pos));
      }
      break;
    }
    if (open_frames > 0 && frame->tid != open.tid)
      raise(ErrorCode::CorruptLog, "interleaved transactions at offset " + std::to_string(pos));
    if (open_frames == 0) {
      if (frame->tid <= last_tid && !scan.transactions.empty())
        raise(ErrorCode::CorruptLog, "non-increasing tid at offset " + std::to_string(pos));
      open = RecoveredTransaction{};
      open.tid = frame->tid;
    }
    pos = next;
    switch (frame->kind) {
      case FrameKind::Write: open.writes.push_back(std::move(frame->write)); ++open_frames; break;
      case FrameKind::DetachEnqueue: open.enqueued.push_back(std::move(frame->spec)); ++open_frames; break;
      case FrameKind::DetachDone: open.completed_specs.push_back(frame->spec_id); ++open_frames; break;
      case FrameKind::Commit:
        if (frame->count != open_frames) raise(ErrorCode::CorruptLog, "commit frame count mismatch");
        last_tid = open.tid;
        scan.transactions.push_back(std::move(open));
        open = RecoveredTransaction{};
        open_frames = 0;
        scan.valid_bytes = pos;
        break;
    }
  }
  return scan;
}

void truncate_log(const std::string& path, std::uint64_t valid_bytes) {
  if (::truncate(path.c_str(), static_cast<off_t>(valid_bytes)) != 0 && errno != ENOENT)
    raise(ErrorCode::IoError, "cannot truncate " + path + ": " + std::strerror(errno));
}

std::vector<txn::DetachedSpec> outstanding_specs(const LogScan& scan) {
  std::set<std::uint64_t> done;
  for (const auto& t : scan.transactions) done.insert(t.completed_specs.begin(), t.completed_specs.end());
  std::vector<txn::DetachedSpec> out;
  std::set<std::uint64_t> seen;
  for (const auto& t : scan.transactions)
    for (const auto& s : t.enqueued)
      if (!done.count(s.id) && seen.insert(s.id).second) out.push_back(s);
  return out;
}

}  // namespace actordb::durability
