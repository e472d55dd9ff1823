#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "actordb/common/error.hpp"
#include "actordb/durability/log_format.hpp"
#include "actordb/durability/recovery.hpp"
#include "actordb/durability/redo_log.hpp"

using namespace actordb;
using namespace actordb::durability;
namespace fs = std::filesystem;

namespace {

std::string temp_log(const std::string& name) {
  auto p = fs::temp_directory_path() / ("actordb_dur_" + name + ".log");
  fs::remove(p);
  return p.string();
}

CommitBatch sample_batch(int i) {
  CommitBatch b;
  b.writes.push_back({0, {"Store_Section", "100"}, "inventory", rel::WriteOp::Update, 7,
                      {Value(1), Value(2.5), Value("x"), Value(Timestamp{-5}), Value(nullptr), Value(true)}});
  b.writes.push_back({0, {"Customer", "3"}, "store_visits", rel::WriteOp::Delete, static_cast<rel::RecordId>(i), {}});
  txn::DetachedSpec s;
  s.id = 40 + i;
  s.target = {"Customer", "3"};
  s.method = "add_store_visit";
  s.args = {Value(1), Value(ValueList{Value(2), Value("y")})};
  b.enqueued.push_back(s);
  return b;
}

void append_raw(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  out << bytes;
}

}  // namespace

TEST(LogFormat, Crc32KnownVector) { EXPECT_EQ(crc32("123456789"), 0xCBF43926u); }

TEST(LogFormat, BatchRoundTrip) {
  auto bytes = encode_batch(9, sample_batch(1));
  std::vector<DecodedFrame> frames;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::uint32_t len = 0, crc = 0;
    std::memcpy(&len, bytes.data() + pos, 4);
    std::memcpy(&crc, bytes.data() + pos + 4, 4);
    std::string_view payload(bytes.data() + pos + kFrameHeader, len);
    ASSERT_EQ(crc32(payload), crc);
    frames.push_back(decode_payload(payload));
    pos += kFrameHeader + len;
  }
  ASSERT_EQ(frames.size(), 4u);
  EXPECT_EQ(frames[0].kind, FrameKind::Write);
  EXPECT_EQ(frames[0].write.image, sample_batch(1).writes[0].image);
  EXPECT_EQ(frames[0].tid, 9u);
  EXPECT_EQ(frames[2].kind, FrameKind::DetachEnqueue);
  EXPECT_EQ(frames[2].spec, sample_batch(1).enqueued[0]);
  EXPECT_EQ(frames[3].kind, FrameKind::Commit);
  EXPECT_EQ(frames[3].count, 3u);
}

TEST(LogFormat, GarbagePayloadIsCorrupt) {
  try {
    decode_payload(std::string("\x09\x01", 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptLog);
  }
}

TEST(Recovery, MissingFileScansEmpty) {
  auto s = scan_log(temp_log("missing"));
  EXPECT_TRUE(s.transactions.empty());
  EXPECT_EQ(s.total_bytes, 0u);
}

TEST(Recovery, TornTailDropsOnlyLastTransaction) {
  auto path = temp_log("torn");
  std::uint64_t tid = 0;
  {
    RedoLog log({path});
    for (int i = 0; i < 3; ++i) log.append(sample_batch(i), [&] { return ++tid; });
  }
  auto full = fs::file_size(path);
  auto third = encode_batch(3, sample_batch(2)).size();
  fs::resize_file(path, full - third / 2);
  auto s = scan_log(path);
  ASSERT_EQ(s.transactions.size(), 2u);
  EXPECT_EQ(s.valid_bytes, full - third);
  EXPECT_EQ(s.transactions[1].tid, 2u);
  truncate_log(path, s.valid_bytes);
  EXPECT_EQ(fs::file_size(path), full - third);
}

TEST(Recovery, UncommittedTailIsIgnored) {
  auto path = temp_log("uncommitted");
  auto bytes = encode_batch(1, sample_batch(0));
  auto second = encode_batch(2, sample_batch(1));
  // drop the second batch's Commit frame
  std::uint32_t commit_len = 0;
  std::size_t pos = 0, last = 0;
  while (pos < second.size()) {
    std::memcpy(&commit_len, second.data() + pos, 4);
    last = pos;
    pos += kFrameHeader + commit_len;
  }
  append_raw(path, bytes + second.substr(0, last));
  auto s = scan_log(path);
  EXPECT_EQ(s.transactions.size(), 1u);
  EXPECT_EQ(s.valid_bytes, bytes.size());
}

TEST(Recovery, FlippedByteMidLogIsCorruption) {
  auto path = temp_log("flipped");
  auto a = encode_batch(1, sample_batch(0));
  a[kFrameHeader + 3] ^= 0x40;
  append_raw(path, a + encode_batch(2, sample_batch(1)));
  try {
    scan_log(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptLog);
  }
}

TEST(Recovery, OutstandingSpecsExcludeCompleted) {
  auto path = temp_log("specs");
  auto b1 = sample_batch(0);  // spec 40
  CommitBatch b2 = sample_batch(1);  // spec 41
  CommitBatch b3;
  b3.completed_specs.push_back(40);
  append_raw(path, encode_batch(1, b1) + encode_batch(2, b2) + encode_batch(3, b3));
  auto out = outstanding_specs(scan_log(path));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].id, 41u);
}

TEST(RedoLog, InjectedFailureWritesNothing) {
  auto path = temp_log("inject");
  RedoLog log({path});
  log.inject_failures(1);
  std::uint64_t tid = 0;
  EXPECT_THROW(log.append(sample_batch(0), [&] { return ++tid; }), Error);
  log.append(sample_batch(1), [&] { return ++tid; });
  log.flush();
  auto s = scan_log(path);
  ASSERT_EQ(s.transactions.size(), 1u);
}

TEST(RedoLog, GroupCommitFlushesOnClose) {
  auto path = temp_log("group");
  {
    RedoLog log({path, FlushPolicy::Group, 2});
    std::uint64_t tid = 0;
    for (int i = 0; i < 5; ++i) log.append(sample_batch(i), [&] { return ++tid; });
  }
  EXPECT_EQ(scan_log(path).transactions.size(), 5u);
}
