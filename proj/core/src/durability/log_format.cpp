#include "actordb/durability/log_format.hpp"

#include <zlib.h>

#include <cstring>

#include "actordb/common/error.hpp"

namespace actordb::durability {

namespace {

enum ValueTag : std::uint8_t { kNull = 0, kFalse, kTrue, kInt, kFloat, kString, kTimestamp, kList };

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_str(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(in_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(in_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string str() {
    auto n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  Value value(int depth = 0) {
    if (depth > 64) raise(ErrorCode::CorruptLog, "value nesting too deep");
    switch (u8()) {
      case kNull: return Value();
      case kFalse: return Value(false);
      case kTrue: return Value(true);
      case kInt: return Value(static_cast<std::int64_t>(u64()));
      case kFloat: {
        auto bits = u64();
        double d;
        std::memcpy(&d, &bits, sizeof d);
        return Value(d);
      }
      case kString: return Value(str());
      case kTimestamp: return Value(Timestamp{static_cast<std::int64_t>(u64())});
      case kList: {
        auto n = u32();
        ValueList l;
        for (std::uint32_t i = 0; i < n; ++i) l.push_back(value(depth + 1));
        return Value(std::move(l));
      }
      default: raise(ErrorCode::CorruptLog, "unknown value tag");
    }
  }
  void expect_end() const {
    if (pos_ != in_.size()) raise(ErrorCode::CorruptLog, "trailing bytes in log frame");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) raise(ErrorCode::CorruptLog, "log frame truncated");
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

void frame(std::string& out, const std::string& payload) {
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  put_u32(out, crc32(payload));
  out.append(payload);
}

std::string header(FrameKind kind, std::uint64_t tid) {
  std::string p;
  put_u8(p, static_cast<std::uint8_t>(kind));
  put_u64(p, tid);
  return p;
}

}  // namespace

std::uint32_t crc32(std::string_view bytes) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(
      ::crc32(c, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

void encode_value(std::string& out, const Value& v) {
  switch (v.kind()) {
    case ValueKind::Null: put_u8(out, kNull); break;
    case ValueKind::Bool: put_u8(out, v.as_bool() ? kTrue : kFalse); break;
    case ValueKind::Int:
      put_u8(out, kInt);
      put_u64(out, static_cast<std::uint64_t>(v.as_int()));
      break;
    case ValueKind::Float: {
      put_u8(out, kFloat);
      double d = v.as_float();
      std::uint64_t bits;
      std::memcpy(&bits, &d, sizeof d);
      put_u64(out, bits);
      break;
    }
    case ValueKind::String:
      put_u8(out, kString);
      put_str(out, v.as_string());
      break;
    case ValueKind::Timestamp:
      put_u8(out, kTimestamp);
      put_u64(out, static_cast<std::uint64_t>(v.as_timestamp().micros));
      break;
    case ValueKind::List:
      put_u8(out, kList);
      put_u32(out, static_cast<std::uint32_t>(v.as_list().size()));
      for (const auto& e : v.as_list()) encode_value(out, e);
      break;
    case ValueKind::Any: raise(ErrorCode::TypeMismatch, "cannot encode value");
  }
}

std::string encode_batch(std::uint64_t tid, const CommitBatch& batch) {
  std::string out;
  std::uint32_t count = 0;
  for (const auto& w : batch.writes) {
    auto p = header(FrameKind::Write, tid);
    put_str(p, w.actor.type_name);
    put_str(p, w.actor.actor_name);
    put_str(p, w.relation);
    put_u8(p, static_cast<std::uint8_t>(w.op));
    put_u64(p, w.record);
    put_u32(p, static_cast<std::uint32_t>(w.image.size()));
    for (const auto& v : w.image) encode_value(p, v);
    frame(out, p);
    ++count;
  }
  for (const auto& s : batch.enqueued) {
    auto p = header(FrameKind::DetachEnqueue, tid);
    put_u64(p, s.id);
    put_str(p, s.target.type_name);
    put_str(p, s.target.actor_name);
    put_str(p, s.method);
    encode_value(p, Value(s.args));
    put_u8(p, static_cast<std::uint8_t>(s.trigger));
    put_u8(p, static_cast<std::uint8_t>(s.delivery));
    put_u64(p, s.parent_context);
    put_u32(p, s.depth);
    frame(out, p);
    ++count;
  }
  for (auto id : batch.completed_specs) {
    auto p = header(FrameKind::DetachDone, tid);
    put_u64(p, id);
    frame(out, p);
    ++count;
  }
  auto p = header(FrameKind::Commit, tid);
  put_u32(p, count);
  frame(out, p);
  return out;
}

DecodedFrame decode_payload(std::string_view payload) {
  Reader r(payload);
  DecodedFrame f{};
  auto kind = r.u8();
  if (kind < 1 || kind > 4) raise(ErrorCode::CorruptLog, "unknown frame kind");
  f.kind = static_cast<FrameKind>(kind);
  f.tid = r.u64();
  switch (f.kind) {
    case FrameKind::Write: {
      f.write.tid = f.tid;
      f.write.actor.type_name = r.str();
      f.write.actor.actor_name = r.str();
      f.write.relation = r.str();
      auto op = r.u8();
      if (op > 2) raise(ErrorCode::CorruptLog, "unknown write op");
      f.write.op = static_cast<rel::WriteOp>(op);
      f.write.record = r.u64();
      auto n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) f.write.image.push_back(r.value());
      break;
    }
    case FrameKind::DetachEnqueue: {
      f.spec.id = r.u64();
      f.spec.target.type_name = r.str();
      f.spec.target.actor_name = r.str();
      f.spec.method = r.str();
      auto args = r.value();
      if (args.kind() != ValueKind::List) raise(ErrorCode::CorruptLog, "detached args are not a list");
      f.spec.args = args.as_list();
      auto trig = r.u8();
      auto del = r.u8();
      if (trig > 2 || del > 2) raise(ErrorCode::CorruptLog, "bad detached spec flags");
      f.spec.trigger = static_cast<txn::Trigger>(trig);
      f.spec.delivery = static_cast<txn::Delivery>(del);
      f.spec.parent_context = r.u64();
      f.spec.depth = r.u32();
      break;
    }
    case FrameKind::DetachDone: f.spec_id = r.u64(); break;
    case FrameKind::Commit: f.count = r.u32(); break;
  }
  r.expect_end();
  return f;
}

}  // namespace actordb::durability
