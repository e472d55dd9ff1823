#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>

namespace actordb::rel {

using RecordId = std::uint64_t;

/// A lockable, versioned unit of concurrency control inside one relation: either a record or a
/// structural node (the whole relation, or one key bucket of an indexed column). Slots order
/// globally by (relation id, column, id), which is the commit-time lock order.
struct SlotKey {
  static constexpr std::uint32_t kRecord = std::numeric_limits<std::uint32_t>::max();
  static constexpr std::uint32_t kWholeRelation = kRecord - 1;

  std::uint64_t relation = 0;
  std::uint32_t column = kRecord;
  std::int64_t id = 0;

  static SlotKey record(std::uint64_t relation, RecordId id) {
    return {relation, kRecord, static_cast<std::int64_t>(id)};
  }
  static SlotKey whole(std::uint64_t relation) { return {relation, kWholeRelation, 0}; }
  static SlotKey bucket(std::uint64_t relation, std::uint32_t column, std::int64_t bucket) {
    return {relation, column, bucket};
  }

  bool is_record() const { return column == kRecord; }
  bool is_structural() const { return column != kRecord; }

  auto operator<=>(const SlotKey&) const = default;
};

struct SlotKeyHash {
  std::size_t operator()(const SlotKey& k) const noexcept {
    std::uint64_t h = k.relation * 0x9e3779b97f4a7c15ULL;
    h ^= (static_cast<std::uint64_t>(k.column) << 32) + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.id) + 0x94d049bb133111ebULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace actordb::rel
