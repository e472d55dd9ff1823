#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "actordb/common/address.hpp"
#include "actordb/relstore/query.hpp"
#include "actordb/relstore/schema.hpp"
#include "actordb/relstore/slot.hpp"

namespace actordb::rel {

enum class WriteOp : std::uint8_t { Insert, Update, Delete };

/// A write staged by a transaction against one record; `row` is the post-image (empty for deletes).
struct StagedWrite {
  WriteOp op;
  Row row;
};

/// Committed contents of one actor-owned relation with per-record versions and structural
/// versions for scan validation. All transactional access goes through txn contexts; the methods
/// here are the storage half of the optimistic protocol.
class Relation {
 public:
  struct Observed {
    RecordId id;
    std::uint64_t version;
    bool matched;  // committed row satisfied the predicate; `row` is filled only then
    Row row;
  };

  struct Observation {
    std::vector<Observed> rows;  // ascending record id
    std::vector<std::pair<SlotKey, std::uint64_t>> structure;
  };

  /// `scan_granule` groups index keys into buckets of that width for structural versions.
  Relation(Schema schema, ActorAddress owner, bool durable, std::int64_t scan_granule = 1);

  Relation(const Relation&) = delete;
  Relation& operator=(const Relation&) = delete;

  std::uint64_t id() const noexcept { return id_; }
  const Schema& schema() const noexcept { return schema_; }
  const ActorAddress& owner() const noexcept { return owner_; }
  bool durable() const noexcept { return durable_; }

  /// Every record examined for `predicate` (matching ones carry their row), with the structural
  /// slots the selection depended on. Index-backed when the predicate constrains an indexed
  /// column by Eq/In; otherwise a full scan guarded by the whole-relation slot.
  Observation observe(const BoundPredicate& predicate) const;
  std::optional<Observed> observe_record(RecordId id) const;

  RecordId allocate_id() { return next_id_.fetch_add(1, std::memory_order_relaxed); }

  /// Structural slots an insert or delete of `row` changes.
  std::vector<SlotKey> structural_slots(const Row& row) const;

  // Commit protocol. Locks are owned by a transaction token; a slot locked by another owner
  // fails validation.
  enum class LockResult : std::uint8_t { Acquired, Busy, Missing };
  LockResult try_lock(const SlotKey& slot, std::uint64_t owner);
  void unlock(const SlotKey& slot, std::uint64_t owner);
  bool validate(const SlotKey& slot, std::uint64_t observed_version, std::uint64_t owner) const;
  /// Applies writes, bumps record and structural versions, then releases `locked`.
  void install(const std::map<RecordId, StagedWrite>& writes, const std::vector<SlotKey>& locked,
               std::uint64_t owner);

  // Non-transactional access for loaders and recovery.
  RecordId load(Row row);
  void upsert(RecordId id, Row row);
  void erase(RecordId id);
  std::vector<std::pair<RecordId, Row>> snapshot() const;
  std::size_t size() const;
  std::uint64_t structural_version() const;
  std::uint64_t record_version(RecordId id) const;

 private:
  struct Record {
    Row row;
    std::uint64_t version = 0;
    std::uint64_t lock_owner = 0;
  };
  struct StructSlot {
    std::uint64_t version = 0;
    std::uint64_t lock_owner = 0;
  };
  struct Index {
    std::size_t column;
    std::unordered_map<std::int64_t, std::vector<RecordId>> ids;
    std::unordered_map<std::int64_t, StructSlot> buckets;
  };

  std::int64_t bucket_of(std::int64_t key) const;
  StructSlot* struct_slot(const SlotKey& slot);
  const StructSlot* struct_slot(const SlotKey& slot) const;
  Index* index_for(std::uint32_t column);
  const Index* index_for(std::uint32_t column) const;
  void index_add(RecordId id, const Row& row);
  void index_remove(RecordId id, const Row& row);
  void put(RecordId id, Row row);
  void bump_structure(const Row& row);

  static std::atomic<std::uint64_t> next_relation_id_;

  const std::uint64_t id_;
  Schema schema_;
  ActorAddress owner_;
  bool durable_;
  std::int64_t granule_;

  mutable std::shared_mutex mu_;
  std::unordered_map<RecordId, Record> records_;
  StructSlot whole_;
  std::vector<Index> indexes_;
  std::atomic<RecordId> next_id_{1};
};

}  // namespace actordb::rel
