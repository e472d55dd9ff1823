#include "actordb/relstore/relation.hpp"

#include <algorithm>
#include <mutex>

#include "actordb/common/error.hpp"

namespace actordb::rel {

std::atomic<std::uint64_t> Relation::next_relation_id_{1};

Relation::Relation(Schema schema, ActorAddress owner, bool durable, std::int64_t scan_granule)
    : id_(next_relation_id_.fetch_add(1, std::memory_order_relaxed)),
      schema_(std::move(schema)),
      owner_(std::move(owner)),
      durable_(durable),
      granule_(std::max<std::int64_t>(1, scan_granule)) {
  schema_.validate();
  for (const auto& name : schema_.indexed) indexes_.push_back(Index{schema_.index_of(name), {}, {}});
}

std::int64_t Relation::bucket_of(std::int64_t key) const {
  if (granule_ == 1) return key;
  // Floor division so negative keys bucket consistently.
  std::int64_t q = key / granule_;
  if ((key % granule_ != 0) && ((key < 0) != (granule_ < 0))) --q;
  return q;
}

Relation::Index* Relation::index_for(std::uint32_t column) {
  for (auto& ix : indexes_)
    if (ix.column == column) return &ix;
  return nullptr;
}

const Relation::Index* Relation::index_for(std::uint32_t column) const {
  for (const auto& ix : indexes_)
    if (ix.column == column) return &ix;
  return nullptr;
}

Relation::StructSlot* Relation::struct_slot(const SlotKey& slot) {
  if (slot.column == SlotKey::kWholeRelation) return &whole_;
  Index* ix = index_for(slot.column);
  if (!ix) return nullptr;
  return &ix->buckets[slot.id];
}

const Relation::StructSlot* Relation::struct_slot(const SlotKey& slot) const {
  if (slot.column == SlotKey::kWholeRelation) return &whole_;
  const Index* ix = index_for(slot.column);
  if (!ix) return nullptr;
  auto it = ix->buckets.find(slot.id);
  return it == ix->buckets.end() ? nullptr : &it->second;
}

Relation::Observation Relation::observe(const BoundPredicate& predicate) const {
  Observation out;
  std::shared_lock lock(mu_);
  for (const auto& ix : indexes_) {
    auto keys = predicate.keys_for(ix.column);
    if (!keys) continue;
    std::vector<std::int64_t> buckets;
    for (auto key : *keys) {
      buckets.push_back(bucket_of(key));
      auto it = ix.ids.find(key);
      if (it == ix.ids.end()) continue;
      for (RecordId id : it->second) {
        const Record& rec = records_.at(id);
        bool m = predicate.matches(rec.row);
        out.rows.push_back({id, rec.version, m, m ? rec.row : Row{}});
      }
    }
    std::sort(buckets.begin(), buckets.end());
    buckets.erase(std::unique(buckets.begin(), buckets.end()), buckets.end());
    for (auto b : buckets) {
      auto it = ix.buckets.find(b);
      out.structure.emplace_back(SlotKey::bucket(id_, static_cast<std::uint32_t>(ix.column), b),
                                 it == ix.buckets.end() ? 0 : it->second.version);
    }
    std::sort(out.rows.begin(), out.rows.end(), [](const Observed& a, const Observed& b) { return a.id < b.id; });
    return out;
  }
  out.structure.emplace_back(SlotKey::whole(id_), whole_.version);
  out.rows.reserve(records_.size());
  for (const auto& [id, rec] : records_) {
    bool m = predicate.matches(rec.row);
    out.rows.push_back({id, rec.version, m, m ? rec.row : Row{}});
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const Observed& a, const Observed& b) { return a.id < b.id; });
  return out;
}

std::optional<Relation::Observed> Relation::observe_record(RecordId id) const {
  std::shared_lock lock(mu_);
  auto it = records_.find(id);
  if (it == records_.end()) return std::nullopt;
  return Observed{id, it->second.version, true, it->second.row};
}

std::vector<SlotKey> Relation::structural_slots(const Row& row) const {
  std::vector<SlotKey> slots{SlotKey::whole(id_)};
  for (const auto& ix : indexes_) {
    const Value& v = row[ix.column];
    if (v.is_null()) continue;
    slots.push_back(SlotKey::bucket(id_, static_cast<std::uint32_t>(ix.column), bucket_of(v.as_int())));
  }
  return slots;
}

Relation::LockResult Relation::try_lock(const SlotKey& slot, std::uint64_t owner) {
  std::unique_lock lock(mu_);
  std::uint64_t* holder = nullptr;
  if (slot.is_record()) {
    auto it = records_.find(static_cast<RecordId>(slot.id));
    if (it == records_.end()) return LockResult::Missing;
    holder = &it->second.lock_owner;
  } else {
    StructSlot* s = struct_slot(slot);
    if (!s) return LockResult::Missing;
    holder = &s->lock_owner;
  }
  if (*holder == owner) return LockResult::Acquired;
  if (*holder != 0) return LockResult::Busy;
  *holder = owner;
  return LockResult::Acquired;
}

void Relation::unlock(const SlotKey& slot, std::uint64_t owner) {
  std::unique_lock lock(mu_);
  if (slot.is_record()) {
    auto it = records_.find(static_cast<RecordId>(slot.id));
    if (it != records_.end() && it->second.lock_owner == owner) it->second.lock_owner = 0;
  } else if (StructSlot* s = struct_slot(slot); s && s->lock_owner == owner) {
    s->lock_owner = 0;
  }
}

bool Relation::validate(const SlotKey& slot, std::uint64_t observed_version, std::uint64_t owner) const {
  std::shared_lock lock(mu_);
  if (slot.is_record()) {
    auto it = records_.find(static_cast<RecordId>(slot.id));
    if (it == records_.end()) return false;
    const Record& r = it->second;
    return r.version == observed_version && (r.lock_owner == 0 || r.lock_owner == owner);
  }
  const StructSlot* s = struct_slot(slot);
  if (!s) return observed_version == 0;
  return s->version == observed_version && (s->lock_owner == 0 || s->lock_owner == owner);
}

void Relation::index_add(RecordId id, const Row& row) {
  for (auto& ix : indexes_) {
    const Value& v = row[ix.column];
    if (v.is_null()) continue;
    auto& ids = ix.ids[v.as_int()];
    ids.insert(std::upper_bound(ids.begin(), ids.end(), id), id);
  }
}

void Relation::index_remove(RecordId id, const Row& row) {
  for (auto& ix : indexes_) {
    const Value& v = row[ix.column];
    if (v.is_null()) continue;
    auto it = ix.ids.find(v.as_int());
    if (it == ix.ids.end()) continue;
    auto& ids = it->second;
    ids.erase(std::remove(ids.begin(), ids.end(), id), ids.end());
    if (ids.empty()) ix.ids.erase(it);
  }
}

void Relation::bump_structure(const Row& row) {
  ++whole_.version;
  for (auto& ix : indexes_) {
    const Value& v = row[ix.column];
    if (v.is_null()) continue;
    ++ix.buckets[bucket_of(v.as_int())].version;
  }
}

void Relation::put(RecordId id, Row row) {
  auto it = records_.find(id);
  if (it != records_.end()) {
    index_remove(id, it->second.row);
    bump_structure(it->second.row);
    it->second.row = std::move(row);
    ++it->second.version;
    index_add(id, it->second.row);
    bump_structure(it->second.row);
  } else {
    index_add(id, row);
    bump_structure(row);
    records_.emplace(id, Record{std::move(row), 1, 0});
  }
  RecordId next = next_id_.load(std::memory_order_relaxed);
  while (next <= id && !next_id_.compare_exchange_weak(next, id + 1, std::memory_order_relaxed)) {
  }
}

void Relation::install(const std::map<RecordId, StagedWrite>& writes, const std::vector<SlotKey>& locked,
                       std::uint64_t owner) {
  std::unique_lock lock(mu_);
  for (const auto& [id, w] : writes) {
    switch (w.op) {
      case WriteOp::Insert:
        index_add(id, w.row);
        bump_structure(w.row);
        records_.insert_or_assign(id, Record{w.row, 1, 0});
        break;
      case WriteOp::Update: {
        auto it = records_.find(id);
        if (it == records_.end()) break;  // excluded by validation
        Record& r = it->second;
        bool key_moved = false;
        for (const auto& ix : indexes_)
          if (r.row[ix.column] != w.row[ix.column]) key_moved = true;
        if (key_moved) {
          index_remove(id, r.row);
          bump_structure(r.row);
          index_add(id, w.row);
          bump_structure(w.row);
        }
        r.row = w.row;
        ++r.version;
        r.lock_owner = 0;
        break;
      }
      case WriteOp::Delete: {
        auto it = records_.find(id);
        if (it == records_.end()) break;
        index_remove(id, it->second.row);
        bump_structure(it->second.row);
        records_.erase(it);
        break;
      }
    }
  }
  for (const auto& slot : locked) {
    if (slot.is_record()) {
      auto it = records_.find(static_cast<RecordId>(slot.id));
      if (it != records_.end() && it->second.lock_owner == owner) it->second.lock_owner = 0;
    } else if (StructSlot* s = struct_slot(slot); s && s->lock_owner == owner) {
      s->lock_owner = 0;
    }
  }
}

RecordId Relation::load(Row row) {
  schema_.conform(row);
  std::unique_lock lock(mu_);
  RecordId id = next_id_.fetch_add(1, std::memory_order_relaxed);
  index_add(id, row);
  records_.emplace(id, Record{std::move(row), 1, 0});
  return id;
}

void Relation::upsert(RecordId id, Row row) {
  schema_.conform(row);
  std::unique_lock lock(mu_);
  put(id, std::move(row));
}

void Relation::erase(RecordId id) {
  std::unique_lock lock(mu_);
  auto it = records_.find(id);
  if (it == records_.end()) return;
  index_remove(id, it->second.row);
  bump_structure(it->second.row);
  records_.erase(it);
}

std::vector<std::pair<RecordId, Row>> Relation::snapshot() const {
  std::shared_lock lock(mu_);
  std::vector<std::pair<RecordId, Row>> out;
  out.reserve(records_.size());
  for (const auto& [id, r] : records_) out.emplace_back(id, r.row);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::size_t Relation::size() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

std::uint64_t Relation::structural_version() const {
  std::shared_lock lock(mu_);
  return whole_.version;
}

std::uint64_t Relation::record_version(RecordId id) const {
  std::shared_lock lock(mu_);
  auto it = records_.find(id);
  return it == records_.end() ? 0 : it->second.version;
}

}  // namespace actordb::rel
