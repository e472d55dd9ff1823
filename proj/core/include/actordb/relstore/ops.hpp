#pragma once

#include <cstdint>
#include <vector>

#include "actordb/relstore/query.hpp"
#include "actordb/relstore/relation.hpp"
#include "actordb/relstore/window.hpp"
#include "actordb/txn/transaction.hpp"

namespace actordb::rel {

// Transactional relation access. Reads record (slot, version) pairs into the context's read set
// and footprint; writes are staged in the context and become visible to it immediately.

/// Throws TypeMismatch.
RecordId insert(const txn::Context& ctx, Relation& rel, Row row);

/// Throws UnknownColumn.
std::vector<Row> scan(const txn::Context& ctx, Relation& rel, const Predicate& predicate,
                      const Projection& projection = {});

/// Like scan, but keeps record ids alongside full rows (ascending id).
std::vector<std::pair<RecordId, Row>> scan_records(const txn::Context& ctx, Relation& rel, const Predicate& predicate);

/// Assignments are evaluated against the pre-update row. Throws UnknownColumn, TypeMismatch.
std::size_t update(const txn::Context& ctx, Relation& rel, const Predicate& predicate,
                   const std::vector<Assignment>& assignments);

std::size_t erase(const txn::Context& ctx, Relation& rel, const Predicate& predicate);

Row aggregate(const txn::Context& ctx, Relation& rel, const Predicate& predicate, const std::vector<AggSpec>& specs);

/// Per requested key (in request order), statistics of `value_col` over the k rows with the
/// largest `order_col` (ties: larger record id). Staged rows of `ctx` are included.
std::vector<WindowStats> window_stats(const txn::Context& ctx, Relation& rel, std::string_view partition_col,
                                      std::string_view order_col, std::string_view value_col, std::int64_t k,
                                      const std::vector<Value>& keys);

/// Creates an empty relation inside an actor's relation set. Throws DuplicateRelation, InvalidSchema.
template <typename Map, typename Factory>
Relation& create_relation(Map& relations, const Schema& schema, Factory&& make);

}  // namespace actordb::rel

#include "actordb/common/error.hpp"

namespace actordb::rel {

template <typename Map, typename Factory>
Relation& create_relation(Map& relations, const Schema& schema, Factory&& make) {
  schema.validate();
  if (relations.find(schema.name) != relations.end())
    raise(ErrorCode::DuplicateRelation, "relation " + schema.name + " already exists");
  auto [it, ok] = relations.emplace(schema.name, make(schema));
  return *it->second;
}

}  // namespace actordb::rel
