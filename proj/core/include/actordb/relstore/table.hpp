#pragma once

#include <vector>

#include "actordb/relstore/query.hpp"
#include "actordb/relstore/schema.hpp"

namespace actordb::rel {

/// A free-standing relation value: query results, bulk invocation results, and the
/// list/relation conversions. Not versioned and not owned by an actor.
class Table {
 public:
  Table() = default;
  explicit Table(Schema schema) : schema_(std::move(schema)) {}

  const Schema& schema() const { return schema_; }
  const std::vector<Row>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  /// Throws TypeMismatch.
  void append(Row row);

  Table select(const Predicate& predicate, const Projection& projection = {}) const;
  Row aggregate(const Predicate& predicate, const std::vector<AggSpec>& specs) const;

  bool operator==(const Table&) const = default;

 private:
  Schema schema_;
  std::vector<Row> rows_;
};

/// Rows must be lists of scalars matching `schema`. Insertion order is preserved.
Table list_to_relation(const ValueList& values, const Schema& schema);
ValueList relation_to_list(const Table& table);

}  // namespace actordb::rel
