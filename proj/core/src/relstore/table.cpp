#include "actordb/relstore/table.hpp"

#include "actordb/common/error.hpp"

namespace actordb::rel {

void Table::append(Row row) {
  schema_.conform(row);
  rows_.push_back(std::move(row));
}

Table Table::select(const Predicate& predicate, const Projection& projection) const {
  BoundPredicate bound(schema_, predicate);
  auto cols = resolve_projection(schema_, projection);
  Schema out_schema{schema_.name, {}, schema_.encrypted, {}};
  for (auto c : cols) out_schema.columns.push_back(schema_.columns[c]);
  Table out(std::move(out_schema));
  for (const auto& r : rows_)
    if (bound.matches(r)) out.rows_.push_back(project(schema_, r, cols));
  return out;
}

Row Table::aggregate(const Predicate& predicate, const std::vector<AggSpec>& specs) const {
  check_aggregates(schema_, specs);
  BoundPredicate bound(schema_, predicate);
  std::vector<const Row*> matching;
  for (const auto& r : rows_)
    if (bound.matches(r)) matching.push_back(&r);
  return fold_aggregates(schema_, matching, specs);
}

Table list_to_relation(const ValueList& values, const Schema& schema) {
  schema.validate();
  Table t(schema);
  for (const auto& v : values) {
    if (v.kind() != ValueKind::List) raise(ErrorCode::TypeMismatch, "list element is not a tuple");
    t.append(v.as_list());
  }
  return t;
}

ValueList relation_to_list(const Table& table) {
  ValueList out;
  out.reserve(table.size());
  for (const auto& r : table.rows()) out.emplace_back(ValueList(r));
  return out;
}

}  // namespace actordb::rel
