#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "actordb/relstore/schema.hpp"

namespace actordb::rel {

/// Named read access to a row under its schema.
class RowRef {
 public:
  RowRef(const Schema& schema, const Row& row) : schema_(&schema), row_(&row) {}

  const Value& operator[](std::string_view column) const { return (*row_)[schema_->index_of(column)]; }
  const Value& at(std::size_t i) const { return (*row_)[i]; }
  std::int64_t int_(std::string_view column) const { return (*this)[column].as_int(); }
  double float_(std::string_view column) const { return (*this)[column].as_float(); }
  const std::string& string_(std::string_view column) const { return (*this)[column].as_string(); }

  const Row& row() const { return *row_; }
  const Schema& schema() const { return *schema_; }

 private:
  const Schema* schema_;
  const Row* row_;
};

enum class CompareOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge, In };

struct Condition {
  std::string column;
  CompareOp op;
  std::vector<Value> operands;
};

/// Conjunction of column conditions. An empty predicate matches every row.
class Predicate {
 public:
  static Predicate all() { return {}; }

  Predicate& where(std::string column, CompareOp op, Value operand);
  Predicate& eq(std::string column, Value operand) { return where(std::move(column), CompareOp::Eq, std::move(operand)); }
  Predicate& in(std::string column, std::vector<Value> operands);

  const std::vector<Condition>& conditions() const { return conditions_; }

 private:
  std::vector<Condition> conditions_;
};

/// Predicate resolved against a schema; numeric comparisons treat ints and floats uniformly.
class BoundPredicate {
 public:
  BoundPredicate(const Schema& schema, const Predicate& predicate);

  bool matches(const Row& row) const;

  /// Keys for an Eq/In condition on `column`, if the predicate has one.
  std::optional<std::vector<std::int64_t>> keys_for(std::size_t column) const;

 private:
  struct Bound {
    std::size_t column;
    CompareOp op;
    std::vector<Value> operands;
  };
  std::vector<Bound> bound_;
};

/// Projection by column names; empty keeps all columns.
using Projection = std::vector<std::string>;

struct Assignment {
  std::string column;
  std::function<Value(const RowRef&)> expr;

  static Assignment set(std::string column, Value v);
  /// column = column + delta, numeric.
  static Assignment add(std::string column, Value delta);
};

enum class AggKind : std::uint8_t { Sum, Avg, Count, Min, Max };

struct AggSpec {
  AggKind kind;
  std::string column;  // empty with expr set, or for COUNT(*)
  std::function<double(const RowRef&)> expr;

  static AggSpec sum(std::string column) { return {AggKind::Sum, std::move(column), {}}; }
  static AggSpec avg(std::string column) { return {AggKind::Avg, std::move(column), {}}; }
  static AggSpec count() { return {AggKind::Count, {}, {}}; }
  static AggSpec min(std::string column) { return {AggKind::Min, std::move(column), {}}; }
  static AggSpec max(std::string column) { return {AggKind::Max, std::move(column), {}}; }
  static AggSpec sum_of(std::function<double(const RowRef&)> e) { return {AggKind::Sum, {}, std::move(e)}; }
};

/// Folds `specs` over rows. SUM/AVG/MIN/MAX over zero rows yield null; COUNT yields 0.
Row fold_aggregates(const Schema& schema, const std::vector<const Row*>& rows, const std::vector<AggSpec>& specs);

/// Validates that aggregate columns exist (UnknownColumn) before any data is touched.
void check_aggregates(const Schema& schema, const std::vector<AggSpec>& specs);

Row project(const Schema& schema, const Row& row, const std::vector<std::size_t>& columns);
std::vector<std::size_t> resolve_projection(const Schema& schema, const Projection& projection);

}  // namespace actordb::rel
