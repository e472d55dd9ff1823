#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actordb/common/value.hpp"

namespace actordb::rel {

enum class ColumnType : std::uint8_t { Int, Float, String, Timestamp };

std::string_view to_string(ColumnType t);
ValueKind value_kind(ColumnType t);

struct Column {
  std::string name;
  ColumnType type;

  bool operator==(const Column&) const = default;
};

/// Relation schema. `indexed` names integer/timestamp columns that get a hash index; point and
/// IN predicates on those columns are answered from the index.
struct Schema {
  std::string name;
  std::vector<Column> columns;
  bool encrypted = false;
  std::vector<std::string> indexed;

  /// Throws InvalidSchema.
  void validate() const;

  std::optional<std::size_t> find(std::string_view column) const;
  /// Throws UnknownColumn.
  std::size_t index_of(std::string_view column) const;
  std::size_t arity() const { return columns.size(); }

  /// Throws TypeMismatch when arity or a value kind disagrees. Ints are accepted for Float and
  /// Timestamp columns and converted in place; nulls are accepted anywhere.
  void conform(Row& row) const;

  bool operator==(const Schema&) const = default;
};

}  // namespace actordb::rel
