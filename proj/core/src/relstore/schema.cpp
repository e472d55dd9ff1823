#include "actordb/relstore/schema.hpp"

#include <set>

#include "actordb/common/error.hpp"

namespace actordb::rel {

std::string_view to_string(ColumnType t) {
  switch (t) {
    case ColumnType::Int: return "int";
    case ColumnType::Float: return "float";
    case ColumnType::String: return "string";
    case ColumnType::Timestamp: return "timestamp";
  }
  return "?";
}

ValueKind value_kind(ColumnType t) {
  switch (t) {
    case ColumnType::Int: return ValueKind::Int;
    case ColumnType::Float: return ValueKind::Float;
    case ColumnType::String: return ValueKind::String;
    case ColumnType::Timestamp: return ValueKind::Timestamp;
  }
  return ValueKind::Any;
}

void Schema::validate() const {
  if (name.empty()) raise(ErrorCode::InvalidSchema, "relation name is empty");
  if (columns.empty()) raise(ErrorCode::InvalidSchema, "relation " + name + " has no columns");
  std::set<std::string, std::less<>> seen;
  for (const auto& c : columns) {
    if (c.name.empty()) raise(ErrorCode::InvalidSchema, "relation " + name + " has an unnamed column");
    if (!seen.insert(c.name).second) raise(ErrorCode::InvalidSchema, "duplicate column " + c.name + " in " + name);
  }
  for (const auto& ix : indexed) {
    auto pos = find(ix);
    if (!pos) raise(ErrorCode::InvalidSchema, "indexed column " + ix + " not in " + name);
    auto t = columns[*pos].type;
    if (t != ColumnType::Int && t != ColumnType::Timestamp)
      raise(ErrorCode::InvalidSchema, "indexed column " + ix + " must be int or timestamp");
  }
}

std::optional<std::size_t> Schema::find(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == column) return i;
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view column) const {
  if (auto i = find(column)) return *i;
  raise(ErrorCode::UnknownColumn, std::string(column) + " in relation " + name);
}

void Schema::conform(Row& row) const {
  if (row.size() != columns.size())
    raise(ErrorCode::TypeMismatch, name + " expects " + std::to_string(columns.size()) + " values, got " +
                                       std::to_string(row.size()));
  for (std::size_t i = 0; i < row.size(); ++i) {
    auto& v = row[i];
    auto k = v.kind();
    if (k == ValueKind::Null) continue;
    switch (columns[i].type) {
      case ColumnType::Int:
        if (k == ValueKind::Int) continue;
        break;
      case ColumnType::Float:
        if (k == ValueKind::Float) continue;
        if (k == ValueKind::Int) {
          v = Value(static_cast<double>(v.as_int()));
          continue;
        }
        break;
      case ColumnType::String:
        if (k == ValueKind::String) continue;
        break;
      case ColumnType::Timestamp:
        if (k == ValueKind::Timestamp) continue;
        if (k == ValueKind::Int) {
          v = Value(Timestamp{v.as_int()});
          continue;
        }
        break;
    }
    raise(ErrorCode::TypeMismatch, "column " + name + "." + columns[i].name + " is " +
                                       std::string(to_string(columns[i].type)) + ", got " +
                                       std::string(to_string(k)));
  }
}

}  // namespace actordb::rel
