#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace actordb {

/// Microseconds on the engine clock.
struct Timestamp {
  std::int64_t micros = 0;
  auto operator<=>(const Timestamp&) const = default;
};

enum class ValueKind : std::uint8_t { Null, Bool, Int, Float, String, Timestamp, List, Any };

std::string_view to_string(ValueKind kind);

class Value;
using ValueList = std::vector<Value>;

/// Dynamically typed datum used for tuples, method arguments and method results.
/// A List holds either scalars (a tuple) or nested lists (a list of tuples).
class Value {
 public:
  using Storage = std::variant<std::monostate, bool, std::int64_t, double, std::string, Timestamp, ValueList>;

  Value() = default;
  Value(std::nullptr_t) {}
  Value(bool b) : v_(b) {}
  Value(int i) : v_(static_cast<std::int64_t>(i)) {}
  Value(long i) : v_(static_cast<std::int64_t>(i)) {}
  Value(long long i) : v_(static_cast<std::int64_t>(i)) {}
  Value(unsigned i) : v_(static_cast<std::int64_t>(i)) {}
  Value(unsigned long i) : v_(static_cast<std::int64_t>(i)) {}
  Value(double d) : v_(d) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(Timestamp t) : v_(t) {}
  Value(ValueList l) : v_(std::move(l)) {}

  ValueKind kind() const noexcept;
  bool is_null() const noexcept { return std::holds_alternative<std::monostate>(v_); }

  bool as_bool() const;
  std::int64_t as_int() const;
  /// Int and Timestamp widen to double.
  double as_float() const;
  const std::string& as_string() const;
  Timestamp as_timestamp() const;
  const ValueList& as_list() const;
  ValueList& as_list();

  const Storage& storage() const noexcept { return v_; }

  /// Total order: first by kind, then by payload. Used for deterministic sorting and map keys.
  std::strong_ordering compare(const Value& other) const;
  bool operator==(const Value& other) const { return compare(other) == 0; }
  std::strong_ordering operator<=>(const Value& other) const { return compare(other); }

  std::string to_string() const;

 private:
  Storage v_;
};

std::ostream& operator<<(std::ostream& os, const Value& v);

/// A relational row is a flat list of scalar values aligned to a schema.
using Row = std::vector<Value>;

}  // namespace actordb
