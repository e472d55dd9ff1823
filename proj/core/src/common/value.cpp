#include "actordb/common/value.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "actordb/common/error.hpp"

namespace actordb {

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Null: return "null";
    case ValueKind::Bool: return "bool";
    case ValueKind::Int: return "int";
    case ValueKind::Float: return "float";
    case ValueKind::String: return "string";
    case ValueKind::Timestamp: return "timestamp";
    case ValueKind::List: return "list";
    case ValueKind::Any: return "any";
  }
  return "?";
}

ValueKind Value::kind() const noexcept {
  switch (v_.index()) {
    case 0: return ValueKind::Null;
    case 1: return ValueKind::Bool;
    case 2: return ValueKind::Int;
    case 3: return ValueKind::Float;
    case 4: return ValueKind::String;
    case 5: return ValueKind::Timestamp;
    default: return ValueKind::List;
  }
}

namespace {

[[noreturn]] void mismatch(ValueKind want, ValueKind have) {
  raise(ErrorCode::TypeMismatch,
        "expected " + std::string(to_string(want)) + " value, got " + std::string(to_string(have)));
}

}  // namespace

bool Value::as_bool() const {
  if (auto* b = std::get_if<bool>(&v_)) return *b;
  mismatch(ValueKind::Bool, kind());
}

std::int64_t Value::as_int() const {
  if (auto* i = std::get_if<std::int64_t>(&v_)) return *i;
  if (auto* t = std::get_if<Timestamp>(&v_)) return t->micros;
  mismatch(ValueKind::Int, kind());
}

double Value::as_float() const {
  if (auto* d = std::get_if<double>(&v_)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&v_)) return static_cast<double>(*i);
  if (auto* t = std::get_if<Timestamp>(&v_)) return static_cast<double>(t->micros);
  mismatch(ValueKind::Float, kind());
}

const std::string& Value::as_string() const {
  if (auto* s = std::get_if<std::string>(&v_)) return *s;
  mismatch(ValueKind::String, kind());
}

Timestamp Value::as_timestamp() const {
  if (auto* t = std::get_if<Timestamp>(&v_)) return *t;
  if (auto* i = std::get_if<std::int64_t>(&v_)) return Timestamp{*i};
  mismatch(ValueKind::Timestamp, kind());
}

const ValueList& Value::as_list() const {
  if (auto* l = std::get_if<ValueList>(&v_)) return *l;
  mismatch(ValueKind::List, kind());
}

ValueList& Value::as_list() {
  if (auto* l = std::get_if<ValueList>(&v_)) return *l;
  mismatch(ValueKind::List, kind());
}

std::strong_ordering Value::compare(const Value& other) const {
  if (v_.index() != other.v_.index()) return v_.index() <=> other.v_.index();
  switch (v_.index()) {
    case 0: return std::strong_ordering::equal;
    case 1: return std::get<bool>(v_) <=> std::get<bool>(other.v_);
    case 2: return std::get<std::int64_t>(v_) <=> std::get<std::int64_t>(other.v_);
    case 3: {
      // Bitwise-stable total order for doubles; NaN sorts last.
      double a = std::get<double>(v_), b = std::get<double>(other.v_);
      if (a < b) return std::strong_ordering::less;
      if (a > b) return std::strong_ordering::greater;
      if (a == b) return std::strong_ordering::equal;
      return std::isnan(a) == std::isnan(b) ? std::strong_ordering::equal
             : std::isnan(a)                ? std::strong_ordering::greater
                                            : std::strong_ordering::less;
    }
    case 4: {
      int c = std::get<std::string>(v_).compare(std::get<std::string>(other.v_));
      return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }
    case 5: return std::get<Timestamp>(v_) <=> std::get<Timestamp>(other.v_);
    default: {
      const auto& a = std::get<ValueList>(v_);
      const auto& b = std::get<ValueList>(other.v_);
      for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        auto c = a[i].compare(b[i]);
        if (c != 0) return c;
      }
      return a.size() <=> b.size();
    }
  }
}

std::string Value::to_string() const {
  std::ostringstream os;
  os << *this;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Value& v) {
  switch (v.kind()) {
    case ValueKind::Null: return os << "null";
    case ValueKind::Bool: return os << (v.as_bool() ? "true" : "false");
    case ValueKind::Int: return os << v.as_int();
    case ValueKind::Float: return os << v.as_float();
    case ValueKind::String: return os << '\'' << v.as_string() << '\'';
    case ValueKind::Timestamp: return os << '@' << v.as_timestamp().micros;
    default: {
      os << '(';
      const auto& l = v.as_list();
      for (std::size_t i = 0; i < l.size(); ++i) os << (i ? ", " : "") << l[i];
      return os << ')';
    }
  }
}

}  // namespace actordb
