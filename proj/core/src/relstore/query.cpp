#include "actordb/relstore/query.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "actordb/common/error.hpp"

namespace actordb::rel {

Predicate& Predicate::where(std::string column, CompareOp op, Value operand) {
  conditions_.push_back({std::move(column), op, {std::move(operand)}});
  return *this;
}

Predicate& Predicate::in(std::string column, std::vector<Value> operands) {
  conditions_.push_back({std::move(column), CompareOp::In, std::move(operands)});
  return *this;
}

namespace {

bool numeric(const Value& v) {
  auto k = v.kind();
  return k == ValueKind::Int || k == ValueKind::Float || k == ValueKind::Timestamp;
}

int compare_values(const Value& a, const Value& b) {
  if (numeric(a) && numeric(b) && a.kind() != b.kind()) {
    double x = a.as_float(), y = b.as_float();
    return x < y ? -1 : x > y ? 1 : 0;
  }
  auto c = a.compare(b);
  return c < 0 ? -1 : c > 0 ? 1 : 0;
}

}  // namespace

BoundPredicate::BoundPredicate(const Schema& schema, const Predicate& predicate) {
  for (const auto& c : predicate.conditions()) {
    bound_.push_back({schema.index_of(c.column), c.op, c.operands});
  }
}

bool BoundPredicate::matches(const Row& row) const {
  for (const auto& b : bound_) {
    const Value& v = row[b.column];
    if (v.is_null()) return false;
    bool ok = false;
    switch (b.op) {
      case CompareOp::Eq: ok = compare_values(v, b.operands[0]) == 0; break;
      case CompareOp::Ne: ok = compare_values(v, b.operands[0]) != 0; break;
      case CompareOp::Lt: ok = compare_values(v, b.operands[0]) < 0; break;
      case CompareOp::Le: ok = compare_values(v, b.operands[0]) <= 0; break;
      case CompareOp::Gt: ok = compare_values(v, b.operands[0]) > 0; break;
      case CompareOp::Ge: ok = compare_values(v, b.operands[0]) >= 0; break;
      case CompareOp::In:
        ok = std::any_of(b.operands.begin(), b.operands.end(),
                         [&](const Value& o) { return compare_values(v, o) == 0; });
        break;
    }
    if (!ok) return false;
  }
  return true;
}

std::optional<std::vector<std::int64_t>> BoundPredicate::keys_for(std::size_t column) const {
  for (const auto& b : bound_) {
    if (b.column != column || (b.op != CompareOp::Eq && b.op != CompareOp::In)) continue;
    std::vector<std::int64_t> keys;
    for (const auto& o : b.operands) {
      auto k = o.kind();
      if (k == ValueKind::Int || k == ValueKind::Timestamp) {
        keys.push_back(o.as_int());
      } else if (k == ValueKind::Float) {
        double d = o.as_float();
        if (std::floor(d) == d && std::abs(d) < 9.0e15) keys.push_back(static_cast<std::int64_t>(d));
      }
      // Other kinds can never equal an integer key.
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
  }
  return std::nullopt;
}

Assignment Assignment::set(std::string column, Value v) {
  return {std::move(column), [v = std::move(v)](const RowRef&) { return v; }};
}

Assignment Assignment::add(std::string column, Value delta) {
  std::string col = column;
  return {std::move(column), [col, delta = std::move(delta)](const RowRef& r) -> Value {
            const Value& cur = r[col];
            if (cur.kind() == ValueKind::Int && delta.kind() == ValueKind::Int) return cur.as_int() + delta.as_int();
            return cur.as_float() + delta.as_float();
          }};
}

void check_aggregates(const Schema& schema, const std::vector<AggSpec>& specs) {
  for (const auto& s : specs) {
    if (!s.column.empty()) {
      auto i = schema.index_of(s.column);
      auto t = schema.columns[i].type;
      if (s.kind != AggKind::Count && t == ColumnType::String)
        raise(ErrorCode::TypeMismatch, "aggregate over non-numeric column " + s.column);
    } else if (s.kind != AggKind::Count && !s.expr) {
      raise(ErrorCode::InvalidArgument, "aggregate needs a column or an expression");
    }
  }
}

Row fold_aggregates(const Schema& schema, const std::vector<const Row*>& rows, const std::vector<AggSpec>& specs) {
  check_aggregates(schema, specs);
  Row out;
  out.reserve(specs.size());
  for (const auto& s : specs) {
    if (s.kind == AggKind::Count) {
      std::int64_t n = 0;
      if (s.column.empty()) {
        n = static_cast<std::int64_t>(rows.size());
      } else {
        auto c = schema.index_of(s.column);
        for (const Row* r : rows) n += (*r)[c].is_null() ? 0 : 1;
      }
      out.emplace_back(n);
      continue;
    }
    std::optional<std::size_t> col;
    if (!s.column.empty()) col = schema.index_of(s.column);
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::int64_t n = 0;
    for (const Row* r : rows) {
      double x;
      if (col) {
        const Value& v = (*r)[*col];
        if (v.is_null()) continue;
        x = v.as_float();
      } else {
        x = s.expr(RowRef(schema, *r));
      }
      sum += x;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      ++n;
    }
    if (n == 0) {
      out.emplace_back();
      continue;
    }
    switch (s.kind) {
      case AggKind::Sum: out.emplace_back(sum); break;
      case AggKind::Avg: out.emplace_back(sum / static_cast<double>(n)); break;
      case AggKind::Min: out.emplace_back(lo); break;
      case AggKind::Max: out.emplace_back(hi); break;
      case AggKind::Count: break;
    }
  }
  return out;
}

std::vector<std::size_t> resolve_projection(const Schema& schema, const Projection& projection) {
  std::vector<std::size_t> cols;
  if (projection.empty()) {
    for (std::size_t i = 0; i < schema.arity(); ++i) cols.push_back(i);
  } else {
    for (const auto& name : projection) cols.push_back(schema.index_of(name));
  }
  return cols;
}

Row project(const Schema&, const Row& row, const std::vector<std::size_t>& columns) {
  Row out;
  out.reserve(columns.size());
  for (auto c : columns) out.push_back(row[c]);
  return out;
}

}  // namespace actordb::rel
