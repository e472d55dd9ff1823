#include "actordb/relstore/ops.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

#include "actordb/common/error.hpp"

namespace actordb::rel {

using txn::RelationStage;

namespace {

struct Hit {
  RecordId id;
  Row row;
};

// Reads committed rows through `predicate`, overlays the context's staged writes and records
// the read footprint. Caller must not hold the transaction mutex.
std::vector<Hit> read_through(const txn::Context& ctx, Relation& rel, const BoundPredicate& pred) {
  auto obs = rel.observe(pred);
  txn::Transaction& t = ctx.txn();
  std::lock_guard lock(t.mutex());
  for (const auto& [slot, version] : obs.structure) t.note_read(ctx.node(), slot, version, &rel);

  const RelationStage* stage = t.find_stage(rel);
  std::vector<Hit> hits;
  std::set<RecordId> seen;
  for (auto& o : obs.rows) {
    auto slot = SlotKey::record(rel.id(), o.id);
    t.note_read(ctx.node(), slot, o.version, &rel);
    seen.insert(o.id);
    if (stage) {
      auto it = stage->entries.find(o.id);
      if (it != stage->entries.end()) {
        const auto& w = it->second.write;
        if (w.op != WriteOp::Delete && pred.matches(w.row)) hits.push_back({o.id, w.row});
        continue;
      }
    }
    if (o.matched) hits.push_back({o.id, std::move(o.row)});
  }
  if (stage) {
    for (const auto& [id, e] : stage->entries) {
      if (seen.count(id) || e.write.op == WriteOp::Delete) continue;
      if (!pred.matches(e.write.row)) continue;
      t.graph().record(ctx.node(), SlotKey::record(rel.id(), id), txn::kRead);
      hits.push_back({id, e.write.row});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.id < b.id; });
  return hits;
}

void record_structural_write(txn::Transaction& t, txn::NodeId node, const Relation& rel, const Row& row) {
  for (const auto& s : rel.structural_slots(row)) t.graph().record(node, s, txn::kWrite);
}

}  // namespace

RecordId insert(const txn::Context& ctx, Relation& rel, Row row) {
  rel.schema().conform(row);
  RecordId id = rel.allocate_id();
  txn::Transaction& t = ctx.txn();
  std::lock_guard lock(t.mutex());
  t.graph().record(ctx.node(), SlotKey::record(rel.id(), id), txn::kWrite);
  record_structural_write(t, ctx.node(), rel, row);
  t.stage(rel).entries[id] = RelationStage::Entry{StagedWrite{WriteOp::Insert, std::move(row)}, std::nullopt};
  return id;
}

std::vector<std::pair<RecordId, Row>> scan_records(const txn::Context& ctx, Relation& rel, const Predicate& predicate) {
  BoundPredicate bound(rel.schema(), predicate);
  auto hits = read_through(ctx, rel, bound);
  std::vector<std::pair<RecordId, Row>> out;
  out.reserve(hits.size());
  for (auto& h : hits) out.emplace_back(h.id, std::move(h.row));
  return out;
}

std::vector<Row> scan(const txn::Context& ctx, Relation& rel, const Predicate& predicate, const Projection& projection) {
  BoundPredicate bound(rel.schema(), predicate);
  auto cols = resolve_projection(rel.schema(), projection);
  auto hits = read_through(ctx, rel, bound);
  std::vector<Row> out;
  out.reserve(hits.size());
  const bool identity = projection.empty();
  for (auto& h : hits) out.push_back(identity ? std::move(h.row) : project(rel.schema(), h.row, cols));
  return out;
}

std::size_t update(const txn::Context& ctx, Relation& rel, const Predicate& predicate,
                   const std::vector<Assignment>& assignments) {
  const Schema& schema = rel.schema();
  std::vector<std::size_t> targets;
  for (const auto& a : assignments) targets.push_back(schema.index_of(a.column));
  BoundPredicate bound(schema, predicate);
  auto hits = read_through(ctx, rel, bound);
  if (hits.empty()) return 0;

  std::vector<std::pair<RecordId, Row>> next;
  next.reserve(hits.size());
  for (auto& h : hits) {
    RowRef before(schema, h.row);
    Row row = h.row;
    for (std::size_t i = 0; i < assignments.size(); ++i) row[targets[i]] = assignments[i].expr(before);
    schema.conform(row);
    next.emplace_back(h.id, std::move(row));
  }

  txn::Transaction& t = ctx.txn();
  std::lock_guard lock(t.mutex());
  auto& stage = t.stage(rel);
  for (std::size_t i = 0; i < next.size(); ++i) {
    auto& [id, row] = next[i];
    t.graph().record(ctx.node(), SlotKey::record(rel.id(), id), txn::kWrite);
    auto it = stage.entries.find(id);
    if (it != stage.entries.end()) {
      const Row& prior = it->second.write.row;
      if (rel.structural_slots(prior) != rel.structural_slots(row)) {
        record_structural_write(t, ctx.node(), rel, prior);
        record_structural_write(t, ctx.node(), rel, row);
      }
      it->second.write.row = std::move(row);  // last write wins; still one install at commit
    } else {
      if (rel.structural_slots(hits[i].row) != rel.structural_slots(row)) {
        record_structural_write(t, ctx.node(), rel, hits[i].row);
        record_structural_write(t, ctx.node(), rel, row);
      }
      stage.entries.emplace(id, RelationStage::Entry{StagedWrite{WriteOp::Update, std::move(row)}, hits[i].row});
    }
  }
  return next.size();
}

std::size_t erase(const txn::Context& ctx, Relation& rel, const Predicate& predicate) {
  BoundPredicate bound(rel.schema(), predicate);
  auto hits = read_through(ctx, rel, bound);
  txn::Transaction& t = ctx.txn();
  std::lock_guard lock(t.mutex());
  auto& stage = t.stage(rel);
  for (auto& h : hits) {
    t.graph().record(ctx.node(), SlotKey::record(rel.id(), h.id), txn::kWrite);
    record_structural_write(t, ctx.node(), rel, h.row);
    auto it = stage.entries.find(h.id);
    if (it != stage.entries.end() && it->second.write.op == WriteOp::Insert) {
      stage.entries.erase(it);
      continue;
    }
    std::optional<Row> before = (it != stage.entries.end()) ? it->second.before : std::optional<Row>(h.row);
    stage.entries[h.id] = RelationStage::Entry{StagedWrite{WriteOp::Delete, {}}, std::move(before)};
  }
  return hits.size();
}

Row aggregate(const txn::Context& ctx, Relation& rel, const Predicate& predicate, const std::vector<AggSpec>& specs) {
  check_aggregates(rel.schema(), specs);
  BoundPredicate bound(rel.schema(), predicate);
  auto hits = read_through(ctx, rel, bound);
  std::vector<const Row*> rows;
  rows.reserve(hits.size());
  for (const auto& h : hits) rows.push_back(&h.row);
  return fold_aggregates(rel.schema(), rows, specs);
}

std::vector<WindowStats> window_stats(const txn::Context& ctx, Relation& rel, std::string_view partition_col,
                                      std::string_view order_col, std::string_view value_col, std::int64_t k,
                                      const std::vector<Value>& keys) {
  const Schema& schema = rel.schema();
  const std::size_t pcol = schema.index_of(partition_col);
  const std::size_t ocol = schema.index_of(order_col);
  const std::size_t vcol = schema.index_of(value_col);
  if (k < 1) raise(ErrorCode::InvalidArgument, "window size must be positive");
  auto otype = schema.columns[ocol].type;
  if (otype != ColumnType::Int && otype != ColumnType::Timestamp)
    raise(ErrorCode::TypeMismatch, "window order column must be int or timestamp");
  if (keys.empty()) return {};

  Predicate pred;
  pred.in(std::string(partition_col), keys);
  BoundPredicate bound(schema, pred);
  auto hits = read_through(ctx, rel, bound);

  std::map<Value, std::vector<WindowSample>> groups;
  for (const auto& h : hits) {
    const Value& v = h.row[vcol];
    if (v.is_null()) continue;
    groups[h.row[pcol]].push_back({h.row[ocol].as_int(), h.id, v.as_float()});
  }
  std::vector<WindowStats> out;
  out.reserve(keys.size());
  for (const auto& key : keys) {
    auto it = groups.find(key);
    if (it == groups.end() && key.kind() == ValueKind::Float) it = groups.find(Value(static_cast<std::int64_t>(key.as_float())));
    out.push_back(window_of(key, it == groups.end() ? std::vector<WindowSample>{} : it->second, k));
  }
  return out;
}

}  // namespace actordb::rel
