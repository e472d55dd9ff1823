#include "actordb/txn/manager.hpp"

#include <algorithm>
#include <cassert>
#include <thread>

#include "actordb/common/error.hpp"
#include "actordb/durability/redo_log.hpp"

namespace actordb::txn {

Context Manager::begin_root(const TxnOptions& options) {
  if (options.isolation != IsolationLevel::Serializable)
    raise(ErrorCode::UnsupportedIsolation, "only serializable isolation is implemented");
  auto t = std::make_shared<Transaction>(next_context_.fetch_add(1, std::memory_order_relaxed));
  return Context(std::move(t), InvocationGraph::root());
}

std::uint64_t Manager::detach(const Context& ctx, DetachedSpec spec) {
  Transaction& t = ctx.txn();
  std::lock_guard lock(t.mutex());
  if (!t.active()) raise(ErrorCode::ParentNotActive, "cannot detach from a finished transaction");
  spec.id = next_spec_.fetch_add(1, std::memory_order_relaxed);
  spec.parent_context = t.context_id();
  spec.depth = t.detach_depth;
  t.detached().push_back(spec);
  return spec.id;
}

void Manager::advance_tid(std::uint64_t at_least) {
  auto cur = next_tid_.load();
  while (cur <= at_least && !next_tid_.compare_exchange_weak(cur, at_least + 1)) {
  }
}

void Manager::advance_spec_id(std::uint64_t at_least) {
  auto cur = next_spec_.load();
  while (cur <= at_least && !next_spec_.compare_exchange_weak(cur, at_least + 1)) {
  }
}

namespace {

struct LockPlan {
  rel::SlotKey slot;
  rel::Relation* relation;
};

void release(const std::vector<LockPlan>& held, std::uint64_t owner) {
  for (auto it = held.rbegin(); it != held.rend(); ++it) it->relation->unlock(it->slot, owner);
}

}  // namespace

CommitResult Manager::commit(Transaction& t) {
  std::unique_lock lock(t.mutex());
  if (!t.active()) raise(ErrorCode::ParentNotActive, "commit of a transaction that is not active");
  if (t.doomed_) {
    auto [reason, detail] = *t.doomed_;
    lock.unlock();
    return finish_abort(t, reason, detail);
  }
  t.graph_.finish(InvocationGraph::root());
  const std::uint64_t owner = t.context_id();

  // Phase 1: write locks in global slot order.
  std::vector<LockPlan> plan;
  for (auto& [rid, stage] : t.stages_) {
    rel::Relation* r = stage.relation;
    for (const auto& [id, e] : stage.entries) {
      const auto& w = e.write;
      if (w.op != rel::WriteOp::Insert) plan.push_back({rel::SlotKey::record(r->id(), id), r});
      if (w.op == rel::WriteOp::Insert) {
        for (const auto& s : r->structural_slots(w.row)) plan.push_back({s, r});
      } else if (e.before) {
        // Deletes and index-moving updates change the structure under the old and new image.
        if (w.op == rel::WriteOp::Delete || r->structural_slots(*e.before) != r->structural_slots(w.row)) {
          for (const auto& s : r->structural_slots(*e.before)) plan.push_back({s, r});
          if (w.op == rel::WriteOp::Update)
            for (const auto& s : r->structural_slots(w.row)) plan.push_back({s, r});
        }
      }
    }
  }
  std::sort(plan.begin(), plan.end(), [](const LockPlan& a, const LockPlan& b) { return a.slot < b.slot; });
  plan.erase(std::unique(plan.begin(), plan.end(), [](const LockPlan& a, const LockPlan& b) { return a.slot == b.slot; }),
             plan.end());

  std::vector<LockPlan> held;
  held.reserve(plan.size());
  for (const auto& p : plan) {
    assert(held.empty() || held.back().slot < p.slot);
    for (;;) {
      auto r = p.relation->try_lock(p.slot, owner);
      if (r == rel::Relation::LockResult::Acquired) break;
      if (r == rel::Relation::LockResult::Missing) {
        release(held, owner);
        lock.unlock();
        return finish_abort(t, AbortReason::ReadValidation, "written record vanished");
      }
      std::this_thread::yield();
    }
    held.push_back(p);
  }

  // Phase 2: every observed version must still be current and not locked by someone else.
  for (const auto& [slot, entry] : t.reads_) {
    if (!entry.relation->validate(slot, entry.version, owner)) {
      release(held, owner);
      lock.unlock();
      return slot.is_record() ? finish_abort(t, AbortReason::ReadValidation, "record changed since read")
                              : finish_abort(t, AbortReason::ScanValidation, "relation structure changed since scan");
    }
  }

  // Phase 3: unsynchronized conflicting sub-invocations.
  if (auto w = t.graph_.find_race()) {
    release(held, owner);
    lock.unlock();
    return finish_abort(t, AbortReason::RacySiblings,
                        "invocations " + std::to_string(w->first) + " and " + std::to_string(w->second) +
                            " conflict without synchronization");
  }

  durability::CommitBatch batch;
  if (log_) {
    for (const auto& [rid, stage] : t.stages_) {
      rel::Relation* r = stage.relation;
      if (!r->durable()) continue;
      for (const auto& [id, e] : stage.entries)
        batch.writes.push_back({0, r->owner(), r->schema().name, e.write.op, id, e.write.row});
    }
    for (const auto& s : t.detached_)
      if (s.fires_on_commit() && s.delivery == Delivery::ExactlyOnce) batch.enqueued.push_back(s);
    if (t.completes_spec) batch.completed_specs.push_back(*t.completes_spec);
  }

  std::uint64_t tid = 0;
  if (!batch.empty()) {
    try {
      tid = log_->append(batch, [this] { return next_tid(); });
    } catch (const Error& e) {
      release(held, owner);
      lock.unlock();
      return finish_abort(t, AbortReason::ApplicationError, e.what());
    }
  } else {
    tid = next_tid();
  }

  std::map<rel::Relation*, std::vector<rel::SlotKey>> locked_by_relation;
  for (const auto& h : held) locked_by_relation[h.relation].push_back(h.slot);
  for (auto& [rid, stage] : t.stages_) {
    std::map<rel::RecordId, rel::StagedWrite> writes;
    for (auto& [id, e] : stage.entries) writes.emplace(id, std::move(e.write));
    stage.relation->install(writes, locked_by_relation[stage.relation], owner);
  }

  t.tid_ = tid;
  t.status_.store(Status::Committed, std::memory_order_release);
  t.stages_.clear();
  auto specs = std::move(t.detached_);
  lock.unlock();
  if (sink_)
    for (auto& s : specs)
      if (s.fires_on_commit()) sink_(std::move(s));
  return CommitResult::success(tid);
}

CommitResult Manager::abort(Transaction& t, AbortReason reason, std::string detail) {
  {
    std::lock_guard lock(t.mutex());
    if (!t.active()) raise(ErrorCode::ParentNotActive, "abort of a transaction that is not active");
    t.graph_.finish(InvocationGraph::root());
  }
  return finish_abort(t, reason, std::move(detail));
}

CommitResult Manager::finish_abort(Transaction& t, AbortReason reason, std::string detail) {
  std::vector<DetachedSpec> specs;
  {
    std::lock_guard lock(t.mutex());
    t.stages_.clear();
    t.status_.store(Status::Aborted, std::memory_order_release);
    specs = std::move(t.detached_);
  }
  std::vector<DetachedSpec> firing;
  for (auto& s : specs)
    if (s.fires_on_abort()) firing.push_back(std::move(s));

  if (log_) {
    durability::CommitBatch batch;
    for (const auto& s : firing)
      if (s.delivery == Delivery::ExactlyOnce) batch.enqueued.push_back(s);
    if (!batch.empty()) {
      try {
        log_->append(batch, [this] { return next_tid(); });
      } catch (const Error&) {
        // The parent already aborted; without a durable enqueue the spec degrades to at-most-once.
      }
    }
  }
  if (sink_)
    for (auto& s : firing) sink_(std::move(s));
  return CommitResult::failure(reason, std::move(detail));
}

}  // namespace actordb::txn
