#include "actordb/txn/transaction.hpp"

#include "actordb/common/error.hpp"

namespace actordb::txn {

std::string_view to_string(Trigger t) {
  switch (t) {
    case Trigger::OnCommit: return "ON_COMMIT";
    case Trigger::OnAbort: return "ON_ABORT";
    case Trigger::OnAny: return "ON_ANY";
  }
  return "?";
}

std::string_view to_string(Delivery d) {
  switch (d) {
    case Delivery::ExactlyOnce: return "exactly_once";
    case Delivery::AtMostOnce: return "at_most_once";
    case Delivery::AtLeastOnce: return "at_least_once";
  }
  return "?";
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Active: return "active";
    case Status::Committed: return "committed";
    case Status::Aborted: return "aborted";
  }
  return "?";
}

std::string_view to_string(AbortReason r) {
  switch (r) {
    case AbortReason::ReadValidation: return "ReadValidation";
    case AbortReason::ScanValidation: return "ScanValidation";
    case AbortReason::RacySiblings: return "RacySiblings";
    case AbortReason::ApplicationError: return "ApplicationError";
    case AbortReason::AccessDenied: return "AccessDenied";
  }
  return "?";
}

void Transaction::doom(AbortReason reason, std::string detail) {
  std::lock_guard lock(mu_);
  if (!doomed_) doomed_.emplace(reason, std::move(detail));
}

std::optional<std::pair<AbortReason, std::string>> Transaction::doomed() const {
  std::lock_guard lock(mu_);
  return doomed_;
}

void Transaction::note_read(NodeId node, const rel::SlotKey& slot, std::uint64_t version, rel::Relation* relation) {
  reads_.try_emplace(slot, ReadEntry{version, relation});
  graph_.record(node, slot, kRead);
}

RelationStage& Transaction::stage(rel::Relation& relation) {
  auto& s = stages_[relation.id()];
  s.relation = &relation;
  return s;
}

const RelationStage* Transaction::find_stage(const rel::Relation& relation) const {
  auto it = stages_.find(relation.id());
  return it == stages_.end() ? nullptr : &it->second;
}

Context child_context(const Context& parent) {
  Transaction& t = parent.txn();
  std::lock_guard lock(t.mutex());
  if (!t.active()) raise(ErrorCode::ParentNotActive, "transaction " + std::to_string(t.context_id()) + " is " +
                                                         std::string(to_string(t.status())));
  NodeId child = t.graph().add_child(parent.node());
  return Context(parent.shared(), child);
}

}  // namespace actordb::txn
