#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "actordb/relstore/relation.hpp"
#include "actordb/txn/detached.hpp"
#include "actordb/txn/graph.hpp"

namespace actordb::txn {

enum class Status : std::uint8_t { Active, Committed, Aborted };
enum class AbortReason : std::uint8_t { ReadValidation, ScanValidation, RacySiblings, ApplicationError, AccessDenied };
inline constexpr std::size_t kAbortReasonCount = 5;

std::string_view to_string(Status s);
std::string_view to_string(AbortReason r);

struct CommitResult {
  bool committed = false;
  std::uint64_t tid = 0;
  std::optional<AbortReason> reason;
  std::string detail;

  static CommitResult success(std::uint64_t tid) { return {true, tid, std::nullopt, {}}; }
  static CommitResult failure(AbortReason r, std::string detail = {}) { return {false, 0, r, std::move(detail)}; }
};

enum class IsolationLevel : std::uint8_t { Serializable, SnapshotIsolation, ReadCommitted };

struct TxnOptions {
  IsolationLevel isolation = IsolationLevel::Serializable;
};

/// Staged writes of one transaction against one relation.
struct RelationStage {
  struct Entry {
    rel::StagedWrite write;
    std::optional<Row> before;  // committed image for updates; index moves need it
  };
  rel::Relation* relation = nullptr;
  std::map<rel::RecordId, Entry> entries;
};

/// Shared state of a root transaction. Nested invocations share this object; only the graph
/// node differs between them. All members are guarded by mutex().
class Transaction {
 public:
  struct ReadEntry {
    std::uint64_t version;
    rel::Relation* relation;
  };

  explicit Transaction(std::uint64_t context_id) : context_id_(context_id) {}

  std::uint64_t context_id() const noexcept { return context_id_; }
  Status status() const noexcept { return status_.load(std::memory_order_acquire); }
  bool active() const noexcept { return status() == Status::Active; }
  std::uint64_t tid() const noexcept { return tid_; }

  /// First doom wins; a doomed transaction can only abort.
  void doom(AbortReason reason, std::string detail);
  std::optional<std::pair<AbortReason, std::string>> doomed() const;

  std::mutex& mutex() const { return mu_; }

  // The following require mutex() to be held.
  InvocationGraph& graph() { return graph_; }
  const InvocationGraph& graph() const { return graph_; }
  void note_read(NodeId node, const rel::SlotKey& slot, std::uint64_t version, rel::Relation* relation);
  RelationStage& stage(rel::Relation& relation);
  const RelationStage* find_stage(const rel::Relation& relation) const;
  const std::map<std::uint64_t, RelationStage>& stages() const { return stages_; }
  const std::unordered_map<rel::SlotKey, ReadEntry, rel::SlotKeyHash>& reads() const { return reads_; }
  std::vector<DetachedSpec>& detached() { return detached_; }
  std::set<ActorAddress>& participants() { return participants_; }

  /// Set when this transaction executes a detached spec, so completion is logged atomically
  /// with its writes.
  std::optional<std::uint64_t> completes_spec;
  std::uint32_t detach_depth = 0;

 private:
  friend class Manager;

  const std::uint64_t context_id_;
  std::atomic<Status> status_{Status::Active};
  std::uint64_t tid_ = 0;

  mutable std::mutex mu_;
  std::optional<std::pair<AbortReason, std::string>> doomed_;
  InvocationGraph graph_;
  std::unordered_map<rel::SlotKey, ReadEntry, rel::SlotKeyHash> reads_;
  std::map<std::uint64_t, RelationStage> stages_;
  std::vector<DetachedSpec> detached_;
  std::set<ActorAddress> participants_;
};

/// A transaction context: the root transaction plus the invocation node executing in it.
/// Root contexts sit at the graph root; nested contexts share the root's sets and fate.
class Context {
 public:
  Context() = default;
  Context(std::shared_ptr<Transaction> txn, NodeId node) : txn_(std::move(txn)), node_(node) {}

  Transaction& txn() const { return *txn_; }
  const std::shared_ptr<Transaction>& shared() const { return txn_; }
  NodeId node() const { return node_; }
  bool is_root() const { return node_ == InvocationGraph::root(); }
  bool valid() const { return static_cast<bool>(txn_); }

 private:
  std::shared_ptr<Transaction> txn_;
  NodeId node_ = InvocationGraph::root();
};

/// Registers a nested invocation node under `parent`. Throws ParentNotActive.
Context child_context(const Context& parent);

}  // namespace actordb::txn
