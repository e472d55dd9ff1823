#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>

#include "actordb/txn/transaction.hpp"

namespace actordb::durability {
class RedoLog;
}

namespace actordb::txn {

/// Owns transaction identity and runs the commit protocol: lock write slots in global order,
/// validate reads, check sibling races, log, install.
class Manager {
 public:
  using DetachedSink = std::function<void(DetachedSpec)>;

  Manager() = default;

  /// Throws UnsupportedIsolation for anything but serializable.
  Context begin_root(const TxnOptions& options = {});

  /// Precondition: every invocation in the transaction has finished.
  CommitResult commit(Transaction& txn);
  /// Discards staged writes and schedules abort-triggered detached specs.
  CommitResult abort(Transaction& txn, AbortReason reason, std::string detail = {});

  /// Queues a detached spec on `ctx`. Throws ParentNotActive.
  std::uint64_t detach(const Context& ctx, DetachedSpec spec);

  void set_log(durability::RedoLog* log) { log_ = log; }
  void set_detached_sink(DetachedSink sink) { sink_ = std::move(sink); }

  std::uint64_t last_tid() const { return next_tid_.load() - 1; }
  void advance_tid(std::uint64_t at_least);
  void advance_spec_id(std::uint64_t at_least);
  std::uint64_t next_tid() { return next_tid_.fetch_add(1, std::memory_order_acq_rel); }

 private:
  CommitResult finish_abort(Transaction& txn, AbortReason reason, std::string detail);

  std::atomic<std::uint64_t> next_context_{1};
  std::atomic<std::uint64_t> next_tid_{1};
  std::atomic<std::uint64_t> next_spec_{1};
  durability::RedoLog* log_ = nullptr;
  DetachedSink sink_;
};

}  // namespace actordb::txn
