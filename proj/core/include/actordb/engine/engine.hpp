#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "actordb/common/address.hpp"
#include "actordb/common/error.hpp"
#include "actordb/durability/recovery.hpp"
#include "actordb/engine/descriptor.hpp"
#include "actordb/engine/options.hpp"
#include "actordb/relstore/ops.hpp"
#include "actordb/relstore/table.hpp"
#include "actordb/security/admin_dsl.hpp"
#include "actordb/security/audit.hpp"
#include "actordb/security/stats.hpp"
#include "actordb/txn/manager.hpp"

namespace actordb {

class Engine;
struct EngineImpl;

namespace detail {
struct FutureState;
}

/// Result of an asynchronous invocation. Resolves exactly once to a value or an error.
class Future {
 public:
  Future() = default;

  bool valid() const { return static_cast<bool>(state_); }
  bool ready() const;
  bool failed() const;
  std::uint64_t id() const;
  /// Number of times this future was resolved; 1 once complete.
  int resolutions() const;

 private:
  friend class Scope;
  friend struct EngineImpl;
  explicit Future(std::shared_ptr<detail::FutureState> s) : state_(std::move(s)) {}
  std::shared_ptr<detail::FutureState> state_;
};

/// Transactional handle on one relation of the executing actor.
class RelationRef {
 public:
  rel::RecordId insert(Row row) const { return rel::insert(*ctx_, *rel_, std::move(row)); }
  std::vector<Row> scan(const rel::Predicate& p = {}, const rel::Projection& proj = {}) const {
    return rel::scan(*ctx_, *rel_, p, proj);
  }
  std::vector<std::pair<rel::RecordId, Row>> scan_records(const rel::Predicate& p = {}) const {
    return rel::scan_records(*ctx_, *rel_, p);
  }
  std::size_t update(const rel::Predicate& p, const std::vector<rel::Assignment>& a) const {
    return rel::update(*ctx_, *rel_, p, a);
  }
  std::size_t erase(const rel::Predicate& p) const { return rel::erase(*ctx_, *rel_, p); }
  Row aggregate(const rel::Predicate& p, const std::vector<rel::AggSpec>& specs) const {
    return rel::aggregate(*ctx_, *rel_, p, specs);
  }
  std::vector<rel::WindowStats> window_stats(std::string_view partition, std::string_view order, std::string_view value,
                                             std::int64_t k, const std::vector<Value>& keys) const {
    return rel::window_stats(*ctx_, *rel_, partition, order, value, k, keys);
  }
  const rel::Schema& schema() const { return rel_->schema(); }

 private:
  friend class MethodContext;
  RelationRef(const txn::Context* ctx, rel::Relation* rel) : ctx_(ctx), rel_(rel) {}
  const txn::Context* ctx_;
  rel::Relation* rel_;
};

/// One execution stream inside a transaction: either a method body or an external client.
/// Futures it creates may only be awaited through it. Not thread-safe.
class Scope {
 public:
  Scope(Scope&&) noexcept = default;
  Scope& operator=(Scope&&) noexcept = delete;
  virtual ~Scope() = default;

  /// Throws UnknownActor, UnknownMethod, InvalidArgument, TypeMismatch, AccessDenied, ParentNotActive.
  Future invoke(const ActorAddress& target, const std::string& method, ValueList args = {});
  /// Blocks until resolved, orders the callee before what follows, and rethrows callee errors.
  Value get(Future& f);
  /// Surfaces the first failure (list order) after every future completed.
  void when_all(std::vector<Future>& fs);
  /// Index of a completed future; ties go to the lowest index.
  std::size_t when_one(std::vector<Future>& fs);

  /// One invocation per name; result rows are prefixed with the actor name. Any failure
  /// rethrows and dooms the transaction.
  rel::Table bulk_invoke(const std::string& type_name, const std::vector<std::string>& names,
                         const std::string& method, const std::function<ValueList(const std::string&)>& args_for);

  std::uint64_t detach(const ActorAddress& target, const std::string& method, ValueList args,
                       txn::Trigger trigger = txn::Trigger::OnCommit,
                       txn::Delivery delivery = txn::Delivery::ExactlyOnce);

  Timestamp now();
  Engine& engine() const;
  const txn::Context& context() const { return ctx_; }

 protected:
  Scope(EngineImpl& engine, txn::Context ctx, std::optional<security::CallerFrame> frame);
  void wait(const Future& f) const;
  void join_children();

  EngineImpl* engine_;
  txn::Context ctx_;
  std::optional<security::CallerFrame> frame_;
  std::uint64_t scope_id_;
  std::vector<Future> children_;

  friend struct EngineImpl;
};

/// Execution context handed to method bodies.
class MethodContext : public Scope {
 public:
  const ActorAddress& self() const { return frame_->actor; }
  const std::string& method() const { return frame_->method; }
  /// Throws UnknownRelation.
  RelationRef relation(std::string_view name);

 private:
  friend struct EngineImpl;
  MethodContext(EngineImpl& engine, txn::Context ctx, security::CallerFrame frame, void* actor,
                const MethodDescriptor* descriptor);
  void* actor_;
  const MethodDescriptor* descriptor_;
};

/// An external client's transaction.
class RootTransaction : public Scope {
 public:
  RootTransaction(RootTransaction&&) noexcept = default;
  ~RootTransaction() override;

  /// Waits for outstanding invocations, then validates and installs.
  txn::CommitResult commit();
  /// Uses the doom reason when the transaction is already doomed.
  txn::CommitResult abort(txn::AbortReason reason = txn::AbortReason::ApplicationError, std::string detail = {});
  bool active() const { return ctx_.valid() && ctx_.txn().active(); }
  txn::Transaction& transaction() const { return ctx_.txn(); }

 private:
  friend class Engine;
  friend struct EngineImpl;
  RootTransaction(EngineImpl& engine, txn::Context ctx);
  txn::CommitResult finish(std::optional<txn::AbortReason> abort_reason, std::string detail);
};

struct CallResult {
  txn::CommitResult commit;
  Value value;
  std::optional<ErrorCode> error;
  std::string message;

  bool ok() const { return commit.committed && !error; }
};

/// Key: "Type/name/relation".
using DatabaseSnapshot = std::map<std::string, std::vector<std::pair<rel::RecordId, Row>>>;

struct ExecutorInfo {
  std::string id;
  unsigned width;
  std::size_t queued;
};

class Engine {
 public:
  explicit Engine(EngineOptions options = {});
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Catalog and lifecycle. Lifecycle and admin operations throw CalledFromMethodBody inside methods.
  std::uint64_t register_actor_type(ActorTypeDescriptor descriptor);
  bool has_type(const std::string& type_name) const;
  const ActorTypeDescriptor& actor_type(const std::string& type_name) const;
  std::size_t create_actors(const std::string& type_name, const std::vector<std::string>& names);
  std::size_t drop_actors(const std::string& type_name, const std::vector<std::string>& names);
  bool has_actor(const ActorAddress& address) const;
  std::vector<ActorAddress> actors() const;

  // Transactions.
  /// Throws UnsupportedIsolation, EngineHalted.
  RootTransaction begin(const txn::TxnOptions& options = {});
  /// begin + invoke + get + commit.
  CallResult call(const ActorAddress& target, const std::string& method, ValueList args = {});

  // Administration and security.
  void apply(const std::vector<security::AdminCommand>& commands);
  void apply_script(std::string_view script);
  security::AccessRuleSet rules() const;
  security::Decision check_access(const std::optional<security::CallerFrame>& caller,
                                  const security::CallTarget& target) const;
  std::vector<security::AuditRecord> audit_tail(std::size_t n) const;
  std::uint64_t audit_total() const;
  std::map<ActorAddress, security::ActorStats> stats_snapshot() const;

  // Detached transactions.
  std::size_t process_detached_queue();
  void drain_detached();
  std::size_t detached_pending() const;
  /// Test hook: the next `n` detached runs abort with ReadValidation before committing.
  void inject_detached_aborts(int n);

  // Durability.
  void simulate_crash();
  durability::RecoveryReport recover();
  bool halted() const;
  durability::RedoLog* log() const;

  // Direct, non-transactional state access for loaders, recovery checks and verification.
  rel::Relation& relation(const ActorAddress& actor, const std::string& relation);
  void load(const ActorAddress& actor, const std::string& relation, std::vector<Row> rows);
  DatabaseSnapshot snapshot(bool durable_only = false) const;
  bool actor_durable(const ActorAddress& actor) const;

  DispatchMode mode() const;
  EngineClock& clock();
  txn::Manager& transactions();
  const EngineOptions& options() const;
  std::vector<ExecutorInfo> executors() const;

  /// True while the calling thread executes a method body.
  static bool in_method_body();

 private:
  std::unique_ptr<EngineImpl> impl_;
};

}  // namespace actordb
