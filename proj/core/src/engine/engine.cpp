#include "actordb/engine/engine.hpp"

#include <fnmatch.h>
#include <sys/stat.h>

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <thread>
#include <unordered_map>

#include "actordb/durability/redo_log.hpp"
#include "actordb/engine/executor.hpp"

namespace actordb {

namespace detail {

struct FutureState {
  std::uint64_t id = 0;
  std::uint64_t scope = 0;
  txn::NodeId node = 0;

  std::mutex mu;
  std::condition_variable cv;
  bool done = false;
  Value value;
  std::exception_ptr error;
  std::atomic<int> resolutions{0};

  void resolve(Value v, std::exception_ptr e) {
    {
      std::lock_guard lock(mu);
      resolutions.fetch_add(1);
      if (done) return;
      value = std::move(v);
      error = std::move(e);
      done = true;
    }
    cv.notify_all();
  }
};

}  // namespace detail

namespace {

thread_local int tl_method_depth = 0;

struct DepthGuard {
  DepthGuard() { ++tl_method_depth; }
  ~DepthGuard() { --tl_method_depth; }
};

void require_admin_context(const char* op) {
  if (tl_method_depth > 0) raise(ErrorCode::CalledFromMethodBody, std::string(op) + " is not allowed inside a method body");
}

bool accepts(ValueKind want, const Value& v) {
  if (want == ValueKind::Any || v.is_null()) return true;
  ValueKind k = v.kind();
  if (k == want) return true;
  if ((want == ValueKind::Float || want == ValueKind::Timestamp) && k == ValueKind::Int) return true;
  return false;
}

void check_args(const MethodDescriptor& m, const ValueList& args, const ActorAddress& target) {
  if (args.size() != m.params.size())
    raise(ErrorCode::InvalidArgument, target.str() + "." + m.name + " takes " + std::to_string(m.params.size()) +
                                          " arguments, got " + std::to_string(args.size()));
  for (std::size_t i = 0; i < args.size(); ++i)
    if (!accepts(m.params[i], args[i]))
      raise(ErrorCode::TypeMismatch, target.str() + "." + m.name + " argument " + std::to_string(i) + " expects " +
                                         std::string(to_string(m.params[i])) + ", got " +
                                         std::string(to_string(args[i].kind())));
}

std::int64_t wall_micros() {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

struct ActorInstance {
  ActorAddress address;
  const ActorTypeDescriptor* type = nullptr;
  bool durable = true;
  std::map<std::string, std::unique_ptr<rel::Relation>, std::less<>> relations;
  Executor* executor = nullptr;  // nullptr: runs on the caller's stream
};

struct EngineImpl {
  explicit EngineImpl(Engine& engine, EngineOptions opts);
  ~EngineImpl();

  Engine& self;
  EngineOptions options;
  EngineClock clock;
  std::unique_ptr<txn::Manager> manager;

  mutable std::shared_mutex catalog_mu;
  std::map<std::string, std::unique_ptr<ActorTypeDescriptor>> types;
  std::uint64_t next_type_id = 1;

  mutable std::shared_mutex ns_mu;
  std::unordered_map<ActorAddress, std::shared_ptr<ActorInstance>> actors;
  std::mutex admin_mu;

  mutable std::mutex pools_mu;
  std::map<std::string, std::unique_ptr<Executor>> pools;

  mutable std::mutex rules_mu;
  std::shared_ptr<const security::AccessRuleSet> rules = std::make_shared<security::AccessRuleSet>();
  std::atomic<bool> rules_active{false};

  security::AuditLog audit;
  std::unique_ptr<security::StatsRegistry> stats = std::make_unique<security::StatsRegistry>();
  std::mutex warn_mu;
  std::set<std::string> warned;

  std::unique_ptr<durability::RedoLog> log;
  std::atomic<bool> halted{false};

  mutable std::mutex dq_mu;
  std::condition_variable dq_cv;
  std::condition_variable dq_idle;
  std::deque<txn::DetachedSpec> dq;
  std::set<std::uint64_t> dq_ids;
  std::set<std::uint64_t> completed_specs;
  int dq_running = 0;
  bool dq_stop = false;
  std::thread dq_thread;
  std::atomic<int> injected_aborts{0};

  std::atomic<std::uint64_t> next_future{1};
  std::atomic<std::uint64_t> next_scope{1};

  void wire_manager();
  const ActorTypeDescriptor& type_of(const std::string& name) const;
  std::shared_ptr<ActorInstance> find_actor(const ActorAddress& a) const;
  Executor* executor_for(const ActorAddress& a);
  bool durable_for(const ActorAddress& a, const ActorTypeDescriptor& type) const;
  void create_locked(const ActorTypeDescriptor& type, const std::vector<std::string>& names);
  void drop_locked(const std::string& type, const std::vector<std::string>& names);
  std::shared_ptr<const security::AccessRuleSet> current_rules() const;

  void authorize(const std::optional<security::CallerFrame>& caller, const security::CallTarget& target,
                 const txn::Context& ctx, const char* what);
  void note(const std::optional<security::CallerFrame>& caller, const security::CallTarget& target,
            const txn::Context& ctx, std::string text);
  void execute(std::shared_ptr<ActorInstance> actor, const MethodDescriptor* m, txn::Context ctx, const ValueList& args,
               const std::shared_ptr<detail::FutureState>& st);

  void enqueue(txn::DetachedSpec spec);
  bool pop(txn::DetachedSpec& out);
  void done_running();
  void run_spec(const txn::DetachedSpec& spec);
  void detached_loop();

  void open_log_if_clean();
};

// ---------------------------------------------------------------------------------------------

bool Future::ready() const {
  if (!state_) return false;
  std::lock_guard lock(state_->mu);
  return state_->done;
}

bool Future::failed() const {
  if (!state_) return false;
  std::lock_guard lock(state_->mu);
  return state_->done && state_->error;
}

std::uint64_t Future::id() const { return state_ ? state_->id : 0; }
int Future::resolutions() const { return state_ ? state_->resolutions.load() : 0; }

// ---------------------------------------------------------------------------------------------

Scope::Scope(EngineImpl& engine, txn::Context ctx, std::optional<security::CallerFrame> frame)
    : engine_(&engine), ctx_(std::move(ctx)), frame_(std::move(frame)), scope_id_(engine.next_scope.fetch_add(1)) {}

Engine& Scope::engine() const { return engine_->self; }

Timestamp Scope::now() { return engine_->clock.now(); }

Future Scope::invoke(const ActorAddress& target, const std::string& method, ValueList args) {
  EngineImpl& e = *engine_;
  auto actor = e.find_actor(target);
  const MethodDescriptor* m = actor->type->find(method);
  if (!m) raise(ErrorCode::UnknownMethod, target.type_name + " has no method " + method);
  check_args(*m, args, target);
  e.authorize(frame_, {target, method}, ctx_, "invoke");

  txn::Context child = txn::child_context(ctx_);
  {
    std::lock_guard lock(ctx_.txn().mutex());
    ctx_.txn().participants().insert(target);
  }
  auto st = std::make_shared<detail::FutureState>();
  st->id = e.next_future.fetch_add(1, std::memory_order_relaxed);
  st->scope = scope_id_;
  st->node = child.node();
  children_.push_back(Future(st));

  if (e.options.mode == DispatchMode::Sync || actor->executor == nullptr) {
    e.execute(std::move(actor), m, std::move(child), args, st);
  } else {
    Executor* ex = actor->executor;
    ex->post([&e, actor = std::move(actor), m, child = std::move(child), args = std::move(args), st]() mutable {
      e.execute(std::move(actor), m, std::move(child), args, st);
    });
  }
  return Future(st);
}

void Scope::wait(const Future& f) const {
  auto& s = *f.state_;
  Executor* ex = Executor::current();
  std::unique_lock lock(s.mu);
  while (!s.done) {
    if (ex) {
      lock.unlock();
      bool ran = ex->run_one();
      lock.lock();
      if (!ran && !s.done) s.cv.wait_for(lock, std::chrono::microseconds(200));
    } else {
      s.cv.wait(lock);
    }
  }
}

namespace {

void check_owner(const Future& f, std::uint64_t scope, std::uint64_t state_scope) {
  if (!f.valid()) raise(ErrorCode::InvalidArgument, "invalid future");
  if (state_scope != scope) raise(ErrorCode::InvalidArgument, "future awaited outside the stream that created it");
}

}  // namespace

Value Scope::get(Future& f) {
  check_owner(f, scope_id_, f.state_ ? f.state_->scope : 0);
  if (!f.ready()) {
    if (engine_->options.mode == DispatchMode::Sync)
      raise(ErrorCode::DeadlockDetected, "get on a pending future in sync mode");
    wait(f);
  }
  {
    std::lock_guard lock(ctx_.txn().mutex());
    ctx_.txn().graph().synchronize(ctx_.node(), f.state_->node);
  }
  if (f.state_->error) std::rethrow_exception(f.state_->error);
  return f.state_->value;
}

void Scope::when_all(std::vector<Future>& fs) {
  for (auto& f : fs) check_owner(f, scope_id_, f.state_ ? f.state_->scope : 0);
  for (auto& f : fs) {
    if (!f.ready() && engine_->options.mode == DispatchMode::Sync)
      raise(ErrorCode::DeadlockDetected, "when_all on a pending future in sync mode");
    wait(f);
  }
  {
    std::lock_guard lock(ctx_.txn().mutex());
    for (auto& f : fs) ctx_.txn().graph().synchronize(ctx_.node(), f.state_->node);
  }
  for (auto& f : fs)
    if (f.state_->error) std::rethrow_exception(f.state_->error);
}

std::size_t Scope::when_one(std::vector<Future>& fs) {
  if (fs.empty()) raise(ErrorCode::InvalidArgument, "when_one needs at least one future");
  for (auto& f : fs) check_owner(f, scope_id_, f.state_ ? f.state_->scope : 0);
  Executor* ex = Executor::current();
  for (;;) {
    for (std::size_t i = 0; i < fs.size(); ++i) {
      if (!fs[i].ready()) continue;
      {
        std::lock_guard lock(ctx_.txn().mutex());
        ctx_.txn().graph().synchronize(ctx_.node(), fs[i].state_->node);
      }
      if (fs[i].state_->error) std::rethrow_exception(fs[i].state_->error);
      return i;
    }
    if (engine_->options.mode == DispatchMode::Sync)
      raise(ErrorCode::DeadlockDetected, "when_one with only pending futures in sync mode");
    if (ex && ex->run_one()) continue;
    auto& s = *fs.front().state_;
    std::unique_lock lock(s.mu);
    s.cv.wait_for(lock, std::chrono::microseconds(100));
  }
}

void Scope::join_children() {
  for (auto& f : children_) wait(f);
  children_.clear();
}

rel::Table Scope::bulk_invoke(const std::string& type_name, const std::vector<std::string>& names,
                              const std::string& method, const std::function<ValueList(const std::string&)>& args_for) {
  const ActorTypeDescriptor& type = engine_->type_of(type_name);
  const MethodDescriptor* m = type.find(method);
  if (!m) raise(ErrorCode::UnknownMethod, type_name + " has no method " + method);
  rel::Schema schema;
  schema.name = type_name + "." + method;
  schema.columns.push_back({"name", rel::ColumnType::String});
  schema.columns.insert(schema.columns.end(), m->result_columns.begin(), m->result_columns.end());

  std::vector<Future> fs;
  fs.reserve(names.size());
  try {
    for (const auto& n : names) fs.push_back(invoke({type_name, n}, method, args_for(n)));
    when_all(fs);
  } catch (const Error& e) {
    ctx_.txn().doom(e.code() == ErrorCode::AccessDenied ? txn::AbortReason::AccessDenied
                                                        : txn::AbortReason::ApplicationError,
                    e.what());
    throw;
  }

  rel::Table out(schema);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Value& v = fs[i].state_->value;
    auto add = [&](const ValueList& tuple) {
      Row row;
      row.reserve(tuple.size() + 1);
      row.emplace_back(names[i]);
      row.insert(row.end(), tuple.begin(), tuple.end());
      out.append(std::move(row));
    };
    if (v.is_null()) continue;
    const ValueList& l = v.as_list();
    if (!l.empty() && l.front().kind() == ValueKind::List) {
      for (const auto& t : l) add(t.as_list());
    } else if (!l.empty()) {
      add(l);
    }
  }
  return out;
}

std::uint64_t Scope::detach(const ActorAddress& target, const std::string& method, ValueList args,
                            txn::Trigger trigger, txn::Delivery delivery) {
  EngineImpl& e = *engine_;
  const ActorTypeDescriptor& type = e.type_of(target.type_name);
  const MethodDescriptor* m = type.find(method);
  if (!m) raise(ErrorCode::UnknownMethod, target.type_name + " has no method " + method);
  check_args(*m, args, target);
  e.authorize(frame_, {target, method}, ctx_, "detach");
  if (ctx_.txn().detach_depth > 0)
    e.note(frame_, {target, method}, ctx_, "nested detach at depth " + std::to_string(ctx_.txn().detach_depth));
  txn::DetachedSpec spec;
  spec.target = target;
  spec.method = method;
  spec.args = std::move(args);
  spec.trigger = trigger;
  spec.delivery = delivery;
  return e.manager->detach(ctx_, std::move(spec));
}

// ---------------------------------------------------------------------------------------------

MethodContext::MethodContext(EngineImpl& engine, txn::Context ctx, security::CallerFrame frame, void* actor,
                             const MethodDescriptor* descriptor)
    : Scope(engine, std::move(ctx), std::move(frame)), actor_(actor), descriptor_(descriptor) {}

RelationRef MethodContext::relation(std::string_view name) {
  auto* actor = static_cast<ActorInstance*>(actor_);
  auto it = actor->relations.find(name);
  if (it == actor->relations.end())
    raise(ErrorCode::UnknownRelation, actor->address.str() + " has no relation " + std::string(name));
  if (it->second->schema().encrypted && !descriptor_->encrypted) {
    std::string key = actor->address.type_name + "." + descriptor_->name + ":" + std::string(name);
    bool first;
    {
      std::lock_guard lock(engine_->warn_mu);
      first = engine_->warned.insert(key).second;
    }
    if (first)
      engine_->note(frame_, {actor->address, descriptor_->name}, ctx_,
                    "plaintext access to encrypted relation " + std::string(name));
  }
  return RelationRef(&ctx_, it->second.get());
}

// ---------------------------------------------------------------------------------------------

RootTransaction::RootTransaction(EngineImpl& engine, txn::Context ctx) : Scope(engine, std::move(ctx), std::nullopt) {}

RootTransaction::~RootTransaction() {
  if (!ctx_.valid() || !ctx_.txn().active()) return;
  try {
    finish(txn::AbortReason::ApplicationError, "transaction handle dropped while active");
  } catch (...) {
  }
}

txn::CommitResult RootTransaction::commit() { return finish(std::nullopt, {}); }

txn::CommitResult RootTransaction::abort(txn::AbortReason reason, std::string detail) {
  return finish(reason, std::move(detail));
}

txn::CommitResult RootTransaction::finish(std::optional<txn::AbortReason> abort_reason, std::string detail) {
  join_children();
  txn::Transaction& t = ctx_.txn();
  std::vector<ActorAddress> participants;
  {
    std::lock_guard lock(t.mutex());
    participants.assign(t.participants().begin(), t.participants().end());
  }
  txn::CommitResult r;
  if (abort_reason) {
    auto doomed = t.doomed();
    r = doomed ? engine_->manager->abort(t, doomed->first, doomed->second)
               : engine_->manager->abort(t, *abort_reason, std::move(detail));
  } else {
    r = engine_->manager->commit(t);
  }
  auto& stats = *engine_->stats;
  for (const auto& p : participants) {
    if (r.committed)
      stats.committed(p);
    else
      stats.aborted(p, *r.reason);
  }
  return r;
}

// ---------------------------------------------------------------------------------------------

EngineImpl::EngineImpl(Engine& engine, EngineOptions opts)
    : self(engine), options(std::move(opts)), clock(options.clock), audit(options.audit_capacity) {
  for (const auto& [id, width] : options.executors.pools) {
    auto it = options.executors.affinity.find(id);
    pools.emplace(id, std::make_unique<Executor>(id, width,
                                                 it == options.executors.affinity.end() ? std::vector<int>{} : it->second));
  }
  manager = std::make_unique<txn::Manager>();
  wire_manager();
  open_log_if_clean();
  if (options.detached == DetachedMode::Background) dq_thread = std::thread([this] { detached_loop(); });
}

EngineImpl::~EngineImpl() {
  {
    std::lock_guard lock(dq_mu);
    dq_stop = true;
  }
  dq_cv.notify_all();
  if (dq_thread.joinable()) dq_thread.join();
  std::lock_guard lock(pools_mu);
  pools.clear();
}

void EngineImpl::wire_manager() {
  manager->set_log(log.get());
  manager->set_detached_sink([this](txn::DetachedSpec s) { enqueue(std::move(s)); });
}

void EngineImpl::open_log_if_clean() {
  if (!options.durability.enabled) return;
  struct stat st{};
  if (::stat(options.durability.log.path.c_str(), &st) == 0 && st.st_size > 0) {
    halted = true;  // existing log: recover() first
    return;
  }
  log = std::make_unique<durability::RedoLog>(options.durability.log);
  manager->set_log(log.get());
}

const ActorTypeDescriptor& EngineImpl::type_of(const std::string& name) const {
  std::shared_lock lock(catalog_mu);
  auto it = types.find(name);
  if (it == types.end()) raise(ErrorCode::UnknownType, "unknown actor type " + name);
  return *it->second;
}

std::shared_ptr<ActorInstance> EngineImpl::find_actor(const ActorAddress& a) const {
  std::shared_lock lock(ns_mu);
  auto it = actors.find(a);
  if (it == actors.end()) raise(ErrorCode::UnknownActor, "no live actor " + a.str());
  return it->second;
}

Executor* EngineImpl::executor_for(const ActorAddress& a) {
  const std::string key = a.type_name + "/" + a.actor_name;
  std::string pool = options.executors.fallback;
  for (const auto& r : options.executors.rules) {
    if (::fnmatch(r.pattern.c_str(), key.c_str(), 0) == 0) {
      pool = r.pool;
      break;
    }
  }
  if (pool == "inline") return nullptr;
  std::lock_guard lock(pools_mu);
  if (pool.rfind("dedicated:", 0) == 0) {
    unsigned width = 1;
    try {
      width = static_cast<unsigned>(std::stoul(pool.substr(10)));
    } catch (const std::exception&) {
      raise(ErrorCode::ConfigError, "bad pool spec " + pool);
    }
    auto& p = pools["actor:" + key];
    if (!p) p = std::make_unique<Executor>("actor:" + key, width);
    return p.get();
  }
  auto it = pools.find(pool);
  if (it == pools.end()) raise(ErrorCode::ConfigError, "unknown executor pool " + pool);
  return it->second.get();
}

bool EngineImpl::durable_for(const ActorAddress& a, const ActorTypeDescriptor& type) const {
  auto it = options.durability.actor_overrides.find(a.type_name + "/" + a.actor_name);
  return it == options.durability.actor_overrides.end() ? type.durable : it->second;
}

void EngineImpl::create_locked(const ActorTypeDescriptor& type, const std::vector<std::string>& names) {
  for (const auto& n : names) {
    ActorAddress addr{type.type_name, n};
    auto inst = std::make_shared<ActorInstance>();
    inst->address = addr;
    inst->type = &type;
    inst->durable = durable_for(addr, type);
    for (const auto& s : type.state_schemas)
      inst->relations.emplace(s.name, std::make_unique<rel::Relation>(s, addr, inst->durable, options.scan_granule));
    inst->executor = executor_for(addr);
    std::unique_lock lock(ns_mu);
    actors.emplace(addr, std::move(inst));
  }
}

void EngineImpl::drop_locked(const std::string& type, const std::vector<std::string>& names) {
  std::unique_lock lock(ns_mu);
  for (const auto& n : names) actors.erase(ActorAddress{type, n});
}

std::shared_ptr<const security::AccessRuleSet> EngineImpl::current_rules() const {
  std::lock_guard lock(rules_mu);
  return rules;
}

void EngineImpl::note(const std::optional<security::CallerFrame>& caller, const security::CallTarget& target,
                      const txn::Context& ctx, std::string text) {
  security::AuditRecord r;
  r.time_us = wall_micros();
  r.caller = caller;
  r.target = target;
  r.decision = security::Decision::Allow;
  r.txn = ctx.valid() ? ctx.txn().context_id() : 0;
  r.note = std::move(text);
  audit.append(std::move(r));
}

void EngineImpl::authorize(const std::optional<security::CallerFrame>& caller, const security::CallTarget& target,
                           const txn::Context& ctx, const char* what) {
  if (!caller) {
    note(caller, target, ctx, std::string("external ") + what);
    return;
  }
  security::Decision d = security::Decision::Allow;
  if (rules_active.load(std::memory_order_acquire)) d = current_rules()->check(caller, target);
  if (d == security::Decision::Allow) {
    if (options.audit_allowed_calls) note(caller, target, ctx, what);
    return;
  }
  security::AuditRecord r;
  r.time_us = wall_micros();
  r.caller = caller;
  r.target = target;
  r.decision = security::Decision::Deny;
  r.txn = ctx.txn().context_id();
  r.note = what;
  audit.append(std::move(r));
  stats->denied(caller->actor);
  std::string msg = caller->actor.str() + "." + caller->method + " may not call " + target.actor.str() + "." + target.method;
  ctx.txn().doom(txn::AbortReason::AccessDenied, msg);
  raise(ErrorCode::AccessDenied, msg);
}

void EngineImpl::execute(std::shared_ptr<ActorInstance> actor, const MethodDescriptor* m, txn::Context ctx,
                         const ValueList& args, const std::shared_ptr<detail::FutureState>& st) {
  DepthGuard depth;
  auto t0 = std::chrono::steady_clock::now();
  MethodContext mc(*this, ctx, security::CallerFrame{actor->address, m->name}, actor.get(), m);
  Value result;
  std::exception_ptr error;
  try {
    if (m->body) result = m->body(mc, args);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AccessDenied) ctx.txn().doom(txn::AbortReason::ApplicationError, e.what());
    error = std::current_exception();
  } catch (const std::exception& e) {
    ctx.txn().doom(txn::AbortReason::ApplicationError, e.what());
    error = std::current_exception();
  }
  mc.join_children();
  {
    std::lock_guard lock(ctx.txn().mutex());
    ctx.txn().graph().finish(ctx.node());
  }
  auto busy = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
  stats->invoked(actor->address, static_cast<std::uint64_t>(busy));
  st->resolve(std::move(result), error);
}

// Detached transactions --------------------------------------------------------------------------

void EngineImpl::enqueue(txn::DetachedSpec spec) {
  {
    std::lock_guard lock(dq_mu);
    if (spec.delivery == txn::Delivery::ExactlyOnce && completed_specs.count(spec.id)) return;
    if (!dq_ids.insert(spec.id).second) return;
    dq.push_back(std::move(spec));
  }
  dq_cv.notify_one();
}

bool EngineImpl::pop(txn::DetachedSpec& out) {
  std::lock_guard lock(dq_mu);
  if (dq.empty()) return false;
  out = std::move(dq.front());
  dq.pop_front();
  dq_ids.erase(out.id);
  ++dq_running;
  return true;
}

void EngineImpl::done_running() {
  {
    std::lock_guard lock(dq_mu);
    --dq_running;
  }
  dq_idle.notify_all();
}

void EngineImpl::run_spec(const txn::DetachedSpec& spec) {
  const bool once = spec.delivery == txn::Delivery::ExactlyOnce;
  const unsigned attempts = spec.delivery == txn::Delivery::AtMostOnce ? 1 : std::max(1u, options.detached_retry_limit);
  auto backoff = options.detached_backoff;
  const security::CallTarget target{spec.target, spec.method};
  std::string last;
  for (unsigned attempt = 0; attempt < attempts; ++attempt) {
    if (halted) return;
    if (once) {
      std::lock_guard lock(dq_mu);
      if (completed_specs.count(spec.id)) return;
    }
    txn::CommitResult r;
    try {
      RootTransaction root(*this, manager->begin_root());
      root.transaction().detach_depth = spec.depth + 1;
      if (once) root.transaction().completes_spec = spec.id;
      std::string err;
      try {
        Future f = root.invoke(spec.target, spec.method, spec.args);
        root.get(f);
      } catch (const std::exception& e) {
        err = e.what();
      }
      int injected = injected_aborts.load();
      bool inject = err.empty() && injected > 0 && injected_aborts.compare_exchange_strong(injected, injected - 1);
      if (!err.empty())
        r = root.abort(txn::AbortReason::ApplicationError, err);
      else if (inject)
        r = root.abort(txn::AbortReason::ReadValidation, "injected abort");
      else
        r = root.commit();
    } catch (const std::exception& e) {
      r = txn::CommitResult::failure(txn::AbortReason::ApplicationError, e.what());
    }
    if (r.committed) {
      if (once) {
        std::lock_guard lock(dq_mu);
        completed_specs.insert(spec.id);
      }
      return;
    }
    last = std::string(txn::to_string(*r.reason)) + (r.detail.empty() ? "" : ": " + r.detail);
    if (spec.delivery == txn::Delivery::AtMostOnce) break;
    if (attempt + 1 < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  note(std::nullopt, target, {}, "detached spec " + std::to_string(spec.id) + " not committed (" + last + ")");
}

void EngineImpl::detached_loop() {
  for (;;) {
    txn::DetachedSpec spec;
    {
      std::unique_lock lock(dq_mu);
      dq_cv.wait(lock, [this] { return dq_stop || !dq.empty(); });
      if (dq_stop) return;
      spec = std::move(dq.front());
      dq.pop_front();
      dq_ids.erase(spec.id);
      ++dq_running;
    }
    run_spec(spec);
    done_running();
  }
}

// ---------------------------------------------------------------------------------------------

Engine::Engine(EngineOptions options) : impl_(std::make_unique<EngineImpl>(*this, std::move(options))) {}

Engine::~Engine() = default;

bool Engine::in_method_body() { return tl_method_depth > 0; }

std::uint64_t Engine::register_actor_type(ActorTypeDescriptor d) {
  require_admin_context("register_actor_type");
  if (d.type_name.empty()) raise(ErrorCode::InvalidSchema, "actor type name is empty");
  std::set<std::string> seen;
  for (const auto& m : d.methods)
    if (m.name.empty() || !seen.insert(m.name).second)
      raise(ErrorCode::InvalidSchema, "duplicate or empty method name in " + d.type_name);
  seen.clear();
  for (const auto& s : d.state_schemas) {
    s.validate();
    if (!seen.insert(s.name).second) raise(ErrorCode::DuplicateRelation, "relation " + s.name + " declared twice");
  }
  std::unique_lock lock(impl_->catalog_mu);
  if (impl_->types.count(d.type_name)) raise(ErrorCode::DuplicateType, "actor type " + d.type_name + " exists");
  std::string name = d.type_name;
  impl_->types.emplace(name, std::make_unique<ActorTypeDescriptor>(std::move(d)));
  return impl_->next_type_id++;
}

bool Engine::has_type(const std::string& type_name) const {
  std::shared_lock lock(impl_->catalog_mu);
  return impl_->types.count(type_name) > 0;
}

const ActorTypeDescriptor& Engine::actor_type(const std::string& type_name) const { return impl_->type_of(type_name); }

std::size_t Engine::create_actors(const std::string& type_name, const std::vector<std::string>& names) {
  apply({security::CreateActors{type_name, names}});
  return names.size();
}

std::size_t Engine::drop_actors(const std::string& type_name, const std::vector<std::string>& names) {
  apply({security::DropActors{type_name, names}});
  return names.size();
}

bool Engine::has_actor(const ActorAddress& address) const {
  std::shared_lock lock(impl_->ns_mu);
  return impl_->actors.count(address) > 0;
}

std::vector<ActorAddress> Engine::actors() const {
  std::shared_lock lock(impl_->ns_mu);
  std::vector<ActorAddress> out;
  out.reserve(impl_->actors.size());
  for (const auto& [a, _] : impl_->actors) out.push_back(a);
  std::sort(out.begin(), out.end());
  return out;
}

RootTransaction Engine::begin(const txn::TxnOptions& options) {
  if (impl_->halted) raise(ErrorCode::EngineHalted, "engine needs recovery before new transactions");
  return RootTransaction(*impl_, impl_->manager->begin_root(options));
}

CallResult Engine::call(const ActorAddress& target, const std::string& method, ValueList args) {
  RootTransaction root = begin();
  CallResult r;
  try {
    Future f = root.invoke(target, method, std::move(args));
    r.value = root.get(f);
  } catch (const Error& e) {
    r.error = e.code();
    r.message = e.what();
  } catch (const std::exception& e) {
    r.error = ErrorCode::ApplicationError;
    r.message = e.what();
  }
  r.commit = r.error ? root.abort(txn::AbortReason::ApplicationError, r.message) : root.commit();
  return r;
}

void Engine::apply(const std::vector<security::AdminCommand>& commands) {
  require_admin_context("administration");
  EngineImpl& e = *impl_;
  std::lock_guard admin(e.admin_mu);

  // Dry run against a copy of the namespace and rule set; nothing changes unless all succeed.
  std::set<ActorAddress> live;
  {
    std::shared_lock lock(e.ns_mu);
    for (const auto& [a, _] : e.actors) live.insert(a);
  }
  auto next_rules = std::make_shared<security::AccessRuleSet>(*e.current_rules());
  bool rules_touched = false;
  for (const auto& cmd : commands) {
    if (auto* c = std::get_if<security::CreateActors>(&cmd)) {
      e.type_of(c->type_name);
      for (const auto& n : c->names) {
        if (n.empty()) raise(ErrorCode::InvalidArgument, "actor name is empty");
        if (!live.insert({c->type_name, n}).second)
          raise(ErrorCode::DuplicateActor, "actor " + c->type_name + "/" + n + " already exists");
      }
    } else if (auto* d = std::get_if<security::DropActors>(&cmd)) {
      e.type_of(d->type_name);
      for (const auto& n : d->names)
        if (!live.erase({d->type_name, n})) raise(ErrorCode::UnknownActor, "no live actor " + d->type_name + "/" + n);
    } else if (std::holds_alternative<security::RevokeAll>(cmd)) {
      next_rules->revoke_all();
      rules_touched = true;
    } else {
      const auto& g = std::get<security::Grant>(cmd);
      next_rules->add({g.subject, g.objects});
      rules_touched = true;
    }
  }
  if (rules_touched) {
    security::Catalog catalog{
        [this](const std::string& t) { return has_type(t); },
        [this](const std::string& t, const std::string& m) { return has_type(t) && actor_type(t).find(m) != nullptr; }};
    next_rules->validate(catalog);
  }

  for (const auto& cmd : commands) {
    if (auto* c = std::get_if<security::CreateActors>(&cmd))
      e.create_locked(e.type_of(c->type_name), c->names);
    else if (auto* d = std::get_if<security::DropActors>(&cmd))
      e.drop_locked(d->type_name, d->names);
  }
  if (rules_touched) {
    std::lock_guard lock(e.rules_mu);
    e.rules = std::move(next_rules);
    e.rules_active = true;
  }
}

void Engine::apply_script(std::string_view script) { apply(security::parse_admin_script(script)); }

security::AccessRuleSet Engine::rules() const { return *impl_->current_rules(); }

security::Decision Engine::check_access(const std::optional<security::CallerFrame>& caller,
                                        const security::CallTarget& target) const {
  return impl_->current_rules()->check(caller, target);
}

std::vector<security::AuditRecord> Engine::audit_tail(std::size_t n) const { return impl_->audit.tail(n); }
std::uint64_t Engine::audit_total() const { return impl_->audit.total(); }

std::map<ActorAddress, security::ActorStats> Engine::stats_snapshot() const { return impl_->stats->snapshot(); }

std::size_t Engine::process_detached_queue() {
  std::size_t n = 0;
  txn::DetachedSpec spec;
  while (impl_->pop(spec)) {
    impl_->run_spec(spec);
    impl_->done_running();
    ++n;
  }
  return n;
}

void Engine::drain_detached() {
  if (impl_->options.detached == DetachedMode::Manual) {
    process_detached_queue();
    return;
  }
  std::unique_lock lock(impl_->dq_mu);
  impl_->dq_idle.wait(lock, [this] { return impl_->dq.empty() && impl_->dq_running == 0; });
}

std::size_t Engine::detached_pending() const {
  std::lock_guard lock(impl_->dq_mu);
  return impl_->dq.size() + static_cast<std::size_t>(impl_->dq_running);
}

void Engine::inject_detached_aborts(int n) { impl_->injected_aborts.store(n); }

void Engine::simulate_crash() {
  EngineImpl& e = *impl_;
  e.halted = true;
  {
    std::lock_guard lock(e.dq_mu);
    e.dq.clear();
    e.dq_ids.clear();
    e.completed_specs.clear();
  }
  if (e.log) e.log->crash();
  e.manager->set_log(nullptr);
  e.log.reset();
  {
    std::unique_lock lock(e.ns_mu);
    e.actors.clear();
  }
  {
    std::lock_guard lock(e.rules_mu);
    e.rules = std::make_shared<security::AccessRuleSet>();
    e.rules_active = false;
  }
  e.audit.clear();
  e.stats = std::make_unique<security::StatsRegistry>();
  e.manager = std::make_unique<txn::Manager>();
  e.wire_manager();
}

durability::RecoveryReport Engine::recover() {
  require_admin_context("recover");
  EngineImpl& e = *impl_;
  durability::RecoveryReport report;
  if (!e.options.durability.enabled) {
    e.halted = false;
    return report;
  }
  const std::string& path = e.options.durability.log.path;
  auto scan = durability::scan_log(path);
  report.truncated_tail_bytes = scan.total_bytes - scan.valid_bytes;
  if (report.truncated_tail_bytes > 0) durability::truncate_log(path, scan.valid_bytes);

  for (const auto& t : scan.transactions) {
    for (const auto& w : t.writes) {
      rel::Relation& r = relation(w.actor, w.relation);
      if (w.op == rel::WriteOp::Delete)
        r.erase(w.record);
      else
        r.upsert(w.record, w.image);
    }
    e.manager->advance_tid(t.tid);
    for (const auto& s : t.enqueued) e.manager->advance_spec_id(s.id);
    std::lock_guard lock(e.dq_mu);
    e.completed_specs.insert(t.completed_specs.begin(), t.completed_specs.end());
  }
  report.tids_replayed = scan.transactions.size();
  for (auto& s : durability::outstanding_specs(scan)) {
    e.enqueue(std::move(s));
    ++report.detached_restored;
  }
  if (!e.log) {
    e.log = std::make_unique<durability::RedoLog>(e.options.durability.log);
    e.manager->set_log(e.log.get());
  }
  e.halted = false;
  return report;
}

bool Engine::halted() const { return impl_->halted; }
durability::RedoLog* Engine::log() const { return impl_->log.get(); }

rel::Relation& Engine::relation(const ActorAddress& actor, const std::string& relation) {
  auto inst = impl_->find_actor(actor);
  auto it = inst->relations.find(relation);
  if (it == inst->relations.end()) raise(ErrorCode::UnknownRelation, actor.str() + " has no relation " + relation);
  return *it->second;
}

void Engine::load(const ActorAddress& actor, const std::string& relation_name, std::vector<Row> rows) {
  rel::Relation& r = relation(actor, relation_name);
  for (auto& row : rows) r.load(std::move(row));
}

DatabaseSnapshot Engine::snapshot(bool durable_only) const {
  std::vector<std::shared_ptr<ActorInstance>> insts;
  {
    std::shared_lock lock(impl_->ns_mu);
    for (const auto& [_, i] : impl_->actors) insts.push_back(i);
  }
  DatabaseSnapshot out;
  for (const auto& i : insts) {
    if (durable_only && !i->durable) continue;
    for (const auto& [name, r] : i->relations) out.emplace(i->address.type_name + "/" + i->address.actor_name + "/" + name, r->snapshot());
  }
  return out;
}

bool Engine::actor_durable(const ActorAddress& actor) const { return impl_->find_actor(actor)->durable; }

DispatchMode Engine::mode() const { return impl_->options.mode; }
EngineClock& Engine::clock() { return impl_->clock; }
txn::Manager& Engine::transactions() { return *impl_->manager; }
const EngineOptions& Engine::options() const { return impl_->options; }

std::vector<ExecutorInfo> Engine::executors() const {
  std::lock_guard lock(impl_->pools_mu);
  std::vector<ExecutorInfo> out;
  for (const auto& [id, p] : impl_->pools) out.push_back({id, p->width(), p->queued()});
  return out;
}

}  // namespace actordb
