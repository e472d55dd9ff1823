#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "actordb/engine/csv_loader.hpp"
#include "actordb/engine/engine.hpp"

using namespace actordb;
namespace fs = std::filesystem;

namespace {

// Counter/name holds one row (v); Driver/name fans out to counters.
ActorTypeDescriptor counter_type() {
  ActorTypeDescriptor t;
  t.type_name = "Counter";
  t.state_schemas = {{"cell", {{"v", rel::ColumnType::Int}}, false, {}}};
  t.methods.push_back({"add", {ValueKind::Int}, ValueKind::Int, {}, false,
                       [](MethodContext& ctx, const ValueList& a) -> Value {
                         ctx.relation("cell").update({}, {rel::Assignment::add("v", a[0])});
                         return ctx.relation("cell").scan().front()[0];
                       }});
  t.methods.push_back({"read", {}, ValueKind::Int, {}, false, [](MethodContext& ctx, const ValueList&) -> Value {
                         return ctx.relation("cell").scan().front()[0];
                       }});
  t.methods.push_back({"fail", {}, ValueKind::Null, {}, false, [](MethodContext& ctx, const ValueList&) -> Value {
                         ctx.relation("cell").update({}, {rel::Assignment::set("v", -1)});
                         throw std::runtime_error("boom");
                       }});
  t.methods.push_back({"admin", {}, ValueKind::Null, {}, false, [](MethodContext& ctx, const ValueList&) -> Value {
                         ctx.engine().create_actors("Counter", {"zz"});
                         return Value();
                       }});
  return t;
}

ActorTypeDescriptor driver_type() {
  ActorTypeDescriptor t;
  t.type_name = "Driver";
  t.methods.push_back({"fan", {ValueKind::Int}, ValueKind::Int, {}, false,
                       [](MethodContext& ctx, const ValueList& a) -> Value {
                         std::vector<Future> fs;
                         for (int i = 0; i < a[0].as_int(); ++i)
                           fs.push_back(ctx.invoke({"Counter", std::to_string(i)}, "add", {1}));
                         ctx.when_all(fs);
                         std::int64_t sum = 0;
                         for (auto& f : fs) sum += ctx.get(f).as_int();
                         return sum;
                       }});
  t.methods.push_back({"first", {}, ValueKind::Int, {}, false, [](MethodContext& ctx, const ValueList&) -> Value {
                         std::vector<Future> fs{ctx.invoke({"Counter", "0"}, "read"), ctx.invoke({"Counter", "1"}, "read")};
                         auto i = ctx.when_one(fs);
                         ctx.when_all(fs);
                         return static_cast<std::int64_t>(i);
                       }});
  t.methods.push_back({"later", {ValueKind::Int}, ValueKind::Null, {}, false,
                       [](MethodContext& ctx, const ValueList& a) -> Value {
                         ctx.detach({"Counter", "0"}, "add", {1}, txn::Trigger::OnCommit,
                                    static_cast<txn::Delivery>(a[0].as_int()));
                         return Value();
                       }});
  t.methods.push_back({"later_then_fail", {}, ValueKind::Null, {}, false,
                       [](MethodContext& ctx, const ValueList&) -> Value {
                         ctx.detach({"Counter", "0"}, "add", {100}, txn::Trigger::OnCommit);
                         ctx.detach({"Counter", "1"}, "add", {100}, txn::Trigger::OnAbort);
                         throw std::runtime_error("nope");
                       }});
  return t;
}

EngineOptions opts(DispatchMode m = DispatchMode::Sync) {
  EngineOptions o;
  o.mode = m;
  o.detached = DetachedMode::Manual;
  o.clock = ClockKind::Logical;
  return o;
}

void populate(Engine& e, int counters = 3) {
  for (int i = 0; i < counters; ++i) {
    e.create_actors("Counter", {std::to_string(i)});
    e.load({"Counter", std::to_string(i)}, "cell", {{0}});
  }
  e.create_actors("Driver", {"d"});
}

void setup(Engine& e, int counters = 3) {
  e.register_actor_type(counter_type());
  e.register_actor_type(driver_type());
  populate(e, counters);
}

std::int64_t value_of(Engine& e, const std::string& name) {
  return e.relation({"Counter", name}, "cell").snapshot().front().second[0].as_int();
}

}  // namespace

TEST(Catalog, DuplicateTypeAndActor) {
  Engine e(opts());
  setup(e);
  EXPECT_THROW(e.register_actor_type(counter_type()), Error);
  try {
    e.create_actors("Counter", {"0"});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::DuplicateActor);
  }
  EXPECT_EQ(e.drop_actors("Counter", {"2"}), 1u);
  EXPECT_FALSE(e.has_actor({"Counter", "2"}));
}

TEST(Calls, ErrorsComeBackAsCodes) {
  Engine e(opts());
  setup(e);
  EXPECT_EQ(e.call({"Counter", "9"}, "read").error, ErrorCode::UnknownActor);
  EXPECT_EQ(e.call({"Counter", "0"}, "nope").error, ErrorCode::UnknownMethod);
  EXPECT_EQ(e.call({"Counter", "0"}, "add", {"x"}).error, ErrorCode::TypeMismatch);
  EXPECT_EQ(e.call({"Counter", "0"}, "add", {}).error, ErrorCode::InvalidArgument);
  auto r = e.call({"Counter", "0"}, "admin");
  EXPECT_EQ(r.error, ErrorCode::CalledFromMethodBody);
}

TEST(Calls, FailedMethodRollsBack) {
  Engine e(opts());
  setup(e);
  ASSERT_TRUE(e.call({"Counter", "0"}, "add", {5}).ok());
  auto r = e.call({"Counter", "0"}, "fail");
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.error, ErrorCode::ApplicationError);
  EXPECT_EQ(value_of(e, "0"), 5);
}

TEST(Calls, FanOutSyncAndAsyncAgree) {
  for (auto m : {DispatchMode::Sync, DispatchMode::Async}) {
    Engine e(opts(m));
    setup(e, 5);
    auto r = e.call({"Driver", "d"}, "fan", {5});
    ASSERT_TRUE(r.ok()) << r.message;
    EXPECT_EQ(r.value.as_int(), 5);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(value_of(e, std::to_string(i)), 1);
  }
}

TEST(Calls, WhenOnePrefersLowestReadyIndex) {
  Engine e(opts());
  setup(e);
  EXPECT_EQ(e.call({"Driver", "d"}, "first").value.as_int(), 0);
}

TEST(Calls, ExternalRootTransactionSpansCalls) {
  Engine e(opts(DispatchMode::Async));
  setup(e);
  auto root = e.begin();
  auto a = root.invoke({"Counter", "0"}, "add", {2});
  root.get(a);
  auto b = root.invoke({"Counter", "0"}, "add", {3});
  EXPECT_EQ(root.get(b).as_int(), 5);
  EXPECT_TRUE(root.commit().committed);
  EXPECT_EQ(value_of(e, "0"), 5);
}

TEST(Calls, WeakerIsolationRejected) {
  Engine e(opts());
  txn::TxnOptions o;
  o.isolation = txn::IsolationLevel::ReadCommitted;
  EXPECT_THROW(e.begin(o), Error);
}

TEST(Detached, RunsOnlyAfterCommitAndByTrigger) {
  Engine e(opts());
  setup(e);
  ASSERT_TRUE(e.call({"Driver", "d"}, "later", {static_cast<int>(txn::Delivery::ExactlyOnce)}).ok());
  EXPECT_EQ(value_of(e, "0"), 0);
  EXPECT_EQ(e.detached_pending(), 1u);
  e.drain_detached();
  EXPECT_EQ(value_of(e, "0"), 1);
  EXPECT_FALSE(e.call({"Driver", "d"}, "later_then_fail").ok());
  e.drain_detached();
  EXPECT_EQ(value_of(e, "0"), 1);
  EXPECT_EQ(value_of(e, "1"), 100);
}

TEST(Detached, RetriesUntilCommitUnlessAtMostOnce) {
  Engine e(opts());
  setup(e);
  e.call({"Driver", "d"}, "later", {static_cast<int>(txn::Delivery::ExactlyOnce)});
  e.inject_detached_aborts(3);
  e.drain_detached();
  EXPECT_EQ(value_of(e, "0"), 1);
  e.call({"Driver", "d"}, "later", {static_cast<int>(txn::Delivery::AtMostOnce)});
  e.inject_detached_aborts(1);
  e.drain_detached();
  EXPECT_EQ(value_of(e, "0"), 1);
}

TEST(Durability, NonDurableActorsStayOutOfLogAndRecovery) {
  auto path = (fs::temp_directory_path() / "actordb_engine_nd.log").string();
  fs::remove(path);
  auto o = opts();
  o.durability.enabled = true;
  o.durability.log.path = path;
  o.durability.actor_overrides["Counter/1"] = false;
  Engine e(o);
  setup(e);
  e.call({"Counter", "0"}, "add", {4});
  e.call({"Counter", "1"}, "add", {4});
  e.simulate_crash();
  EXPECT_TRUE(e.halted());
  EXPECT_THROW(e.begin(), Error);
  populate(e);
  e.recover();
  EXPECT_EQ(value_of(e, "0"), 4);
  EXPECT_EQ(value_of(e, "1"), 0);
}

TEST(Durability, RecoverReplaysIntoFreshEngine) {
  auto path = (fs::temp_directory_path() / "actordb_engine_fresh.log").string();
  fs::remove(path);
  auto o = opts();
  o.durability.enabled = true;
  o.durability.log.path = path;
  {
    Engine e(o);
    setup(e);
    for (int i = 0; i < 4; ++i) ASSERT_TRUE(e.call({"Counter", "1"}, "add", {i}).ok());
    e.call({"Driver", "d"}, "later", {static_cast<int>(txn::Delivery::ExactlyOnce)});
  }
  Engine e(o);
  EXPECT_TRUE(e.halted());
  setup(e);
  auto rep = e.recover();
  EXPECT_FALSE(e.halted());
  EXPECT_EQ(rep.detached_restored, 1u);
  EXPECT_EQ(value_of(e, "1"), 6);
  e.drain_detached();
  EXPECT_EQ(value_of(e, "0"), 1);
  ASSERT_TRUE(e.call({"Counter", "1"}, "add", {1}).ok());
  EXPECT_EQ(value_of(e, "1"), 7);
}

TEST(Security, DeniedCallIsAuditedAndCounted) {
  Engine e(opts());
  setup(e);
  e.apply_script("REVOKE ACCESS TO ACTORS OF TYPE ALL FROM ACTORS OF TYPE ALL;");
  auto before = e.audit_total();
  auto r = e.call({"Driver", "d"}, "fan", {1});
  EXPECT_EQ(r.commit.reason, txn::AbortReason::AccessDenied);
  auto tail = e.audit_tail(1);
  ASSERT_FALSE(tail.empty());
  EXPECT_GT(e.audit_total(), before);
  EXPECT_EQ(tail.back().decision, security::Decision::Deny);
  EXPECT_EQ(e.stats_snapshot().at({"Driver", "d"}).denied, 1u);
  e.apply_script("GRANT ACTORS OF TYPE Driver ACCESS TO ACTORS OF TYPE Counter WITH METHODS IN (add);");
  EXPECT_TRUE(e.call({"Driver", "d"}, "fan", {1}).ok());
}

TEST(Security, ScriptAppliesAtomically) {
  Engine e(opts());
  setup(e);
  EXPECT_THROW(e.apply_script("CREATE ACTORS OF TYPE Counter WITH NAMES IN (50);"
                              "CREATE ACTORS OF TYPE Counter WITH NAMES IN (0);"),
               Error);
  EXPECT_FALSE(e.has_actor({"Counter", "50"}));
}

TEST(Csv, ParsesHeaderInAnyOrder) {
  rel::Schema s{"r", {{"a", rel::ColumnType::Int}, {"b", rel::ColumnType::String}}, false, {}};
  auto rows = parse_csv("b,a\nx,1\n\"y,z\",2\n", s);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], (Row{2, "y,z"}));
  EXPECT_THROW(parse_csv("a,c\n1,2\n", s), Error);
  auto t = csv_target("/tmp/Store_Section.100.inventory.csv");
  EXPECT_EQ(t.actor, (ActorAddress{"Store_Section", "100"}));
  EXPECT_EQ(t.relation, "inventory");
}
