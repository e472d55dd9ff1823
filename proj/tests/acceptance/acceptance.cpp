// One line per acceptance criterion: PASS, FAIL or SKIP with the measured numbers.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <fmt/core.h>

#include "actordb/bench/bench.hpp"
#include "actordb/bench/verify.hpp"
#include "actordb/engine/engine.hpp"
#include "actordb/security/admin_dsl.hpp"
#include "actordb/smartmart/smartmart.hpp"

using namespace actordb;
using namespace actordb::smartmart;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

int failures = 0;

void report(int n, const std::string& name, const Outcome& o, double seconds) {
  const char* s = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
  if (o.status == Status::Fail) ++failures;
  fmt::print("criterion {:>2} {:<28} {} ({:.1f}s) {}\n", n, name, s, seconds, o.detail);
  std::fflush(stdout);
}

void run(int n, const std::string& name, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {Status::Fail, std::string("exception: ") + e.what()};
  }
  report(n, name, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

Outcome from_suite(const bench::SuiteResult& r, double limit_s) {
  bool ok = r.passed && r.seconds < limit_s;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("{} cases, {} failures, max err {:.2g}, {:.2f}s (limit {}s) {}", r.cases, r.failures, r.max_error,
                      r.seconds, limit_s, r.detail)};
}

bench::BenchmarkConfig timed(DispatchMode mode, int workers, int sections, int epochs, double seconds) {
  bench::BenchmarkConfig c;
  c.mode = mode;
  c.workers = workers;
  c.carts = std::max(workers, 1);
  c.sections_per_order = sections;
  c.items_per_section_order = 4;
  c.epochs = epochs;
  c.epoch_seconds = seconds;
  return c;
}

// --- 5 ---------------------------------------------------------------------------------------

Outcome async_benefit() {
  auto tp = [](DispatchMode m, int sections) {
    return bench::run_benchmark(timed(m, 1, sections, 3, 1.0)).throughput_mean;
  };
  double sync1 = tp(DispatchMode::Sync, 1), async1 = tp(DispatchMode::Async, 1);
  double r1 = async1 / sync1;
  std::string d1 = fmt::format("1 section: async {:.0f}/s vs sync {:.0f}/s (ratio {:.2f}, need <= 1.1)", async1, sync1, r1);
  if (r1 > 1.1) return {Status::Fail, d1};
  unsigned cores = std::thread::hardware_concurrency();
  if (cores < 8)
    return {Status::Skip, d1 + fmt::format("; 8-section ratio not checked: {} hardware threads, needs >= 8", cores)};
  double sync8 = tp(DispatchMode::Sync, 8), async8 = tp(DispatchMode::Async, 8);
  double r8 = async8 / sync8;
  std::string d8 = fmt::format("; 8 sections: async {:.0f}/s vs sync {:.0f}/s (ratio {:.2f}, need >= 1.5)", async8,
                               sync8, r8);
  return {r8 >= 1.5 ? Status::Pass : Status::Fail, d1 + d8};
}

// --- 6 ---------------------------------------------------------------------------------------

Outcome load_trend(const std::string& csv_path) {
  std::ofstream csv(csv_path);
  csv << "mode,workers,throughput_mean,throughput_stddev,latency_mean_us,latency_stddev_us,abort_rate\n";
  double lat1 = 0, lat8 = 0;
  for (auto mode : {DispatchMode::Sync, DispatchMode::Async}) {
    for (int w = 1; w <= 8; ++w) {
      auto cfg = timed(mode, w, 8, 2, 0.5);
      auto r = bench::run_benchmark(cfg);
      csv << fmt::format("{},{},{},{},{},{},{}\n", to_string(mode), w, r.throughput_mean, r.throughput_stddev,
                         r.latency_mean_us, r.latency_stddev_us, r.abort_rate);
      if (mode == DispatchMode::Async && w == 1) lat1 = r.latency_mean_us;
      if (mode == DispatchMode::Async && w == 8) lat8 = r.latency_mean_us;
    }
  }
  return {lat8 > lat1 ? Status::Pass : Status::Fail,
          fmt::format("async latency 1 worker {:.0f} us, 8 workers {:.0f} us; csv {}", lat1, lat8, csv_path)};
}

// --- 7 ---------------------------------------------------------------------------------------

Outcome abort_rate() {
  auto cfg = timed(DispatchMode::Async, 8, 8, 3, 1.0);
  cfg.inventory_items_per_section = 10000;
  cfg.history_rows_per_item = 10;
  cfg.discount.k = 5;
  auto r = bench::run_benchmark(cfg);
  std::uint64_t scan = 0, read = 0;
  for (const auto& e : r.epochs) {
    read += e.aborted[0];
    scan += e.aborted[1];
  }
  bool ok = r.abort_rate > 0 && r.abort_rate < 0.30;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("abort rate {:.2f}% (read {}, scan {})", r.abort_rate * 100, read, scan)};
}

// --- 8 ---------------------------------------------------------------------------------------

struct RecoveryRig {
  std::string log;
  StoreConfig store;
  EngineOptions opts;
  std::vector<std::pair<std::vector<OrderLine>, std::int64_t>> orders;

  explicit RecoveryRig(const std::string& dir) {
    log = (fs::path(dir) / "recovery.log").string();
    store.sections = 2;
    store.items_per_section = 20;
    store.history_rows_per_item = 5;
    store.carts = 1;
    store.group_managers = 2;
    store.customers_per_cart = 3;
    store.seed = 11;
    opts.mode = DispatchMode::Sync;
    opts.clock = ClockKind::Logical;
    opts.detached = DetachedMode::Manual;
    opts.durability.enabled = true;
    opts.durability.log.path = log;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 5; ++i) {
      std::vector<OrderLine> o;
      for (int s = 0; s < 2; ++s)
        for (int j = 0; j < 3; ++j)
          o.push_back({section_name(s), item_id(store, s, (i * 3 + j) % 20), 1 + static_cast<int>(rng() % 5)});
      orders.emplace_back(o, 1 + static_cast<int>(rng() % 3));
    }
  }

  void populate(Engine& e) const { load_store(e, store); }

  std::size_t visits(Engine& e) const {
    std::size_t n = 0;
    for (const auto& a : e.actors())
      if (a.type_name == kCustomer) n += e.relation(a, "store_visits").size();
    return n;
  }
};

// Runs until `stop_after` commits; returns durable snapshots after each commit.
std::vector<DatabaseSnapshot> drive(Engine& e, const RecoveryRig& rig, int stop_after, int& checkouts,
                                    std::uintmax_t* before_last = nullptr) {
  std::vector<DatabaseSnapshot> snaps{e.snapshot(true)};
  checkouts = 0;
  int commits = 0;
  for (const auto& [order, cust] : rig.orders) {
    auto add = e.call({kCart, "1"}, "add_items", {encode_orders(order), cust});
    if (!add.ok()) throw std::runtime_error("add_items failed: " + add.message);
    snaps.push_back(e.snapshot(true));
    if (++commits == stop_after) break;
    if (before_last) *before_last = fs::file_size(rig.log);
    auto co = e.call({kCart, "1"}, "checkout", {add.value});
    if (!co.ok()) throw std::runtime_error("checkout failed: " + co.message);
    ++checkouts;
    snaps.push_back(e.snapshot(true));
    if (++commits == stop_after) break;
    e.drain_detached();
  }
  return snaps;
}

Outcome recovery(const std::string& dir) {
  RecoveryRig rig(dir);
  std::vector<std::string> problems;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };
  for (int p = 1; p <= 10; ++p) {
    fs::remove(rig.log);
    Engine e(rig.opts);
    register_types(e, {});
    rig.populate(e);
    int checkouts = 0;
    auto snaps = drive(e, rig, p, checkouts);
    e.simulate_crash();
    rig.populate(e);
    e.recover();
    std::string tag = "crash after commit " + std::to_string(p) + ": ";
    check(e.snapshot(true) == snaps[p], tag + "durable state differs");
    check(e.relation({kCart, "1"}, "cart_info").size() == 0 && e.relation({kCart, "1"}, "cart_purchases").size() == 0,
          tag + "cart not empty");
    e.drain_detached();
    check(rig.visits(e) == static_cast<std::size_t>(checkouts), tag + "store visits " + std::to_string(rig.visits(e)) +
                                                                     " for " + std::to_string(checkouts) + " checkouts");
    // a second crash must not run the spec again
    auto settled = e.snapshot(true);
    e.simulate_crash();
    rig.populate(e);
    e.recover();
    e.drain_detached();
    check(e.snapshot(true) == settled, tag + "second recovery changed state");
    check(rig.visits(e) == static_cast<std::size_t>(checkouts), tag + "spec ran twice");
  }

  // torn tail: cut the last checkout's frames in half
  fs::remove(rig.log);
  Engine e(rig.opts);
  register_types(e, {});
  rig.populate(e);
  int checkouts = 0;
  std::uintmax_t before_last = 0;
  auto snaps = drive(e, rig, 10, checkouts, &before_last);
  std::uintmax_t after_last = fs::file_size(rig.log);
  e.simulate_crash();
  fs::resize_file(rig.log, before_last + (after_last - before_last) / 2);
  rig.populate(e);
  auto rep = e.recover();
  check(rep.truncated_tail_bytes > 0, "torn tail: nothing truncated");
  check(e.snapshot(true) == snaps[9], "torn tail: state differs from the last intact commit");
  e.drain_detached();
  check(rig.visits(e) == static_cast<std::size_t>(checkouts - 1), "torn tail: lost checkout still visited");

  if (!problems.empty()) return {Status::Fail, problems.front() + fmt::format(" (+{} more)", problems.size() - 1)};
  return {Status::Pass, "10 crash points + torn tail: state bit-exact, cart empty, each visit recorded once"};
}

// --- 9 ---------------------------------------------------------------------------------------

Outcome racy_siblings() {
  EngineOptions o;
  o.mode = DispatchMode::Async;
  o.executors.rules.push_back({"Account/*", "dedicated:1"});
  Engine e(o);
  ActorTypeDescriptor account;
  account.type_name = "Account";
  account.state_schemas = {{"bal", {{"v", rel::ColumnType::Int}}, false, {}}};
  account.methods.push_back({"deposit", {ValueKind::Int}, ValueKind::Null, {}, false,
                             [](MethodContext& ctx, const ValueList& a) -> Value {
                               ctx.relation("bal").update({}, {rel::Assignment::add("v", a[0])});
                               return Value();
                             }});
  ActorTypeDescriptor teller;
  teller.type_name = "Teller";
  teller.methods.push_back({"racy", {}, ValueKind::Null, {}, false, [](MethodContext& ctx, const ValueList&) -> Value {
                              ctx.invoke({"Account", "a"}, "deposit", {1});
                              ctx.invoke({"Account", "a"}, "deposit", {2});
                              return Value();
                            }});
  teller.methods.push_back({"ordered", {}, ValueKind::Null, {}, false,
                            [](MethodContext& ctx, const ValueList&) -> Value {
                              auto f = ctx.invoke({"Account", "a"}, "deposit", {1});
                              ctx.get(f);
                              ctx.invoke({"Account", "a"}, "deposit", {2});
                              return Value();
                            }});
  e.register_actor_type(account);
  e.register_actor_type(teller);
  e.create_actors("Account", {"a"});
  e.create_actors("Teller", {"t"});
  e.load({"Account", "a"}, "bal", {{0}});
  int racy = 0, ordered = 0;
  for (int i = 0; i < 100; ++i) {
    auto r = e.call({"Teller", "t"}, "racy");
    if (!r.commit.committed && r.commit.reason == txn::AbortReason::RacySiblings) ++racy;
  }
  for (int i = 0; i < 100; ++i)
    if (e.call({"Teller", "t"}, "ordered").commit.committed) ++ordered;
  std::int64_t bal = e.relation({"Account", "a"}, "bal").snapshot().front().second[0].as_int();
  bool ok = racy == 100 && ordered == 100 && bal == 300;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("racy aborted {}/100 with RacySiblings, ordered committed {}/100, balance {}", racy, ordered, bal)};
}

// --- 10 --------------------------------------------------------------------------------------

const char* kGrantScript = R"(REVOKE ACCESS TO ACTORS OF TYPE ALL FROM ACTORS OF TYPE ALL;

GRANT ACTORS OF TYPE Cart WITH METHODS IN (add_items)
 ACCESS TO
   ACTORS OF TYPE Store_Section WITH METHODS IN (get_price)
 AND ACCESS TO
   ACTORS OF TYPE Customer WITH METHODS IN (get_customer_info)
 AND ACCESS TO
   ACTORS OF TYPE Group_Manager WITH METHODS IN
                  (get_fixed_discounts);

GRANT ACTORS OF TYPE Cart WITH METHODS IN (checkout)
 ACCESS TO
   ACTORS OF TYPE Store_Section WITH METHODS IN
                  (get_variable_discount_update_inventory)
 AND ACCESS TO
   ACTORS OF TYPE Customer WITH METHODS IN (add_store_visit);

GRANT ACTORS OF TYPE Cart WITH NAMES IN (12,13,14)
 ACCESS TO
   ACTORS OF TYPE Store_Section WITH NAMES IN (100, 200);
)";

const char* kCreateScript = R"(  CREATE ACTORS OF TYPE Customer WITH NAMES IN (22, 32);
  CREATE ACTORS OF TYPE Cart WITH NAMES IN (42, 43);

  DROP ACTORS OF TYPE Cart WITH NAMES IN (42);
)";

std::string squash(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

Outcome access_control() {
  std::vector<std::string> problems;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };
  for (const char* script : {kGrantScript, kCreateScript}) {
    auto printed = security::pretty_print(security::parse_admin_script(script));
    check(squash(printed) == squash(script), "round trip differs:\n" + printed);
    check(security::parse_admin_script(printed) == security::parse_admin_script(script), "reparse differs");
  }

  EngineOptions o;
  o.mode = DispatchMode::Sync;
  o.detached = DetachedMode::Manual;
  Engine e(o);
  MethodDescriptor probe{"probe_section", {ValueKind::String}, ValueKind::Any, {}, false,
                         [](MethodContext& ctx, const ValueList& a) -> Value {
                           auto f = ctx.invoke({kStoreSection, a[0].as_string()}, "get_price", {ValueList{1}});
                           return ctx.get(f);
                         }};
  register_types(e, {}, {}, {{kGroupManager, probe}});
  StoreConfig cfg;
  cfg.sections = 3;
  cfg.items_per_section = 20;
  cfg.history_rows_per_item = 3;
  cfg.carts = 14;
  cfg.customers_per_cart = 1;
  load_store(e, cfg);
  e.apply_script(kGrantScript);

  using security::CallerFrame;
  using security::Decision;
  auto decide = [&](const std::string& ct, const std::string& cn, const std::string& cm, const std::string& tt,
                    const std::string& tn, const std::string& tm) {
    return e.check_access(CallerFrame{{ct, cn}, cm}, {{tt, tn}, tm});
  };
  for (const char* cart : {"1", "5", "12"}) {
    std::vector<std::string> secs = std::string(cart) == "12" ? std::vector<std::string>{"100", "200"}
                                                               : std::vector<std::string>{"100", "200", "300"};
    for (const auto& sec : secs) {
      check(decide(kCart, cart, "add_items", kStoreSection, sec, "get_price") == Decision::Allow,
            std::string("rule 1 denied for cart ") + cart + " section " + sec);
      check(decide(kCart, cart, "checkout", kStoreSection, sec, "get_variable_discount_update_inventory") ==
                Decision::Allow,
            std::string("rule 2 denied for cart ") + cart + " section " + sec);
    }
    check(decide(kCart, cart, "add_items", kCustomer, "1", "get_customer_info") == Decision::Allow, "rule 1 customer");
    check(decide(kCart, cart, "add_items", kGroupManager, "1", "get_fixed_discounts") == Decision::Allow, "rule 1 gm");
    check(decide(kCart, cart, "checkout", kCustomer, "1", "add_store_visit") == Decision::Allow, "rule 2 customer");
  }
  check(decide(kCart, "1", "add_items", kStoreSection, "100", "get_variable_discount_update_inventory") ==
            Decision::Deny,
        "add_items reached checkout-only method");

  // Group_Manager -> Store_Section through a real call
  auto before = e.audit_total();
  auto gm = e.call({kGroupManager, "1"}, "probe_section", {"100"});
  check(!gm.ok() && gm.commit.reason == txn::AbortReason::AccessDenied, "Group_Manager -> Store_Section not denied");
  auto tail = e.audit_tail(1);
  check(e.audit_total() > before && !tail.empty() && tail.back().decision == Decision::Deny &&
            tail.back().target.actor == ActorAddress{kStoreSection, "100"},
        "no audit record for the Group_Manager denial");

  // cart 12 against sections 300 and 100, end to end
  auto c300 = e.call({kCart, "12"}, "add_items", {encode_orders({{"300", item_id(cfg, 2, 0), 1}}), 1});
  check(!c300.ok() && c300.commit.reason == txn::AbortReason::AccessDenied, "cart 12 -> section 300 not denied");
  check(decide(kCart, "12", "add_items", kStoreSection, "300", "get_price") == Decision::Deny, "check_access 12->300");
  auto c100 = e.call({kCart, "12"}, "add_items", {encode_orders({{"100", item_id(cfg, 0, 0), 1}}), 1});
  check(c100.ok(), "cart 12 -> section 100 denied: " + c100.message);
  if (c100.ok()) check(e.call({kCart, "12"}, "checkout", {c100.value}).ok(), "cart 12 checkout failed");

  if (!problems.empty()) return {Status::Fail, problems.front() + fmt::format(" (+{} more)", problems.size() - 1)};
  return {Status::Pass, "rules 1-2 allow, Group_Manager denied and audited, cart 12: 300 denied, 100 allowed; both "
                        "scripts round-trip"};
}

// --- 11 --------------------------------------------------------------------------------------

Outcome mode_equivalence() {
  auto state = [](DispatchMode m, std::uint64_t& committed) {
    bench::BenchmarkConfig c;
    c.mode = m;
    c.clock = ClockKind::Logical;
    c.interactions = 100;
    c.seed = 99;
    bench::Workload w(c);
    w.run();
    committed = w.committed_total();
    return w.engine().snapshot();
  };
  std::uint64_t cs = 0, ca = 0;
  auto s = state(DispatchMode::Sync, cs);
  auto a = state(DispatchMode::Async, ca);
  std::size_t records = 0;
  for (const auto& [k, rows] : s) records += rows.size();
  bool ok = cs == 100 && ca == 100 && s == a;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("sync committed {}, async committed {}, {} records compared, identical: {}", cs, ca, records,
                      s == a ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  std::string out_dir = argc > 1 ? argv[1] : fs::temp_directory_path().string();
  fs::path work = fs::path(out_dir) / "acceptance_work";
  fs::create_directories(work);

  run(1, "discount-oracle", [] { return from_suite(bench::discount_suite(1000, 101), 1.0); });
  run(2, "checkout-oracle", [] { return from_suite(bench::checkout_suite(200, 202), 30.0); });
  run(3, "serializability", [] { return from_suite(bench::serializability_suite(500, 303), 60.0); });
  run(4, "conservation", [] { return from_suite(bench::conservation_suite(4, 200, 404), 120.0); });
  run(5, "async-benefit", async_benefit);
  run(6, "load-trend", [&] { return load_trend((work / "load_trend.csv").string()); });
  run(7, "abort-rate", abort_rate);
  run(8, "recovery", [&] {
    auto t0 = std::chrono::steady_clock::now();
    auto o = recovery(work.string());
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.status == Status::Pass && s >= 30) o = {Status::Fail, fmt::format("took {:.1f}s (limit 30s)", s)};
    return o;
  });
  run(9, "racy-siblings", racy_siblings);
  run(10, "access-control", access_control);
  run(11, "mode-equivalence", mode_equivalence);

  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
