#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "actordb/common/error.hpp"
#include "actordb/relstore/ops.hpp"
#include "actordb/relstore/window.hpp"
#include "actordb/txn/manager.hpp"

using namespace actordb;
using namespace actordb::rel;

namespace {

Schema items() {
  return {"items", {{"i_id", ColumnType::Int}, {"price", ColumnType::Float}, {"name", ColumnType::String}}, false,
          {"i_id"}};
}

struct Fixture {
  txn::Manager m;
  Relation rel{items(), {"T", "a"}, true};

  Fixture() {
    rel.load({1, 10.0, "apple"});
    rel.load({2, 20.0, "pear"});
    rel.load({3, 30.0, "fig"});
  }
};

template <class E>
void expect_code(E&& f, ErrorCode code) {
  try {
    f();
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(Schema, RejectsDuplicateColumnsAndUnknownIndex) {
  Schema dup{"r", {{"a", ColumnType::Int}, {"a", ColumnType::Int}}, false, {}};
  expect_code([&] { dup.validate(); }, ErrorCode::InvalidSchema);
  Schema bad{"r", {{"a", ColumnType::Int}}, false, {"b"}};
  expect_code([&] { bad.validate(); }, ErrorCode::InvalidSchema);
}

TEST(Relation, LoadRejectsWrongArity) {
  Fixture f;
  expect_code([&] { f.rel.load({4, 1.0}); }, ErrorCode::TypeMismatch);
  expect_code([&] { f.rel.load({"x", 1.0, "y"}); }, ErrorCode::TypeMismatch);
}

TEST(Ops, ScanWithPredicateAndProjection) {
  Fixture f;
  auto ctx = f.m.begin_root();
  auto rows = scan(ctx, f.rel, Predicate().where("price", CompareOp::Ge, 20), {"name"});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], Row{"pear"});
  EXPECT_EQ(rows[1], Row{"fig"});
  auto in = scan(ctx, f.rel, Predicate().in("i_id", {1, 3}));
  EXPECT_EQ(in.size(), 2u);
  expect_code([&] { scan(ctx, f.rel, Predicate().eq("nope", 1)); }, ErrorCode::UnknownColumn);
}

TEST(Ops, OwnWritesVisibleBeforeCommit) {
  Fixture f;
  auto ctx = f.m.begin_root();
  insert(ctx, f.rel, {4, 40.0, "kiwi"});
  update(ctx, f.rel, Predicate().eq("i_id", 1), {Assignment::add("price", 1.5)});
  erase(ctx, f.rel, Predicate().eq("i_id", 2));
  auto rows = scan(ctx, f.rel, {});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_DOUBLE_EQ(rows[0][1].as_float(), 11.5);
  EXPECT_EQ(f.rel.size(), 3u);  // nothing installed yet
  ASSERT_TRUE(f.m.commit(ctx.txn()).committed);
  EXPECT_EQ(f.rel.size(), 3u);
  auto ctx2 = f.m.begin_root();
  EXPECT_EQ(scan(ctx2, f.rel, Predicate().eq("i_id", 4)).size(), 1u);
  EXPECT_TRUE(scan(ctx2, f.rel, Predicate().eq("i_id", 2)).empty());
}

TEST(Ops, AbortDiscardsWrites) {
  Fixture f;
  auto ctx = f.m.begin_root();
  insert(ctx, f.rel, {9, 1.0, "x"});
  f.m.abort(ctx.txn(), txn::AbortReason::ApplicationError);
  EXPECT_EQ(f.rel.size(), 3u);
}

TEST(Ops, AggregatesOverEmptyAndFull) {
  Fixture f;
  auto ctx = f.m.begin_root();
  auto r = aggregate(ctx, f.rel, {},
                     {AggSpec::sum("price"), AggSpec::avg("price"), AggSpec::count(), AggSpec::min("i_id"),
                      AggSpec::max("price")});
  EXPECT_DOUBLE_EQ(r[0].as_float(), 60.0);
  EXPECT_DOUBLE_EQ(r[1].as_float(), 20.0);
  EXPECT_EQ(r[2].as_int(), 3);
  EXPECT_EQ(r[3].as_float(), 1.0);
  auto e = aggregate(ctx, f.rel, Predicate().eq("i_id", 99), {AggSpec::sum("price"), AggSpec::count()});
  EXPECT_TRUE(e[0].is_null());
  EXPECT_EQ(e[1].as_int(), 0);
}

TEST(Ops, UpdateEvaluatesAgainstPreImage) {
  Fixture f;
  auto ctx = f.m.begin_root();
  Assignment swap{"price", [](const RowRef& r) { return Value(r.float_("price") * 2); }};
  update(ctx, f.rel, {}, {swap, Assignment::add("i_id", 10)});
  auto rows = scan(ctx, f.rel, {});
  EXPECT_EQ(rows[2][0].as_int(), 13);
  EXPECT_DOUBLE_EQ(rows[2][1].as_float(), 60.0);
  expect_code([&] { update(ctx, f.rel, {}, {Assignment::set("name", 5)}); }, ErrorCode::TypeMismatch);
}

TEST(Window, KeepsMostRecentAndUsesSampleStddev) {
  std::vector<WindowSample> s{{1, 1, 100}, {5, 2, 2}, {3, 3, 4}, {5, 4, 6}};
  auto w = window_of(Value(7), s, 3);
  // most recent three: order 5 (id 4), 5 (id 2), 3
  EXPECT_EQ(w.window_count, 3);
  EXPECT_DOUBLE_EQ(w.mean, 4.0);
  EXPECT_DOUBLE_EQ(w.sample_stddev, 2.0);
  auto one = window_of(Value(7), {{1, 1, 5}}, 3);
  EXPECT_DOUBLE_EQ(one.sample_stddev, 0.0);
  auto none = window_of(Value(7), {}, 3);
  EXPECT_EQ(none.window_count, 0);
}

TEST(Window, RandomAgainstSortAndRecompute) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    int n = rng() % 30;
    std::int64_t k = 1 + rng() % 10;
    std::vector<WindowSample> s;
    for (int i = 0; i < n; ++i) s.push_back({static_cast<std::int64_t>(rng() % 8), static_cast<std::uint64_t>(i + 1),
                                             static_cast<double>(rng() % 50)});
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) {
      return a.order != b.order ? a.order > b.order : a.record_id > b.record_id;
    });
    sorted.resize(std::min<std::size_t>(sorted.size(), k));
    double m = 0;
    for (auto& x : sorted) m += x.value;
    m = sorted.empty() ? 0 : m / sorted.size();
    double ss = 0;
    for (auto& x : sorted) ss += (x.value - m) * (x.value - m);
    double sd = sorted.size() > 1 ? std::sqrt(ss / (sorted.size() - 1)) : 0;
    auto w = window_of(Value(1), s, k);
    ASSERT_EQ(w.window_count, static_cast<std::int64_t>(sorted.size()));
    ASSERT_NEAR(w.mean, m, 1e-9);
    ASSERT_NEAR(w.sample_stddev, sd, 1e-9);
  }
}

TEST(Window, StatsPerKeyIncludeStagedRows) {
  txn::Manager m;
  Schema h{"h", {{"i_id", ColumnType::Int}, {"ts", ColumnType::Timestamp}, {"q", ColumnType::Int}}, false, {"i_id"}};
  Relation r(h, {"T", "a"}, true);
  r.load({1, Timestamp{10}, 4});
  r.load({1, Timestamp{20}, 8});
  r.load({2, Timestamp{5}, 3});
  auto ctx = m.begin_root();
  insert(ctx, r, {1, Timestamp{30}, 12});
  auto st = window_stats(ctx, r, "i_id", "ts", "q", 2, {1, 2, 3});
  ASSERT_EQ(st.size(), 3u);
  EXPECT_DOUBLE_EQ(st[0].mean, 10.0);  // 8 and 12
  EXPECT_EQ(st[1].window_count, 1);
  EXPECT_EQ(st[2].window_count, 0);
}

TEST(Concurrency, ConflictingReadAbortsSecondWriter) {
  Fixture f;
  auto a = f.m.begin_root();
  auto b = f.m.begin_root();
  update(a, f.rel, Predicate().eq("i_id", 1), {Assignment::add("price", 1)});
  update(b, f.rel, Predicate().eq("i_id", 1), {Assignment::add("price", 2)});
  EXPECT_TRUE(f.m.commit(a.txn()).committed);
  auto rb = f.m.commit(b.txn());
  EXPECT_FALSE(rb.committed);
  EXPECT_EQ(rb.reason, txn::AbortReason::ReadValidation);
}

TEST(Concurrency, PhantomInsertFailsScanValidation) {
  Fixture f;
  auto a = f.m.begin_root();
  auto b = f.m.begin_root();
  aggregate(a, f.rel, Predicate().eq("i_id", 5), {AggSpec::count()});
  insert(a, f.rel, {100, 1.0, "marker"});
  insert(b, f.rel, {5, 1.0, "new"});
  EXPECT_TRUE(f.m.commit(b.txn()).committed);
  auto ra = f.m.commit(a.txn());
  EXPECT_EQ(ra.reason, txn::AbortReason::ScanValidation);
}

TEST(Concurrency, InsertUnderOtherKeyDoesNotConflict) {
  Fixture f;
  auto a = f.m.begin_root();
  auto b = f.m.begin_root();
  scan(a, f.rel, Predicate().eq("i_id", 5));
  insert(a, f.rel, {100, 1.0, "marker"});
  insert(b, f.rel, {6, 1.0, "other"});
  EXPECT_TRUE(f.m.commit(b.txn()).committed);
  EXPECT_TRUE(f.m.commit(a.txn()).committed);
}

TEST(Concurrency, CoarseGranuleTurnsNeighbourIntoConflict) {
  txn::Manager m;
  Relation r(items(), {"T", "a"}, true, 10);
  auto a = m.begin_root();
  auto b = m.begin_root();
  scan(a, r, Predicate().eq("i_id", 5));
  insert(a, r, {100, 1.0, "marker"});
  insert(b, r, {6, 1.0, "other"});
  EXPECT_TRUE(m.commit(b.txn()).committed);
  EXPECT_EQ(m.commit(a.txn()).reason, txn::AbortReason::ScanValidation);
}

TEST(Concurrency, UnindexedScanGuardsWholeRelation) {
  Fixture f;
  auto a = f.m.begin_root();
  auto b = f.m.begin_root();
  scan(a, f.rel, Predicate().eq("name", "plum"));
  insert(a, f.rel, {100, 1.0, "marker"});
  insert(b, f.rel, {50, 1.0, "plum"});
  EXPECT_TRUE(f.m.commit(b.txn()).committed);
  EXPECT_EQ(f.m.commit(a.txn()).reason, txn::AbortReason::ScanValidation);
}
