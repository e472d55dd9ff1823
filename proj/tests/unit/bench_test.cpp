#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "actordb/bench/bench.hpp"
#include "actordb/bench/verify.hpp"
#include "actordb/common/error.hpp"

using namespace actordb;
using namespace actordb::bench;

namespace {

BenchmarkConfig tiny() {
  BenchmarkConfig c;
  c.sections_total = 3;
  c.sections_per_order = 2;
  c.items_per_section_order = 3;
  c.inventory_items_per_section = 20;
  c.history_rows_per_item = 4;
  c.customers_per_cart = 5;
  c.group_managers = 2;
  c.mode = DispatchMode::Sync;
  c.clock = ClockKind::Logical;
  return c;
}

}  // namespace

TEST(Config, ParsesKeyValueWithComments) {
  auto c = parse_config("# desk run\n[run]\nworkers = 3\nmode=sync\n  k = 7  # window\nseed = 9\n", BenchmarkConfig{});
  EXPECT_EQ(c.workers, 3);
  EXPECT_EQ(c.mode, DispatchMode::Sync);
  EXPECT_EQ(c.discount.k, 7);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  auto code_of = [](const std::string& text) {
    try {
      parse_config(text, BenchmarkConfig{}).validate();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ApplicationError;
  };
  EXPECT_EQ(code_of("bogus = 1\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of("workers = many\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of("workers = 0\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of("sections_total = 2\nsections_per_order = 3\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of("mode = fast\n"), ErrorCode::ConfigError);
}

TEST(Config, MapRoundTrips) {
  auto c = tiny();
  c.discount.c = 1.5;
  BenchmarkConfig back;
  for (const auto& [k, v] : c.to_map()) back.set(k, v);
  EXPECT_EQ(back.to_map(), c.to_map());
}

TEST(Config, FullScaleShape) {
  auto c = BenchmarkConfig::full_scale();
  EXPECT_EQ(c.sections_total, 8);
  EXPECT_EQ(c.inventory_items_per_section, 10000);
  EXPECT_EQ(c.discount.k, 150);
}

TEST(Orders, DistinctSectionsAndItems) {
  auto c = tiny();
  OrderGenerator g(c, 0);
  for (int n = 0; n < 50; ++n) {
    auto o = g.next_order();
    ASSERT_EQ(o.size(), 6u);
    std::set<std::string> secs;
    std::set<std::int64_t> items;
    for (const auto& l : o) {
      secs.insert(l.sec_id);
      items.insert(l.i_id);
      EXPECT_GE(l.i_quantity, 1);
      EXPECT_LE(l.i_quantity, c.max_order_quantity);
    }
    EXPECT_EQ(secs.size(), 2u);
    EXPECT_EQ(items.size(), 6u);
  }
}

TEST(Orders, SameSeedSameStream) {
  auto c = tiny();
  OrderGenerator a(c, 1), b(c, 1), other(c, 2);
  bool differs = false;
  for (int n = 0; n < 20; ++n) {
    auto x = a.next_order(), y = b.next_order(), z = other.next_order();
    ASSERT_EQ(smartmart::encode_orders(x), smartmart::encode_orders(y));
    differs = differs || smartmart::encode_orders(x) != smartmart::encode_orders(z);
  }
  EXPECT_TRUE(differs);
}

TEST(Report, CsvHasHeaderAndOneLinePerEpoch) {
  auto c = tiny();
  c.epochs = 20;
  c.epoch_seconds = 0.02;
  c.warmup_epochs = 0;
  auto r = run_benchmark(c);
  auto csv = to_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "epoch,committed,aborted_read,aborted_scan,aborted_racy,aborted_app,mean_latency_us,throughput_per_s");
  EXPECT_GT(r.throughput_mean, 0);
}

TEST(Report, JsonRoundTrip) {
  Report r;
  r.config = {{"workers", "2"}};
  EpochStats e;
  e.epoch = 0;
  e.committed = 10;
  e.aborted = {1, 2, 0, 3};
  e.mean_latency_us = 12.5;
  e.throughput_per_s = 100;
  r.epochs = {e, e};
  r.warnings = {"few cores"};
  finalize(r);
  EXPECT_DOUBLE_EQ(r.abort_rate, 12.0 / 32.0);
  EXPECT_EQ(report_from_json(to_json(r)), r);
  EXPECT_THROW(report_from_json("{}"), Error);
  EXPECT_THROW(parse_format("xml"), Error);
}

TEST(Workload, CountedRunsAreDeterministicUnderLogicalClock) {
  auto c = tiny();
  c.interactions = 15;
  Workload a(c), b(c);
  a.run();
  b.run();
  EXPECT_EQ(a.committed_total(), 15u);
  EXPECT_EQ(a.engine().snapshot(), b.engine().snapshot());
}

TEST(Workload, HardwareWarningWhenOversubscribed) {
  auto c = tiny();
  c.mode = DispatchMode::Async;
  c.workers = 512;
  c.carts = 512;
  EXPECT_FALSE(c.warnings().empty());
}

TEST(Suites, AllPassOnSmallInputs) {
  EXPECT_TRUE(discount_suite(200, 3).passed);
  EXPECT_TRUE(checkout_suite(20, 3).passed);
  EXPECT_TRUE(serializability_suite(50, 3).passed);
}

TEST(Suites, ConservationAuditCatchesTampering) {
  StoreImage before, after;
  before.stock = {{1, 10}};
  before.sold = {{1, 0}};
  after.stock = {{1, 7}};
  after.sold = {{1, 3}};
  after.store_visits = 1;
  EXPECT_TRUE(conservation_audit(before, after, 1).passed);
  after.sold[1] = 2;
  EXPECT_FALSE(conservation_audit(before, after, 1).passed);
}
