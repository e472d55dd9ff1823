#include <benchmark/benchmark.h>

#include <random>

#include "actordb/bench/bench.hpp"
#include "actordb/durability/log_format.hpp"
#include "actordb/relstore/ops.hpp"
#include "actordb/relstore/window.hpp"
#include "actordb/txn/manager.hpp"

using namespace actordb;

static void BM_WindowOf(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<rel::WindowSample> s(state.range(0));
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = {static_cast<std::int64_t>(rng() % 100000), i + 1, static_cast<double>(rng() % 10)};
  for (auto _ : state) benchmark::DoNotOptimize(rel::window_of(Value(1), s, 15));
}
BENCHMARK(BM_WindowOf)->Arg(30)->Arg(300);

static void BM_IndexedScanCommit(benchmark::State& state) {
  rel::Schema schema{"inv", {{"i_id", rel::ColumnType::Int}, {"q", rel::ColumnType::Int}}, false, {"i_id"}};
  rel::Relation r(schema, {"S", "1"}, true);
  for (int i = 0; i < state.range(0); ++i) r.load({i, 100});
  txn::Manager m;
  std::int64_t k = 0;
  for (auto _ : state) {
    auto ctx = m.begin_root();
    rel::update(ctx, r, rel::Predicate().eq("i_id", k++ % state.range(0)), {rel::Assignment::add("q", -1)});
    benchmark::DoNotOptimize(m.commit(ctx.txn()));
  }
}
BENCHMARK(BM_IndexedScanCommit)->Arg(500)->Arg(10000);

static void BM_EncodeBatch(benchmark::State& state) {
  durability::CommitBatch b;
  for (int i = 0; i < state.range(0); ++i)
    b.writes.push_back({0, {"Store_Section", "100"}, "inventory", rel::WriteOp::Update, static_cast<rel::RecordId>(i),
                        {i, 12.5, 6.0, 40, 1.0}});
  for (auto _ : state) benchmark::DoNotOptimize(durability::encode_batch(1, b));
  state.SetBytesProcessed(state.iterations() * durability::encode_batch(1, b).size());
}
BENCHMARK(BM_EncodeBatch)->Arg(8)->Arg(64);

static void BM_Interaction(benchmark::State& state) {
  bench::BenchmarkConfig c;
  c.mode = state.range(0) ? DispatchMode::Async : DispatchMode::Sync;
  c.sections_per_order = static_cast<int>(state.range(1));
  bench::Workload w(c);
  bench::OrderGenerator gen(c, 0);
  for (auto _ : state) benchmark::DoNotOptimize(w.interact(0, gen));
}
BENCHMARK(BM_Interaction)->Args({0, 1})->Args({1, 1})->Args({0, 8})->Args({1, 8})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
