#include "actordb/bench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "actordb/common/error.hpp"

namespace actordb::bench {

using smartmart::OrderLine;

AbortBucket bucket_of(const CallResult& r) {
  if (r.error) return AbortBucket::App;
  if (!r.commit.reason) return AbortBucket::App;
  switch (*r.commit.reason) {
    case txn::AbortReason::ReadValidation: return AbortBucket::Read;
    case txn::AbortReason::ScanValidation: return AbortBucket::Scan;
    case txn::AbortReason::RacySiblings: return AbortBucket::Racy;
    default: return AbortBucket::App;
  }
}

std::uint64_t EpochStats::aborted_total() const { return std::accumulate(aborted.begin(), aborted.end(), std::uint64_t{0}); }

namespace {

std::pair<double, double> mean_sd(const std::vector<double>& xs) {
  if (xs.empty()) return {0, 0};
  double m = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  if (xs.size() < 2) return {m, 0};
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (xs.size() - 1))};
}

std::int64_t now_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

void finalize(Report& r) {
  std::vector<double> tp, lat;
  std::uint64_t committed = 0, aborted = 0;
  for (const auto& e : r.epochs) {
    tp.push_back(e.throughput_per_s);
    if (e.committed > 0) lat.push_back(e.mean_latency_us);
    committed += e.committed;
    aborted += e.aborted_total();
  }
  std::tie(r.throughput_mean, r.throughput_stddev) = mean_sd(tp);
  std::tie(r.latency_mean_us, r.latency_stddev_us) = mean_sd(lat);
  r.abort_rate = committed + aborted == 0 ? 0.0 : static_cast<double>(aborted) / (committed + aborted);
}

ReportFormat parse_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  raise(ErrorCode::ConfigError, "format must be csv or json, got '" + std::string(s) + "'");
}

std::string to_csv(const Report& r) {
  std::string out = "epoch,committed,aborted_read,aborted_scan,aborted_racy,aborted_app,mean_latency_us,throughput_per_s\n";
  for (const auto& e : r.epochs)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", e.epoch, e.committed, e.aborted[0], e.aborted[1], e.aborted[2],
                       e.aborted[3], e.mean_latency_us, e.throughput_per_s);
  return out;
}

std::string to_json(const Report& r) {
  nlohmann::json j;
  j["config"] = r.config;
  j["epochs"] = nlohmann::json::array();
  for (const auto& e : r.epochs)
    j["epochs"].push_back({{"epoch", e.epoch},
                           {"committed", e.committed},
                           {"aborted_read", e.aborted[0]},
                           {"aborted_scan", e.aborted[1]},
                           {"aborted_racy", e.aborted[2]},
                           {"aborted_app", e.aborted[3]},
                           {"mean_latency_us", e.mean_latency_us},
                           {"throughput_per_s", e.throughput_per_s}});
  j["throughput_mean"] = r.throughput_mean;
  j["throughput_stddev"] = r.throughput_stddev;
  j["latency_mean_us"] = r.latency_mean_us;
  j["latency_stddev_us"] = r.latency_stddev_us;
  j["abort_rate"] = r.abort_rate;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
  Report r;
  try {
    auto j = nlohmann::json::parse(text);
    r.config = j.at("config").get<std::map<std::string, std::string>>();
    for (const auto& e : j.at("epochs")) {
      EpochStats s;
      s.epoch = e.at("epoch").get<int>();
      s.committed = e.at("committed").get<std::uint64_t>();
      s.aborted[0] = e.at("aborted_read").get<std::uint64_t>();
      s.aborted[1] = e.at("aborted_scan").get<std::uint64_t>();
      s.aborted[2] = e.at("aborted_racy").get<std::uint64_t>();
      s.aborted[3] = e.at("aborted_app").get<std::uint64_t>();
      s.mean_latency_us = e.at("mean_latency_us").get<double>();
      s.throughput_per_s = e.at("throughput_per_s").get<double>();
      r.epochs.push_back(s);
    }
    r.throughput_mean = j.at("throughput_mean").get<double>();
    r.throughput_stddev = j.at("throughput_stddev").get<double>();
    r.latency_mean_us = j.at("latency_mean_us").get<double>();
    r.latency_stddev_us = j.at("latency_stddev_us").get<double>();
    r.abort_rate = j.at("abort_rate").get<double>();
    r.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::InvalidArgument, std::string("bad report json: ") + e.what());
  }
  return r;
}

void emit_report(const Report& report, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path);
  out << (format == ReportFormat::Csv ? to_csv(report) : to_json(report));
  if (!out) raise(ErrorCode::IoError, "write failed for " + path);
}

OrderGenerator::OrderGenerator(const BenchmarkConfig& cfg, int worker)
    : cfg_(&cfg), rng_(cfg.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(worker) + 1) {}

std::int64_t OrderGenerator::next_customer() {
  std::uniform_int_distribution<std::int64_t> d(1, static_cast<std::int64_t>(cfg_->carts) * cfg_->customers_per_cart);
  return d(rng_);
}

namespace {

// k distinct values from [0, n), in draw order
std::vector<int> sample_distinct(std::mt19937_64& rng, int n, int k) {
  std::vector<int> out;
  out.reserve(k);
  if (k * 3 > n) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> d(i, n - 1);
      std::swap(all[i], all[d(rng)]);
      out.push_back(all[i]);
    }
    return out;
  }
  std::uniform_int_distribution<int> d(0, n - 1);
  while (static_cast<int>(out.size()) < k) {
    int v = d(rng);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

}  // namespace

std::vector<OrderLine> OrderGenerator::next_order() {
  const auto& c = *cfg_;
  smartmart::StoreConfig store = c.store();
  std::uniform_int_distribution<std::int64_t> q(1, c.max_order_quantity);
  std::vector<OrderLine> order;
  for (int s : sample_distinct(rng_, c.sections_total, c.sections_per_order))
    for (int i : sample_distinct(rng_, c.inventory_items_per_section, c.items_per_section_order))
      order.push_back({smartmart::section_name(s), smartmart::item_id(store, s, i), q(rng_)});
  return order;
}

Workload::Workload(BenchmarkConfig config) : config_(std::move(config)) {
  config_.validate();
  engine_ = std::make_unique<Engine>(config_.engine_options());
  smartmart::register_types(*engine_, config_.discount);
  smartmart::load_store(*engine_, config_.store());
}

Workload::~Workload() = default;

Outcome Workload::interact(int worker, OrderGenerator& gen) {
  const ActorAddress cart{smartmart::kCart, smartmart::actor_name(worker + 1)};
  Outcome o;
  std::int64_t t0 = now_us();
  std::int64_t customer = gen.next_customer();
  auto order = gen.next_order();
  auto add = engine_->call(cart, "add_items", {smartmart::encode_orders(order), customer});
  if (add.ok()) {
    auto co = engine_->call(cart, "checkout", {add.value});
    if (co.ok()) {
      o.committed = true;
      committed_.fetch_add(1);
    } else {
      o.bucket = bucket_of(co);
    }
  } else {
    o.bucket = bucket_of(add);
  }
  o.end_us = now_us();
  o.latency_us = o.end_us - t0;
  return o;
}

Report Workload::run() {
  const auto& c = config_;
  Report report;
  report.config = c.to_map();
  report.warnings = c.warnings();

  const int n = c.workers;
  std::vector<std::vector<Outcome>> outcomes(n);
  std::atomic<bool> stop{false};
  const std::int64_t epoch_us = static_cast<std::int64_t>(c.epoch_seconds * 1e6);
  const bool counted = c.interactions > 0;

  std::int64_t start = now_us();
  std::vector<std::thread> threads;
  for (int w = 0; w < n; ++w) {
    threads.emplace_back([&, w] {
      OrderGenerator gen(c, w);
      int done = 0;
      // bound on attempts so a store that always aborts still terminates
      const long max_attempts = static_cast<long>(c.interactions) * 50 + 100;
      for (long attempt = 0; !stop.load(std::memory_order_relaxed); ++attempt) {
        if (counted && (done >= c.interactions || attempt >= max_attempts)) break;
        Outcome o = interact(w, gen);
        if (o.committed) ++done;
        outcomes[w].push_back(o);
      }
    });
  }
  if (!counted) {
    std::int64_t total = epoch_us * (c.warmup_epochs + c.epochs);
    std::this_thread::sleep_until(std::chrono::steady_clock::time_point(std::chrono::microseconds(start + total)));
    stop.store(true);
  }
  for (auto& t : threads) t.join();
  std::int64_t end = now_us();
  engine_->drain_detached();

  if (counted) {
    EpochStats e;
    double lat = 0;
    for (const auto& ws : outcomes)
      for (const auto& o : ws) {
        if (o.committed) {
          ++e.committed;
          lat += o.latency_us;
        } else {
          ++e.aborted[static_cast<std::size_t>(o.bucket)];
        }
      }
    e.mean_latency_us = e.committed ? lat / e.committed : 0.0;
    e.throughput_per_s = e.committed / (std::max<std::int64_t>(end - start, 1) / 1e6);
    report.epochs.push_back(e);
  } else {
    const std::int64_t measured = start + epoch_us * c.warmup_epochs;
    report.epochs.resize(c.epochs);
    std::vector<double> lat(c.epochs, 0.0);
    for (int i = 0; i < c.epochs; ++i) report.epochs[i].epoch = i;
    for (const auto& ws : outcomes)
      for (const auto& o : ws) {
        if (o.end_us < measured) continue;
        auto idx = (o.end_us - measured) / epoch_us;
        if (idx >= c.epochs) continue;
        auto& e = report.epochs[idx];
        if (o.committed) {
          ++e.committed;
          lat[idx] += o.latency_us;
        } else {
          ++e.aborted[static_cast<std::size_t>(o.bucket)];
        }
      }
    for (int i = 0; i < c.epochs; ++i) {
      auto& e = report.epochs[i];
      e.mean_latency_us = e.committed ? lat[i] / e.committed : 0.0;
      e.throughput_per_s = e.committed / c.epoch_seconds;
    }
  }
  finalize(report);
  return report;
}

Report run_benchmark(const BenchmarkConfig& config) { return Workload(config).run(); }

}  // namespace actordb::bench
