// actordb: load, benchmark, administer and verify a SmartMart store.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "actordb/bench/bench.hpp"
#include "actordb/bench/verify.hpp"
#include "actordb/engine/engine.hpp"
#include "actordb/security/verify.hpp"
#include "actordb/smartmart/smartmart.hpp"

using namespace actordb;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct ConfigArgs {
  std::string file;
  bool full_scale = false;

  bench::BenchmarkConfig resolve() const {
    bench::BenchmarkConfig base = full_scale ? bench::BenchmarkConfig::full_scale() : bench::BenchmarkConfig{};
    return file.empty() ? base : bench::load_config(file, base);
  }
};

void add_config(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.file, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_flag("--paper-scale", args.full_scale, "8 sections, 10,000 items, 300 history rows per item, k=150");
}

void print_suite(const bench::SuiteResult& r) {
  fmt::print("{:<16} {} cases={} failures={} max_err={:.3g} {:.2f}s {}\n", r.name, r.passed ? "ok  " : "FAIL", r.cases,
             r.failures, r.max_error, r.seconds, r.detail);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"actordb - actor database engine with the SmartMart workload"};
  app.require_subcommand(1);

  ConfigArgs load_args;
  auto* load = app.add_subcommand("load", "Load a store and print its size");
  add_config(load, load_args);

  ConfigArgs bench_args;
  std::string mode, out, format = "csv";
  int workers = 0, sections = 0, items = 0, epochs = 0, interactions = -1;
  double epoch_seconds = 0;
  std::optional<std::uint64_t> seed;
  auto* bench_cmd = app.add_subcommand("bench", "Run the closed-loop benchmark");
  add_config(bench_cmd, bench_args);
  bench_cmd->add_option("--mode", mode, "sync or async");
  bench_cmd->add_option("--workers", workers, "concurrent workers (one cart each)");
  bench_cmd->add_option("--sections", sections, "store sections per order");
  bench_cmd->add_option("--items-per-section", items, "items ordered from each section");
  bench_cmd->add_option("--epochs", epochs);
  bench_cmd->add_option("--epoch-seconds", epoch_seconds);
  bench_cmd->add_option("--interactions", interactions, "committed interactions per worker instead of timed epochs");
  bench_cmd->add_option("--seed", seed);
  bench_cmd->add_option("--out", out, "report path (stdout when omitted)");
  bench_cmd->add_option("--format", format, "csv or json");

  std::string admin_script;
  ConfigArgs admin_args;
  bool admin_print = false;
  auto* admin = app.add_subcommand("admin", "Apply an admin script to a freshly loaded store");
  admin->add_option("--script", admin_script)->required()->check(CLI::ExistingFile);
  admin->add_flag("--print", admin_print, "print the canonical form of the script");
  add_config(admin, admin_args);

  std::string log_path;
  ConfigArgs recover_args;
  auto* recover = app.add_subcommand("recover", "Rebuild a store from its redo log");
  recover->add_option("--log", log_path)->required();
  add_config(recover, recover_args);

  std::uint64_t verify_seed = 1;
  std::string verify_script;
  auto* verify = app.add_subcommand("verify", "Run the oracle suites");
  verify->add_option("--seed", verify_seed);
  verify->add_option("--script", verify_script, "also check the SmartMart call graph against this admin script")
      ->check(CLI::ExistingFile);

  ConfigArgs stats_args;
  int stats_interactions = 20;
  auto* stats = app.add_subcommand("stats", "Run a short workload and print per-actor statistics as JSON");
  add_config(stats, stats_args);
  stats->add_option("--interactions", stats_interactions);

  ConfigArgs audit_args;
  std::size_t tail = 20;
  std::string audit_script;
  int audit_interactions = 5;
  auto* audit = app.add_subcommand("audit", "Run a short workload and print the audit log tail");
  add_config(audit, audit_args);
  audit->add_option("--tail", tail);
  audit->add_option("--script", audit_script, "admin script applied before the workload")->check(CLI::ExistingFile);
  audit->add_option("--interactions", audit_interactions);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*load) {
      auto cfg = load_args.resolve();
      bench::Workload w(cfg);
      std::size_t inventory = 0, history = 0;
      for (const auto& a : w.engine().actors())
        if (a.type_name == smartmart::kStoreSection) {
          inventory += w.engine().relation(a, "inventory").size();
          history += w.engine().relation(a, "purchase_history").size();
        }
      fmt::print("actors {}\ninventory rows {}\npurchase_history rows {}\n", w.engine().actors().size(), inventory,
                 history);
      return 0;
    }

    if (*bench_cmd) {
      auto cfg = bench_args.resolve();
      if (!mode.empty()) cfg.mode = parse_dispatch_mode(mode);
      if (workers > 0) {
        cfg.workers = workers;
        cfg.carts = std::max(cfg.carts, workers);
      }
      if (sections > 0) cfg.sections_per_order = sections;
      if (items > 0) cfg.items_per_section_order = items;
      if (epochs > 0) cfg.epochs = epochs;
      if (epoch_seconds > 0) cfg.epoch_seconds = epoch_seconds;
      if (interactions >= 0) cfg.interactions = interactions;
      if (seed) cfg.seed = *seed;
      auto fmt_kind = bench::parse_format(format);
      for (const auto& w : cfg.warnings()) fmt::print(stderr, "warning: {}\n", w);
      auto report = bench::run_benchmark(cfg);
      if (out.empty())
        std::cout << (fmt_kind == bench::ReportFormat::Csv ? bench::to_csv(report) : bench::to_json(report));
      else
        bench::emit_report(report, fmt_kind, out);
      fmt::print(stderr, "throughput {:.1f}/s (sd {:.1f}), latency {:.0f} us (sd {:.0f}), aborts {:.2f}%\n",
                 report.throughput_mean, report.throughput_stddev, report.latency_mean_us, report.latency_stddev_us,
                 report.abort_rate * 100);
      return 0;
    }

    if (*admin) {
      auto commands = security::parse_admin_script(slurp(admin_script));
      if (admin_print) std::cout << security::pretty_print(commands);
      bench::Workload w(admin_args.resolve());
      w.engine().apply(commands);
      fmt::print("applied {} statements; {} rules\n", commands.size(), w.engine().rules().rules().size());
      return 0;
    }

    if (*recover) {
      auto cfg = recover_args.resolve();
      cfg.durability = true;
      cfg.log_path = log_path;
      bench::Workload w(cfg);
      auto rep = w.engine().recover();
      fmt::print("replayed {} transactions, truncated {} bytes, restored {} detached specs\n", rep.tids_replayed,
                 rep.truncated_tail_bytes, rep.detached_restored);
      std::size_t visits = 0;
      for (const auto& a : w.engine().actors())
        if (a.type_name == smartmart::kCustomer) visits += w.engine().relation(a, "store_visits").size();
      w.engine().drain_detached();
      fmt::print("store visits {}\n", visits);
      return 0;
    }

    if (*verify) {
      bool ok = true;
      for (const auto& r : bench::run_all_suites(verify_seed)) {
        print_suite(r);
        ok = ok && r.passed;
      }
      if (!verify_script.empty()) {
        Engine e;
        smartmart::register_types(e, {});
        e.apply_script(slurp(verify_script));
        for (const auto& f : security::verify_call_graph(e.rules(), smartmart::call_graph())) {
          fmt::print("call graph: {}.{} -> {}.{}: {}\n", f.edge.caller_type, f.edge.caller_method, f.edge.callee_type,
                     f.edge.callee_method, f.detail);
          if (f.kind == security::VerifyFinding::Kind::Denied) ok = false;
        }
      }
      return ok ? 0 : 2;
    }

    if (*stats) {
      auto cfg = stats_args.resolve();
      cfg.interactions = stats_interactions;
      bench::Workload w(cfg);
      w.run();
      std::cout << security::stats_to_json(w.engine().stats_snapshot()) << "\n";
      return 0;
    }

    if (*audit) {
      auto cfg = audit_args.resolve();
      cfg.interactions = audit_interactions;
      bench::Workload w(cfg);
      if (!audit_script.empty()) w.engine().apply_script(slurp(audit_script));
      w.run();
      std::cout << security::to_json_lines(w.engine().audit_tail(tail));
      return 0;
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {} ({})\n", e.what(), to_string(e.code()));
    return 1;
  }
  return 0;
}
