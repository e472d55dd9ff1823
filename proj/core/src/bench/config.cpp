#include "actordb/bench/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/core.h>

#include "actordb/common/error.hpp"

namespace actordb::bench {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
    return std::string(v.substr(1, v.size() - 2));
  return std::string(v);
}

template <typename T>
T parse_int(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    raise(ErrorCode::ConfigError, std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  std::string s(v);
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    raise(ErrorCode::ConfigError, std::string(key) + ": expected a number, got '" + s + "'");
  return d;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  raise(ErrorCode::ConfigError, std::string(key) + ": expected on/off, got '" + std::string(v) + "'");
}

// shortest text that reads back to the same double
std::string fmt_double(double d) { return fmt::format("{}", d); }

}  // namespace

BenchmarkConfig BenchmarkConfig::full_scale() {
  BenchmarkConfig c;
  auto store = smartmart::StoreConfig::full_scale();
  c.sections_total = store.sections;
  c.inventory_items_per_section = store.items_per_section;
  c.history_rows_per_item = store.history_rows_per_item;
  c.discount.k = 150;
  c.epochs = 20;
  c.epoch_seconds = 2.0;
  return c;
}

void BenchmarkConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) raise(ErrorCode::ConfigError, what);
  };
  need(sections_total >= 1, "sections_total must be >= 1");
  need(sections_per_order >= 1 && sections_per_order <= sections_total,
       "sections_per_order must be in [1, sections_total]");
  need(items_per_section_order >= 1 && items_per_section_order <= inventory_items_per_section,
       "items_per_section_order must be in [1, inventory_items_per_section]");
  need(carts >= 1, "carts must be >= 1");
  need(workers >= 1 && workers <= carts, "workers must be in [1, carts]");
  need(max_order_quantity >= 1, "max_order_quantity must be >= 1");
  need(discount.k >= 1, "k must be >= 1");
  need(discount.c >= 0, "c must be >= 0");
  need(epochs >= 1, "epochs must be >= 1");
  need(epoch_seconds > 0, "epoch_seconds must be > 0");
  need(warmup_epochs >= 0, "warmup_epochs must be >= 0");
  need(interactions >= 0, "interactions must be >= 0");
  need(scan_granule >= 1, "scan_granule must be >= 1");
  store().validate();
}

std::vector<std::string> BenchmarkConfig::warnings() const {
  std::vector<std::string> out;
  unsigned cores = std::thread::hardware_concurrency();
  int busy = workers + (mode == DispatchMode::Async ? sections_total : 0);
  if (mode == DispatchMode::Async && cores != 0 && static_cast<int>(cores) < busy)
    out.push_back("only " + std::to_string(cores) + " hardware threads for " + std::to_string(workers) +
                  " workers and " + std::to_string(sections_total) + " section pools; async results will be skewed");
  return out;
}

smartmart::StoreConfig BenchmarkConfig::store() const {
  smartmart::StoreConfig s;
  s.sections = sections_total;
  s.items_per_section = inventory_items_per_section;
  s.history_rows_per_item = history_rows_per_item;
  s.carts = carts;
  s.group_managers = group_managers;
  s.customers_per_cart = customers_per_cart;
  s.seed = seed;
  s.csv_dir = csv_dir;
  return s;
}

EngineOptions BenchmarkConfig::engine_options() const {
  EngineOptions o;
  o.mode = mode;
  o.clock = clock;
  o.scan_granule = scan_granule;
  if (mode == DispatchMode::Async) o.executors.rules.push_back({smartmart::kStoreSection + "/*", section_pool});
  o.durability.enabled = durability;
  o.durability.log.path = log_path;
  return o;
}

void BenchmarkConfig::set(std::string_view key, std::string_view raw) {
  std::string v = unquote(trim(raw));
  std::string k(key);
  if (k == "sections_total" || k == "sections") sections_total = parse_int<int>(k, v);
  else if (k == "sections_per_order") sections_per_order = parse_int<int>(k, v);
  else if (k == "items_per_section_order" || k == "items_per_section") items_per_section_order = parse_int<int>(k, v);
  else if (k == "inventory_items_per_section") inventory_items_per_section = parse_int<int>(k, v);
  else if (k == "history_rows_per_item") history_rows_per_item = parse_int<int>(k, v);
  else if (k == "carts") carts = parse_int<int>(k, v);
  else if (k == "workers") workers = parse_int<int>(k, v);
  else if (k == "group_managers") group_managers = parse_int<int>(k, v);
  else if (k == "customers_per_cart") customers_per_cart = parse_int<int>(k, v);
  else if (k == "max_order_quantity") max_order_quantity = parse_int<std::int64_t>(k, v);
  else if (k == "k") discount.k = parse_int<std::int64_t>(k, v);
  else if (k == "c") discount.c = parse_double(k, v);
  else if (k == "replenish_quantity") discount.replenish_quantity = parse_int<std::int64_t>(k, v);
  else if (k == "replenish") discount.replenish = parse_bool(k, v);
  else if (k == "epochs") epochs = parse_int<int>(k, v);
  else if (k == "epoch_seconds") epoch_seconds = parse_double(k, v);
  else if (k == "warmup_epochs") warmup_epochs = parse_int<int>(k, v);
  else if (k == "interactions") interactions = parse_int<int>(k, v);
  else if (k == "mode") mode = parse_dispatch_mode(v);
  else if (k == "clock") {
    if (v == "monotonic") clock = ClockKind::Monotonic;
    else if (v == "logical") clock = ClockKind::Logical;
    else raise(ErrorCode::ConfigError, "clock: expected monotonic or logical, got '" + v + "'");
  } else if (k == "seed") seed = parse_int<std::uint64_t>(k, v);
  else if (k == "durability") durability = parse_bool(k, v);
  else if (k == "log_path") log_path = v;
  else if (k == "section_pool") section_pool = v;
  else if (k == "scan_granule") scan_granule = parse_int<std::int64_t>(k, v);
  else if (k == "csv_dir") csv_dir = v;
  else raise(ErrorCode::ConfigError, "unknown config key '" + k + "'");
}

std::map<std::string, std::string> BenchmarkConfig::to_map() const {
  return {
      {"sections_total", std::to_string(sections_total)},
      {"sections_per_order", std::to_string(sections_per_order)},
      {"items_per_section_order", std::to_string(items_per_section_order)},
      {"inventory_items_per_section", std::to_string(inventory_items_per_section)},
      {"history_rows_per_item", std::to_string(history_rows_per_item)},
      {"carts", std::to_string(carts)},
      {"workers", std::to_string(workers)},
      {"group_managers", std::to_string(group_managers)},
      {"customers_per_cart", std::to_string(customers_per_cart)},
      {"max_order_quantity", std::to_string(max_order_quantity)},
      {"k", std::to_string(discount.k)},
      {"c", fmt_double(discount.c)},
      {"replenish_quantity", std::to_string(discount.replenish_quantity)},
      {"replenish", discount.replenish ? "on" : "off"},
      {"epochs", std::to_string(epochs)},
      {"epoch_seconds", fmt_double(epoch_seconds)},
      {"warmup_epochs", std::to_string(warmup_epochs)},
      {"interactions", std::to_string(interactions)},
      {"mode", std::string(to_string(mode))},
      {"clock", clock == ClockKind::Logical ? "logical" : "monotonic"},
      {"seed", std::to_string(seed)},
      {"durability", durability ? "on" : "off"},
      {"log_path", log_path},
      {"section_pool", section_pool},
      {"scan_granule", std::to_string(scan_granule)},
      {"csv_dir", csv_dir},
  };
}

BenchmarkConfig parse_config(std::string_view text, BenchmarkConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      raise(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected key = value");
    base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

BenchmarkConfig load_config(const std::string& path, BenchmarkConfig base) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoError, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

}  // namespace actordb::bench
