#include "actordb/smartmart/smartmart.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "actordb/common/error.hpp"
#include "actordb/engine/csv_loader.hpp"
#include "actordb/engine/engine.hpp"

namespace actordb::smartmart {

using rel::AggSpec;
using rel::Assignment;
using rel::Column;
using rel::ColumnType;
using rel::Predicate;
using rel::Schema;

double variable_discount(std::int64_t q, const rel::WindowStats& stats, double vd, double c) {
  if (stats.window_count == 0) return 0.0;
  double target = stats.mean + c * stats.sample_stddev;
  if (target <= 0.0) return 0.0;
  return static_cast<double>(q) / target * vd;
}

CheckoutTotals price_line(double price, double fixed_disc, double vdisc, double min_price, std::int64_t qty) {
  const double q = static_cast<double>(qty);
  CheckoutTotals t;
  t.fixed_disc = fixed_disc * q;
  if (price - (fixed_disc + vdisc) > min_price) {
    t.amt = (price - (fixed_disc + vdisc)) * q;
    t.var_disc = vdisc * q;
  } else {
    t.amt = min_price * q;
    t.var_disc = (price - min_price - fixed_disc) * q;
  }
  return t;
}

std::optional<std::int64_t> next_stock(std::int64_t stock, std::int64_t qty, const DiscountParams& params) {
  if (stock > qty) return stock - qty;
  if (params.replenish) return params.replenish_quantity;
  if (stock == qty) return 0;
  return std::nullopt;
}

Schema customer_info_schema() {
  return {"customer_info", {{"cust_name", ColumnType::String}, {"c_g_id", ColumnType::Int}}, false, {}};
}
Schema store_visits_schema() {
  return {"store_visits",
          {{"store_id", ColumnType::Int},
           {"time", ColumnType::Timestamp},
           {"amount", ColumnType::Float},
           {"fixed_disc", ColumnType::Float},
           {"var_disc", ColumnType::Float}},
          false,
          {}};
}
Schema passwd_schema() { return {"passwd", {{"enc_passwd", ColumnType::String}}, true, {}}; }
Schema discounts_schema() {
  return {"discounts", {{"i_id", ColumnType::Int}, {"fixed_disc", ColumnType::Float}}, false, {"i_id"}};
}
Schema inventory_schema() {
  return {"inventory",
          {{"i_id", ColumnType::Int},
           {"i_price", ColumnType::Float},
           {"i_min_price", ColumnType::Float},
           {"i_quantity", ColumnType::Int},
           {"i_var_disc", ColumnType::Float}},
          false,
          {"i_id"}};
}
Schema purchase_history_schema() {
  return {"purchase_history",
          {{"i_id", ColumnType::Int},
           {"time", ColumnType::Timestamp},
           {"i_quantity", ColumnType::Int},
           {"c_id", ColumnType::Int}},
          false,
          {"i_id"}};
}
Schema cart_info_schema() {
  return {"cart_info",
          {{"c_id", ColumnType::Int}, {"store_id", ColumnType::Int}, {"session_id", ColumnType::Int}},
          false,
          {}};
}
Schema cart_purchases_schema() {
  // sec_id holds the section actor name
  return {"cart_purchases",
          {{"sec_id", ColumnType::String},
           {"session_id", ColumnType::Int},
           {"i_id", ColumnType::Int},
           {"i_quantity", ColumnType::Int},
           {"i_fixed_disc", ColumnType::Float},
           {"i_min_price", ColumnType::Float},
           {"i_price", ColumnType::Float}},
          false,
          {"session_id"}};
}

Value encode_orders(const std::vector<OrderLine>& orders) {
  ValueList out;
  out.reserve(orders.size());
  for (const auto& o : orders) out.emplace_back(ValueList{o.sec_id, o.i_id, o.i_quantity});
  return out;
}

std::vector<OrderLine> decode_orders(const Value& v) {
  std::vector<OrderLine> out;
  if (v.is_null()) return out;
  for (const auto& t : v.as_list()) {
    if (t.kind() != ValueKind::List || t.as_list().size() != 3)
      raise(ErrorCode::InvalidArgument, "order line must be (sec_id, i_id, i_quantity)");
    const auto& l = t.as_list();
    OrderLine o;
    o.sec_id = l[0].kind() == ValueKind::String ? l[0].as_string() : l[0].to_string();
    o.i_id = l[1].as_int();
    o.i_quantity = l[2].as_int();
    out.push_back(std::move(o));
  }
  return out;
}

namespace {

std::vector<Value> int_values(const ValueList& l) {
  std::vector<Value> out;
  out.reserve(l.size());
  for (const auto& v : l) out.emplace_back(v.as_int());
  return out;
}

ActorTypeDescriptor group_manager_type() {
  ActorTypeDescriptor t;
  t.type_name = kGroupManager;
  t.state_schemas = {discounts_schema()};
  t.methods.push_back({"get_fixed_discounts",
                       {ValueKind::List},
                       ValueKind::List,
                       {{"i_id", ColumnType::Int}, {"fixed_disc", ColumnType::Float}},
                       false,
                       [](MethodContext& ctx, const ValueList& args) -> Value {
                         auto ids = int_values(args[0].as_list());
                         if (ids.empty()) return ValueList{};
                         auto rows = ctx.relation("discounts").scan(Predicate().in("i_id", ids));
                         ValueList out;
                         for (auto& r : rows) out.emplace_back(ValueList(std::move(r)));
                         return out;
                       }});
  return t;
}

ActorTypeDescriptor customer_type(ValidateFn validate) {
  ActorTypeDescriptor t;
  t.type_name = kCustomer;
  t.state_schemas = {customer_info_schema(), store_visits_schema(), passwd_schema()};
  t.methods.push_back({"get_customer_info", {}, ValueKind::List,
                       {{"cust_name", ColumnType::String}, {"c_g_id", ColumnType::Int}}, false,
                       [](MethodContext& ctx, const ValueList&) -> Value {
                         auto rows = ctx.relation("customer_info").scan();
                         if (rows.empty()) return Value();
                         return ValueList(std::move(rows.front()));
                       }});
  t.methods.push_back({"add_store_visit",
                       {ValueKind::Int, ValueKind::Timestamp, ValueKind::Float, ValueKind::Float, ValueKind::Float},
                       ValueKind::Null,
                       {},
                       false,
                       [](MethodContext& ctx, const ValueList& a) -> Value {
                         ctx.relation("store_visits").insert({a[0], a[1], a[2], a[3], a[4]});
                         return Value();
                       }});
  if (!validate) validate = [](const std::string& given, const std::string& stored) { return given == stored; };
  t.methods.push_back({"authenticate", {ValueKind::String}, ValueKind::Bool, {}, true,
                       [validate](MethodContext& ctx, const ValueList& a) -> Value {
                         auto rows = ctx.relation("passwd").scan();
                         if (rows.empty()) return false;
                         return validate(a[0].as_string(), rows.front()[0].as_string());
                       }});
  return t;
}

struct OrdItem {
  std::int64_t i_id, qty;
  double price, fixed, min_price;
};

ActorTypeDescriptor store_section_type(const DiscountParams& params) {
  ActorTypeDescriptor t;
  t.type_name = kStoreSection;
  t.state_schemas = {inventory_schema(), purchase_history_schema()};
  t.methods.push_back({"get_price",
                       {ValueKind::List},
                       ValueKind::List,
                       {{"i_id", ColumnType::Int}, {"i_price", ColumnType::Float}, {"i_min_price", ColumnType::Float}},
                       false,
                       [](MethodContext& ctx, const ValueList& args) -> Value {
                         auto ids = int_values(args[0].as_list());
                         if (ids.empty()) return ValueList{};
                         auto rows = ctx.relation("inventory")
                                         .scan(Predicate().in("i_id", ids), {"i_id", "i_price", "i_min_price"});
                         ValueList out;
                         for (auto& r : rows) out.emplace_back(ValueList(std::move(r)));
                         return out;
                       }});
  t.methods.push_back(
      {"get_variable_discount_update_inventory",
       {ValueKind::Int, ValueKind::Timestamp, ValueKind::List},
       ValueKind::List,
       {{"amount", ColumnType::Float}, {"fixed_disc", ColumnType::Float}, {"var_disc", ColumnType::Float}},
       false,
       [params](MethodContext& ctx, const ValueList& a) -> Value {
         const std::int64_t c_id = a[0].as_int();
         const Value c_time = a[1];
         std::vector<OrdItem> items;
         std::vector<Value> ids;
         for (const auto& v : a[2].as_list()) {
           const auto& l = v.as_list();
           if (l.size() != 5) raise(ErrorCode::InvalidArgument, "ord_items tuple must have 5 fields");
           OrdItem o{l[0].as_int(), l[1].as_int(), l[2].as_float(), l[3].as_float(), l[4].as_float()};
           if (o.qty <= 0) raise(ErrorCode::InvalidArgument, "quantity must be positive");
           items.push_back(o);
           ids.emplace_back(o.i_id);
         }
         if (items.empty()) raise(ErrorCode::InvalidArgument, "ord_items is empty");

         auto inv = ctx.relation("inventory");
         auto hist = ctx.relation("purchase_history");
         // window first, then the inserts below
         auto stats = hist.window_stats("i_id", "time", "i_quantity", params.k, ids);
         std::map<std::int64_t, std::pair<std::int64_t, double>> stock;  // i_id -> (quantity, VD)
         for (const auto& r : inv.scan(Predicate().in("i_id", ids), {"i_id", "i_quantity", "i_var_disc"}))
           stock[r[0].as_int()] = {r[1].as_int(), r[2].as_float()};

         CheckoutTotals total;
         for (std::size_t i = 0; i < items.size(); ++i) {
           auto it = stock.find(items[i].i_id);
           if (it == stock.end())
             raise(ErrorCode::UnknownItem, "item " + std::to_string(items[i].i_id) + " not in " + ctx.self().str());
           double vdisc = variable_discount(items[i].qty, stats[i], it->second.second, params.c);
           auto line = price_line(items[i].price, items[i].fixed, vdisc, items[i].min_price, items[i].qty);
           total.amt += line.amt;
           total.fixed_disc += line.fixed_disc;
           total.var_disc += line.var_disc;
         }
         for (const auto& o : items) {
           auto& s = stock[o.i_id];
           auto next = next_stock(s.first, o.qty, params);
           if (!next)
             raise(ErrorCode::InsufficientStock, "item " + std::to_string(o.i_id) + ": stock " +
                                                     std::to_string(s.first) + ", ordered " + std::to_string(o.qty));
           s.first = *next;
           inv.update(Predicate().eq("i_id", o.i_id), {Assignment::set("i_quantity", *next)});
           hist.insert({o.i_id, c_time, o.qty, c_id});
         }
         return ValueList{total.amt, total.fixed_disc, total.var_disc};
       }});
  return t;
}

Value add_items(MethodContext& ctx, const ValueList& a) {
  auto orders = decode_orders(a[0]);
  const std::int64_t o_c_id = a[1].as_int();
  std::map<std::string, std::vector<Value>> by_section;
  std::set<std::pair<std::string, std::int64_t>> seen;
  std::map<std::pair<std::string, std::int64_t>, std::int64_t> qty;
  std::vector<Value> all_ids;
  for (const auto& o : orders) {
    if (o.i_quantity <= 0) raise(ErrorCode::InvalidArgument, "order quantity must be positive");
    if (!seen.insert({o.sec_id, o.i_id}).second)
      raise(ErrorCode::InvalidArgument, "item " + std::to_string(o.i_id) + " ordered twice from " + o.sec_id);
    by_section[o.sec_id].emplace_back(o.i_id);
    qty[{o.sec_id, o.i_id}] = o.i_quantity;
    all_ids.emplace_back(o.i_id);
  }

  std::vector<std::string> sections;
  std::vector<Future> prices;
  for (auto& [sec, ids] : by_section) {
    sections.push_back(sec);
    prices.push_back(ctx.invoke({kStoreSection, sec}, "get_price", {ValueList(ids)}));
  }

  auto cust = ctx.invoke({kCustomer, std::to_string(o_c_id)}, "get_customer_info");
  Value info = ctx.get(cust);
  if (info.is_null()) raise(ErrorCode::ApplicationError, "customer " + std::to_string(o_c_id) + " has no info");
  const std::int64_t c_g = info.as_list()[1].as_int();

  auto disc = ctx.invoke({kGroupManager, std::to_string(c_g)}, "get_fixed_discounts", {ValueList(all_ids)});

  auto cart_info = ctx.relation("cart_info");
  auto purchases = ctx.relation("cart_purchases");
  auto rows = cart_info.scan();
  std::int64_t session = rows.empty() ? 1 : rows.front()[2].as_int() + 1;
  if (!purchases.scan(Predicate().eq("session_id", session), {"i_id"}).empty())
    raise(ErrorCode::SessionAlreadyOpen, ctx.self().str() + " session " + std::to_string(session) + " already has items");
  if (rows.empty())
    cart_info.insert({o_c_id, std::int64_t{1}, session});
  else
    cart_info.update({}, {Assignment::set("c_id", o_c_id), Assignment::add("session_id", std::int64_t{1})});

  std::map<std::int64_t, double> discounts;
  Value disc_rows = ctx.get(disc);
  for (const auto& t : disc_rows.as_list()) discounts[t.as_list()[0].as_int()] = t.as_list()[1].as_float();
  ctx.when_all(prices);

  for (std::size_t s = 0; s < sections.size(); ++s) {
    Value price_rows = ctx.get(prices[s]);
    for (const auto& t : price_rows.as_list()) {
      const auto& p = t.as_list();
      std::int64_t i_id = p[0].as_int();
      auto d = discounts.find(i_id);
      purchases.insert({sections[s], session, i_id, qty.at({sections[s], i_id}),
                        d == discounts.end() ? 0.0 : d->second, p[2], p[1]});
    }
  }
  return session;
}

Value checkout(MethodContext& ctx, const ValueList& a) {
  const std::int64_t session = a[0].as_int();
  auto info_rows = ctx.relation("cart_info").scan();
  auto rows = ctx.relation("cart_purchases").scan(Predicate().eq("session_id", session));
  if (info_rows.empty() || rows.empty())
    raise(ErrorCode::UnknownSession, ctx.self().str() + " has no items for session " + std::to_string(session));
  const std::int64_t c_id = info_rows.front()[0].as_int();
  const std::int64_t store_id = info_rows.front()[1].as_int();
  Timestamp now = ctx.now();

  std::map<std::string, ValueList> by_section;
  for (const auto& r : rows)  // (i_id, i_quantity, i_price, i_fixed_disc, i_min_price)
    by_section[r[0].as_string()].emplace_back(ValueList{r[2], r[3], r[6], r[4], r[5]});
  std::vector<std::string> names;
  for (const auto& [s, _] : by_section) names.push_back(s);

  auto per_section = ctx.bulk_invoke(kStoreSection, names, "get_variable_discount_update_inventory",
                                     [&](const std::string& sec) {
                                       return ValueList{c_id, now, by_section.at(sec)};
                                     });
  Row totals = per_section.aggregate(Predicate::all(),
                                     {AggSpec::sum("amount"), AggSpec::sum("fixed_disc"), AggSpec::sum("var_disc")});
  double amt = totals[0].as_float(), fixed = totals[1].as_float(), var = totals[2].as_float();

  ctx.detach({kCustomer, std::to_string(c_id)}, "add_store_visit", {store_id, now, amt, fixed, var},
             txn::Trigger::OnCommit, txn::Delivery::ExactlyOnce);
  return amt;
}

ActorTypeDescriptor cart_type() {
  ActorTypeDescriptor t;
  t.type_name = kCart;
  t.durable = false;
  t.state_schemas = {cart_info_schema(), cart_purchases_schema()};
  t.methods.push_back({"add_items", {ValueKind::List, ValueKind::Int}, ValueKind::Int, {}, false, add_items});
  t.methods.push_back({"checkout", {ValueKind::Int}, ValueKind::Float, {}, false, checkout});
  return t;
}

}  // namespace

void register_types(Engine& engine, const DiscountParams& params, ValidateFn validate, ExtraMethods extra) {
  if (params.k < 1) raise(ErrorCode::ConfigError, "window size k must be >= 1");
  if (params.c < 0) raise(ErrorCode::ConfigError, "c must be >= 0");
  std::vector<ActorTypeDescriptor> types{customer_type(std::move(validate)), group_manager_type(),
                                         store_section_type(params), cart_type()};
  for (auto& [type, m] : extra) {
    auto it = std::find_if(types.begin(), types.end(), [&](const auto& t) { return t.type_name == type; });
    if (it == types.end()) raise(ErrorCode::UnknownType, "no application type " + type);
    it->methods.push_back(std::move(m));
  }
  for (auto& t : types) engine.register_actor_type(std::move(t));
}

StoreConfig StoreConfig::full_scale() {
  StoreConfig c;
  c.sections = 8;
  c.items_per_section = 10000;
  c.history_rows_per_item = 300;
  return c;
}

void StoreConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) raise(ErrorCode::ConfigError, what);
  };
  need(sections >= 1, "sections must be >= 1");
  need(items_per_section >= 1, "items_per_section must be >= 1");
  need(history_rows_per_item >= 0, "history_rows_per_item must be >= 0");
  need(carts >= 1, "carts must be >= 1");
  need(group_managers >= 1, "group_managers must be >= 1");
  need(customers_per_cart >= 1, "customers_per_cart must be >= 1");
  need(initial_stock >= 0, "initial_stock must be >= 0");
  need(max_history_quantity >= 1, "max_history_quantity must be >= 1");
  need(discount_coverage >= 0 && discount_coverage <= 1, "discount_coverage must be in [0, 1]");
}

std::string section_name(int section) { return std::to_string((section + 1) * 100); }
std::int64_t item_id(const StoreConfig& cfg, int section, int item) {
  return static_cast<std::int64_t>(section) * cfg.items_per_section + item + 1;
}
std::string actor_name(int one_based) { return std::to_string(one_based); }

namespace {

struct ItemSeed {
  double price, min_price, var_disc;
};

}  // namespace

LoadSummary load_store(Engine& engine, const StoreConfig& cfg) {
  cfg.validate();
  for (const auto& a : engine.actors())
    raise(ErrorCode::ConfigError, "load_store needs an empty engine, found " + a.str());

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> price_d(5.0, 100.0), min_frac(0.5, 0.8), vd_frac(0.02, 0.15),
      fixed_frac(0.0, 0.1), unit(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> hist_q(1, cfg.max_history_quantity);
  std::uniform_int_distribution<int> group_d(1, cfg.group_managers);
  constexpr std::int64_t kDay = 86'400'000'000LL;
  constexpr std::int64_t kHistoryDays = 120;
  std::uniform_int_distribution<std::int64_t> time_d(-kHistoryDays * kDay, -1);

  namespace fs = std::filesystem;
  auto from_csv = [&](const std::string& type, const std::string& name, const std::string& relation) -> bool {
    if (cfg.csv_dir.empty()) return false;
    fs::path p = fs::path(cfg.csv_dir) / (type + "." + name + "." + relation + ".csv");
    if (!fs::exists(p)) return false;
    load_csv(engine, p.string());
    return true;
  };

  LoadSummary sum;
  std::vector<std::string> names;
  for (int s = 0; s < cfg.sections; ++s) names.push_back(section_name(s));
  sum.actors += engine.create_actors(kStoreSection, names);

  std::vector<ItemSeed> seeds;
  seeds.reserve(static_cast<std::size_t>(cfg.sections) * cfg.items_per_section);
  for (int s = 0; s < cfg.sections; ++s) {
    std::vector<Row> inv, hist;
    for (int i = 0; i < cfg.items_per_section; ++i) {
      ItemSeed is;
      is.price = price_d(rng);
      is.min_price = is.price * min_frac(rng);
      is.var_disc = is.price * vd_frac(rng);
      seeds.push_back(is);
      std::int64_t id = item_id(cfg, s, i);
      inv.push_back({id, is.price, is.min_price, cfg.initial_stock, is.var_disc});
      for (int h = 0; h < cfg.history_rows_per_item; ++h)
        hist.push_back({id, Timestamp{time_d(rng)}, hist_q(rng),
                        static_cast<std::int64_t>(1 + rng() % static_cast<std::uint64_t>(cfg.customers()))});
    }
    ActorAddress sec{kStoreSection, names[s]};
    if (!from_csv(kStoreSection, names[s], "inventory")) {
      sum.inventory_rows += inv.size();
      engine.load(sec, "inventory", std::move(inv));
    }
    if (!from_csv(kStoreSection, names[s], "purchase_history")) {
      sum.history_rows += hist.size();
      engine.load(sec, "purchase_history", std::move(hist));
    }
  }

  names.clear();
  for (int g = 1; g <= cfg.group_managers; ++g) names.push_back(actor_name(g));
  sum.actors += engine.create_actors(kGroupManager, names);
  for (int g = 1; g <= cfg.group_managers; ++g) {
    std::vector<Row> rows;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (unit(rng) >= cfg.discount_coverage) continue;
      // leave room for the minimum price so the clamp branch stays non-negative
      double room = seeds[i].price - seeds[i].min_price;
      rows.push_back({static_cast<std::int64_t>(i + 1), room * fixed_frac(rng)});
    }
    if (!from_csv(kGroupManager, names[g - 1], "discounts")) {
      sum.discount_rows += rows.size();
      engine.load({kGroupManager, names[g - 1]}, "discounts", std::move(rows));
    }
  }

  names.clear();
  for (int c = 1; c <= cfg.customers(); ++c) names.push_back(actor_name(c));
  sum.actors += engine.create_actors(kCustomer, names);
  for (int c = 1; c <= cfg.customers(); ++c) {
    ActorAddress a{kCustomer, names[c - 1]};
    std::int64_t group = group_d(rng);
    if (!from_csv(kCustomer, a.actor_name, "customer_info")) {
      engine.load(a, "customer_info", {{"customer " + a.actor_name, group}});
      ++sum.customer_rows;
    }
    if (!from_csv(kCustomer, a.actor_name, "passwd")) engine.load(a, "passwd", {{"pw-" + a.actor_name}});
    from_csv(kCustomer, a.actor_name, "store_visits");
  }

  names.clear();
  for (int c = 1; c <= cfg.carts; ++c) names.push_back(actor_name(c));
  sum.actors += engine.create_actors(kCart, names);
  return sum;
}

std::vector<security::CallEdge> call_graph() {
  return {
      {kCart, "add_items", kStoreSection, "get_price"},
      {kCart, "add_items", kCustomer, "get_customer_info"},
      {kCart, "add_items", kGroupManager, "get_fixed_discounts"},
      {kCart, "checkout", kStoreSection, "get_variable_discount_update_inventory"},
      {kCart, "checkout", kCustomer, "add_store_visit"},
  };
}

}  // namespace actordb::smartmart
