#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "actordb/common/value.hpp"
#include "actordb/engine/descriptor.hpp"
#include "actordb/relstore/schema.hpp"
#include "actordb/relstore/window.hpp"
#include "actordb/security/verify.hpp"

namespace actordb {
class Engine;
}

namespace actordb::smartmart {

inline const std::string kCart = "Cart";
inline const std::string kCustomer = "Customer";
inline const std::string kGroupManager = "Group_Manager";
inline const std::string kStoreSection = "Store_Section";

struct OrderLine {
  std::string sec_id;
  std::int64_t i_id = 0;
  std::int64_t i_quantity = 0;

  bool operator==(const OrderLine&) const = default;
};

struct DiscountParams {
  double c = 1.0;
  std::int64_t k = 15;
  std::int64_t replenish_quantity = 10000;
  /// When off, an order larger than the stock fails with InsufficientStock.
  bool replenish = true;
};

struct CheckoutTotals {
  double amt = 0.0;
  double fixed_disc = 0.0;
  double var_disc = 0.0;
};

/// q / (mean + c * stddev) * VD; 0 for an empty window or a non-positive target.
double variable_discount(std::int64_t q, const rel::WindowStats& stats, double vd, double c);

/// Totals of one order line given its unit price, fixed and variable discount. The discounted
/// price never drops below the minimum price.
CheckoutTotals price_line(double price, double fixed_disc, double vdisc, double min_price, std::int64_t qty);

/// Stock after selling `qty`; empty when stock runs out and replenishment is off.
std::optional<std::int64_t> next_stock(std::int64_t stock, std::int64_t qty, const DiscountParams& params);

// Relation schemas.
rel::Schema customer_info_schema();
rel::Schema store_visits_schema();
rel::Schema passwd_schema();
rel::Schema discounts_schema();
rel::Schema inventory_schema();
rel::Schema purchase_history_schema();
rel::Schema cart_info_schema();
rel::Schema cart_purchases_schema();

using ValidateFn = std::function<bool(const std::string& given, const std::string& stored)>;

/// Extra methods appended to an application type before registration, keyed by type name.
using ExtraMethods = std::vector<std::pair<std::string, MethodDescriptor>>;

/// Registers Customer, Group_Manager, Store_Section and the nondurable Cart.
void register_types(Engine& engine, const DiscountParams& params, ValidateFn validate = {}, ExtraMethods extra = {});

// Argument encoding.
Value encode_orders(const std::vector<OrderLine>& orders);
std::vector<OrderLine> decode_orders(const Value& v);

struct StoreConfig {
  int sections = 8;
  int items_per_section = 500;
  int history_rows_per_item = 30;
  int carts = 1;
  int group_managers = 10;
  int customers_per_cart = 30;
  std::int64_t initial_stock = 10000;
  std::int64_t max_history_quantity = 10;
  /// Fraction of (group, item) pairs with a fixed discount row.
  double discount_coverage = 0.9;
  std::uint64_t seed = 42;
  /// Files named `<type>.<name>.<relation>.csv` in this directory replace generated rows.
  std::string csv_dir;

  static StoreConfig full_scale();
  int customers() const { return carts * customers_per_cart; }
  /// Throws ConfigError.
  void validate() const;
};

std::string section_name(int section);
std::int64_t item_id(const StoreConfig& cfg, int section, int item);
std::string actor_name(int one_based);

struct LoadSummary {
  std::size_t actors = 0;
  std::size_t inventory_rows = 0;
  std::size_t history_rows = 0;
  std::size_t discount_rows = 0;
  std::size_t customer_rows = 0;
};

/// Creates every actor and fills the durable relations. Deterministic in `seed`.
LoadSummary load_store(Engine& engine, const StoreConfig& cfg);

/// Calls made by the application's method bodies.
std::vector<security::CallEdge> call_graph();

}  // namespace actordb::smartmart
