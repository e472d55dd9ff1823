#include "actordb/bench/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "actordb/bench/bench.hpp"
#include "actordb/engine/engine.hpp"
#include "actordb/smartmart/smartmart.hpp"

namespace actordb::bench {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void fail(SuiteResult& r, const std::string& what) {
  ++r.failures;
  if (r.detail.empty()) r.detail = what;
}

// --- variable discount -----------------------------------------------------------------------------------

struct Sample {
  std::int64_t time;
  std::uint64_t seq;
  double q;
};

// Most recent k samples (time desc, then insertion desc), mean and n-1 stddev from scratch.
double discount_direct(std::int64_t q, std::vector<Sample> window, std::int64_t k, double vd, double c) {
  std::sort(window.begin(), window.end(), [](const Sample& a, const Sample& b) {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  });
  if (static_cast<std::int64_t>(window.size()) > k) window.resize(k);
  const std::size_t n = window.size();
  if (n == 0) return 0.0;
  double sum = 0;
  for (const auto& s : window) sum += s.q;
  double mean = sum / n;
  double sd = 0;
  if (n > 1) {
    double ss = 0;
    for (const auto& s : window) ss += (s.q - mean) * (s.q - mean);
    sd = std::sqrt(ss / (n - 1));
  }
  double target = mean + c * sd;
  if (target <= 0) return 0.0;
  return q / target * vd;
}

}  // namespace

SuiteResult discount_suite(std::size_t cases, std::uint64_t seed) {
  SuiteResult r;
  r.name = "discount";
  auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(0, 40), kd(1, 25), qd(1, 50), td(0, 30);
  std::uniform_real_distribution<double> vdd(0.0, 20.0), cd(0.0, 3.0), hq(1.0, 30.0);
  for (std::size_t i = 0; i < cases; ++i) {
    int n = len(rng);
    std::vector<Sample> window;
    std::vector<rel::WindowSample> samples;
    for (int j = 0; j < n; ++j) {
      Sample s{td(rng), static_cast<std::uint64_t>(j + 1), std::round(hq(rng))};
      window.push_back(s);
      samples.push_back({s.time, s.seq, s.q});
    }
    std::int64_t k = kd(rng), q = qd(rng);
    double vd = vdd(rng), c = cd(rng);
    double want = discount_direct(q, window, k, vd, c);
    double got = smartmart::variable_discount(q, rel::window_of(Value(1), samples, k), vd, c);
    double err = std::abs(want - got);
    r.max_error = std::max(r.max_error, err);
    ++r.cases;
    if (!(err <= 1e-9)) {
      std::ostringstream os;
      os << "case " << i << ": expected " << want << ", got " << got;
      fail(r, os.str());
    }
  }
  r.passed = r.failures == 0;
  r.seconds = since(t0);
  return r;
}

// --- checkout --------------------------------------------------------------------------------

namespace {

struct Item {
  std::int64_t id;
  double price, min_price, vd;
  std::int64_t stock;
};

struct Hist {
  std::int64_t i_id;
  std::int64_t time;
  std::int64_t q;
  std::int64_t c_id;
  std::uint64_t seq;
};

struct CartLine {
  std::string sec;
  std::int64_t i_id, qty;
  double fixed, min_price, price;
};

struct SmallStore {
  std::vector<std::string> sections{"100", "200"};
  std::map<std::string, std::vector<Item>> inventory;
  std::map<std::string, std::vector<Hist>> history;
  std::map<int, std::map<std::int64_t, double>> discounts;  // group -> i_id -> fixed
  std::map<int, int> group_of;                              // customer -> group
  std::int64_t k = 1;
  double c = 0;
  std::int64_t replenish = 10000;
};

SmallStore make_store(std::mt19937_64& rng) {
  SmallStore s;
  std::uniform_int_distribution<int> nitems(1, 10), nhist(0, 20), td(-1000, -1), qd(1, 10), cust(1, 3), grp(1, 2),
      kd(1, 6), stock(1, 30);
  std::uniform_real_distribution<double> price(1.0, 50.0), frac(0.1, 0.95), vdf(0.0, 0.5), coin(0.0, 1.0);
  s.k = kd(rng);
  s.c = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
  std::uint64_t seq = 0;
  for (std::size_t si = 0; si < s.sections.size(); ++si) {
    const auto& sec = s.sections[si];
    int n = nitems(rng);
    for (int j = 0; j < n; ++j) {
      Item it;
      it.id = static_cast<std::int64_t>(si) * 10 + j + 1;
      it.price = price(rng);
      it.min_price = it.price * frac(rng);
      it.vd = it.price * vdf(rng);
      it.stock = stock(rng);
      s.inventory[sec].push_back(it);
    }
    int h = nhist(rng);
    for (int j = 0; j < h; ++j) {
      auto& items = s.inventory[sec];
      std::int64_t id = items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)].id;
      s.history[sec].push_back({id, td(rng), qd(rng), cust(rng), ++seq});
    }
  }
  for (int g = 1; g <= 2; ++g)
    for (const auto& [sec, items] : s.inventory)
      for (const auto& it : items)
        if (coin(rng) < 0.7) s.discounts[g][it.id] = it.price * 0.5 * coin(rng);
  for (int cu = 1; cu <= 3; ++cu) s.group_of[cu] = grp(rng);
  return s;
}

std::vector<smartmart::OrderLine> make_order(std::mt19937_64& rng, const SmallStore& s) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> qd(1, 10);
  std::vector<smartmart::OrderLine> out;
  for (const auto& sec : s.sections) {
    for (const auto& it : s.inventory.at(sec))
      if (coin(rng) < 0.5) out.push_back({sec, it.id, qd(rng)});
    if (coin(rng) < 0.2) out.push_back({sec, 99, qd(rng)});  // not stocked anywhere
  }
  if (out.empty()) out.push_back({s.sections[0], s.inventory.at(s.sections[0]).front().id, qd(rng)});
  return out;
}

struct OracleResult {
  std::vector<CartLine> cart;
  double amt = 0, fixed = 0, var = 0;
  bool has_lines = false;
};

// Figs. 8-9 executed directly on plain structs.
OracleResult oracle_checkout(SmallStore& s, const std::vector<smartmart::OrderLine>& order, std::int64_t c_id,
                             std::int64_t now) {
  OracleResult out;
  const auto& disc = s.discounts[s.group_of.at(static_cast<int>(c_id))];
  for (const auto& sec : s.sections) {
    for (const auto& it : s.inventory[sec]) {
      for (const auto& o : order) {
        if (o.sec_id != sec || o.i_id != it.id) continue;
        auto d = disc.find(it.id);
        out.cart.push_back({sec, it.id, o.i_quantity, d == disc.end() ? 0.0 : d->second, it.min_price, it.price});
      }
    }
  }
  out.has_lines = !out.cart.empty();
  std::uint64_t seq = 1'000'000;
  for (const auto& sec : s.sections) {
    std::vector<const CartLine*> lines;
    for (const auto& l : out.cart)
      if (l.sec == sec) lines.push_back(&l);
    if (lines.empty()) continue;
    auto& hist = s.history[sec];
    std::vector<Hist> snapshot = hist;
    for (const CartLine* l : lines) {
      Item* item = nullptr;
      for (auto& it : s.inventory[sec])
        if (it.id == l->i_id) item = &it;
      std::vector<Sample> w;
      for (const auto& h : snapshot)
        if (h.i_id == l->i_id) w.push_back({h.time, h.seq, static_cast<double>(h.q)});
      double vdisc = discount_direct(l->qty, w, s.k, item->vd, s.c);
      double q = static_cast<double>(l->qty);
      out.fixed += l->fixed * q;
      if (l->price - (l->fixed + vdisc) > l->min_price) {
        out.amt += (l->price - (l->fixed + vdisc)) * q;
        out.var += vdisc * q;
      } else {
        out.amt += l->min_price * q;
        out.var += (l->price - l->min_price - l->fixed) * q;
      }
      item->stock = item->stock > l->qty ? item->stock - l->qty : s.replenish;
      hist.push_back({l->i_id, now, l->qty, c_id, ++seq});
    }
  }
  return out;
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9; }

std::string check_store(Engine& e, const SmallStore& s, const OracleResult& o, double amt, std::int64_t now,
                        std::int64_t c_id) {
  using namespace smartmart;
  if (!near(amt, o.amt)) return "amount " + std::to_string(amt) + " vs oracle " + std::to_string(o.amt);
  for (const auto& sec : s.sections) {
    auto inv = e.relation({kStoreSection, sec}, "inventory").snapshot();
    if (inv.size() != s.inventory.at(sec).size()) return "inventory size differs in " + sec;
    for (const auto& [id, row] : inv) {
      bool found = false;
      for (const auto& it : s.inventory.at(sec))
        if (it.id == row[0].as_int()) {
          found = true;
          if (it.stock != row[3].as_int())
            return "stock of item " + std::to_string(it.id) + ": " + row[3].to_string() + " vs " +
                   std::to_string(it.stock);
        }
      if (!found) return "unexpected inventory row " + row[0].to_string();
    }
    std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>> got, want;
    for (const auto& [id, row] : e.relation({kStoreSection, sec}, "purchase_history").snapshot())
      got.emplace_back(row[0].as_int(), row[1].as_timestamp().micros, row[2].as_int(), row[3].as_int());
    auto hit = s.history.find(sec);
    if (hit != s.history.end())
      for (const auto& h : hit->second) want.emplace_back(h.i_id, h.time, h.q, h.c_id);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    if (got != want) return "purchase_history differs in " + sec;
  }
  auto cp = e.relation({kCart, "1"}, "cart_purchases").snapshot();
  if (cp.size() != o.cart.size()) return "cart_purchases has " + std::to_string(cp.size()) + " rows, oracle " +
                                         std::to_string(o.cart.size());
  for (const auto& l : o.cart) {
    bool found = false;
    for (const auto& [id, row] : cp)
      if (row[0].as_string() == l.sec && row[2].as_int() == l.i_id) {
        found = row[1].as_int() == 1 && row[3].as_int() == l.qty && near(row[4].as_float(), l.fixed) &&
                near(row[5].as_float(), l.min_price) && near(row[6].as_float(), l.price);
      }
    if (!found) return "cart line for item " + std::to_string(l.i_id) + " differs";
  }
  auto visits = e.relation({kCustomer, std::to_string(c_id)}, "store_visits").snapshot();
  if (visits.size() != 1) return "expected one store visit, found " + std::to_string(visits.size());
  const Row& v = visits.front().second;
  if (v[0].as_int() != 1 || v[1].as_timestamp().micros != now || !near(v[2].as_float(), o.amt) ||
      !near(v[3].as_float(), o.fixed) || !near(v[4].as_float(), o.var))
    return "store visit differs";
  return {};
}

}  // namespace

SuiteResult checkout_suite(std::size_t stores, std::uint64_t seed) {
  using namespace smartmart;
  SuiteResult r;
  r.name = "checkout";
  auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < stores; ++i) {
    SmallStore s = make_store(rng);
    auto order = make_order(rng, s);
    std::int64_t c_id = std::uniform_int_distribution<int>(1, 3)(rng);

    EngineOptions opts;
    opts.mode = DispatchMode::Sync;
    opts.clock = ClockKind::Logical;
    opts.detached = DetachedMode::Manual;
    Engine e(opts);
    DiscountParams p;
    p.k = s.k;
    p.c = s.c;
    p.replenish_quantity = s.replenish;
    register_types(e, p);
    e.create_actors(kStoreSection, s.sections);
    e.create_actors(kGroupManager, {"1", "2"});
    e.create_actors(kCustomer, {"1", "2", "3"});
    e.create_actors(kCart, {"1"});
    for (const auto& sec : s.sections) {
      std::vector<Row> inv, hist;
      for (const auto& it : s.inventory[sec]) inv.push_back({it.id, it.price, it.min_price, it.stock, it.vd});
      for (const auto& h : s.history[sec]) hist.push_back({h.i_id, Timestamp{h.time}, h.q, h.c_id});
      e.load({kStoreSection, sec}, "inventory", std::move(inv));
      e.load({kStoreSection, sec}, "purchase_history", std::move(hist));
    }
    for (const auto& [g, m] : s.discounts) {
      std::vector<Row> rows;
      for (const auto& [id, f] : m) rows.push_back({id, f});
      e.load({kGroupManager, std::to_string(g)}, "discounts", std::move(rows));
    }
    for (const auto& [cu, g] : s.group_of)
      e.load({kCustomer, std::to_string(cu)}, "customer_info", {{"c" + std::to_string(cu), g}});

    ++r.cases;
    auto add = e.call({kCart, "1"}, "add_items", {encode_orders(order), c_id});
    if (!add.ok()) {
      fail(r, "store " + std::to_string(i) + ": add_items failed: " + add.message);
      continue;
    }
    std::int64_t now = e.clock().peek().micros;
    OracleResult o = oracle_checkout(s, order, c_id, now);
    auto co = e.call({kCart, "1"}, "checkout", {add.value});
    if (!o.has_lines) {
      if (co.error != ErrorCode::UnknownSession) fail(r, "store " + std::to_string(i) + ": expected UnknownSession");
      continue;
    }
    if (!co.ok()) {
      fail(r, "store " + std::to_string(i) + ": checkout failed: " + co.message);
      continue;
    }
    e.drain_detached();
    r.max_error = std::max(r.max_error, std::abs(co.value.as_float() - o.amt));
    auto diff = check_store(e, s, o, co.value.as_float(), now, c_id);
    if (!diff.empty()) fail(r, "store " + std::to_string(i) + ": " + diff);
  }
  r.passed = r.failures == 0;
  r.seconds = since(t0);
  return r;
}

// --- serializability -------------------------------------------------------------------------

namespace {

struct Op {
  bool write;
  int reg;
  std::int64_t constant;
};

struct Txn {
  std::vector<Op> ops;
};

const std::vector<std::string> kRegs{"x", "y"};

ActorTypeDescriptor register_type() {
  ActorTypeDescriptor t;
  t.type_name = "Register";
  t.state_schemas = {{"cell", {{"v", rel::ColumnType::Int}}, false, {}}};
  t.methods.push_back({"read", {}, ValueKind::Int, {}, false, [](MethodContext& ctx, const ValueList&) -> Value {
                         return ctx.relation("cell").scan().front()[0];
                       }});
  t.methods.push_back({"write", {ValueKind::Int}, ValueKind::Null, {}, false,
                       [](MethodContext& ctx, const ValueList& a) -> Value {
                         ctx.relation("cell").update({}, {rel::Assignment::set("v", a[0])});
                         return Value();
                       }});
  return t;
}

// Runs txns serially in `order`; returns final registers and each txn's reads.
std::pair<std::vector<std::int64_t>, std::vector<std::vector<std::int64_t>>> run_serial(
    const std::vector<Txn>& txns, const std::vector<int>& order, std::vector<std::int64_t> regs) {
  std::vector<std::vector<std::int64_t>> reads(txns.size());
  for (int t : order) {
    std::int64_t acc = 0;
    for (const auto& op : txns[t].ops) {
      if (op.write) {
        regs[op.reg] = acc + op.constant;
      } else {
        reads[t].push_back(regs[op.reg]);
        acc += regs[op.reg];
      }
    }
  }
  return {regs, reads};
}

}  // namespace

SuiteResult serializability_suite(std::size_t schedules, std::uint64_t seed) {
  SuiteResult r;
  r.name = "serializability";
  auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  std::size_t committed_total = 0, aborted_total = 0;
  for (std::size_t i = 0; i < schedules; ++i) {
    int ntx = std::uniform_int_distribution<int>(2, 3)(rng);
    int nregs = std::uniform_int_distribution<int>(1, 2)(rng);
    std::vector<Txn> txns(ntx);
    for (int t = 0; t < ntx; ++t) {
      int nops = std::uniform_int_distribution<int>(1, 3)(rng);
      for (int k = 0; k < nops; ++k)
        txns[t].ops.push_back({std::uniform_int_distribution<int>(0, 1)(rng) == 1,
                               std::uniform_int_distribution<int>(0, nregs - 1)(rng), (t + 1) * 100 + k});
    }
    // interleave: each txn's ops then its commit, merged at random
    std::vector<int> steps;
    for (int t = 0; t < ntx; ++t) steps.insert(steps.end(), txns[t].ops.size() + 1, t);
    std::shuffle(steps.begin(), steps.end(), rng);

    EngineOptions opts;
    opts.mode = DispatchMode::Sync;
    opts.detached = DetachedMode::Manual;
    Engine e(opts);
    e.register_actor_type(register_type());
    e.create_actors("Register", kRegs);
    std::vector<std::int64_t> init{1, 2};
    for (int g = 0; g < 2; ++g) e.load({"Register", kRegs[g]}, "cell", {{init[g]}});

    std::vector<RootTransaction> roots;
    for (int t = 0; t < ntx; ++t) roots.push_back(e.begin());
    std::vector<std::size_t> pc(ntx, 0);
    std::vector<std::int64_t> acc(ntx, 0);
    std::vector<std::vector<std::int64_t>> reads(ntx);
    std::vector<bool> broken(ntx, false), committed(ntx, false);
    std::vector<int> commit_order;
    for (int t : steps) {
      if (pc[t] == txns[t].ops.size()) {
        if (broken[t]) {
          roots[t].abort();
        } else if (roots[t].commit().committed) {
          committed[t] = true;
          commit_order.push_back(t);
        }
        continue;
      }
      const Op& op = txns[t].ops[pc[t]++];
      if (broken[t]) continue;
      try {
        if (op.write) {
          auto f = roots[t].invoke({"Register", kRegs[op.reg]}, "write", {acc[t] + op.constant});
          roots[t].get(f);
        } else {
          auto f = roots[t].invoke({"Register", kRegs[op.reg]}, "read");
          std::int64_t v = roots[t].get(f).as_int();
          reads[t].push_back(v);
          acc[t] += v;
        }
      } catch (const Error&) {
        broken[t] = true;
      }
    }

    std::vector<std::int64_t> final_regs;
    for (int g = 0; g < 2; ++g) final_regs.push_back(e.relation({"Register", kRegs[g]}, "cell").snapshot().front().second[0].as_int());

    std::vector<int> perm = commit_order;
    std::sort(perm.begin(), perm.end());
    bool ok = false;
    do {
      auto [regs, sreads] = run_serial(txns, perm, init);
      bool same_reads = true;
      for (int t : perm) same_reads = same_reads && sreads[t] == reads[t];
      if (regs == final_regs && same_reads) ok = true;
    } while (!ok && std::next_permutation(perm.begin(), perm.end()));
    committed_total += commit_order.size();
    aborted_total += ntx - commit_order.size();
    ++r.cases;
    if (!ok) fail(r, "schedule " + std::to_string(i) + " has no equivalent serial order");
  }
  r.passed = r.failures == 0;
  r.seconds = since(t0);
  if (r.detail.empty())
    r.detail = std::to_string(committed_total) + " committed, " + std::to_string(aborted_total) + " aborted";
  return r;
}

// --- conservation ----------------------------------------------------------------------------

StoreImage capture_store(Engine& engine) {
  using namespace smartmart;
  StoreImage img;
  for (const auto& a : engine.actors()) {
    if (a.type_name == kStoreSection) {
      for (const auto& [id, row] : engine.relation(a, "inventory").snapshot()) img.stock[row[0].as_int()] = row[3].as_int();
      for (const auto& [id, row] : engine.relation(a, "purchase_history").snapshot()) {
        img.sold[row[0].as_int()] += row[2].as_int();
        ++img.history_rows[row[0].as_int()];
      }
    } else if (a.type_name == kCustomer) {
      img.store_visits += engine.relation(a, "store_visits").size();
    }
  }
  return img;
}

SuiteResult conservation_audit(const StoreImage& before, const StoreImage& after, std::uint64_t committed) {
  SuiteResult r;
  r.name = "conservation";
  for (const auto& [id, stock] : before.stock) {
    ++r.cases;
    auto a = after.stock.find(id);
    if (a == after.stock.end()) {
      fail(r, "item " + std::to_string(id) + " vanished");
      continue;
    }
    std::int64_t lost = stock - a->second;
    auto sold_after = after.sold.count(id) ? after.sold.at(id) : 0;
    auto sold_before = before.sold.count(id) ? before.sold.at(id) : 0;
    if (lost != sold_after - sold_before)
      fail(r, "item " + std::to_string(id) + ": stock fell by " + std::to_string(lost) + ", history grew by " +
                  std::to_string(sold_after - sold_before));
  }
  ++r.cases;
  std::size_t visits = after.store_visits - before.store_visits;
  if (visits != committed)
    fail(r, std::to_string(committed) + " committed checkouts but " + std::to_string(visits) + " store visits");
  r.passed = r.failures == 0;
  return r;
}

SuiteResult conservation_suite(int workers, int interactions, std::uint64_t seed, DispatchMode mode) {
  auto t0 = Clock::now();
  BenchmarkConfig cfg;
  cfg.workers = workers;
  cfg.carts = workers;
  cfg.interactions = interactions;
  cfg.discount.replenish = false;
  cfg.seed = seed;
  cfg.mode = mode;
  Workload w(cfg);
  auto before = capture_store(w.engine());
  auto report = w.run();
  auto after = capture_store(w.engine());
  SuiteResult r = conservation_audit(before, after, w.committed_total());
  if (w.committed_total() < static_cast<std::uint64_t>(workers) * interactions)
    fail(r, "only " + std::to_string(w.committed_total()) + " interactions committed");
  r.passed = r.failures == 0;
  if (r.detail.empty())
    r.detail = std::to_string(w.committed_total()) + " committed, abort rate " + std::to_string(report.abort_rate);
  r.seconds = since(t0);
  return r;
}

std::vector<SuiteResult> run_all_suites(std::uint64_t seed) {
  return {discount_suite(1000, seed), checkout_suite(200, seed + 1), serializability_suite(500, seed + 2),
          conservation_suite(4, 200, seed + 3)};
}

}  // namespace actordb::bench
