#include "actordb/security/stats.hpp"

#include <mutex>
#include <numeric>

#include <nlohmann/json.hpp>

namespace actordb::security {

std::uint64_t ActorStats::total_aborts() const { return std::accumulate(aborts.begin(), aborts.end(), std::uint64_t{0}); }

StatsRegistry::Counters& StatsRegistry::of(const ActorAddress& a) {
  {
    std::shared_lock lock(mu_);
    auto it = counters_.find(a);
    if (it != counters_.end()) return *it->second;
  }
  std::unique_lock lock(mu_);
  auto& slot = counters_[a];
  if (!slot) slot = std::make_unique<Counters>();
  return *slot;
}

void StatsRegistry::invoked(const ActorAddress& a, std::uint64_t busy_ns) {
  auto& c = of(a);
  c.invocations.fetch_add(1, std::memory_order_relaxed);
  c.busy_ns.fetch_add(busy_ns, std::memory_order_relaxed);
}

void StatsRegistry::committed(const ActorAddress& a) { of(a).commits.fetch_add(1, std::memory_order_relaxed); }

void StatsRegistry::aborted(const ActorAddress& a, txn::AbortReason reason) {
  of(a).aborts[static_cast<std::size_t>(reason)].fetch_add(1, std::memory_order_relaxed);
}

void StatsRegistry::denied(const ActorAddress& a) { of(a).denied.fetch_add(1, std::memory_order_relaxed); }

void StatsRegistry::forget(const ActorAddress& a) {
  std::unique_lock lock(mu_);
  counters_.erase(a);
}

std::map<ActorAddress, ActorStats> StatsRegistry::snapshot() const {
  std::shared_lock lock(mu_);
  std::map<ActorAddress, ActorStats> out;
  for (const auto& [addr, c] : counters_) {
    ActorStats s;
    s.invocations = c->invocations.load();
    s.commits = c->commits.load();
    for (std::size_t i = 0; i < s.aborts.size(); ++i) s.aborts[i] = c->aborts[i].load();
    s.busy_ns = c->busy_ns.load();
    s.denied = c->denied.load();
    out.emplace(addr, s);
  }
  return out;
}

std::string stats_to_json(const std::map<ActorAddress, ActorStats>& stats) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& [addr, s] : stats) {
    nlohmann::ordered_json aborts;
    for (std::size_t i = 0; i < s.aborts.size(); ++i)
      aborts[std::string(txn::to_string(static_cast<txn::AbortReason>(i)))] = s.aborts[i];
    out.push_back({{"type", addr.type_name},
                   {"name", addr.actor_name},
                   {"invocations", s.invocations},
                   {"commits", s.commits},
                   {"aborts", aborts},
                   {"busy_us", s.busy_ns / 1000},
                   {"denied", s.denied}});
  }
  return out.dump(2);
}

}  // namespace actordb::security
