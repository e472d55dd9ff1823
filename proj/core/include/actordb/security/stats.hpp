#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "actordb/common/address.hpp"
#include "actordb/txn/transaction.hpp"

namespace actordb::security {

struct ActorStats {
  std::uint64_t invocations = 0;
  std::uint64_t commits = 0;
  std::array<std::uint64_t, txn::kAbortReasonCount> aborts{};
  std::uint64_t busy_ns = 0;
  std::uint64_t denied = 0;

  std::uint64_t total_aborts() const;
  bool operator==(const ActorStats&) const = default;
};

/// Per-actor monitoring counters. Counters for an actor are created on first use.
class StatsRegistry {
 public:
  void invoked(const ActorAddress& a, std::uint64_t busy_ns);
  void committed(const ActorAddress& a);
  void aborted(const ActorAddress& a, txn::AbortReason reason);
  void denied(const ActorAddress& a);
  void forget(const ActorAddress& a);

  std::map<ActorAddress, ActorStats> snapshot() const;

 private:
  struct Counters {
    std::atomic<std::uint64_t> invocations{0};
    std::atomic<std::uint64_t> commits{0};
    std::array<std::atomic<std::uint64_t>, txn::kAbortReasonCount> aborts{};
    std::atomic<std::uint64_t> busy_ns{0};
    std::atomic<std::uint64_t> denied{0};
  };
  Counters& of(const ActorAddress& a);

  mutable std::shared_mutex mu_;
  std::unordered_map<ActorAddress, std::unique_ptr<Counters>> counters_;
};

std::string stats_to_json(const std::map<ActorAddress, ActorStats>& stats);

}  // namespace actordb::security
