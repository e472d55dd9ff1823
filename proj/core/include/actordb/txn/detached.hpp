#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "actordb/common/address.hpp"
#include "actordb/common/value.hpp"

namespace actordb::txn {

enum class Trigger : std::uint8_t { OnCommit, OnAbort, OnAny };
enum class Delivery : std::uint8_t { ExactlyOnce, AtMostOnce, AtLeastOnce };

std::string_view to_string(Trigger t);
std::string_view to_string(Delivery d);

/// An invocation to run later as an independent root transaction once the parent's outcome
/// matches `trigger`.
struct DetachedSpec {
  std::uint64_t id = 0;
  ActorAddress target;
  std::string method;
  ValueList args;
  Trigger trigger = Trigger::OnCommit;
  Delivery delivery = Delivery::ExactlyOnce;
  std::uint64_t parent_context = 0;
  std::uint32_t depth = 0;  // 0 for specs detached by ordinary transactions

  bool fires_on_commit() const { return trigger != Trigger::OnAbort; }
  bool fires_on_abort() const { return trigger != Trigger::OnCommit; }

  bool operator==(const DetachedSpec&) const = default;
};

}  // namespace actordb::txn
