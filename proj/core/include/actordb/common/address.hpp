#pragma once

#include <compare>
#include <functional>
#include <string>

namespace actordb {

/// Identity of a logical actor: (type name, actor name). Names are opaque application strings.
struct ActorAddress {
  std::string type_name;
  std::string actor_name;

  auto operator<=>(const ActorAddress&) const = default;

  std::string str() const { return type_name + "[" + actor_name + "]"; }
};

}  // namespace actordb

template <>
struct std::hash<actordb::ActorAddress> {
  std::size_t operator()(const actordb::ActorAddress& a) const noexcept {
    std::size_t h = std::hash<std::string>{}(a.type_name);
    return h ^ (std::hash<std::string>{}(a.actor_name) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};
