#include "actordb/engine/options.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "actordb/common/error.hpp"
#include "actordb/engine/descriptor.hpp"

namespace actordb {

std::string_view to_string(DispatchMode m) { return m == DispatchMode::Sync ? "sync" : "async"; }

DispatchMode parse_dispatch_mode(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "sync") return DispatchMode::Sync;
  if (lower == "async") return DispatchMode::Async;
  raise(ErrorCode::ConfigError, "dispatch mode must be sync or async, got '" + std::string(s) + "'");
}

const MethodDescriptor* ActorTypeDescriptor::find(std::string_view method) const {
  for (const auto& m : methods)
    if (m.name == method) return &m;
  return nullptr;
}

}  // namespace actordb
