#pragma once

#include <string>
#include <vector>

#include "actordb/security/access.hpp"

namespace actordb::security {

/// A statically declared call: caller type/method invokes callee type/method.
struct CallEdge {
  std::string caller_type;
  std::string caller_method;
  std::string callee_type;
  std::string callee_method;
  bool operator==(const CallEdge&) const = default;
};

struct VerifyFinding {
  enum class Kind : std::uint8_t { Denied, NameRestricted };
  CallEdge edge;
  Kind kind;
  std::string detail;
};

/// Edges the rule set denies for every actor name (Denied), and edges that only some names may
/// use (NameRestricted).
std::vector<VerifyFinding> verify_call_graph(const AccessRuleSet& rules, const std::vector<CallEdge>& edges);

}  // namespace actordb::security
