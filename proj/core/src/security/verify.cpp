#include "actordb/security/verify.hpp"

#include <algorithm>

namespace actordb::security {

std::vector<VerifyFinding> verify_call_graph(const AccessRuleSet& rules, const std::vector<CallEdge>& edges) {
  std::vector<VerifyFinding> out;
  for (const auto& e : edges) {
    // Names no rule lists, so only type/method grants decide.
    const std::string probe = "\x01unlisted";
    CallerFrame caller{{e.caller_type, probe}, e.caller_method};
    CallTarget target{{e.callee_type, probe}, e.callee_method};
    if (rules.check(caller, target) == Decision::Deny) {
      out.push_back({e, VerifyFinding::Kind::Denied, "no grant covers " + e.caller_type + "." + e.caller_method +
                                                         " -> " + e.callee_type + "." + e.callee_method});
      continue;
    }
    for (const auto& r : rules.rules()) {
      if (!r.name_scoped() || !r.subject.names) continue;
      bool type_ok = r.subject.any_type() || r.subject.type_name == e.caller_type;
      bool method_ok = !r.subject.methods || std::count(r.subject.methods->begin(), r.subject.methods->end(), e.caller_method);
      bool object = std::any_of(r.objects.begin(), r.objects.end(),
                                [&](const ActorPattern& o) { return o.any_type() || o.type_name == e.callee_type; });
      if (type_ok && method_ok && object) {
        out.push_back({e, VerifyFinding::Kind::NameRestricted,
                       "restricted by a name-scoped grant for " + std::to_string(r.subject.names->size()) + " " +
                           e.caller_type + " actor(s)"});
        break;
      }
    }
  }
  return out;
}

}  // namespace actordb::security
