#include "actordb/security/access.hpp"

#include <algorithm>

#include "actordb/common/error.hpp"

namespace actordb::security {

namespace {

bool listed(const std::optional<std::vector<std::string>>& set, const std::string& v) {
  return !set || std::find(set->begin(), set->end(), v) != set->end();
}

bool type_matches(const ActorPattern& p, const std::string& type) { return p.any_type() || p.type_name == type; }

}  // namespace

std::string_view to_string(Decision d) { return d == Decision::Allow ? "allow" : "deny"; }

bool AccessRule::name_scoped() const {
  return subject.name_scoped() || std::any_of(objects.begin(), objects.end(), [](const auto& o) { return o.name_scoped(); });
}

bool matches(const ActorPattern& p, const ActorAddress& actor, const std::string& method) {
  return type_matches(p, actor.type_name) && listed(p.methods, method) && listed(p.names, actor.actor_name);
}

void AccessRuleSet::revoke_all() {
  revoked_ = true;
  rules_.clear();
}

void AccessRuleSet::add(AccessRule rule) {
  if (std::find(rules_.begin(), rules_.end(), rule) == rules_.end()) rules_.push_back(std::move(rule));
}

Decision AccessRuleSet::check(const std::optional<CallerFrame>& caller, const CallTarget& target) const {
  if (!caller) return Decision::Allow;
  bool granted = !revoked_;
  bool constrained = false;
  bool name_granted = false;
  for (const auto& r : rules_) {
    if (!matches(r.subject, caller->actor, caller->method)) continue;
    const bool scoped = r.name_scoped();
    for (const auto& o : r.objects) {
      if (!scoped) {
        granted = granted || matches(o, target.actor, target.method);
        continue;
      }
      if (!type_matches(o, target.actor.type_name)) continue;
      constrained = true;
      name_granted = name_granted || matches(o, target.actor, target.method);
    }
  }
  return granted && (!constrained || name_granted) ? Decision::Allow : Decision::Deny;
}

void AccessRuleSet::validate(const Catalog& catalog) const {
  auto check_pattern = [&](const ActorPattern& p) {
    if (p.any_type()) {
      if (p.methods || p.names)
        raise(ErrorCode::RuleConflict, "ACTORS OF TYPE ALL cannot be narrowed by METHODS or NAMES");
      return;
    }
    if (!catalog.has_type(p.type_name)) raise(ErrorCode::UnknownType, "unknown actor type " + p.type_name);
    if (p.methods)
      for (const auto& m : *p.methods)
        if (!catalog.has_method(p.type_name, m))
          raise(ErrorCode::UnknownMethod, "type " + p.type_name + " has no method " + m);
  };
  for (const auto& r : rules_) {
    if (r.objects.empty()) raise(ErrorCode::RuleConflict, "grant without objects");
    check_pattern(r.subject);
    for (const auto& o : r.objects) check_pattern(o);
  }
  if (!revoked_) return;
  // A name-scoped rule only narrows; without a method-level grant on the same type pair it can
  // never admit a call, so the rules do not compose.
  for (const auto& r : rules_) {
    if (!r.name_scoped()) continue;
    for (const auto& o : r.objects) {
      bool covered = std::any_of(rules_.begin(), rules_.end(), [&](const AccessRule& g) {
        if (g.name_scoped()) return false;
        if (!g.subject.any_type() && !r.subject.any_type() && g.subject.type_name != r.subject.type_name) return false;
        return std::any_of(g.objects.begin(), g.objects.end(), [&](const ActorPattern& go) {
          return go.any_type() || o.any_type() || go.type_name == o.type_name;
        });
      });
      if (!covered)
        raise(ErrorCode::RuleConflict, "name-scoped grant from " + r.subject.type_name + " to " + o.type_name +
                                           " has no method-level grant to narrow");
    }
  }
}

}  // namespace actordb::security
