#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "actordb/common/address.hpp"
#include "actordb/security/admin_dsl.hpp"

namespace actordb::security {

/// The method frame issuing a call. Absent for external (client) callers.
struct CallerFrame {
  ActorAddress actor;
  std::string method;
  bool operator==(const CallerFrame&) const = default;
};

struct CallTarget {
  ActorAddress actor;
  std::string method;
  bool operator==(const CallTarget&) const = default;
};

enum class Decision : std::uint8_t { Allow, Deny };
std::string_view to_string(Decision d);

struct AccessRule {
  ActorPattern subject;
  std::vector<ActorPattern> objects;

  bool name_scoped() const;
  bool operator==(const AccessRule&) const = default;
};

/// Resolves type and method names during rule validation.
struct Catalog {
  std::function<bool(const std::string&)> has_type;
  std::function<bool(const std::string&, const std::string&)> has_method;
};

/// Grant rules. Everything is allowed until the first REVOKE ALL; afterwards a call needs a
/// covering grant without a NAMES clause. Independently, name-scoped rules whose subject
/// matches the caller and that mention the target's type restrict the call to the names they
/// list.
class AccessRuleSet {
 public:
  void revoke_all();
  /// Identical rules are kept once.
  void add(AccessRule rule);

  bool revoked() const { return revoked_; }
  const std::vector<AccessRule>& rules() const { return rules_; }

  Decision check(const std::optional<CallerFrame>& caller, const CallTarget& target) const;

  /// Throws UnknownType, UnknownMethod or RuleConflict.
  void validate(const Catalog& catalog) const;

  bool operator==(const AccessRuleSet&) const = default;

 private:
  bool revoked_ = false;
  std::vector<AccessRule> rules_;
};

bool matches(const ActorPattern& p, const ActorAddress& actor, const std::string& method);

}  // namespace actordb::security
