#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace actordb::security {

/// `ACTORS OF TYPE t [WITH METHODS IN (...)] [WITH NAMES IN (...)]`. An absent clause means all.
struct ActorPattern {
  std::string type_name;  // "ALL" (any case) matches every type
  std::optional<std::vector<std::string>> methods;
  std::optional<std::vector<std::string>> names;

  bool any_type() const;
  bool name_scoped() const { return names.has_value(); }
  bool operator==(const ActorPattern&) const = default;
};

struct CreateActors {
  std::string type_name;
  std::vector<std::string> names;
  bool operator==(const CreateActors&) const = default;
};

struct DropActors {
  std::string type_name;
  std::vector<std::string> names;
  bool operator==(const DropActors&) const = default;
};

struct RevokeAll {
  bool operator==(const RevokeAll&) const = default;
};

struct Grant {
  ActorPattern subject;
  std::vector<ActorPattern> objects;  // the AND ACCESS TO chain; never empty
  bool operator==(const Grant&) const = default;
};

using AdminCommand = std::variant<CreateActors, DropActors, RevokeAll, Grant>;

/// Throws SyntaxError with the 1-based position of the offending token and the expected set.
std::vector<AdminCommand> parse_admin_script(std::string_view text);

/// Canonical text: upper-case keywords, one statement per line group, `;` terminated.
std::string pretty_print(const std::vector<AdminCommand>& commands);
std::string pretty_print(const AdminCommand& command);

}  // namespace actordb::security
