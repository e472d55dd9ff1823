#pragma once

#include <functional>
#include <string>
#include <vector>

#include "actordb/common/value.hpp"
#include "actordb/relstore/schema.hpp"

namespace actordb {

class MethodContext;

using MethodBody = std::function<Value(MethodContext&, const ValueList&)>;

struct MethodDescriptor {
  std::string name;
  std::vector<ValueKind> params;  // Any accepts every value
  ValueKind result = ValueKind::Any;
  /// Row shape of tuple and tuple-list results; bulk_invoke prefixes it with the actor name.
  std::vector<rel::Column> result_columns;
  bool encrypted = false;  // metadata only
  MethodBody body;
};

struct ActorTypeDescriptor {
  std::string type_name;
  std::vector<MethodDescriptor> methods;
  bool durable = true;
  std::vector<rel::Schema> state_schemas;

  const MethodDescriptor* find(std::string_view method) const;
};

}  // namespace actordb
