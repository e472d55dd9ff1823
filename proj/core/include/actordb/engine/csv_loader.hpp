#pragma once

#include <string>
#include <vector>

#include "actordb/common/address.hpp"
#include "actordb/relstore/schema.hpp"

namespace actordb {

class Engine;

/// Target of a loader file named `<type>.<name>.<relation>.csv`. Throws InvalidArgument.
struct CsvTarget {
  ActorAddress actor;
  std::string relation;
};
CsvTarget csv_target(const std::string& path);

/// Parses CSV text whose header names exactly the schema's columns (any order).
/// Throws TypeMismatch, UnknownColumn, InvalidArgument.
std::vector<Row> parse_csv(const std::string& text, const rel::Schema& schema);

/// Loads one file into the live actor it names. Returns the row count. Throws IoError too.
std::size_t load_csv(Engine& engine, const std::string& path);

}  // namespace actordb
