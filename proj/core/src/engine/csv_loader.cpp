#include "actordb/engine/csv_loader.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "actordb/common/error.hpp"
#include "actordb/engine/engine.hpp"

namespace actordb {

namespace {

std::vector<std::string> split_record(const std::string& line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  if (quoted) raise(ErrorCode::InvalidArgument, "unterminated quote on line " + std::to_string(lineno));
  out.push_back(std::move(cur));
  return out;
}

Value parse_field(const std::string& s, rel::ColumnType type, std::size_t lineno) {
  if (s.empty() && type != rel::ColumnType::String) return Value();
  auto bad = [&] {
    raise(ErrorCode::TypeMismatch, "line " + std::to_string(lineno) + ": '" + s + "' is not " +
                                       std::string(rel::to_string(type)));
  };
  switch (type) {
    case rel::ColumnType::Int:
    case rel::ColumnType::Timestamp: {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) bad();
      return type == rel::ColumnType::Int ? Value(v) : Value(Timestamp{v});
    }
    case rel::ColumnType::Float: {
      try {
        std::size_t used = 0;
        double d = std::stod(s, &used);
        if (used != s.size()) bad();
        return Value(d);
      } catch (const std::logic_error&) {
        bad();
      }
    }
    case rel::ColumnType::String: return Value(s);
  }
  return Value();
}

}  // namespace

CsvTarget csv_target(const std::string& path) {
  std::string file = std::filesystem::path(path).filename().string();
  const std::string ext = ".csv";
  if (file.size() <= ext.size() || file.compare(file.size() - ext.size(), ext.size(), ext) != 0)
    raise(ErrorCode::InvalidArgument, "loader file must end in .csv: " + file);
  file.resize(file.size() - ext.size());
  auto first = file.find('.');
  auto last = file.rfind('.');
  if (first == std::string::npos || first == last)
    raise(ErrorCode::InvalidArgument, "loader file must be named <type>.<name>.<relation>.csv: " + path);
  return {{file.substr(0, first), file.substr(first + 1, last - first - 1)}, file.substr(last + 1)};
}

std::vector<Row> parse_csv(const std::string& text, const rel::Schema& schema) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::size_t> position;  // csv column -> schema column
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (position.empty()) {
      auto header = split_record(line, lineno);
      for (const auto& h : header) position.push_back(schema.index_of(h));
      std::vector<bool> seen(schema.arity(), false);
      for (auto p : position) {
        if (seen[p]) raise(ErrorCode::InvalidArgument, "duplicate column in header");
        seen[p] = true;
      }
      if (position.size() != schema.arity())
        raise(ErrorCode::InvalidArgument, "header must list every column of " + schema.name);
      continue;
    }
    if (line.empty() || line == "\r") continue;
    auto fields = split_record(line, lineno);
    if (fields.size() != position.size())
      raise(ErrorCode::TypeMismatch, "line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                                         " fields, expected " + std::to_string(position.size()));
    Row row(schema.arity());
    for (std::size_t i = 0; i < fields.size(); ++i)
      row[position[i]] = parse_field(fields[i], schema.columns[position[i]].type, lineno);
    schema.conform(row);
    rows.push_back(std::move(row));
  }
  if (position.empty()) raise(ErrorCode::InvalidArgument, "CSV has no header row");
  return rows;
}

std::size_t load_csv(Engine& engine, const std::string& path) {
  auto target = csv_target(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  auto& relation = engine.relation(target.actor, target.relation);
  auto rows = parse_csv(buf.str(), relation.schema());
  std::size_t n = rows.size();
  engine.load(target.actor, target.relation, std::move(rows));
  return n;
}

}  // namespace actordb
