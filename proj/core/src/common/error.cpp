#include "actordb/common/error.hpp"

#include <sstream>

namespace actordb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateType: return "DuplicateType";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::DuplicateActor: return "DuplicateActor";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::UnknownActor: return "UnknownActor";
    case ErrorCode::UnknownMethod: return "UnknownMethod";
    case ErrorCode::CalledFromMethodBody: return "CalledFromMethodBody";
    case ErrorCode::AccessDenied: return "AccessDenied";
    case ErrorCode::DeadlockDetected: return "DeadlockDetected";
    case ErrorCode::DuplicateRelation: return "DuplicateRelation";
    case ErrorCode::UnknownRelation: return "UnknownRelation";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::UnsupportedIsolation: return "UnsupportedIsolation";
    case ErrorCode::ParentNotActive: return "ParentNotActive";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CorruptLog: return "CorruptLog";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::RuleConflict: return "RuleConflict";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::SessionAlreadyOpen: return "SessionAlreadyOpen";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::InsufficientStock: return "InsufficientStock";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ApplicationError: return "ApplicationError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EngineHalted: return "EngineHalted";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {

std::string syntax_message(std::size_t line, std::size_t column, const std::vector<std::string>& expected,
                           const std::string& found) {
  std::ostringstream os;
  os << "line " << line << ", column " << column << ": expected ";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) os << (i + 1 == expected.size() ? " or " : ", ");
    os << expected[i];
  }
  os << " but found " << found;
  return os.str();
}

}  // namespace

SyntaxError::SyntaxError(std::size_t line, std::size_t column, std::vector<std::string> expected, std::string found)
    : Error(ErrorCode::SyntaxError, syntax_message(line, column, expected, found)),
      line_(line),
      column_(column),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace actordb
