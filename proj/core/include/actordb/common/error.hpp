#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace actordb {

enum class ErrorCode {
  DuplicateType,
  InvalidSchema,
  DuplicateActor,
  UnknownType,
  UnknownActor,
  UnknownMethod,
  CalledFromMethodBody,
  AccessDenied,
  DeadlockDetected,
  DuplicateRelation,
  UnknownRelation,
  TypeMismatch,
  UnknownColumn,
  UnsupportedIsolation,
  ParentNotActive,
  IoError,
  CorruptLog,
  SyntaxError,
  RuleConflict,
  UnknownItem,
  SessionAlreadyOpen,
  UnknownSession,
  InsufficientStock,
  ConfigError,
  ApplicationError,
  InvalidArgument,
  EngineHalted,
};

std::string_view to_string(ErrorCode code);

// Every engine-raised failure carries a code; callers branch on code(), not on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, std::vector<std::string> expected, std::string found);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }
  const std::string& found() const noexcept { return found_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::vector<std::string> expected_;
  std::string found_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace actordb
