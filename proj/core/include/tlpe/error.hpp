#pragma once

#include <stdexcept>
#include <string>

namespace tlpe {

enum class ErrorKind {
  Syntax,
  UnknownDirective,
  BadSpec,
  Permission,         // e.g. assert to a static predicate
  Existence,          // unknown procedure
  Instantiation,
  Type,
  Evaluation,         // arithmetic
  Floundering,
  CutOverIncompleteTable,
  NotTabled,
  TableIncomplete,
  TableAbsent,
  Incremental,
  AnswerSubsumption,
  NestedIncomplete,   // findall-style nested evaluation reached an outer incomplete table
  Io,
  Interrupted,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(detail), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  std::string describe() const { return std::string(error_kind_name(kind_)) + ": " + what(); }

 private:
  ErrorKind kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& msg, int line, int column)
      : Error(ErrorKind::Syntax, msg + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace tlpe
