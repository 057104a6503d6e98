#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sbst {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by parse(); carries the 1-based position of the offending token.
class Diagnostic : public Error {
 public:
  Diagnostic(const std::string& kind, int line, int column, const std::string& message)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + kind + ": " + message),
        line_(line),
        column_(column),
        detail_(message) {}

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& detail() const { return detail_; }

 private:
  int line_;
  int column_;
  std::string detail_;
};

class SyntaxError : public Diagnostic {
 public:
  SyntaxError(int line, int column, const std::string& message, std::vector<std::string> expected = {})
      : Diagnostic("syntax error", line, column, message), expected_(std::move(expected)) {}
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::vector<std::string> expected_;
};

class TypeError : public Diagnostic {
 public:
  TypeError(int line, int column, const std::string& message)
      : Diagnostic("type error", line, column, message) {}
};

class DuplicateMethod : public Diagnostic {
 public:
  DuplicateMethod(int line, int column, const std::string& name)
      : Diagnostic("duplicate method", line, column, "method '" + name + "' already defined") {}
};

// A test references a method or argument shape the subject does not have.
class InvalidCall : public Error {
 public:
  using Error::Error;
};

class UnknownCriterion : public Error {
 public:
  using Error::Error;
};

class GoalNotInProgram : public Error {
 public:
  using Error::Error;
};

class MutantUnknown : public Error {
 public:
  using Error::Error;
};

class NegativeInput : public Error {
 public:
  using Error::Error;
};

class EmptyDomain : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class NoCallableMethods : public Error {
 public:
  using Error::Error;
};

class BudgetTooSmall : public Error {
 public:
  using Error::Error;
};

class EmptyObjectives : public Error {
 public:
  using Error::Error;
};

class MissingBranchGoals : public Error {
 public:
  using Error::Error;
};

class EmptySample : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

}  // namespace sbst
