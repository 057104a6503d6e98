#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbst/ast.hpp"
#include "sbst/test_case.hpp"

namespace sbst::lang {

inline constexpr std::int64_t kDefaultFuel = 10'000;
inline constexpr int kMaxCallDepth = 200;
inline constexpr double kNoDistance = std::numeric_limits<double>::infinity();

// Exception tags raised by the runtime itself.
inline constexpr const char* kDivByZero = "div_by_zero";
inline constexpr const char* kOverflow = "overflow";
inline constexpr const char* kStackOverflow = "stack_overflow";

// A single-node program edit. Replacements are applied by the interpreter
// at the node with id `expr`; the Program itself is never copied.
struct Mutation {
  enum class Kind : std::uint8_t {
    ReplaceBinaryOp,  // AOR / BOR / ROR
    ReplaceWithBool,  // ROR to true / false
    ReplaceLiteral,   // RC
    ReplaceVariable,  // RV
    InsertUnary,      // UOI
  };
  enum class Unary : std::uint8_t { PlusOne, MinusOne, Negate };

  Kind kind = Kind::ReplaceBinaryOp;
  int expr = -1;
  BinaryOp op = BinaryOp::Add;
  std::int64_t value = 0;  // literal, bool constant, or replacement slot
  Unary unary = Unary::PlusOne;
  int line = 0;  // line of the mutated node; reach is line coverage of it
};

struct PredicateExecution {
  int site = -1;
  double true_distance = 0;
  double false_distance = 0;
  bool direct = false;
};

struct SiteStats {
  int executions = 0;
  double min_true = kNoDistance;
  double min_false = kNoDistance;
};

struct ExceptionEvent {
  int method = -1;  // method invoked by the test
  std::string tag;
  friend bool operator==(const ExceptionEvent&, const ExceptionEvent&) = default;
};

struct ReturnEvent {
  int method = -1;
  std::int64_t value = 0;
};

enum MethodFlag : std::uint8_t { kDirect = 1, kInternal = 2 };

struct ExecutionTrace {
  std::vector<PredicateExecution> predicate_log;
  std::vector<SiteStats> sites;         // every execution
  std::vector<SiteStats> direct_sites;  // executions inside a frame the test called directly
  std::vector<std::uint8_t> lines_hit;  // indexed by line
  std::vector<std::uint8_t> entered;    // MethodFlag bits per method
  std::vector<std::uint8_t> completed;  // MethodFlag bits per method
  std::vector<ExceptionEvent> exceptions;
  std::vector<ReturnEvent> returns;     // direct calls of non-void methods
  std::optional<double> mutant_infection;  // set iff a supplied mutant was reached
  bool fuel_exhausted = false;
  std::int64_t steps = 0;

  bool line_hit(int line) const {
    return line >= 0 && line < static_cast<int>(lines_hit.size()) && lines_hit[line] != 0;
  }
  bool entered_directly(int method) const { return (entered[method] & kDirect) != 0; }
  bool completed_directly(int method) const { return (completed[method] & kDirect) != 0; }
};

nlohmann::json to_json(const ExecutionTrace& trace);

// Distances of `lhs op rhs` towards the true and false outcomes.
struct BranchDistance {
  double to_true;
  double to_false;
};
BranchDistance comparison_distance(BinaryOp op, std::int64_t lhs, std::int64_t rhs);

// Checked evaluation of one binary operator under the interpreter's semantics.
// Comparisons and logical operators yield 0/1.
struct BinaryResult {
  bool fault = false;
  std::int64_t value = 0;
  std::string_view tag;  // fault tag when `fault`
  friend bool operator==(const BinaryResult& a, const BinaryResult& b) {
    return a.fault == b.fault && (a.fault ? a.tag == b.tag : a.value == b.value);
  }
};
BinaryResult apply_binary(BinaryOp op, std::int64_t lhs, std::int64_t rhs);

// Executes tests against a program. Stateless apart from the returned trace;
// safe to share across threads.
class Interpreter {
 public:
  explicit Interpreter(const Program& program) : program_(program) {}

  // Throws InvalidCall for a malformed test.
  ExecutionTrace execute(const TestCase& test, const Mutation* mutant = nullptr,
                         std::int64_t fuel = kDefaultFuel) const;

  // Checks a test against the program's signatures without running it.
  void validate(const TestCase& test) const;

  const Program& program() const { return program_; }

 private:
  const Program& program_;
};

}  // namespace sbst::lang
