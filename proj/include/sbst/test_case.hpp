#pragma once

#include <cstdint>
#include <vector>

namespace sbst {

// A call argument: a literal, or the result of an earlier call in the same test.
struct Argument {
  enum class Kind : std::uint8_t { Literal, Slot };

  Kind kind = Kind::Literal;
  std::int64_t value = 0;  // literal; bools are 0/1
  int slot = -1;           // index of an earlier statement

  static Argument literal(std::int64_t v) { return {Kind::Literal, v, -1}; }
  static Argument bound(int statement) { return {Kind::Slot, 0, statement}; }

  friend bool operator==(const Argument&, const Argument&) = default;
};

struct CallStatement {
  int method = -1;
  std::vector<Argument> args;

  friend bool operator==(const CallStatement&, const CallStatement&) = default;
};

// Statement i's result (for non-void methods) is slot i.
struct TestCase {
  std::vector<CallStatement> calls;

  std::size_t size() const { return calls.size(); }
  bool empty() const { return calls.empty(); }

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

struct TestSuite {
  std::vector<TestCase> tests;

  std::size_t total_length() const {
    std::size_t n = 0;
    for (const auto& t : tests) n += t.size();
    return n;
  }
};

}  // namespace sbst
