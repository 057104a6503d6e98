#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <set>

#include "sbst/cfg.hpp"
#include "sbst/errors.hpp"
#include "sbst/goals.hpp"
#include "sbst/interpreter.hpp"
#include "sbst/parser.hpp"
#include "support/random_program.hpp"

using namespace sbst;
using namespace sbst::lang;

namespace {

TestCase calls(std::initializer_list<std::pair<int, std::vector<std::int64_t>>> list) {
  TestCase t;
  for (const auto& [m, args] : list) {
    CallStatement c{m, {}};
    for (auto a : args) c.args.push_back(Argument::literal(a));
    t.calls.push_back(c);
  }
  return t;
}

// Postdominance by brute force: x postdominates y iff the exit is unreachable
// from y once x is removed.
bool postdominates(const ControlFlowModel& m, int x, int y) {
  if (x == y) return true;
  std::vector<char> seen(m.blocks.size(), 0);
  std::vector<int> stack{y};
  seen[y] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    if (m.blocks[u].exits) return false;
    for (int v : m.blocks[u].successors) {
      if (v != x && !seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  return true;
}

// Textbook control dependence: b depends on (s, o) iff b postdominates the
// o-successor of s and does not strictly postdominate s's block.
std::set<BranchOutcome> brute_force_cd(const ControlFlowModel& m, int b) {
  std::set<BranchOutcome> out;
  for (const auto& s : m.branch_sites) {
    if (s.method != m.blocks[b].method) continue;
    for (bool o : {true, false}) {
      const int succ = o ? s.true_block : s.false_block;
      if (postdominates(m, b, succ) && !(b != s.block && postdominates(m, b, s.block))) out.insert({s.id, o});
    }
  }
  return out;
}

}  // namespace

TEST(Parse, AbsHasOneMethodOneSite) {
  auto p = parse("fn abs(x:int)->int { if (x < 0) { return 0 - x; } return x; }");
  EXPECT_EQ(p.methods.size(), 1u);
  EXPECT_EQ(p.site_count, 1);
}

TEST(Parse, ReturnTypeMismatch) { EXPECT_THROW(parse("fn f()->int { return true; }"), TypeError); }

TEST(Parse, EmptyInput) {
  auto s = Subject::from_source("");
  EXPECT_EQ(s.prog().methods.size(), 0u);
  for (Criterion c : kAllCriteria) EXPECT_EQ(extract_goals(s, c).size(), 0u);
}

TEST(Parse, SyntaxErrorCarriesPosition) {
  try {
    parse("fn f() {\n  let x = ;\n}");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 11);
    EXPECT_FALSE(e.expected().empty());
  }
}

TEST(Parse, DuplicateMethod) { EXPECT_THROW(parse("fn f() { }\nfn f() { }"), DuplicateMethod); }

TEST(Parse, MissingReturnPath) {
  EXPECT_THROW(parse("fn f(x:int)->int { if (x < 0) { return 1; } }"), TypeError);
  EXPECT_NO_THROW(parse("fn f(x:int)->int { if (x < 0) { return 1; } else { throw bad; } }"));
}

TEST(Parse, OperatorTypes) {
  EXPECT_THROW(parse("fn f(b:bool)->int { return b + 1; }"), TypeError);
  EXPECT_THROW(parse("fn f(x:int) { if (x) { } }"), TypeError);
  EXPECT_NO_THROW(parse("fn f(x:int, b:bool)->bool { return !b && (x & 3) == 1; }"));
}

TEST(Parse, ConstantPool) {
  auto p = parse("fn f(x:int)->int { if (x == 42) { return -7; } return 3; }");
  for (std::int64_t c : {42, -7, 3}) {
    EXPECT_TRUE(std::binary_search(p.int_constants.begin(), p.int_constants.end(), c)) << c;
  }
}

TEST(Cfm, StraightLine) {
  auto p = parse(
      "fn f(a:int)->int {\n"
      "  let b = a + 1;\n"
      "  let c = b * 2;\n"
      "  let d = c - a;\n"
      "  b = d;\n"
      "  return b;\n"
      "}\n");
  auto m = build_cfm(p);
  EXPECT_EQ(m.blocks.size(), 1u);
  EXPECT_TRUE(m.branch_sites.empty());
  EXPECT_TRUE(m.control_deps[0].empty());
  EXPECT_EQ(m.blocks[0].lines, (std::vector<int>{2, 3, 4, 5, 6}));
}

TEST(Cfm, IfElseDependsOnSite) {
  auto p = parse(
      "fn f(a:int, b:int)->int {\n"
      "  let r = 0;\n"
      "  if (a < b) {\n"
      "    r = 1;\n"
      "  } else {\n"
      "    r = 2;\n"
      "  }\n"
      "  return r;\n"
      "}\n");
  auto m = build_cfm(p);
  ASSERT_EQ(m.branch_sites.size(), 1u);
  const auto& s = m.branch_sites[0];
  EXPECT_EQ(m.control_deps[m.block_of_line(4)], (std::vector<BranchOutcome>{{0, true}}));
  EXPECT_EQ(m.control_deps[m.block_of_line(6)], (std::vector<BranchOutcome>{{0, false}}));
  EXPECT_TRUE(m.control_deps[m.block_of_line(8)].empty());
  EXPECT_EQ(s.true_block, m.block_of_line(4));
  EXPECT_EQ(s.false_block, m.block_of_line(6));
}

TEST(Cfm, NestedChainLengthTwo) {
  auto p = parse(
      "fn f(p:bool, q:bool)->int {\n"
      "  if (p) {\n"
      "    if (q) {\n"
      "      return 1;\n"
      "    }\n"
      "  }\n"
      "  return 0;\n"
      "}\n");
  auto m = build_cfm(p);
  const int b = m.block_of_line(4);
  EXPECT_EQ(m.depth[b], 2);
  for (std::size_t k = 0; k < m.blocks.size(); ++k) {
    std::set<BranchOutcome> got(m.control_deps[k].begin(), m.control_deps[k].end());
    EXPECT_EQ(got, brute_force_cd(m, static_cast<int>(k))) << "block " << k;
  }
  // Follow the guard chain from the block to the entry.
  int len = 0;
  for (int cur = b; !m.guards[cur].empty(); cur = m.branch_sites[m.guards[cur][0].site].block) ++len;
  EXPECT_EQ(len, 2);
}

TEST(Cfm, ControlDepsMatchBruteForceOnRandomPrograms) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    fixtures::RandomProgram gen(seed);
    auto p = parse(gen.generate(3));
    auto m = build_cfm(p);
    for (std::size_t k = 0; k < m.blocks.size(); ++k) {
      std::set<BranchOutcome> got(m.control_deps[k].begin(), m.control_deps[k].end());
      EXPECT_EQ(got, brute_force_cd(m, static_cast<int>(k))) << "seed " << seed << " block " << k;
      for (const auto& g : m.guards[k]) EXPECT_TRUE(got.count(g));
    }
    // Every line has exactly one block.
    std::set<int> lines;
    for (const auto& blk : m.blocks) {
      for (int l : blk.lines) EXPECT_TRUE(lines.insert(l).second);
    }
  }
}

TEST(Execute, AbsOfNegative) {
  auto p = parse(
      "fn abs(x:int)->int {\n"
      "  if (x < 0) {\n"
      "    return 0 - x;\n"
      "  }\n"
      "  return x;\n"
      "}\n");
  Interpreter in(p);
  auto t = in.execute(calls({{0, {-3}}}));
  EXPECT_TRUE(t.line_hit(3));
  EXPECT_FALSE(t.line_hit(5));
  EXPECT_EQ(t.sites[0].min_true, 0);
  EXPECT_EQ(t.sites[0].min_false, 3);  // b - a for a < b
  ASSERT_EQ(t.returns.size(), 1u);
  EXPECT_EQ(t.returns[0].value, 3);
}

TEST(Execute, EqualityDistance) {
  auto p = parse("fn f(x:int) {\n  if (x == 10) {\n    return;\n  }\n}\n");
  auto t = Interpreter(p).execute(calls({{0, {7}}}));
  EXPECT_EQ(t.predicate_log.size(), 1u);
  EXPECT_EQ(t.predicate_log[0].true_distance, 3);
  EXPECT_EQ(t.predicate_log[0].false_distance, 0);
}

TEST(Execute, DistanceTable) {
  EXPECT_EQ(comparison_distance(BinaryOp::Lt, 5, 2).to_true, 4);
  EXPECT_EQ(comparison_distance(BinaryOp::Lt, 2, 5).to_false, 3);
  EXPECT_EQ(comparison_distance(BinaryOp::Le, 5, 2).to_true, 3);
  EXPECT_EQ(comparison_distance(BinaryOp::Le, 2, 2).to_false, 1);
  EXPECT_EQ(comparison_distance(BinaryOp::Gt, 2, 5).to_true, 4);
  EXPECT_EQ(comparison_distance(BinaryOp::Ge, 2, 5).to_true, 3);
  EXPECT_EQ(comparison_distance(BinaryOp::Eq, 4, 4).to_false, 1);
  EXPECT_EQ(comparison_distance(BinaryOp::Ne, 4, 4).to_true, 1);
  EXPECT_EQ(comparison_distance(BinaryOp::Ne, 4, 9).to_false, 5);
  const auto extreme = comparison_distance(BinaryOp::Eq, INT64_MIN, INT64_MAX);
  EXPECT_GT(extreme.to_true, 1.8e19);
}

TEST(Execute, LogicalCombination) {
  auto p = parse("fn f(a:int, b:int) {\n  if (a == 1 && b == 5) {\n    return;\n  }\n}\n");
  auto t = Interpreter(p).execute(calls({{0, {3, 2}}}));
  // a == 1 fails by 2; b == 5 is skipped by short-circuit and counts 1.
  EXPECT_EQ(t.predicate_log[0].true_distance, 3);
  EXPECT_EQ(t.predicate_log[0].false_distance, 0);
  auto p2 = parse("fn f(a:int, b:int) {\n  if (a == 1 || b == 5) {\n    return;\n  }\n}\n");
  auto t2 = Interpreter(p2).execute(calls({{0, {3, 2}}}));
  EXPECT_EQ(t2.predicate_log[0].true_distance, 2);
}

TEST(Execute, FaultIsolation) {
  auto p = parse(
      "fn div(a:int, b:int)->int {\n"
      "  return a / b;\n"
      "}\n"
      "fn id(a:int)->int {\n"
      "  return a;\n"
      "}\n");
  auto t = Interpreter(p).execute(calls({{0, {1, 0}}, {1, {4}}}));
  ASSERT_EQ(t.exceptions.size(), 1u);
  EXPECT_EQ(t.exceptions[0], (ExceptionEvent{0, "div_by_zero"}));
  EXPECT_TRUE(t.line_hit(5));
  EXPECT_TRUE(t.entered_directly(0));
  EXPECT_FALSE(t.completed_directly(0));
  EXPECT_TRUE(t.completed_directly(1));
}

TEST(Execute, CheckedArithmetic) {
  auto p = parse(
      "fn add(a:int, b:int)->int { return a + b; }\n"
      "fn div(a:int, b:int)->int { return a / b; }\n"
      "fn mod(a:int, b:int)->int { return a % b; }\n");
  Interpreter in(p);
  auto t = in.execute(calls({{0, {INT64_MAX, 1}}, {1, {INT64_MIN, -1}}, {2, {INT64_MIN, -1}}}));
  ASSERT_EQ(t.exceptions.size(), 2u);
  EXPECT_EQ(t.exceptions[0].tag, "overflow");
  EXPECT_EQ(t.exceptions[1].tag, "overflow");
  ASSERT_EQ(t.returns.size(), 1u);
  EXPECT_EQ(t.returns[0].value, 0);
}

TEST(Execute, ThrowTagAndRecursionLimit) {
  auto p = parse(
      "fn check(x:int) {\n  if (x > 3) {\n    throw too_big;\n  }\n}\n"
      "fn loop(x:int)->int {\n  return loop(x);\n}\n");
  auto t = Interpreter(p).execute(calls({{0, {9}}, {1, {0}}}));
  ASSERT_EQ(t.exceptions.size(), 2u);
  EXPECT_EQ(t.exceptions[0].tag, "too_big");
  EXPECT_EQ(t.exceptions[1], (ExceptionEvent{1, "stack_overflow"}));
  EXPECT_EQ(t.entered[1], kDirect | kInternal);
}

TEST(Execute, FuelExhaustionIsNotAnException) {
  auto p = parse("fn spin(x:int) {\n  while (x == x) {\n    x = x;\n  }\n}\nfn id(a:int)->int {\n  return a;\n}\n");
  auto t = Interpreter(p).execute(calls({{0, {1}}, {1, {2}}}), nullptr, 500);
  EXPECT_TRUE(t.fuel_exhausted);
  EXPECT_TRUE(t.exceptions.empty());
  EXPECT_FALSE(t.line_hit(7));
  EXPECT_LE(t.steps, 500);
}

TEST(Execute, InvalidCall) {
  auto p = parse("fn f(x:int) { }\n");
  Interpreter in(p);
  EXPECT_THROW(in.execute(calls({{1, {}}})), InvalidCall);
  EXPECT_THROW(in.execute(calls({{0, {}}})), InvalidCall);
  TestCase bad;
  bad.calls.push_back({0, {Argument::bound(0)}});
  EXPECT_THROW(in.execute(bad), InvalidCall);
}

TEST(Execute, SlotBinding) {
  auto p = parse("fn inc(x:int)->int { return x + 1; }\n");
  TestCase t;
  t.calls.push_back({0, {Argument::literal(1)}});
  t.calls.push_back({0, {Argument::bound(0)}});
  auto tr = Interpreter(p).execute(t);
  ASSERT_EQ(tr.returns.size(), 2u);
  EXPECT_EQ(tr.returns[1].value, 3);
}

TEST(Execute, InternalCallsAreNotDirect) {
  auto p = parse(
      "fn inner(x:int)->int {\n  if (x > 0) {\n    return 1;\n  }\n  return 0;\n}\n"
      "fn outer(x:int)->int {\n  return inner(x);\n}\n");
  auto t = Interpreter(p).execute(calls({{1, {5}}}));
  EXPECT_FALSE(t.entered_directly(0));
  EXPECT_EQ(t.entered[0], kInternal);
  EXPECT_EQ(t.sites[0].executions, 1);
  EXPECT_EQ(t.direct_sites[0].executions, 0);
  ASSERT_EQ(t.returns.size(), 1u);
  EXPECT_EQ(t.returns[0].method, 1);
}

TEST(Properties, DeterminismSoundnessConsistencyReach) {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    fixtures::RandomProgram gen(seed);
    auto subject = Subject::from_source(gen.generate(3));
    const auto& p = subject.prog();
    const auto& m = subject.cfm;
    Interpreter in(p);
    for (int k = 0; k < 4; ++k) {
      auto test = fixtures::random_calls(p, rng);
      auto t = in.execute(test);
      EXPECT_EQ(to_json(t).dump(), to_json(in.execute(test)).dump());
      for (const auto& pe : t.predicate_log) {
        EXPECT_TRUE((pe.true_distance == 0) != (pe.false_distance == 0));
        EXPECT_GT(pe.true_distance + pe.false_distance, 0);
      }
      for (int line : m.lines()) {
        if (!t.line_hit(line)) continue;
        for (const auto& g : m.guards[m.block_of_line(line)]) {
          const auto& st = t.sites[g.site];
          EXPECT_EQ(g.outcome ? st.min_true : st.min_false, 0) << "seed " << seed << " line " << line;
        }
      }
      for (std::size_t meth = 0; meth < p.methods.size(); ++meth) {
        EXPECT_EQ(t.completed[meth] & ~t.entered[meth], 0);
      }
      for (const auto& mu : subject.mutants) {
        auto mt = in.execute(test, &mu.mutation);
        EXPECT_EQ(mt.mutant_infection.has_value(), t.line_hit(mu.line)) << mu.key;
      }
    }
  }
}
