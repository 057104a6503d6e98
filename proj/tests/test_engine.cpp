#include <gtest/gtest.h>

#include <random>

#include "sbst/engine.hpp"
#include "sbst/errors.hpp"
#include "support/random_program.hpp"

using namespace sbst;

namespace {

const char* kTriangle =
    "fn classify(a:int, b:int, c:int) -> int {\n"
    "  if (a <= 0 || b <= 0 || c <= 0) {\n"
    "    throw invalid;\n"
    "  }\n"
    "  if (a + b <= c || a + c <= b || b + c <= a) {\n"
    "    return 0;\n"
    "  }\n"
    "  if (a == b && b == c) {\n"
    "    return 3;\n"
    "  }\n"
    "  if (a == b || b == c || a == c) {\n"
    "    return 2;\n"
    "  }\n"
    "  return 1;\n"
    "}\n"
    "fn bump(x:int, flag:bool) -> bool {\n"
    "  let y = x * 3;\n"
    "  if (flag) {\n"
    "    y = y - 7;\n"
    "  }\n"
    "  while (y > 100) {\n"
    "    y = y / 2;\n"
    "  }\n"
    "  return y == 42;\n"
    "}\n";

const char* kOneBranch =
    "fn f(x:int) -> int {\n"
    "  if (x > 0) {\n"
    "    return 1;\n"
    "  }\n"
    "  return 0;\n"
    "}\n";

SearchBudget small_budget(std::uint64_t seed, std::int64_t evals = 3000) {
  SearchBudget b;
  b.seed = seed;
  b.max_evaluations = evals;
  b.population = 20;
  return b;
}

bool archive_entry_sound(const Subject& s, const Archive::Entry& e) {
  std::vector<int> mutants;
  if (e.goal.kind == GoalKind::Mutant) mutants.push_back(e.goal.mutant);
  const auto r = run_test(s, e.test, mutants);
  if (e.goal.kind == GoalKind::Exception) {
    for (const auto& x : r.trace.exceptions) {
      if (x.method == e.goal.method && x.tag == e.goal.tag) return true;
    }
    return false;
  }
  return FitnessEvaluator(s).covered(e.goal, r);
}

}  // namespace

TEST(Rng, BoundsAndDeterminism) {
  Rng a(7), b(7);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.range(-3, 5);
    EXPECT_EQ(x, b.range(-3, 5));
    EXPECT_GE(x, -3);
    EXPECT_LE(x, 5);
    const double u = a.unit();
    EXPECT_EQ(u, b.unit());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  Rng c(1);
  const auto full = c.range(INT64_MIN, INT64_MAX);
  (void)full;
}

TEST(Budget, Validate) {
  SearchBudget b;
  b.max_evaluations = 10;
  b.population = 50;
  EXPECT_THROW(b.validate(), BudgetTooSmall);
  b.max_evaluations = 50;
  EXPECT_NO_THROW(b.validate());
  auto s = Subject::from_source(kOneBranch);
  auto goals = extract_goals(s, Criterion::BC);
  b.max_evaluations = 10;
  EXPECT_THROW(run_ws(s, goals, b), BudgetTooSmall);
  EXPECT_THROW(run_mosa(s, goals, b), BudgetTooSmall);
}

TEST(Dominance, Definition) {
  EXPECT_TRUE(dominates({0, 1}, {1, 1}));
  EXPECT_FALSE(dominates({1, 1}, {1, 1}));
  EXPECT_FALSE(dominates({0, 2}, {1, 1}));
}

TEST(Dominance, SortMatchesBruteForce) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 50)(rng);
    const int m = std::uniform_int_distribution<int>(1, 20)(rng);
    std::vector<std::vector<double>> obj(n, std::vector<double>(m));
    for (auto& row : obj) {
      for (auto& v : row) v = std::uniform_int_distribution<int>(0, 4)(rng) / 4.0;
    }
    const auto fronts = non_dominated_sort(obj);
    // Brute force: rank = length of the longest chain of dominators.
    std::vector<int> rank(n, -1);
    std::vector<bool> removed(n, false);
    int level = 0, left = n;
    while (left > 0) {
      std::vector<int> cur;
      for (int p = 0; p < n; ++p) {
        if (removed[p]) continue;
        bool dominated = false;
        for (int q = 0; q < n && !dominated; ++q) dominated = !removed[q] && dominates(obj[q], obj[p]);
        if (!dominated) cur.push_back(p);
      }
      for (int p : cur) {
        rank[p] = level;
        removed[p] = true;
        --left;
      }
      ++level;
    }
    ASSERT_EQ(static_cast<int>(fronts.size()), level);
    for (std::size_t f = 0; f < fronts.size(); ++f) {
      for (int p : fronts[f]) EXPECT_EQ(rank[p], static_cast<int>(f));
    }
  }
}

TEST(Crowding, Boundaries) {
  std::vector<std::vector<double>> obj = {{0, 3}, {1, 2}, {2, 1}, {3, 0}};
  const auto d = crowding_distance(obj, {0, 1, 2, 3});
  EXPECT_TRUE(std::isinf(d[0]));
  EXPECT_TRUE(std::isinf(d[3]));
  EXPECT_DOUBLE_EQ(d[1], 2.0 / 3 + 2.0 / 3);
}

TEST(Operators, CrossoverAlphaZeroSwaps) {
  auto s = Subject::from_source(kTriangle);
  TestFactory f(s, 40);
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    auto a = f.random_test(rng), b = f.random_test(rng);
    auto [c1, c2] = f.crossover(a, b, 0.0, rng);
    EXPECT_EQ(c1, b);
    EXPECT_EQ(c2, a);
    auto [d1, d2] = f.crossover(a, b, 1.0, rng);
    EXPECT_EQ(d1, a);
    EXPECT_EQ(d2, b);
  }
}

TEST(Operators, AlwaysWellTyped) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto s = Subject::from_source(fixtures::RandomProgram(seed).generate(3));
    TestFactory f(s, 12);
    lang::Interpreter interp(s.prog());
    Rng rng(seed);
    std::vector<TestCase> pool;
    for (int i = 0; i < 10; ++i) pool.push_back(f.random_test(rng));
    for (int step = 0; step < 200; ++step) {
      auto& a = pool[rng.below(pool.size())];
      auto& b = pool[rng.below(pool.size())];
      if (rng.chance(0.5)) {
        auto [x, y] = f.crossover(a, b, rng);
        a = std::move(x);
        b = std::move(y);
      } else {
        a = f.mutate(a, rng);
      }
      for (const auto& t : {a, b}) {
        ASSERT_NO_THROW(interp.validate(t));
        EXPECT_GE(t.size(), 1u);
        EXPECT_LE(t.size(), 12u);
      }
    }
  }
}

TEST(Operators, RepairFixesDanglingSlots) {
  auto s = Subject::from_source(kTriangle);
  TestFactory f(s, 40);
  Rng rng(1);
  TestCase t;
  t.calls.push_back({1, {Argument::bound(3), Argument::literal(1)}});  // bump(int, bool): slot 3 dangles
  t.calls.push_back({0, {Argument::bound(0), Argument::literal(1), Argument::literal(1)}});  // bool result as int
  f.repair(t, rng);
  lang::Interpreter interp(s.prog());
  EXPECT_NO_THROW(interp.validate(t));
}

TEST(Operators, NoCallableMethods) {
  lang::Program empty;
  empty.name = "empty";
  Subject s(std::move(empty));
  Rng rng(0);
  EXPECT_THROW(random_test(s, rng, 5), NoCallableMethods);
}

TEST(Search, Determinism) {
  auto s = Subject::from_source(kTriangle);
  SubsumptionCache cache;
  for (auto algo : {Algorithm::WS, Algorithm::MOSA, Algorithm::DynaMOSA}) {
    auto strat = StrategyConfig::parse("smart");
    auto a = run_search(s, strat, algo, small_budget(11), cache);
    auto b = run_search(s, strat, algo, small_budget(11), cache);
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
    EXPECT_EQ(a.suite.tests, b.suite.tests);
  }
}

TEST(Search, BudgetAndArchiveSoundness) {
  auto s = Subject::from_source(kTriangle);
  SubsumptionCache cache;
  for (auto algo : {Algorithm::WS, Algorithm::MOSA, Algorithm::DynaMOSA}) {
    for (const char* strat : {"smart", "original"}) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto budget = small_budget(seed);
        auto r = run_search(s, StrategyConfig::parse(strat), algo, budget, cache);
        EXPECT_LE(r.evaluations_used, budget.max_evaluations + budget.population);
        for (const auto& [id, e] : r.archive.entries()) {
          EXPECT_TRUE(archive_entry_sound(s, e)) << id;
          EXPECT_LE(e.at, r.evaluations_used);
        }
        for (const auto& t : r.archive.suite().tests) {
          EXPECT_NE(std::find(r.suite.tests.begin(), r.suite.tests.end(), t), r.suite.tests.end());
        }
      }
    }
  }
}

TEST(Search, WsTrajectoryNonIncreasing) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto s = Subject::from_source(fixtures::RandomProgram(seed + 100).generate(3));
    SubsumptionCache cache;
    auto r = run_search(s, StrategyConfig::parse("original"), Algorithm::WS, small_budget(seed), cache);
    ASSERT_FALSE(r.best_fitness.empty());
    for (std::size_t i = 1; i < r.best_fitness.size(); ++i) EXPECT_LE(r.best_fitness[i], r.best_fitness[i - 1]);
  }
}

TEST(Search, WsStopsWhenInitialPopulationCovers) {
  auto s = Subject::from_source("fn f(x:int) -> int {\n  return x;\n}\n");
  auto goals = extract_goals(s, Criterion::LC);
  auto r = run_ws(s, goals, small_budget(0));
  EXPECT_EQ(r.best_fitness.back(), 0.0);
  EXPECT_LE(r.evaluations_used, 20 * 10);
  EXPECT_EQ(r.coverage.lc, 1.0);
}

TEST(Search, TrivialBranchAllSeeds) {
  auto s = Subject::from_source(kOneBranch);
  auto goals = extract_goals(s, Criterion::BC);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SearchBudget b;
    b.seed = seed;
    EXPECT_EQ(run_ws(s, goals, b).coverage.bc, 1.0);
    auto m = run_mosa(s, goals, b);
    EXPECT_TRUE(m.archive.covers("bc:s0:T") && m.archive.covers("bc:s0:F"));
  }
}

TEST(Search, ObjectiveErrors) {
  auto s = Subject::from_source(kTriangle);
  GoalSet empty;
  EXPECT_THROW(run_mosa(s, empty, small_budget(0)), EmptyObjectives);
  EXPECT_THROW(run_dynamosa(s, extract_goals(s, Criterion::LC), small_budget(0)), MissingBranchGoals);
}

TEST(Search, DynaMosaActivatesAfterGuards) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = Subject::from_source(fixtures::RandomProgram(seed + 200).generate(3));
    SubsumptionCache cache;
    auto r = run_search(s, StrategyConfig::parse("original"), Algorithm::DynaMOSA, small_budget(seed, 2000), cache);
    const auto goals = build_goalset(s, StrategyConfig::parse("original"), Algorithm::DynaMOSA, cache);
    for (const auto& act : r.activations) {
      const auto& g = goals[*goals.find(act.goal)];
      int block = -1;
      if (g.kind == GoalKind::Branch) block = s.cfm.branch_sites[g.site].block;
      if (g.kind == GoalKind::Line || g.kind == GoalKind::Mutant) block = s.cfm.block_of_line(g.line);
      if (block < 0) continue;
      for (const auto& guard : s.cfm.guards[block]) {
        const auto id = CoverageGoal::branch(guard.site, guard.outcome, false).id;
        ASSERT_TRUE(r.archive.covers(id)) << act.goal;
        EXPECT_LE(r.archive.entries().at(id).at, act.at) << act.goal;
      }
    }
  }
}

TEST(Coverage, EmptyUniverseIsFull) {
  auto s = Subject::from_source("fn f(x:int) -> int {\n  return x;\n}\n");
  TestSuite suite;
  suite.tests.push_back({{{0, {Argument::literal(1)}}}});
  const auto c = measure_coverage(suite, s);
  EXPECT_EQ(c.bc, 1.0);
  EXPECT_EQ(c.dbc, 1.0);
  EXPECT_EQ(c.lc, 1.0);
  EXPECT_EQ(c.tmc, 1.0);
  EXPECT_EQ(c.ec, 0);
  EXPECT_NEAR(c.oc, 1.0 / 3, 1e-12);
}
