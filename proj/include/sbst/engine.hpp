#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbst/fitness.hpp"
#include "sbst/goals.hpp"
#include "sbst/selection.hpp"
#include "sbst/test_case.hpp"

namespace sbst {

// mt19937_64 with hand-written sampling so sequences match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }
  std::uint64_t below(std::uint64_t n);                 // uniform in [0, n), n > 0
  std::int64_t range(std::int64_t lo, std::int64_t hi);  // uniform in [lo, hi]
  double unit();                                        // uniform in [0, 1)
  bool chance(double p) { return unit() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(below(v.size()))];
  }

 private:
  std::mt19937_64 gen_;
};

struct SearchBudget {
  std::int64_t max_evaluations = 20'000;  // clean and mutant executions alike
  std::uint64_t seed = 0;
  int population = 50;
  double crossover_rate = 0.75;
  int max_test_length = 40;
  int max_suite_size = 50;
  int initial_suite_size = 10;  // WS: initial suites hold 1..this many tests
  std::int64_t fuel = lang::kDefaultFuel;

  void validate() const;  // BudgetTooSmall, InvalidConfig
};

// Random tests and the genetic operators over them.
class TestFactory {
 public:
  TestFactory(const Subject& subject, int max_length);

  // Throws NoCallableMethods when the subject has no public methods.
  TestCase random_test(Rng& rng) const;
  CallStatement random_call(Rng& rng, const TestCase& prefix, std::size_t position) const;
  std::int64_t random_int(Rng& rng) const;

  // One of delete / change / insert; never returns an empty test.
  TestCase mutate(const TestCase& test, Rng& rng) const;
  // Single point at the same relative position alpha in both parents; alpha = 0 swaps whole parents.
  std::pair<TestCase, TestCase> crossover(const TestCase& a, const TestCase& b, double alpha, Rng& rng) const;
  std::pair<TestCase, TestCase> crossover(const TestCase& a, const TestCase& b, Rng& rng) const;
  // Re-binds or replaces dangling or ill-typed slot references and enforces 1..max_length.
  void repair(TestCase& test, Rng& rng) const;

  const std::vector<std::int64_t>& constant_pool() const { return pool_; }
  int max_length() const { return max_length_; }

 private:
  void change_argument(TestCase& t, std::size_t i, Rng& rng) const;

  const Subject& subject_;
  int max_length_;
  std::vector<std::int64_t> pool_;
};

TestCase random_test(const Subject& subject, Rng& rng, int max_length);

// Per-criterion coverage of a suite against the full goal universes.
struct CoverageRecord {
  double bc = 0, dbc = 0, lc = 0, wm = 0, tmc = 0, ntmc = 0, oc = 0;
  int ec = 0;  // distinct (method, tag) pairs triggered

  double get(Criterion c) const;
  nlohmann::json to_json() const;
};

// Re-executes the suite once (all mutants, unbudgeted). Empty universes score 1.
CoverageRecord measure_coverage(const TestSuite& suite, const Subject& subject,
                                std::int64_t fuel = lang::kDefaultFuel);

// Goal id -> shortest covering test seen; dynamic EC goals are registered here too.
class Archive {
 public:
  struct Entry {
    CoverageGoal goal;
    TestCase test;
    std::int64_t at = 0;  // evaluations used when first covered
  };

  // Returns true when the goal is newly covered.
  bool update(const CoverageGoal& goal, const TestCase& test, std::int64_t at);
  bool covers(const std::string& id) const { return entries_.count(id) != 0; }
  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::vector<CoverageGoal> exception_goals() const;
  TestSuite suite() const;  // distinct archived tests in goal-id order

 private:
  std::map<std::string, Entry> entries_;
};

struct Activation {
  std::string goal;
  std::int64_t at = 0;  // evaluations used when activated
};

struct RunOptions {
  bool track_exceptions = true;  // discover EC goals while running
  FitnessOptions fitness;
};

struct RunResult {
  std::string subject;
  std::string strategy;
  Algorithm algorithm = Algorithm::WS;
  std::uint64_t seed = 0;
  std::int64_t evaluations_used = 0;
  std::int64_t tests_executed = 0;  // clean runs; the rest of evaluations_used are mutant runs
  CoverageRecord coverage;
  TestSuite suite;
  Archive archive;
  std::vector<double> best_fitness;       // WS: best suite fitness after each step
  std::vector<Activation> activations;    // DynaMOSA
  std::size_t goal_count = 0;

  // With a program, the suite's calls are included under "suite".
  nlohmann::json to_json(const lang::Program* program = nullptr) const;
};

nlohmann::json to_json(const TestCase& test, const lang::Program& program);

RunResult run_ws(const Subject& subject, const GoalSet& goals, const SearchBudget& budget, RunOptions options = {});
RunResult run_mosa(const Subject& subject, const GoalSet& goals, const SearchBudget& budget, RunOptions options = {});
RunResult run_dynamosa(const Subject& subject, const GoalSet& goals, const SearchBudget& budget,
                       RunOptions options = {});

// Builds the goal set for the strategy and dispatches to the algorithm.
RunResult run_search(const Subject& subject, const StrategyConfig& strategy, Algorithm algorithm,
                     const SearchBudget& budget, SubsumptionCache& tables);

// Fast non-dominated sorting (minimization); returns fronts of indices.
std::vector<std::vector<int>> non_dominated_sort(const std::vector<std::vector<double>>& objectives);
bool dominates(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> crowding_distance(const std::vector<std::vector<double>>& objectives, const std::vector<int>& front);

}  // namespace sbst
