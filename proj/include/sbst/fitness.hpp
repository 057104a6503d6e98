#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbst/goals.hpp"
#include "sbst/interpreter.hpp"
#include "sbst/test_case.hpp"

namespace sbst {

// nu(x) = x / (x + 1). Throws NegativeInput.
double normalize(double x);

// A clean trace plus the raw infection distances of the mutants that were
// executed for it (only reached mutants are ever executed).
struct TestResult {
  lang::ExecutionTrace trace;
  std::unordered_map<int, double> infection;  // mutant id -> raw infection distance
};

// Runs `test` cleanly, then once per listed mutant whose line the clean run hit.
// `mutant_runs`, when given, receives the number of mutant executions.
TestResult run_test(const Subject& subject, const TestCase& test, const std::vector<int>& mutants,
                    std::int64_t fuel = lang::kDefaultFuel, std::int64_t* mutant_runs = nullptr);

struct FitnessOptions {
  bool def_based_lines = false;  // 0/1 line fitness without branch augmentation
};

// Per-goal fitness over traces. Branch, line and mutant goals carry the
// approach level; the other kinds are flat.
class FitnessEvaluator {
 public:
  explicit FitnessEvaluator(const Subject& subject, FitnessOptions options = {});

  double branch(int site, bool outcome, bool direct, const lang::ExecutionTrace& trace) const;
  double line(int line, const lang::ExecutionTrace& trace) const;
  double mutant(int mutant, const TestResult& result) const;
  double top_method(int method, const lang::ExecutionTrace& trace) const;
  double no_exc_top_method(int method, const lang::ExecutionTrace& trace) const;
  double exception(int method, const std::string& tag, const lang::ExecutionTrace& trace) const;
  double output(int method, OutputPartition partition, const lang::ExecutionTrace& trace) const;

  double goal(const CoverageGoal& g, const TestResult& result) const;
  // Coverage predicate of the goal, independent of the fitness formulas.
  bool covered(const CoverageGoal& g, const TestResult& result) const;

  const Subject& subject() const { return subject_; }
  const FitnessOptions& options() const { return options_; }

 private:
  // Distance from the trace to entering block `b`, measured through its guards.
  double approach(int block, bool direct, const lang::ExecutionTrace& trace) const;

  const Subject& subject_;
  FitnessOptions options_;
};

// Fitness of every goal for one test, in goal-set order.
std::vector<double> evaluate_vector(const FitnessEvaluator& eval, const GoalSet& goals, const TestResult& result);

// Whole-suite fitness: per goal the minimum over the suite's tests, summed.
// When line goals are present their share is nu(#uncovered lines) plus f_BC
// over every branch of the program (def-based mode drops the f_BC term).
double ws_suite_fitness(const FitnessEvaluator& eval, const GoalSet& goals, const std::vector<TestResult>& results);

nlohmann::json fitness_dump(const GoalSet& goals, const std::vector<double>& values);

}  // namespace sbst
