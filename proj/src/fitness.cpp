#include "sbst/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sbst/errors.hpp"

namespace sbst {

using lang::ExecutionTrace;

double normalize(double x) {
  if (!(x >= 0)) throw NegativeInput("normalize: negative input " + std::to_string(x));
  if (std::isinf(x)) return 1.0;
  return x / (x + 1.0);
}

TestResult run_test(const Subject& subject, const TestCase& test, const std::vector<int>& mutants,
                    std::int64_t fuel, std::int64_t* mutant_runs) {
  lang::Interpreter interp(subject.prog());
  TestResult r;
  r.trace = interp.execute(test, nullptr, fuel);
  std::int64_t runs = 0;
  for (int id : mutants) {
    const Mutant& m = subject.mutants.at(static_cast<std::size_t>(id));
    if (!r.trace.line_hit(m.line)) continue;
    auto t = interp.execute(test, &m.mutation, fuel);
    ++runs;
    r.infection[id] = t.mutant_infection.value_or(1.0);
  }
  if (mutant_runs) *mutant_runs = runs;
  return r;
}

FitnessEvaluator::FitnessEvaluator(const Subject& subject, FitnessOptions options)
    : subject_(subject), options_(options) {}

double FitnessEvaluator::approach(int block, bool direct, const ExecutionTrace& trace) const {
  const auto& guards = subject_.cfm.guards[block];
  if (guards.empty()) return 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : guards) best = std::min(best, branch(g.site, g.outcome, direct, trace));
  return best;
}

double FitnessEvaluator::branch(int site, bool outcome, bool direct, const ExecutionTrace& trace) const {
  if (site < 0 || site >= static_cast<int>(subject_.cfm.branch_sites.size())) {
    throw GoalNotInProgram("branch site " + std::to_string(site) + " not in program");
  }
  const auto& bs = subject_.cfm.branch_sites[site];
  if (direct && !trace.entered_directly(bs.method)) {
    // Unreached: every guard plus the method entry itself is outstanding.
    return 1.0 + static_cast<double>(subject_.cfm.depth[bs.block] + 1);
  }
  const auto& stats = (direct ? trace.direct_sites : trace.sites)[site];
  if (stats.executions == 0) return 1.0 + approach(bs.block, direct, trace);
  const double d = outcome ? stats.min_true : stats.min_false;
  if (d == 0) return 0.0;
  if (stats.executions >= 2) return normalize(d);
  return 1.0;
}

double FitnessEvaluator::line(int line, const ExecutionTrace& trace) const {
  const int b = subject_.cfm.block_of_line(line);
  if (b < 0) throw GoalNotInProgram("line " + std::to_string(line) + " has no statement");
  if (trace.line_hit(line)) return 0.0;
  if (options_.def_based_lines) return 1.0;
  return 1.0 + approach(b, false, trace);
}

double FitnessEvaluator::mutant(int mutant, const TestResult& result) const {
  if (mutant < 0 || mutant >= static_cast<int>(subject_.mutants.size())) {
    throw MutantUnknown("mutant " + std::to_string(mutant) + " not in program");
  }
  const Mutant& m = subject_.mutants[mutant];
  if (!result.trace.line_hit(m.line)) {
    return 1.0 + line(m.line, result.trace);
  }
  auto it = result.infection.find(mutant);
  if (it == result.infection.end()) throw MutantUnknown("mutant " + m.key + " reached but not executed");
  return normalize(it->second);
}

double FitnessEvaluator::top_method(int method, const ExecutionTrace& trace) const {
  return trace.entered_directly(method) ? 0.0 : 1.0;
}

double FitnessEvaluator::no_exc_top_method(int method, const ExecutionTrace& trace) const {
  return trace.completed_directly(method) ? 0.0 : 1.0;
}

double FitnessEvaluator::exception(int method, const std::string& tag, const ExecutionTrace& trace) const {
  for (const auto& e : trace.exceptions) {
    if (e.method == method && e.tag == tag) return 0.0;
  }
  return 1.0;
}

namespace {

// Distance from v to the nearest member of an int partition; 0 inside it.
double partition_distance(OutputPartition p, std::int64_t v) {
  const double x = static_cast<double>(v);
  switch (p) {
    case OutputPartition::Negative: return v < 0 ? 0.0 : x + 1.0;
    case OutputPartition::Zero: return std::fabs(x);
    case OutputPartition::Positive: return v > 0 ? 0.0 : 1.0 - x;
    case OutputPartition::True: return v != 0 ? 0.0 : 1.0;
    case OutputPartition::False: return v == 0 ? 0.0 : 1.0;
  }
  return 1.0;
}

bool is_bool_partition(OutputPartition p) { return p == OutputPartition::True || p == OutputPartition::False; }

}  // namespace

double FitnessEvaluator::output(int method, OutputPartition partition, const ExecutionTrace& trace) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : trace.returns) {
    if (r.method != method) continue;
    const double d = partition_distance(partition, r.value);
    if (d == 0) return 0.0;
    best = std::min(best, d);
  }
  if (std::isinf(best) || is_bool_partition(partition)) return 1.0;
  return 1.0 + normalize(best);
}

double FitnessEvaluator::goal(const CoverageGoal& g, const TestResult& result) const {
  const auto& t = result.trace;
  switch (g.kind) {
    case GoalKind::Branch: return branch(g.site, g.outcome, g.direct, t);
    case GoalKind::Line: return line(g.line, t);
    case GoalKind::Mutant: return mutant(g.mutant, result);
    case GoalKind::TopMethod: return top_method(g.method, t);
    case GoalKind::NoExcTopMethod: return no_exc_top_method(g.method, t);
    case GoalKind::Exception: return exception(g.method, g.tag, t);
    case GoalKind::Output: return output(g.method, g.partition, t);
  }
  return 1.0;
}

bool FitnessEvaluator::covered(const CoverageGoal& g, const TestResult& result) const {
  const auto& t = result.trace;
  switch (g.kind) {
    case GoalKind::Branch: {
      const auto& s = (g.direct ? t.direct_sites : t.sites)[g.site];
      return (g.outcome ? s.min_true : s.min_false) == 0;
    }
    case GoalKind::Line: return t.line_hit(g.line);
    case GoalKind::Mutant: {
      auto it = result.infection.find(g.mutant);
      return t.line_hit(subject_.mutants[g.mutant].line) && it != result.infection.end() && it->second == 0;
    }
    case GoalKind::TopMethod: return t.entered_directly(g.method);
    case GoalKind::NoExcTopMethod: return t.completed_directly(g.method);
    case GoalKind::Exception:
      return std::any_of(t.exceptions.begin(), t.exceptions.end(),
                         [&](const lang::ExceptionEvent& e) { return e.method == g.method && e.tag == g.tag; });
    case GoalKind::Output:
      return std::any_of(t.returns.begin(), t.returns.end(), [&](const lang::ReturnEvent& r) {
        return r.method == g.method && partition_distance(g.partition, r.value) == 0;
      });
  }
  return false;
}

std::vector<double> evaluate_vector(const FitnessEvaluator& eval, const GoalSet& goals, const TestResult& result) {
  std::vector<double> out;
  out.reserve(goals.size());
  for (const auto& g : goals.goals()) out.push_back(eval.goal(g, result));
  return out;
}

double ws_suite_fitness(const FitnessEvaluator& eval, const GoalSet& goals, const std::vector<TestResult>& results) {
  auto best = [&](const CoverageGoal& g) {
    if (results.empty()) return 1.0;
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : results) m = std::min(m, eval.goal(g, r));
    return m;
  };
  double total = 0;
  int uncovered_lines = 0;
  bool has_lines = false;
  for (const auto& g : goals.goals()) {
    if (g.kind == GoalKind::Line) {
      has_lines = true;
      const bool hit = std::any_of(results.begin(), results.end(),
                                   [&](const TestResult& r) { return r.trace.line_hit(g.line); });
      if (!hit) ++uncovered_lines;
      continue;
    }
    total += best(g);
  }
  if (has_lines) {
    total += normalize(uncovered_lines);
    if (!eval.options().def_based_lines) {
      for (const auto& site : eval.subject().cfm.branch_sites) {
        for (bool outcome : {true, false}) total += best(CoverageGoal::branch(site.id, outcome, false));
      }
    }
  }
  return total;
}

nlohmann::json fitness_dump(const GoalSet& goals, const std::vector<double>& values) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < goals.size() && i < values.size(); ++i) out[goals[i].id] = values[i];
  return out;
}

}  // namespace sbst
