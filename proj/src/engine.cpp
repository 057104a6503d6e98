#include "sbst/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <functional>
#include <set>
#include <tuple>

#include "sbst/errors.hpp"

namespace sbst {

using lang::Type;

// ---------------------------------------------------------------------------
// Rng

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % n;
}

std::int64_t Rng::range(std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == std::numeric_limits<std::uint64_t>::max()) return static_cast<std::int64_t>(gen_());
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + below(span + 1));
}

double Rng::unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

void SearchBudget::validate() const {
  if (population < 2) throw InvalidConfig("population must be >= 2");
  if (max_test_length < 1 || max_suite_size < 1 || initial_suite_size < 1) {
    throw InvalidConfig("test length and suite sizes must be >= 1");
  }
  if (crossover_rate < 0 || crossover_rate > 1) throw InvalidConfig("crossover rate must lie in [0, 1]");
  if (fuel < 1) throw InvalidConfig("fuel must be >= 1");
  if (max_evaluations < population) {
    throw BudgetTooSmall("max_evaluations (" + std::to_string(max_evaluations) + ") < population size (" +
                         std::to_string(population) + ")");
  }
}

// ---------------------------------------------------------------------------
// Tests and operators

TestFactory::TestFactory(const Subject& subject, int max_length) : subject_(subject), max_length_(max_length) {
  std::set<std::int64_t> pool;
  for (std::int64_t c : subject.prog().int_constants) {
    pool.insert(c);
    if (c != std::numeric_limits<std::int64_t>::max()) pool.insert(c + 1);
    if (c != std::numeric_limits<std::int64_t>::min()) pool.insert(c - 1);
  }
  pool_.assign(pool.begin(), pool.end());
}

std::int64_t TestFactory::random_int(Rng& rng) const {
  const double r = rng.unit();
  if (r < 0.35 || (r < 0.70 && pool_.empty())) return rng.range(-10, 10);
  if (r < 0.70) return rng.pick(pool_);
  if (r < 0.92) return rng.range(-1000, 1000);
  static const std::vector<std::int64_t> extremes = {std::numeric_limits<std::int64_t>::min(),
                                                     std::numeric_limits<std::int64_t>::max(),
                                                     -2147483648LL,
                                                     2147483647LL,
                                                     -65536,
                                                     65536};
  return rng.pick(extremes);
}

CallStatement TestFactory::random_call(Rng& rng, const TestCase& prefix, std::size_t position) const {
  const auto& methods = subject_.cfm.public_methods;
  if (methods.empty()) throw NoCallableMethods("subject '" + subject_.prog().name + "' has no public methods");
  const auto& m = rng.pick(methods);
  CallStatement c;
  c.method = m.index;
  for (Type t : m.params) {
    std::vector<int> candidates;
    for (std::size_t j = 0; j < position && j < prefix.calls.size(); ++j) {
      if (subject_.prog().methods[prefix.calls[j].method].return_type == t) candidates.push_back(static_cast<int>(j));
    }
    if (!candidates.empty() && rng.chance(0.2)) {
      c.args.push_back(Argument::bound(rng.pick(candidates)));
    } else if (t == Type::Bool) {
      c.args.push_back(Argument::literal(static_cast<std::int64_t>(rng.below(2))));
    } else {
      c.args.push_back(Argument::literal(random_int(rng)));
    }
  }
  return c;
}

TestCase TestFactory::random_test(Rng& rng) const {
  TestCase t;
  const auto n = static_cast<std::size_t>(rng.range(1, max_length_));
  for (std::size_t i = 0; i < n; ++i) t.calls.push_back(random_call(rng, t, i));
  return t;
}

TestCase random_test(const Subject& subject, Rng& rng, int max_length) {
  return TestFactory(subject, max_length).random_test(rng);
}

void TestFactory::change_argument(TestCase& t, std::size_t i, Rng& rng) const {
  auto& call = t.calls[i];
  if (call.args.empty()) {
    call = random_call(rng, t, i);
    return;
  }
  auto& arg = call.args[static_cast<std::size_t>(rng.below(call.args.size()))];
  const std::size_t k = static_cast<std::size_t>(&arg - call.args.data());
  const Type type = subject_.prog().methods[call.method].params[k].type;
  if (type == Type::Bool) {
    arg = Argument::literal(arg.kind == Argument::Kind::Literal ? 1 - (arg.value != 0) : rng.below(2));
    return;
  }
  if (arg.kind == Argument::Kind::Slot || rng.chance(0.1)) {
    // Re-draw: a literal, or a binding to an earlier int result.
    arg = Argument::literal(random_int(rng));
    std::vector<int> candidates;
    for (std::size_t j = 0; j < i; ++j) {
      if (subject_.prog().methods[t.calls[j].method].return_type == Type::Int) candidates.push_back(static_cast<int>(j));
    }
    if (!candidates.empty() && rng.chance(0.3)) arg = Argument::bound(rng.pick(candidates));
    return;
  }
  const std::int64_t v = arg.value;
  auto add = [](std::int64_t a, std::int64_t b) {
    std::int64_t r;
    return __builtin_add_overflow(a, b, &r) ? a : r;
  };
  switch (rng.below(5)) {
    case 0: arg.value = random_int(rng); break;
    case 1: arg.value = add(v, rng.chance(0.5) ? 1 : -1); break;
    case 2: arg.value = add(v, rng.chance(0.5) ? rng.range(2, 20) : -rng.range(2, 20)); break;
    case 3: arg.value = v == std::numeric_limits<std::int64_t>::min() ? v : -v; break;
    default: arg.value = pool_.empty() ? random_int(rng) : rng.pick(pool_); break;
  }
}

TestCase TestFactory::mutate(const TestCase& test, Rng& rng) const {
  TestCase t = test;
  auto op = rng.below(3);
  if (op == 0 && t.calls.size() <= 1) op = 2;
  if (op == 2 && static_cast<int>(t.calls.size()) >= max_length_) op = t.calls.size() > 1 ? 0 : 1;
  if (op == 0) {
    // Delete: each statement with probability 1/size, at least one.
    const double p = 1.0 / static_cast<double>(t.calls.size());
    std::vector<char> drop(t.calls.size(), 0);
    bool any = false;
    for (auto& d : drop) any |= (d = rng.chance(p));
    if (!any) drop[static_cast<std::size_t>(rng.below(drop.size()))] = 1;
    std::vector<int> remap(t.calls.size(), -1);
    TestCase out;
    for (std::size_t i = 0; i < t.calls.size(); ++i) {
      if (drop[i]) continue;
      remap[i] = static_cast<int>(out.calls.size());
      out.calls.push_back(t.calls[i]);
    }
    for (auto& c : out.calls) {
      for (auto& a : c.args) {
        if (a.kind == Argument::Kind::Slot) a.slot = remap[static_cast<std::size_t>(a.slot)];
      }
    }
    t = std::move(out);
  } else if (op == 1) {
    const double p = 1.0 / static_cast<double>(t.calls.size());
    bool any = false;
    for (std::size_t i = 0; i < t.calls.size(); ++i) {
      if (rng.chance(p)) {
        change_argument(t, i, rng);
        any = true;
      }
    }
    if (!any) change_argument(t, static_cast<std::size_t>(rng.below(t.calls.size())), rng);
  } else {
    const auto pos = static_cast<std::size_t>(rng.below(t.calls.size() + 1));
    CallStatement c = random_call(rng, t, pos);
    for (auto& later : t.calls) {
      for (auto& a : later.args) {
        if (a.kind == Argument::Kind::Slot && static_cast<std::size_t>(a.slot) >= pos) ++a.slot;
      }
    }
    t.calls.insert(t.calls.begin() + static_cast<std::ptrdiff_t>(pos), std::move(c));
  }
  repair(t, rng);
  return t;
}

std::pair<TestCase, TestCase> TestFactory::crossover(const TestCase& a, const TestCase& b, double alpha,
                                                     Rng& rng) const {
  const auto cut_a = static_cast<std::size_t>(std::lround(alpha * static_cast<double>(a.calls.size())));
  const auto cut_b = static_cast<std::size_t>(std::lround(alpha * static_cast<double>(b.calls.size())));
  auto splice = [](const TestCase& head, std::size_t h, const TestCase& tail, std::size_t s) {
    TestCase out;
    out.calls.assign(head.calls.begin(), head.calls.begin() + static_cast<std::ptrdiff_t>(h));
    for (std::size_t j = s; j < tail.calls.size(); ++j) {
      CallStatement c = tail.calls[j];
      for (auto& arg : c.args) {
        if (arg.kind != Argument::Kind::Slot) continue;
        // Slots into the discarded head become dangling (-1) and are repaired.
        arg.slot = static_cast<std::size_t>(arg.slot) >= s ? static_cast<int>(h + (arg.slot - s)) : -1;
      }
      out.calls.push_back(std::move(c));
    }
    return out;
  };
  auto c1 = splice(a, cut_a, b, cut_b);
  auto c2 = splice(b, cut_b, a, cut_a);
  repair(c1, rng);
  repair(c2, rng);
  return {std::move(c1), std::move(c2)};
}

std::pair<TestCase, TestCase> TestFactory::crossover(const TestCase& a, const TestCase& b, Rng& rng) const {
  return crossover(a, b, rng.unit(), rng);
}

void TestFactory::repair(TestCase& t, Rng& rng) const {
  const auto& prog = subject_.prog();
  if (static_cast<int>(t.calls.size()) > max_length_) t.calls.resize(static_cast<std::size_t>(max_length_));
  if (t.calls.empty()) t.calls.push_back(random_call(rng, t, 0));
  for (std::size_t i = 0; i < t.calls.size(); ++i) {
    auto& c = t.calls[i];
    const auto& params = prog.methods[c.method].params;
    for (std::size_t k = 0; k < c.args.size(); ++k) {
      auto& a = c.args[k];
      if (a.kind != Argument::Kind::Slot) continue;
      const bool ok = a.slot >= 0 && static_cast<std::size_t>(a.slot) < i &&
                      prog.methods[t.calls[static_cast<std::size_t>(a.slot)].method].return_type == params[k].type;
      if (ok) continue;
      std::vector<int> candidates;
      for (std::size_t j = 0; j < i; ++j) {
        if (prog.methods[t.calls[j].method].return_type == params[k].type) candidates.push_back(static_cast<int>(j));
      }
      if (!candidates.empty()) {
        a = Argument::bound(rng.pick(candidates));
      } else {
        a = Argument::literal(params[k].type == Type::Bool ? static_cast<std::int64_t>(rng.below(2)) : random_int(rng));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Coverage

double CoverageRecord::get(Criterion c) const {
  switch (c) {
    case Criterion::BC: return bc;
    case Criterion::DBC: return dbc;
    case Criterion::LC: return lc;
    case Criterion::WM: return wm;
    case Criterion::TMC: return tmc;
    case Criterion::NTMC: return ntmc;
    case Criterion::EC: return ec;
    case Criterion::OC: return oc;
  }
  return 0;
}

nlohmann::json CoverageRecord::to_json() const {
  return {{"bc", bc}, {"dbc", dbc}, {"lc", lc}, {"wm", wm}, {"tmc", tmc}, {"ntmc", ntmc}, {"oc", oc}, {"ec", ec}};
}

CoverageRecord measure_coverage(const TestSuite& suite, const Subject& subject, std::int64_t fuel) {
  FitnessEvaluator eval(subject);
  std::map<Criterion, GoalSet> universes;
  for (Criterion c : kAllCriteria) {
    if (c != Criterion::EC && c != Criterion::WM) universes[c] = extract_goals(subject, c);
  }
  std::map<Criterion, std::vector<char>> hit;
  for (auto& [c, g] : universes) hit[c].assign(g.size(), 0);
  std::vector<char> killed(subject.mutants.size(), 0);
  std::set<std::pair<int, std::string>> exceptions;

  lang::Interpreter interp(subject.prog());
  for (const auto& test : suite.tests) {
    TestResult r;
    r.trace = interp.execute(test, nullptr, fuel);
    for (auto& [c, g] : universes) {
      auto& h = hit[c];
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!h[i] && eval.covered(g[i], r)) h[i] = 1;
      }
    }
    for (const auto& m : subject.mutants) {
      if (killed[m.id] || !r.trace.line_hit(m.line)) continue;
      auto t = interp.execute(test, &m.mutation, fuel);
      if (t.mutant_infection && *t.mutant_infection == 0) killed[m.id] = 1;
    }
    for (const auto& e : r.trace.exceptions) exceptions.insert({e.method, e.tag});
  }
  auto ratio = [](const std::vector<char>& v) {
    if (v.empty()) return 1.0;
    return static_cast<double>(std::count(v.begin(), v.end(), 1)) / static_cast<double>(v.size());
  };
  CoverageRecord rec;
  rec.bc = ratio(hit[Criterion::BC]);
  rec.dbc = ratio(hit[Criterion::DBC]);
  rec.lc = ratio(hit[Criterion::LC]);
  rec.tmc = ratio(hit[Criterion::TMC]);
  rec.ntmc = ratio(hit[Criterion::NTMC]);
  rec.oc = ratio(hit[Criterion::OC]);
  rec.wm = ratio(killed);
  rec.ec = static_cast<int>(exceptions.size());
  return rec;
}

// ---------------------------------------------------------------------------
// Archive

bool Archive::update(const CoverageGoal& goal, const TestCase& test, std::int64_t at) {
  auto it = entries_.find(goal.id);
  if (it == entries_.end()) {
    entries_.emplace(goal.id, Entry{goal, test, at});
    return true;
  }
  if (test.calls.size() < it->second.test.calls.size()) it->second.test = test;
  return false;
}

std::vector<CoverageGoal> Archive::exception_goals() const {
  std::vector<CoverageGoal> out;
  for (const auto& [id, e] : entries_) {
    if (e.goal.kind == GoalKind::Exception) out.push_back(e.goal);
  }
  return out;
}

TestSuite Archive::suite() const {
  TestSuite s;
  for (const auto& [id, e] : entries_) {
    if (std::find(s.tests.begin(), s.tests.end(), e.test) == s.tests.end()) s.tests.push_back(e.test);
  }
  return s;
}

nlohmann::json to_json(const TestCase& test, const lang::Program& program) {
  nlohmann::json calls = nlohmann::json::array();
  for (const auto& c : test.calls) {
    const auto& m = program.methods[c.method];
    nlohmann::json args = nlohmann::json::array();
    for (std::size_t k = 0; k < c.args.size(); ++k) {
      const auto& a = c.args[k];
      if (a.kind == Argument::Kind::Slot) {
        args.push_back("$" + std::to_string(a.slot));
      } else if (m.params[k].type == Type::Bool) {
        args.push_back(a.value != 0);
      } else {
        args.push_back(a.value);
      }
    }
    calls.push_back({{"call", m.name}, {"args", args}});
  }
  return calls;
}

nlohmann::json RunResult::to_json(const lang::Program* program) const {
  nlohmann::json j = {{"subject", subject},
                      {"strategy", strategy},
                      {"algorithm", sbst::to_string(algorithm)},
                      {"seed", seed},
                      {"evaluations_used", evaluations_used},
                      {"tests_executed", tests_executed},
                      {"coverage", coverage.to_json()},
                      {"suite_size", suite.tests.size()},
                      {"archived_goals", archive.size()},
                      {"goal_count", goal_count}};
  if (program) {
    nlohmann::json tests = nlohmann::json::array();
    for (const auto& t : suite.tests) tests.push_back(sbst::to_json(t, *program));
    j["suite"] = tests;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Search machinery shared by the three algorithms

namespace {

constexpr double kUnset = -1.0;

struct Individual {
  TestCase test;
  TestResult result;
  std::vector<double> row;  // per goal; kUnset until computed
  std::vector<double> aux;  // WS: every branch of the program, for the line aggregate
  int rank = 0;
  double crowding = 0;
  std::size_t id = 0;  // creation order, the final tie-break
};
using Ind = std::shared_ptr<Individual>;

class Search {
 public:
  Search(const Subject& subject, const GoalSet& goals, const SearchBudget& budget, const RunOptions& options)
      : subject_(subject),
        goals_(goals),
        budget_(budget),
        options_(options),
        eval_(subject, options.fitness),
        interp_(subject.prog()),
        factory_(subject, budget.max_test_length),
        rng_(budget.seed),
        covered_(goals.size(), 0),
        active_(goals.size(), 1) {
    budget.validate();
    if (subject.cfm.public_methods.empty()) throw NoCallableMethods("subject has no public methods");
    for (const auto& site : subject.cfm.branch_sites) {
      for (bool o : {true, false}) aux_goals_.push_back(CoverageGoal::branch(site.id, o, false));
    }
  }

  bool exhausted() const { return used_ >= budget_.max_evaluations; }
  bool all_covered() const { return uncovered_ == 0; }
  std::int64_t used() const { return used_; }
  Rng& rng() { return rng_; }
  const TestFactory& factory() const { return factory_; }
  const GoalSet& goals() const { return goals_; }
  Archive& archive() { return archive_; }
  bool covered(std::size_t g) const { return covered_[g] != 0; }
  bool active(std::size_t g) const { return active_[g] != 0; }
  void set_active(std::size_t g, bool on) { active_[g] = on; }
  std::size_t version() const { return version_; }
  void start() {
    uncovered_ = static_cast<std::size_t>(std::count(covered_.begin(), covered_.end(), 0));
  }

  // Clean run plus the mutants of active, uncovered mutant goals the run reaches.
  Ind evaluate(TestCase test, bool with_aux = false) {
    auto ind = std::make_shared<Individual>();
    ind->id = next_id_++;
    ind->test = std::move(test);
    ind->result.trace = interp_.execute(ind->test, nullptr, budget_.fuel);
    ++used_;
    ++tests_;
    ind->row.assign(goals_.size(), kUnset);
    for (std::size_t g = 0; g < goals_.size(); ++g) {
      if (goals_[g].kind == GoalKind::Mutant && (!active_[g] || covered_[g])) continue;
      value(*ind, g);
    }
    if (with_aux) {
      ind->aux.reserve(aux_goals_.size());
      for (const auto& g : aux_goals_) ind->aux.push_back(eval_.goal(g, ind->result));
    }
    if (options_.track_exceptions) {
      for (const auto& e : ind->result.trace.exceptions) {
        if (archive_.update(CoverageGoal::exception(subject_.prog(), e.method, e.tag), ind->test, used_)) ++version_;
      }
    }
    return ind;
  }

  // Fitness of goal g for the individual, computed on first use.
  double value(Individual& ind, std::size_t g) {
    double& slot = ind.row[g];
    if (slot != kUnset) return slot;
    const auto& goal = goals_[g];
    if (goal.kind == GoalKind::Mutant && ind.result.trace.line_hit(goal.line) &&
        !ind.result.infection.count(goal.mutant)) {
      double d = 1.0;  // beyond the hard cap the mutant stays unexecuted
      if (used_ < budget_.max_evaluations + budget_.population) {
        auto t = interp_.execute(ind.test, &subject_.mutants[goal.mutant].mutation, budget_.fuel);
        ++used_;
        d = t.mutant_infection.value_or(1.0);
      }
      ind.result.infection[goal.mutant] = d;
    }
    slot = eval_.goal(goal, ind.result);
    if (slot == 0) cover(g, ind.test);
    return slot;
  }

  const std::vector<CoverageGoal>& aux_goals() const { return aux_goals_; }

  // Hook run after a goal is archived (DynaMOSA activation).
  std::function<void(std::size_t)> on_cover;

  RunResult finish(Algorithm algo, TestSuite suite) {
    RunResult r;
    r.subject = subject_.prog().name;
    r.algorithm = algo;
    r.seed = budget_.seed;
    r.evaluations_used = used_;
    r.tests_executed = tests_;
    for (const auto& t : archive_.suite().tests) {
      if (std::find(suite.tests.begin(), suite.tests.end(), t) == suite.tests.end()) suite.tests.push_back(t);
    }
    r.suite = std::move(suite);
    r.archive = archive_;
    r.goal_count = goals_.size();
    r.coverage = measure_coverage(r.suite, subject_, budget_.fuel);
    return r;
  }

 private:
  void cover(std::size_t g, const TestCase& test) {
    if (archive_.update(goals_[g], test, used_)) ++version_;
    if (!covered_[g]) {
      covered_[g] = 1;
      if (uncovered_ > 0) --uncovered_;
      if (on_cover) on_cover(g);
    }
  }

  const Subject& subject_;
  const GoalSet& goals_;
  SearchBudget budget_;
  RunOptions options_;
  FitnessEvaluator eval_;
  lang::Interpreter interp_;
  TestFactory factory_;
  Rng rng_;
  Archive archive_;
  std::vector<char> covered_;
  std::vector<char> active_;
  std::vector<CoverageGoal> aux_goals_;
  std::size_t uncovered_ = 0;
  std::size_t version_ = 0;
  std::size_t next_id_ = 0;
  std::int64_t used_ = 0;
  std::int64_t tests_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Whole Suite

namespace {

struct Suite {
  std::vector<Ind> tests;
  double fitness = 0;
  std::size_t length = 0;
  std::size_t version = static_cast<std::size_t>(-1);
  std::size_t id = 0;
};

bool better(const Suite& a, const Suite& b) {
  if (a.fitness != b.fitness) return a.fitness < b.fitness;
  if (a.length != b.length) return a.length < b.length;
  return a.id < b.id;
}

}  // namespace

RunResult run_ws(const Subject& subject, const GoalSet& goals, const SearchBudget& budget, RunOptions options) {
  Search s(subject, goals, budget, options);
  s.start();
  const bool has_lines = goals.count(GoalKind::Line) > 0;
  std::size_t next_suite = 0;

  // Fitness over goals not yet archived; archived ones are already in the result.
  auto score = [&](Suite& su) {
    if (su.version == s.version()) return;
    double total = 0;
    int lines_missing = 0;
    for (std::size_t g = 0; g < goals.size(); ++g) {
      if (s.covered(g)) continue;
      if (goals[g].kind == GoalKind::Line) {
        ++lines_missing;  // uncovered by every test, or it would be archived
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      for (auto& t : su.tests) best = std::min(best, s.value(*t, g));
      total += su.tests.empty() ? 1.0 : best;
    }
    if (has_lines) {
      total += normalize(lines_missing);
      if (!options.fitness.def_based_lines) {
        for (std::size_t a = 0; a < s.aux_goals().size(); ++a) {
          double best = std::numeric_limits<double>::infinity();
          for (auto& t : su.tests) best = std::min(best, t->aux[a]);
          total += su.tests.empty() ? 1.0 : best;
        }
      }
    }
    su.fitness = total;
    su.length = 0;
    for (auto& t : su.tests) su.length += t->test.calls.size();
    su.version = s.version();
  };
  auto new_test = [&](TestCase t) { return s.evaluate(std::move(t), has_lines); };

  std::vector<Suite> pop;
  for (int i = 0; i < budget.population && !s.exhausted(); ++i) {
    Suite su;
    su.id = next_suite++;
    const auto n = s.rng().range(1, std::min(budget.initial_suite_size, budget.max_suite_size));
    for (std::int64_t k = 0; k < n && !s.exhausted(); ++k) su.tests.push_back(new_test(s.factory().random_test(s.rng())));
    if (!su.tests.empty()) pop.push_back(std::move(su));
  }
  if (pop.empty()) throw BudgetTooSmall("budget exhausted before the first suite was built");

  std::vector<double> trajectory;
  auto best_of = [&]() {
    for (auto& su : pop) score(su);
    return *std::min_element(pop.begin(), pop.end(), better);
  };
  trajectory.push_back(best_of().fitness);

  auto tournament = [&]() -> const Suite& {
    const Suite& a = pop[static_cast<std::size_t>(s.rng().below(pop.size()))];
    const Suite& b = pop[static_cast<std::size_t>(s.rng().below(pop.size()))];
    return better(a, b) ? a : b;
  };
  auto mutate_suite = [&](Suite& su) {
    const double p = 1.0 / static_cast<double>(std::max<std::size_t>(1, su.tests.size()));
    for (auto& t : su.tests) {
      if (s.exhausted()) return;
      if (s.rng().chance(p)) t = new_test(s.factory().mutate(t->test, s.rng()));
    }
    while (static_cast<int>(su.tests.size()) < budget.max_suite_size && s.rng().chance(0.1) && !s.exhausted()) {
      su.tests.push_back(new_test(s.factory().random_test(s.rng())));
    }
  };

  while (!s.exhausted() && !s.all_covered()) {
    const Suite& pa = tournament();
    const Suite& pb = tournament();
    const std::size_t ia = static_cast<std::size_t>(&pa - pop.data());
    const std::size_t ib = static_cast<std::size_t>(&pb - pop.data());
    Suite c1 = pa, c2 = pb;
    if (s.rng().chance(budget.crossover_rate)) {
      const double alpha = s.rng().unit();
      auto cut = [&](const Suite& x) {
        return static_cast<std::size_t>(std::lround(alpha * static_cast<double>(x.tests.size())));
      };
      const std::size_t ca = cut(pa), cb = cut(pb);
      c1.tests.assign(pa.tests.begin(), pa.tests.begin() + static_cast<std::ptrdiff_t>(ca));
      c1.tests.insert(c1.tests.end(), pb.tests.begin() + static_cast<std::ptrdiff_t>(cb), pb.tests.end());
      c2.tests.assign(pb.tests.begin(), pb.tests.begin() + static_cast<std::ptrdiff_t>(cb));
      c2.tests.insert(c2.tests.end(), pa.tests.begin() + static_cast<std::ptrdiff_t>(ca), pa.tests.end());
    }
    for (Suite* c : {&c1, &c2}) {
      c->id = next_suite++;
      c->version = static_cast<std::size_t>(-1);
      if (static_cast<int>(c->tests.size()) > budget.max_suite_size) c->tests.resize(static_cast<std::size_t>(budget.max_suite_size));
      mutate_suite(*c);
      if (c->tests.empty() && !s.exhausted()) c->tests.push_back(new_test(s.factory().random_test(s.rng())));
    }
    for (auto& su : pop) score(su);
    score(c1);
    score(c2);
    const Suite& best_child = better(c1, c2) ? c1 : c2;
    const Suite& best_parent = better(pop[ia], pop[ib]) ? pop[ia] : pop[ib];
    if (!c1.tests.empty() && !c2.tests.empty() &&
        (best_child.fitness < best_parent.fitness ||
         (best_child.fitness == best_parent.fitness && best_child.length <= best_parent.length))) {
      if (ia == ib) {
        pop[ia] = better(c1, c2) ? std::move(c1) : std::move(c2);
      } else {
        pop[ia] = std::move(c1);
        pop[ib] = std::move(c2);
      }
    }
    trajectory.push_back(best_of().fitness);
  }

  Suite best = best_of();
  TestSuite out;
  for (auto& t : best.tests) {
    if (std::find(out.tests.begin(), out.tests.end(), t->test) == out.tests.end()) out.tests.push_back(t->test);
  }
  auto r = s.finish(Algorithm::WS, std::move(out));
  r.best_fitness = std::move(trajectory);
  return r;
}

// ---------------------------------------------------------------------------
// MOSA / DynaMOSA

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

std::vector<std::vector<int>> non_dominated_sort(const std::vector<std::vector<double>>& obj) {
  const int n = static_cast<int>(obj.size());
  std::vector<std::vector<int>> dominated(n);
  std::vector<int> count(n, 0);
  std::vector<std::vector<int>> fronts(1);
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      if (dominates(obj[p], obj[q])) {
        dominated[p].push_back(q);
        ++count[q];
      } else if (dominates(obj[q], obj[p])) {
        dominated[q].push_back(p);
        ++count[p];
      }
    }
  }
  for (int p = 0; p < n; ++p) {
    if (count[p] == 0) fronts[0].push_back(p);
  }
  while (!fronts.back().empty()) {
    std::vector<int> next;
    for (int p : fronts.back()) {
      for (int q : dominated[p]) {
        if (--count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<std::vector<double>>& obj, const std::vector<int>& front) {
  const std::size_t n = front.size();
  std::vector<double> d(n, 0.0);
  if (n == 0) return d;
  const std::size_t m = obj[static_cast<std::size_t>(front[0])].size();
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < m; ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return obj[static_cast<std::size_t>(front[a])][k] < obj[static_cast<std::size_t>(front[b])][k];
    });
    const double lo = obj[static_cast<std::size_t>(front[order.front()])][k];
    const double hi = obj[static_cast<std::size_t>(front[order.back()])][k];
    d[order.front()] = d[order.back()] = std::numeric_limits<double>::infinity();
    if (hi <= lo) continue;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      d[order[i]] += (obj[static_cast<std::size_t>(front[order[i + 1]])][k] -
                      obj[static_cast<std::size_t>(front[order[i - 1]])][k]) /
                     (hi - lo);
    }
  }
  return d;
}

namespace {

// Goal -> the BC outcomes that must be archived before it may become an objective.
std::vector<std::vector<std::string>> dependencies(const Subject& subject, const GoalSet& goals) {
  std::vector<std::vector<std::string>> deps(goals.size());
  for (std::size_t g = 0; g < goals.size(); ++g) {
    const auto& goal = goals[g];
    int block = -1;
    switch (goal.kind) {
      case GoalKind::Branch: block = subject.cfm.branch_sites[goal.site].block; break;
      case GoalKind::Line:
      case GoalKind::Mutant: block = subject.cfm.block_of_line(goal.line); break;
      default: break;
    }
    if (block < 0) continue;
    for (const auto& bo : subject.cfm.guards[block]) deps[g].push_back(CoverageGoal::branch(bo.site, bo.outcome, false).id);
  }
  return deps;
}

RunResult run_many_objective(const Subject& subject, const GoalSet& goals, const SearchBudget& budget,
                             RunOptions options, bool dynamic) {
  Search s(subject, goals, budget, options);
  std::vector<std::vector<std::string>> deps;
  std::vector<Activation> log;

  if (dynamic) {
    for (const auto& site : subject.cfm.branch_sites) {
      for (bool o : {true, false}) {
        if (!goals.contains(CoverageGoal::branch(site.id, o, false).id)) {
          throw MissingBranchGoals("DynaMOSA needs the BC goals of every branch site");
        }
      }
    }
    deps = dependencies(subject, goals);
    for (std::size_t g = 0; g < goals.size(); ++g) s.set_active(g, deps[g].empty());
  }
  bool any_active = false;
  for (std::size_t g = 0; g < goals.size(); ++g) any_active |= s.active(g);
  if (!any_active) throw EmptyObjectives("no coverage goal to optimize");
  if (dynamic) {
    for (std::size_t g = 0; g < goals.size(); ++g) {
      if (s.active(g)) log.push_back({goals[g].id, 0});
    }
    // Activate dependents once all their guards are archived.
    s.on_cover = [&](std::size_t) {
      for (std::size_t g = 0; g < goals.size(); ++g) {
        if (s.active(g)) continue;
        bool ready = true;
        for (const auto& d : deps[g]) ready = ready && s.archive().covers(d);
        if (ready) {
          s.set_active(g, true);
          log.push_back({goals[g].id, s.used()});
        }
      }
    };
  }
  s.start();

  std::vector<Ind> pop;
  for (int i = 0; i < budget.population && !s.exhausted(); ++i) pop.push_back(s.evaluate(s.factory().random_test(s.rng())));

  auto objectives_now = [&]() {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < goals.size(); ++g) {
      if (s.active(g) && !s.covered(g)) out.push_back(g);
    }
    return out;
  };
  auto fitter = [](const Individual& a, const Individual& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    if (a.crowding != b.crowding) return a.crowding > b.crowding;
    return a.id < b.id;
  };
  auto tournament = [&]() -> const Ind& {
    const Ind& a = pop[static_cast<std::size_t>(s.rng().below(pop.size()))];
    const Ind& b = pop[static_cast<std::size_t>(s.rng().below(pop.size()))];
    return fitter(*a, *b) ? a : b;
  };

  // Preference sorting plus non-dominated fronts over the current objectives.
  auto select = [&](std::vector<Ind> all) {
    auto objs = objectives_now();
    if (objs.empty()) return all;
    std::vector<std::vector<double>> m(all.size(), std::vector<double>(objs.size()));
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t k = 0; k < objs.size(); ++k) m[i][k] = s.value(*all[i], objs[k]);
    }
    // Values may have archived goals meanwhile; keep the matrix as computed for this generation.
    std::vector<char> in_front0(all.size(), 0);
    for (std::size_t k = 0; k < objs.size(); ++k) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < all.size(); ++i) {
        const auto& a = *all[i];
        const auto& b = *all[best];
        if (m[i][k] < m[best][k] ||
            (m[i][k] == m[best][k] &&
             (a.test.calls.size() < b.test.calls.size() || (a.test.calls.size() == b.test.calls.size() && a.id < b.id)))) {
          best = i;
        }
      }
      in_front0[best] = 1;
    }
    std::vector<std::vector<int>> fronts(1);
    std::vector<int> rest;
    for (std::size_t i = 0; i < all.size(); ++i) (in_front0[i] ? fronts[0] : rest).push_back(static_cast<int>(i));
    std::vector<std::vector<double>> rest_obj;
    for (int i : rest) rest_obj.push_back(m[static_cast<std::size_t>(i)]);
    for (auto& f : non_dominated_sort(rest_obj)) {
      std::vector<int> mapped;
      for (int i : f) mapped.push_back(rest[static_cast<std::size_t>(i)]);
      fronts.push_back(std::move(mapped));
    }
    std::vector<Ind> next;
    const std::size_t cap = static_cast<std::size_t>(budget.population);
    for (std::size_t r = 0; r < fronts.size() && next.size() < cap; ++r) {
      auto& f = fronts[r];
      if (f.empty()) continue;
      auto cd = crowding_distance(m, f);
      for (std::size_t i = 0; i < f.size(); ++i) {
        all[static_cast<std::size_t>(f[i])]->rank = static_cast<int>(r);
        all[static_cast<std::size_t>(f[i])]->crowding = cd[i];
      }
      std::vector<std::size_t> order(f.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (cd[a] != cd[b]) return cd[a] > cd[b];
        return all[static_cast<std::size_t>(f[a])]->id < all[static_cast<std::size_t>(f[b])]->id;
      });
      for (std::size_t i : order) {
        if (next.size() == cap) break;
        next.push_back(all[static_cast<std::size_t>(f[i])]);
      }
    }
    return next;
  };

  if (!pop.empty()) pop = select(pop);
  while (!s.exhausted() && !objectives_now().empty() && !pop.empty()) {
    std::vector<Ind> offspring;
    while (static_cast<int>(offspring.size()) < budget.population && !s.exhausted()) {
      const Ind& a = tournament();
      const Ind& b = tournament();
      TestCase x = a->test, y = b->test;
      if (s.rng().chance(budget.crossover_rate)) std::tie(x, y) = s.factory().crossover(x, y, s.rng());
      x = s.factory().mutate(x, s.rng());
      y = s.factory().mutate(y, s.rng());
      offspring.push_back(s.evaluate(std::move(x)));
      if (static_cast<int>(offspring.size()) < budget.population && !s.exhausted()) {
        offspring.push_back(s.evaluate(std::move(y)));
      }
    }
    std::vector<Ind> all = pop;
    all.insert(all.end(), offspring.begin(), offspring.end());
    pop = select(std::move(all));
  }

  auto r = s.finish(dynamic ? Algorithm::DynaMOSA : Algorithm::MOSA, TestSuite{});
  r.activations = std::move(log);
  return r;
}

}  // namespace

RunResult run_mosa(const Subject& subject, const GoalSet& goals, const SearchBudget& budget, RunOptions options) {
  return run_many_objective(subject, goals, budget, options, false);
}

RunResult run_dynamosa(const Subject& subject, const GoalSet& goals, const SearchBudget& budget, RunOptions options) {
  return run_many_objective(subject, goals, budget, options, true);
}

RunResult run_search(const Subject& subject, const StrategyConfig& strategy, Algorithm algorithm,
                     const SearchBudget& budget, SubsumptionCache& tables) {
  const GoalSet goals = build_goalset(subject, strategy, algorithm, tables);
  RunOptions options;
  switch (strategy.kind) {
    case StrategyKind::Original:
    case StrategyKind::Smart:
    case StrategyKind::SmartNoSubsumption: options.track_exceptions = true; break;
    case StrategyKind::Single:
    case StrategyKind::Custom:
      options.track_exceptions =
          std::find(strategy.criteria.begin(), strategy.criteria.end(), Criterion::EC) != strategy.criteria.end();
      break;
  }
  RunResult r;
  switch (algorithm) {
    case Algorithm::WS: r = run_ws(subject, goals, budget, options); break;
    case Algorithm::MOSA: r = run_mosa(subject, goals, budget, options); break;
    case Algorithm::DynaMOSA: r = run_dynamosa(subject, goals, budget, options); break;
  }
  r.strategy = strategy.name();
  return r;
}

}  // namespace sbst
