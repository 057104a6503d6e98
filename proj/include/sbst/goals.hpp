#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbst/ast.hpp"
#include "sbst/cfg.hpp"
#include "sbst/interpreter.hpp"

namespace sbst {

enum class Criterion : std::uint8_t { BC, DBC, LC, WM, TMC, NTMC, EC, OC };

inline constexpr Criterion kAllCriteria[] = {Criterion::BC,  Criterion::DBC,  Criterion::LC, Criterion::WM,
                                             Criterion::TMC, Criterion::NTMC, Criterion::EC, Criterion::OC};

std::string_view to_string(Criterion c);
// Case-insensitive; throws UnknownCriterion.
Criterion parse_criterion(std::string_view text);

enum class MutationOperator : std::uint8_t { RC, RV, BOR, UOI, AOR, ROR };

inline constexpr MutationOperator kAllOperators[] = {MutationOperator::RC,  MutationOperator::RV,
                                                     MutationOperator::BOR, MutationOperator::UOI,
                                                     MutationOperator::AOR, MutationOperator::ROR};

std::string_view to_string(MutationOperator op);
MutationOperator parse_operator(std::string_view text);

struct Mutant {
  int id = -1;  // index in generation order
  MutationOperator op = MutationOperator::RC;
  int method = -1;
  int line = 0;
  lang::Mutation mutation;
  std::string context;      // subsumption context of the original node, e.g. "lt:int"
  std::string replacement;  // e.g. "le", "true", "c+1"
  std::string description;  // e.g. "< -> <="
  std::string key;          // stable content-derived id
};

std::vector<Mutant> generate_mutants(const lang::Program& program, const std::set<MutationOperator>& operators);

// A parsed program with everything goal extraction needs.
struct Subject {
  std::shared_ptr<const lang::Program> program;
  lang::ControlFlowModel cfm;
  std::vector<Mutant> mutants;  // all six operators

  static Subject from_source(std::string_view source, std::string name = "subject");
  static Subject from_file(const std::string& path);
  explicit Subject(lang::Program p);

  const lang::Program& prog() const { return *program; }
  int branch_count() const { return 2 * static_cast<int>(cfm.branch_sites.size()); }
};

enum class GoalKind : std::uint8_t { Branch, Line, Mutant, TopMethod, NoExcTopMethod, Exception, Output };

enum class OutputPartition : std::uint8_t { True, False, Negative, Zero, Positive };

std::string_view to_string(GoalKind k);
std::string_view to_string(OutputPartition p);

struct CoverageGoal {
  GoalKind kind = GoalKind::Branch;
  int site = -1;
  bool outcome = true;
  bool direct = false;  // DBC variant of a Branch goal
  int line = -1;
  int mutant = -1;
  int method = -1;
  std::string tag;  // Exception
  OutputPartition partition = OutputPartition::True;
  std::string id;

  static CoverageGoal branch(int site, bool outcome, bool direct);
  static CoverageGoal line_goal(int line);
  static CoverageGoal mutant_goal(const Mutant& m);
  static CoverageGoal top_method(const lang::Program& p, int method);
  static CoverageGoal no_exc_top_method(const lang::Program& p, int method);
  static CoverageGoal exception(const lang::Program& p, int method, std::string tag);
  static CoverageGoal output(const lang::Program& p, int method, OutputPartition partition);

  // The criterion whose universe this goal belongs to.
  Criterion criterion() const;
};

bool canonical_less(const CoverageGoal& a, const CoverageGoal& b);

// Deduplicated, canonically ordered goals with per-goal provenance.
class GoalSet {
 public:
  // Returns false when the id is already present.
  bool add(CoverageGoal goal, std::string provenance);
  void merge(const GoalSet& other);

  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  std::optional<std::size_t> find(const std::string& id) const;

  const std::vector<CoverageGoal>& goals() const { return goals_; }
  const std::vector<std::string>& provenance() const { return provenance_; }
  std::size_t size() const { return goals_.size(); }
  bool empty() const { return goals_.empty(); }
  const CoverageGoal& operator[](std::size_t i) const { return goals_[i]; }

  std::size_t count(GoalKind kind) const;
  std::size_t count(Criterion c) const;
  std::set<std::string> ids() const;

  nlohmann::json to_json(const Subject& subject) const;

 private:
  std::vector<CoverageGoal> goals_;
  std::vector<std::string> provenance_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Goal universe of one criterion. EC is empty at extraction time; its goals
// are discovered while tests run.
GoalSet extract_goals(const Subject& subject, Criterion criterion);

}  // namespace sbst
