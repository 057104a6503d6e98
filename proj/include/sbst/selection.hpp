#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbst/goals.hpp"

namespace sbst {

enum class Algorithm : std::uint8_t { WS, MOSA, DynaMOSA };

std::string_view to_string(Algorithm a);
// Accepts ws, mosa, dynamosa (any case). Throws InvalidConfig.
Algorithm parse_algorithm(std::string_view text);

enum class StrategyKind : std::uint8_t { Single, Original, Smart, SmartNoSubsumption, Custom };

struct StrategyConfig {
  StrategyKind kind = StrategyKind::Smart;
  std::vector<Criterion> criteria;  // Single: one entry; Custom: non-empty
  int line_threshold = 8;

  // single:<tag> | original | smart | smart-nosub | custom:<tag>,<tag>,...
  static StrategyConfig parse(std::string_view text, int line_threshold = 8);
  std::string name() const;
  void validate() const;  // throws InvalidConfig
};

// The four fixed groups: {BC, DBC, LC, WM}, {TMC, NTMC}, {EC}, {OC}.
std::vector<std::vector<Criterion>> group_criteria();
// {DBC, NTMC, EC, OC}
std::set<Criterion> select_representatives();

// Last line of every basic block owning at least `line_threshold` lines.
GoalSet select_line_goals(const Subject& subject, int line_threshold);

// Finite operand grid the subsumption oracle evaluates over.
struct OracleDomain {
  std::vector<std::int64_t> ints;

  static OracleDomain standard();  // [-3, 3] plus INT64_MIN / INT64_MAX
  nlohmann::json to_json() const;
};

struct SubsumptionClass {
  std::string representative;
  std::vector<std::string> members;  // includes the representative
};

// Subsumption classes of one operator at one expression context ("lt:int").
// Mutants are named by their replacement ("le", "true", "sub", ...).
struct SubsumptionTable {
  MutationOperator op = MutationOperator::ROR;
  std::string context;
  std::string original;
  nlohmann::json domain;
  std::vector<SubsumptionClass> classes;
  std::vector<std::string> unkillable;                 // never infected on the domain
  std::map<std::string, std::vector<int>> infections;  // replacement -> infecting grid-point indices

  std::set<std::string> representatives() const;
  nlohmann::json to_json() const;
  static SubsumptionTable from_json(const nlohmann::json& j);
};

// Exhaustive evaluation over `domain`: bool-operand contexts use {false, true}.
// Throws EmptyDomain, InvalidConfig for unsupported operator/context.
SubsumptionTable derive_subsumption_table(MutationOperator op, const std::string& context,
                                          const OracleDomain& domain = OracleDomain::standard());

// Memoizing table source, optionally backed by a directory of JSON files.
class SubsumptionCache {
 public:
  explicit SubsumptionCache(std::optional<std::filesystem::path> dir = std::nullopt,
                            OracleDomain domain = OracleDomain::standard());

  const SubsumptionTable& get(MutationOperator op, const std::string& context);
  std::filesystem::path file_for(MutationOperator op, const std::string& context) const;

 private:
  std::optional<std::filesystem::path> dir_;
  OracleDomain domain_;
  std::mutex mu_;
  std::map<std::string, SubsumptionTable> tables_;
};

// Key-operator mutants (BOR, AOR, ROR) that represent their subsumption class.
GoalSet select_mutant_goals(const Subject& subject, SubsumptionCache& tables);

// Goal set guiding a run. DynaMOSA always receives the BC goals as well.
GoalSet build_goalset(const Subject& subject, const StrategyConfig& config, Algorithm algorithm,
                      SubsumptionCache& tables);

}  // namespace sbst
