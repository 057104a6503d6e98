#include "sbst/selection.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

#include "sbst/errors.hpp"
#include "sbst/interpreter.hpp"

namespace sbst {

using lang::BinaryOp;

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::WS: return "WS";
    case Algorithm::MOSA: return "MOSA";
    case Algorithm::DynaMOSA: return "DynaMOSA";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  std::string s(text);
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "ws") return Algorithm::WS;
  if (s == "mosa") return Algorithm::MOSA;
  if (s == "dynamosa") return Algorithm::DynaMOSA;
  throw InvalidConfig("unknown algorithm '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Strategy

StrategyConfig StrategyConfig::parse(std::string_view text, int line_threshold) {
  StrategyConfig c;
  c.line_threshold = line_threshold;
  const auto colon = text.find(':');
  const std::string head(text.substr(0, colon));
  const std::string_view rest = colon == std::string_view::npos ? std::string_view() : text.substr(colon + 1);
  try {
    if (head == "original" && colon == std::string_view::npos) {
      c.kind = StrategyKind::Original;
    } else if (head == "smart" && colon == std::string_view::npos) {
      c.kind = StrategyKind::Smart;
    } else if (head == "smart-nosub" && colon == std::string_view::npos) {
      c.kind = StrategyKind::SmartNoSubsumption;
    } else if (head == "single" && !rest.empty()) {
      c.kind = StrategyKind::Single;
      c.criteria.push_back(parse_criterion(rest));
    } else if (head == "custom") {
      c.kind = StrategyKind::Custom;
      std::stringstream ss{std::string(rest)};
      std::string tag;
      while (std::getline(ss, tag, ',')) {
        if (tag.empty()) continue;
        const Criterion cr = parse_criterion(tag);
        if (std::find(c.criteria.begin(), c.criteria.end(), cr) == c.criteria.end()) c.criteria.push_back(cr);
      }
    } else {
      throw InvalidConfig("unknown strategy '" + std::string(text) + "'");
    }
  } catch (const UnknownCriterion& e) {
    throw InvalidConfig(std::string("strategy '") + std::string(text) + "': " + e.what());
  }
  c.validate();
  return c;
}

std::string StrategyConfig::name() const {
  switch (kind) {
    case StrategyKind::Original: return "original";
    case StrategyKind::Smart: return "smart";
    case StrategyKind::SmartNoSubsumption: return "smart-nosub";
    case StrategyKind::Single: return "single:" + std::string(to_string(criteria.at(0)));
    case StrategyKind::Custom: {
      std::string s = "custom:";
      for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (i) s += ",";
        s += to_string(criteria[i]);
      }
      return s;
    }
  }
  return "?";
}

void StrategyConfig::validate() const {
  if (line_threshold < 1) throw InvalidConfig("lineThreshold must be >= 1");
  if (kind == StrategyKind::Single && criteria.size() != 1) throw InvalidConfig("single strategy needs one criterion");
  if (kind == StrategyKind::Custom && criteria.empty()) throw InvalidConfig("custom strategy needs criteria");
}

// ---------------------------------------------------------------------------
// Groups and representatives

std::vector<std::vector<Criterion>> group_criteria() {
  return {{Criterion::BC, Criterion::DBC, Criterion::LC, Criterion::WM},
          {Criterion::TMC, Criterion::NTMC},
          {Criterion::EC},
          {Criterion::OC}};
}

std::set<Criterion> select_representatives() {
  return {Criterion::DBC, Criterion::NTMC, Criterion::EC, Criterion::OC};
}

GoalSet select_line_goals(const Subject& subject, int line_threshold) {
  if (line_threshold < 1) throw InvalidConfig("lineThreshold must be >= 1");
  GoalSet out;
  for (const auto& b : subject.cfm.blocks) {
    if (static_cast<int>(b.lines.size()) >= line_threshold) {
      out.add(CoverageGoal::line_goal(b.lines.back()), "LC:last-line");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subsumption oracle

OracleDomain OracleDomain::standard() {
  OracleDomain d;
  for (std::int64_t v = -3; v <= 3; ++v) d.ints.push_back(v);
  d.ints.push_back(std::numeric_limits<std::int64_t>::min());
  d.ints.push_back(std::numeric_limits<std::int64_t>::max());
  return d;
}

nlohmann::json OracleDomain::to_json() const { return {{"ints", ints}}; }

std::set<std::string> SubsumptionTable::representatives() const {
  std::set<std::string> out;
  for (const auto& c : classes) out.insert(c.representative);
  return out;
}

nlohmann::json SubsumptionTable::to_json() const {
  nlohmann::json cls = nlohmann::json::array();
  for (const auto& c : classes) cls.push_back({{"representative", c.representative}, {"members", c.members}});
  return {{"operator", to_string(op)}, {"context", context},     {"original", original},
          {"domain", domain},          {"classes", cls},         {"unkillable", unkillable},
          {"infections", infections}};
}

SubsumptionTable SubsumptionTable::from_json(const nlohmann::json& j) {
  SubsumptionTable t;
  t.op = parse_operator(j.at("operator").get<std::string>());
  t.context = j.at("context").get<std::string>();
  t.original = j.at("original").get<std::string>();
  t.domain = j.at("domain");
  for (const auto& c : j.at("classes")) {
    t.classes.push_back({c.at("representative").get<std::string>(), c.at("members").get<std::vector<std::string>>()});
  }
  t.unkillable = j.at("unkillable").get<std::vector<std::string>>();
  t.infections = j.at("infections").get<std::map<std::string, std::vector<int>>>();
  return t;
}

namespace {

std::optional<BinaryOp> op_from_mnemonic(std::string_view m) {
  for (int i = 0; i <= static_cast<int>(BinaryOp::LogicalOr); ++i) {
    const auto op = static_cast<BinaryOp>(i);
    if (lang::mnemonic(op) == m) return op;
  }
  return std::nullopt;
}

struct Family {
  BinaryOp original;
  std::vector<BinaryOp> ops;  // replacement operators, original excluded
  bool constants = false;     // ROR also replaces with true/false
  bool bool_operands = false;
};

Family family_of(MutationOperator op, const std::string& context) {
  const auto colon = context.find(':');
  if (colon == std::string::npos) throw InvalidConfig("bad subsumption context '" + context + "'");
  const auto orig = op_from_mnemonic(std::string_view(context).substr(0, colon));
  const std::string type = context.substr(colon + 1);
  if (!orig || (type != "int" && type != "bool")) throw InvalidConfig("bad subsumption context '" + context + "'");
  Family f{*orig, {}, false, type == "bool"};
  std::vector<BinaryOp> all;
  switch (op) {
    case MutationOperator::ROR:
      if (!lang::is_comparison(*orig)) break;
      if (f.bool_operands) {
        all = {BinaryOp::Eq, BinaryOp::Ne};
      } else {
        all = {BinaryOp::Lt, BinaryOp::Le, BinaryOp::Gt, BinaryOp::Ge, BinaryOp::Eq, BinaryOp::Ne};
      }
      f.constants = true;
      break;
    case MutationOperator::AOR:
      if (lang::is_arithmetic(*orig) && !f.bool_operands) {
        all = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Mod};
      }
      break;
    case MutationOperator::BOR:
      if (lang::is_bitwise(*orig) && !f.bool_operands) all = {BinaryOp::BitAnd, BinaryOp::BitOr, BinaryOp::BitXor};
      break;
    default: break;
  }
  if (all.empty() || std::find(all.begin(), all.end(), *orig) == all.end()) {
    throw InvalidConfig("no subsumption table for " + std::string(to_string(op)) + " at '" + context + "'");
  }
  for (BinaryOp o : all) {
    if (o != *orig) f.ops.push_back(o);
  }
  return f;
}

}  // namespace

SubsumptionTable derive_subsumption_table(MutationOperator op, const std::string& context,
                                          const OracleDomain& domain) {
  const Family fam = family_of(op, context);
  std::vector<std::int64_t> values = fam.bool_operands ? std::vector<std::int64_t>{0, 1} : domain.ints;
  if (values.empty()) throw EmptyDomain("subsumption oracle domain is empty");

  SubsumptionTable t;
  t.op = op;
  t.context = context;
  t.original = std::string(lang::mnemonic(fam.original));
  t.domain = fam.bool_operands ? nlohmann::json{{"bools", {false, true}}} : domain.to_json();

  // Replacement name and its result at (a, b).
  struct Member {
    std::string name;
    std::optional<BinaryOp> op;
    std::int64_t constant = 0;
  };
  std::vector<Member> members;
  for (BinaryOp o : fam.ops) members.push_back({std::string(lang::mnemonic(o)), o, 0});
  if (fam.constants) {
    members.push_back({"true", std::nullopt, 1});
    members.push_back({"false", std::nullopt, 0});
  }

  std::vector<std::vector<int>> sets(members.size());
  int point = 0;
  for (std::int64_t a : values) {
    for (std::int64_t b : values) {
      const auto orig = lang::apply_binary(fam.original, a, b);
      for (std::size_t k = 0; k < members.size(); ++k) {
        const auto mut = members[k].op ? lang::apply_binary(*members[k].op, a, b)
                                       : lang::BinaryResult{false, members[k].constant, {}};
        if (!(mut == orig)) sets[k].push_back(point);
      }
      ++point;
    }
  }

  auto subset = [](const std::vector<int>& x, const std::vector<int>& y) {
    return std::includes(y.begin(), y.end(), x.begin(), x.end());
  };
  std::vector<std::size_t> reps;
  for (std::size_t k = 0; k < members.size(); ++k) {
    t.infections[members[k].name] = sets[k];
    if (sets[k].empty()) {
      t.unkillable.push_back(members[k].name);
      continue;
    }
    bool minimal = true;
    for (std::size_t j = 0; j < members.size() && minimal; ++j) {
      if (j == k || sets[j].empty()) continue;
      if (subset(sets[j], sets[k]) && (sets[j] != sets[k] || j < k)) minimal = false;
    }
    if (minimal) reps.push_back(k);
  }
  for (std::size_t r : reps) t.classes.push_back({members[r].name, {}});
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (sets[k].empty()) continue;
    for (std::size_t c = 0; c < reps.size(); ++c) {
      if (subset(sets[reps[c]], sets[k])) {
        t.classes[c].members.push_back(members[k].name);
        break;
      }
    }
  }
  return t;
}

SubsumptionCache::SubsumptionCache(std::optional<std::filesystem::path> dir, OracleDomain domain)
    : dir_(std::move(dir)), domain_(std::move(domain)) {}

std::filesystem::path SubsumptionCache::file_for(MutationOperator op, const std::string& context) const {
  std::string name = std::string(to_string(op)) + "_" + context + ".json";
  std::replace(name.begin(), name.end(), ':', '_');
  return dir_.value_or(".") / name;
}

const SubsumptionTable& SubsumptionCache::get(MutationOperator op, const std::string& context) {
  const std::string key = std::string(to_string(op)) + "/" + context;
  std::lock_guard<std::mutex> lock(mu_);
  if (auto it = tables_.find(key); it != tables_.end()) return it->second;

  SubsumptionTable table = derive_subsumption_table(op, context, domain_);
  if (dir_) {
    const auto path = file_for(op, context);
    bool fresh = false;
    if (std::ifstream in{path}) {
      try {
        auto cached = SubsumptionTable::from_json(nlohmann::json::parse(in));
        if (cached.domain == table.domain) {
          table = std::move(cached);
          fresh = true;
        }
      } catch (const std::exception&) {
        // unreadable cache entry: rewritten below
      }
    }
    if (!fresh) {
      std::filesystem::create_directories(*dir_);
      auto tmp = path;
      tmp += ".tmp";
      {
        std::ofstream out(tmp);
        out << table.to_json().dump(2) << "\n";
      }
      std::filesystem::rename(tmp, path);
    }
  }
  return tables_.emplace(key, std::move(table)).first->second;
}

GoalSet select_mutant_goals(const Subject& subject, SubsumptionCache& tables) {
  GoalSet out;
  for (const auto& m : subject.mutants) {
    if (m.op != MutationOperator::ROR && m.op != MutationOperator::AOR && m.op != MutationOperator::BOR) continue;
    const auto reps = tables.get(m.op, m.context).representatives();
    if (reps.count(m.replacement)) out.add(CoverageGoal::mutant_goal(m), "WM:subsuming");
  }
  return out;
}

GoalSet build_goalset(const Subject& subject, const StrategyConfig& config, Algorithm algorithm,
                      SubsumptionCache& tables) {
  config.validate();
  GoalSet out;
  auto add_all = [&](Criterion c) { out.merge(extract_goals(subject, c)); };
  switch (config.kind) {
    case StrategyKind::Single:
    case StrategyKind::Custom:
      for (Criterion c : config.criteria) add_all(c);
      break;
    case StrategyKind::Original:
      for (Criterion c : kAllCriteria) add_all(c);
      break;
    case StrategyKind::Smart:
    case StrategyKind::SmartNoSubsumption:
      for (Criterion c : select_representatives()) add_all(c);
      if (config.kind == StrategyKind::Smart) {
        out.merge(select_line_goals(subject, config.line_threshold));
        out.merge(select_mutant_goals(subject, tables));
      }
      break;
  }
  if (algorithm == Algorithm::DynaMOSA) {
    const GoalSet bc = extract_goals(subject, Criterion::BC);
    for (const auto& g : bc.goals()) out.add(g, "BC:dynamosa");
  }
  return out;
}

}  // namespace sbst
