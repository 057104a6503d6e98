#include "sbst/goals.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <tuple>

#include "sbst/errors.hpp"
#include "sbst/parser.hpp"

namespace sbst {

using lang::BinaryOp;
using lang::Expr;
using lang::Mutation;
using lang::Stmt;
using lang::Type;

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::BC: return "BC";
    case Criterion::DBC: return "DBC";
    case Criterion::LC: return "LC";
    case Criterion::WM: return "WM";
    case Criterion::TMC: return "TMC";
    case Criterion::NTMC: return "NTMC";
    case Criterion::EC: return "EC";
    case Criterion::OC: return "OC";
  }
  return "?";
}

Criterion parse_criterion(std::string_view text) {
  const std::string u = upper(text);
  for (Criterion c : kAllCriteria) {
    if (u == to_string(c)) return c;
  }
  throw UnknownCriterion("unknown criterion '" + std::string(text) + "'");
}

std::string_view to_string(MutationOperator op) {
  switch (op) {
    case MutationOperator::RC: return "RC";
    case MutationOperator::RV: return "RV";
    case MutationOperator::BOR: return "BOR";
    case MutationOperator::UOI: return "UOI";
    case MutationOperator::AOR: return "AOR";
    case MutationOperator::ROR: return "ROR";
  }
  return "?";
}

MutationOperator parse_operator(std::string_view text) {
  const std::string u = upper(text);
  for (MutationOperator op : kAllOperators) {
    if (u == to_string(op)) return op;
  }
  throw InvalidConfig("unknown mutation operator '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Mutant generation

namespace {

constexpr BinaryOp kArithmetic[] = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Mod};
constexpr BinaryOp kBitwise[] = {BinaryOp::BitAnd, BinaryOp::BitOr, BinaryOp::BitXor};
constexpr BinaryOp kComparisons[] = {BinaryOp::Lt, BinaryOp::Le, BinaryOp::Gt,
                                     BinaryOp::Ge, BinaryOp::Eq, BinaryOp::Ne};
constexpr BinaryOp kEqualities[] = {BinaryOp::Eq, BinaryOp::Ne};

class MutantGenerator {
 public:
  MutantGenerator(const lang::Program& p, const std::set<MutationOperator>& ops) : p_(p), ops_(ops) {}

  std::vector<Mutant> run() {
    for (const auto& m : p_.methods) {
      method_ = &m;
      lang::for_each_stmt(m.body, [&](const Stmt& s) {
        if (!s.expr) return;
        line_ = s.pos.line;
        lang::for_each_expr(*s.expr, [&](const Expr& e) { visit(e); });
      });
    }
    return std::move(out_);
  }

 private:
  bool wants(MutationOperator op) const { return ops_.count(op) != 0; }

  void emit(MutationOperator op, const Expr& e, Mutation mut, std::string context, std::string replacement,
            std::string description) {
    Mutant m;
    m.id = static_cast<int>(out_.size());
    m.op = op;
    m.method = method_->index;
    m.line = line_;
    mut.expr = e.id;
    mut.line = line_;
    m.mutation = mut;
    m.context = std::move(context);
    m.replacement = std::move(replacement);
    m.description = std::move(description);
    m.key = std::string(to_string(op)) + ":L" + std::to_string(line_) + ":e" + std::to_string(e.id) + ":" +
            m.replacement;
    out_.push_back(std::move(m));
  }

  void visit(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLiteral:
        if (wants(MutationOperator::RC)) constants(e);
        break;
      case Expr::Kind::Variable:
        if (wants(MutationOperator::RV)) variables(e);
        if (wants(MutationOperator::UOI) && e.type == Type::Int) unary_insertions(e);
        break;
      case Expr::Kind::Binary:
        if (lang::is_bitwise(e.binary_op) && wants(MutationOperator::BOR)) {
          operators(MutationOperator::BOR, e, kBitwise);
        } else if (lang::is_arithmetic(e.binary_op) && wants(MutationOperator::AOR)) {
          operators(MutationOperator::AOR, e, kArithmetic);
        } else if (lang::is_comparison(e.binary_op) && wants(MutationOperator::ROR)) {
          if (e.lhs->type == Type::Bool) {
            operators(MutationOperator::ROR, e, kEqualities);
          } else {
            operators(MutationOperator::ROR, e, kComparisons);
          }
          for (bool v : {true, false}) {
            Mutation mut;
            mut.kind = Mutation::Kind::ReplaceWithBool;
            mut.value = v ? 1 : 0;
            emit(MutationOperator::ROR, e, mut, context_of(e), v ? "true" : "false",
                 std::string(lang::symbol(e.binary_op)) + " -> " + (v ? "true" : "false"));
          }
        }
        break;
      default: break;
    }
  }

  static std::string context_of(const Expr& e) {
    return std::string(lang::mnemonic(e.binary_op)) + ":" + std::string(lang::to_string(e.lhs->type));
  }

  template <std::size_t N>
  void operators(MutationOperator op, const Expr& e, const BinaryOp (&family)[N]) {
    for (BinaryOp alt : family) {
      if (alt == e.binary_op) continue;
      Mutation mut;
      mut.kind = Mutation::Kind::ReplaceBinaryOp;
      mut.op = alt;
      emit(op, e, mut, context_of(e), std::string(lang::mnemonic(alt)),
           std::string(lang::symbol(e.binary_op)) + " -> " + std::string(lang::symbol(alt)));
    }
  }

  void constants(const Expr& e) {
    const std::int64_t c = e.value;
    std::vector<std::int64_t> values;
    if (c != std::numeric_limits<std::int64_t>::max()) values.push_back(c + 1);
    if (c != std::numeric_limits<std::int64_t>::min()) values.push_back(c - 1);
    for (std::int64_t v : {std::int64_t{0}, std::int64_t{1}, std::int64_t{-1}}) values.push_back(v);
    std::vector<std::int64_t> seen;
    for (std::int64_t v : values) {
      if (v == c || std::find(seen.begin(), seen.end(), v) != seen.end()) continue;
      seen.push_back(v);
      Mutation mut;
      mut.kind = Mutation::Kind::ReplaceLiteral;
      mut.value = v;
      emit(MutationOperator::RC, e, mut, "const:int", "to" + std::to_string(v),
           std::to_string(c) + " -> " + std::to_string(v));
    }
  }

  void variables(const Expr& e) {
    for (int slot : e.same_type_slots) {
      Mutation mut;
      mut.kind = Mutation::Kind::ReplaceVariable;
      mut.value = slot;
      const std::string& other = method_->slot_names[slot];
      emit(MutationOperator::RV, e, mut, "var:" + std::string(lang::to_string(e.type)), "var_" + other,
           e.name + " -> " + other);
    }
  }

  void unary_insertions(const Expr& e) {
    struct Choice {
      Mutation::Unary u;
      const char* label;
      const char* text;
    };
    for (const auto& ch : {Choice{Mutation::Unary::PlusOne, "inc", "+1"}, Choice{Mutation::Unary::MinusOne, "dec", "-1"},
                           Choice{Mutation::Unary::Negate, "neg", "negate"}}) {
      Mutation mut;
      mut.kind = Mutation::Kind::InsertUnary;
      mut.unary = ch.u;
      emit(MutationOperator::UOI, e, mut, "var:int", ch.label, e.name + " -> " + e.name + " " + ch.text);
    }
  }

  const lang::Program& p_;
  const std::set<MutationOperator>& ops_;
  const lang::MethodDef* method_ = nullptr;
  int line_ = 0;
  std::vector<Mutant> out_;
};

}  // namespace

std::vector<Mutant> generate_mutants(const lang::Program& program, const std::set<MutationOperator>& operators) {
  return MutantGenerator(program, operators).run();
}

// ---------------------------------------------------------------------------
// Subject

Subject::Subject(lang::Program p) : program(std::make_shared<const lang::Program>(std::move(p))) {
  cfm = lang::build_cfm(*program);
  mutants = generate_mutants(*program, {std::begin(kAllOperators), std::end(kAllOperators)});
}

Subject Subject::from_source(std::string_view source, std::string name) {
  return Subject(lang::parse(source, std::move(name)));
}

Subject Subject::from_file(const std::string& path) { return Subject(lang::parse_file(path)); }

// ---------------------------------------------------------------------------
// Goals

std::string_view to_string(GoalKind k) {
  switch (k) {
    case GoalKind::Branch: return "branch";
    case GoalKind::Line: return "line";
    case GoalKind::Mutant: return "mutant";
    case GoalKind::TopMethod: return "top_method";
    case GoalKind::NoExcTopMethod: return "no_exc_top_method";
    case GoalKind::Exception: return "exception";
    case GoalKind::Output: return "output";
  }
  return "?";
}

std::string_view to_string(OutputPartition p) {
  switch (p) {
    case OutputPartition::True: return "true";
    case OutputPartition::False: return "false";
    case OutputPartition::Negative: return "negative";
    case OutputPartition::Zero: return "zero";
    case OutputPartition::Positive: return "positive";
  }
  return "?";
}

CoverageGoal CoverageGoal::branch(int site, bool outcome, bool direct) {
  CoverageGoal g;
  g.kind = GoalKind::Branch;
  g.site = site;
  g.outcome = outcome;
  g.direct = direct;
  g.id = std::string(direct ? "dbc" : "bc") + ":s" + std::to_string(site) + (outcome ? ":T" : ":F");
  return g;
}

CoverageGoal CoverageGoal::line_goal(int line) {
  CoverageGoal g;
  g.kind = GoalKind::Line;
  g.line = line;
  g.id = "lc:L" + std::to_string(line);
  return g;
}

CoverageGoal CoverageGoal::mutant_goal(const Mutant& m) {
  CoverageGoal g;
  g.kind = GoalKind::Mutant;
  g.mutant = m.id;
  g.line = m.line;
  g.method = m.method;
  g.id = "wm:" + m.key;
  return g;
}

CoverageGoal CoverageGoal::top_method(const lang::Program& p, int method) {
  CoverageGoal g;
  g.kind = GoalKind::TopMethod;
  g.method = method;
  g.id = "tmc:" + p.methods[method].name;
  return g;
}

CoverageGoal CoverageGoal::no_exc_top_method(const lang::Program& p, int method) {
  CoverageGoal g;
  g.kind = GoalKind::NoExcTopMethod;
  g.method = method;
  g.id = "ntmc:" + p.methods[method].name;
  return g;
}

CoverageGoal CoverageGoal::exception(const lang::Program& p, int method, std::string tag) {
  CoverageGoal g;
  g.kind = GoalKind::Exception;
  g.method = method;
  g.id = "ec:" + p.methods[method].name + ":" + tag;
  g.tag = std::move(tag);
  return g;
}

CoverageGoal CoverageGoal::output(const lang::Program& p, int method, OutputPartition partition) {
  CoverageGoal g;
  g.kind = GoalKind::Output;
  g.method = method;
  g.partition = partition;
  g.id = "oc:" + p.methods[method].name + ":" + std::string(to_string(partition));
  return g;
}

Criterion CoverageGoal::criterion() const {
  switch (kind) {
    case GoalKind::Branch: return direct ? Criterion::DBC : Criterion::BC;
    case GoalKind::Line: return Criterion::LC;
    case GoalKind::Mutant: return Criterion::WM;
    case GoalKind::TopMethod: return Criterion::TMC;
    case GoalKind::NoExcTopMethod: return Criterion::NTMC;
    case GoalKind::Exception: return Criterion::EC;
    case GoalKind::Output: return Criterion::OC;
  }
  return Criterion::BC;
}

bool canonical_less(const CoverageGoal& a, const CoverageGoal& b) {
  auto key = [](const CoverageGoal& g) {
    return std::make_tuple(g.kind, g.direct, g.method, g.site, !g.outcome, g.line, g.mutant, std::cref(g.tag), g.partition);
  };
  return key(a) < key(b);
}

bool GoalSet::add(CoverageGoal goal, std::string provenance) {
  if (index_.count(goal.id)) return false;
  auto pos = std::lower_bound(goals_.begin(), goals_.end(), goal, canonical_less);
  const auto at = static_cast<std::size_t>(pos - goals_.begin());
  goals_.insert(pos, std::move(goal));
  provenance_.insert(provenance_.begin() + static_cast<std::ptrdiff_t>(at), std::move(provenance));
  for (std::size_t i = at; i < goals_.size(); ++i) index_[goals_[i].id] = i;
  return true;
}

void GoalSet::merge(const GoalSet& other) {
  for (std::size_t i = 0; i < other.size(); ++i) add(other.goals_[i], other.provenance_[i]);
}

std::optional<std::size_t> GoalSet::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t GoalSet::count(GoalKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(goals_.begin(), goals_.end(), [&](const CoverageGoal& g) { return g.kind == kind; }));
}

std::size_t GoalSet::count(Criterion c) const {
  return static_cast<std::size_t>(
      std::count_if(goals_.begin(), goals_.end(), [&](const CoverageGoal& g) { return g.criterion() == c; }));
}

std::set<std::string> GoalSet::ids() const {
  std::set<std::string> out;
  for (const auto& g : goals_) out.insert(g.id);
  return out;
}

nlohmann::json GoalSet::to_json(const Subject& subject) const {
  using nlohmann::json;
  const auto& p = subject.prog();
  json arr = json::array();
  for (std::size_t i = 0; i < goals_.size(); ++i) {
    const auto& g = goals_[i];
    json loc;
    switch (g.kind) {
      case GoalKind::Branch: {
        const auto& site = subject.cfm.branch_sites[g.site];
        loc = {{"method", p.methods[site.method].name}, {"line", site.line}, {"site", g.site},
               {"outcome", g.outcome}, {"direct", g.direct}};
        break;
      }
      case GoalKind::Line: loc = {{"line", g.line}}; break;
      case GoalKind::Mutant: {
        const auto& m = subject.mutants[g.mutant];
        loc = {{"method", p.methods[m.method].name}, {"line", m.line}, {"operator", to_string(m.op)},
               {"mutation", m.description}};
        break;
      }
      case GoalKind::TopMethod:
      case GoalKind::NoExcTopMethod: loc = {{"method", p.methods[g.method].name}}; break;
      case GoalKind::Exception: loc = {{"method", p.methods[g.method].name}, {"tag", g.tag}}; break;
      case GoalKind::Output:
        loc = {{"method", p.methods[g.method].name}, {"partition", to_string(g.partition)}};
        break;
    }
    arr.push_back({{"id", g.id},
                   {"kind", to_string(g.kind)},
                   {"criterion", to_string(g.criterion())},
                   {"location", loc},
                   {"provenance", provenance_[i]}});
  }
  return arr;
}

GoalSet extract_goals(const Subject& subject, Criterion criterion) {
  GoalSet out;
  const auto& p = subject.prog();
  const std::string prov(to_string(criterion));
  switch (criterion) {
    case Criterion::BC:
    case Criterion::DBC:
      for (const auto& site : subject.cfm.branch_sites) {
        for (bool outcome : {true, false}) {
          out.add(CoverageGoal::branch(site.id, outcome, criterion == Criterion::DBC), prov);
        }
      }
      break;
    case Criterion::LC:
      for (int line : subject.cfm.lines()) out.add(CoverageGoal::line_goal(line), prov);
      break;
    case Criterion::WM:
      for (const auto& m : subject.mutants) out.add(CoverageGoal::mutant_goal(m), prov);
      break;
    case Criterion::TMC:
      for (const auto& m : subject.cfm.public_methods) out.add(CoverageGoal::top_method(p, m.index), prov);
      break;
    case Criterion::NTMC:
      for (const auto& m : subject.cfm.public_methods) out.add(CoverageGoal::no_exc_top_method(p, m.index), prov);
      break;
    case Criterion::EC: break;
    case Criterion::OC:
      for (const auto& m : subject.cfm.public_methods) {
        if (m.return_type == Type::Bool) {
          out.add(CoverageGoal::output(p, m.index, OutputPartition::True), prov);
          out.add(CoverageGoal::output(p, m.index, OutputPartition::False), prov);
        } else if (m.return_type == Type::Int) {
          for (auto part : {OutputPartition::Negative, OutputPartition::Zero, OutputPartition::Positive}) {
            out.add(CoverageGoal::output(p, m.index, part), prov);
          }
        }
      }
      break;
  }
  return out;
}

}  // namespace sbst
