#include "sbst/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sbst/errors.hpp"

namespace sbst::lang {
namespace {

constexpr std::int64_t kMin = std::numeric_limits<std::int64_t>::min();

struct Fault {
  const char* builtin = nullptr;
  const std::string* tag = nullptr;
  std::string text() const { return builtin ? builtin : *tag; }
};
struct OutOfFuel {};

struct Cond {
  bool value;
  double to_true;
  double to_false;
};

double magnitude(__int128 d) { return static_cast<double>(d < 0 ? -d : d); }

// Either a value or a fault tag; used to compare original and mutated results.
struct Outcome {
  bool fault = false;
  std::int64_t value = 0;
  const char* tag = nullptr;
  friend bool operator==(const Outcome& a, const Outcome& b) {
    if (a.fault != b.fault) return false;
    return a.fault ? std::string_view(a.tag) == std::string_view(b.tag) : a.value == b.value;
  }
};

Outcome arith(BinaryOp op, std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  switch (op) {
    case BinaryOp::Add:
      if (__builtin_add_overflow(a, b, &r)) return {true, 0, kOverflow};
      return {false, r};
    case BinaryOp::Sub:
      if (__builtin_sub_overflow(a, b, &r)) return {true, 0, kOverflow};
      return {false, r};
    case BinaryOp::Mul:
      if (__builtin_mul_overflow(a, b, &r)) return {true, 0, kOverflow};
      return {false, r};
    case BinaryOp::Div:
      if (b == 0) return {true, 0, kDivByZero};
      if (a == kMin && b == -1) return {true, 0, kOverflow};
      return {false, a / b};
    case BinaryOp::Mod:
      if (b == 0) return {true, 0, kDivByZero};
      if (b == -1) return {false, 0};
      return {false, a % b};
    case BinaryOp::BitAnd: return {false, a & b};
    case BinaryOp::BitOr: return {false, a | b};
    case BinaryOp::BitXor: return {false, a ^ b};
    default: break;
  }
  return {false, 0};
}

}  // namespace

BinaryResult apply_binary(BinaryOp op, std::int64_t a, std::int64_t b) {
  switch (op) {
    case BinaryOp::Lt: return {false, a < b, {}};
    case BinaryOp::Le: return {false, a <= b, {}};
    case BinaryOp::Gt: return {false, a > b, {}};
    case BinaryOp::Ge: return {false, a >= b, {}};
    case BinaryOp::Eq: return {false, a == b, {}};
    case BinaryOp::Ne: return {false, a != b, {}};
    case BinaryOp::LogicalAnd: return {false, a != 0 && b != 0, {}};
    case BinaryOp::LogicalOr: return {false, a != 0 || b != 0, {}};
    default: break;
  }
  const Outcome o = arith(op, a, b);
  return {o.fault, o.value, o.fault ? std::string_view(o.tag) : std::string_view()};
}

BranchDistance comparison_distance(BinaryOp op, std::int64_t a, std::int64_t b) {
  const __int128 diff = static_cast<__int128>(a) - static_cast<__int128>(b);
  const double d = static_cast<double>(diff);
  switch (op) {
    case BinaryOp::Lt: return a < b ? BranchDistance{0, -d} : BranchDistance{d + 1, 0};
    case BinaryOp::Le: return a <= b ? BranchDistance{0, -d + 1} : BranchDistance{d, 0};
    case BinaryOp::Gt: return a > b ? BranchDistance{0, d} : BranchDistance{-d + 1, 0};
    case BinaryOp::Ge: return a >= b ? BranchDistance{0, d + 1} : BranchDistance{-d, 0};
    case BinaryOp::Eq: return a == b ? BranchDistance{0, 1} : BranchDistance{magnitude(diff), 0};
    case BinaryOp::Ne: return a != b ? BranchDistance{0, magnitude(diff)} : BranchDistance{1, 0};
    default: break;
  }
  return {0, 0};
}

namespace {

class Run {
 public:
  Run(const Program& p, const Mutation* mut, std::int64_t fuel, ExecutionTrace& tr)
      : p_(p), mut_(mut), fuel_(fuel), tr_(tr) {
    tr_.sites.assign(p.site_count, {});
    tr_.direct_sites.assign(p.site_count, {});
    tr_.lines_hit.assign(p.max_line + 1, 0);
    tr_.entered.assign(p.methods.size(), 0);
    tr_.completed.assign(p.methods.size(), 0);
    stack_.reserve(256);
  }

  void test(const TestCase& t) {
    std::vector<std::int64_t> results(t.calls.size(), 0);
    std::vector<std::int64_t> args;
    for (std::size_t i = 0; i < t.calls.size(); ++i) {
      const auto& call = t.calls[i];
      args.clear();
      for (const auto& a : call.args) {
        args.push_back(a.kind == Argument::Kind::Literal ? a.value : results[a.slot]);
      }
      try {
        std::int64_t v = invoke(call.method, args.data(), true);
        results[i] = v;
        if (p_.methods[call.method].return_type != Type::Void) tr_.returns.push_back({call.method, v});
      } catch (const Fault& f) {
        tr_.exceptions.push_back({call.method, f.text()});
        stack_.clear();
        base_ = 0;
        direct_ = false;
        depth_ = 0;
      } catch (const OutOfFuel&) {
        tr_.fuel_exhausted = true;
        break;
      }
    }
    if (mut_ && !tr_.mutant_infection && tr_.line_hit(mut_->line)) {
      // Reached (its line ran) but the node itself was never evaluated.
      tr_.mutant_infection = 1.0;
    }
  }

 private:
  enum class Flow { Next, Return };

  void tick() {
    if (fuel_ <= 0) throw OutOfFuel{};
    --fuel_;
    ++tr_.steps;
  }

  void infect(double d) {
    if (!tr_.mutant_infection || d < *tr_.mutant_infection) tr_.mutant_infection = d;
  }

  bool is_mutated(const Expr& e) const { return mut_ && mut_->expr == e.id; }

  std::int64_t invoke(int method, const std::int64_t* args, bool direct) {
    tick();
    const auto& m = p_.methods[method];
    const std::uint8_t flag = direct ? kDirect : kInternal;
    tr_.entered[method] |= flag;
    if (depth_ >= kMaxCallDepth) throw Fault{kStackOverflow};
    const std::size_t base = stack_.size();
    stack_.resize(base + static_cast<std::size_t>(m.frame_size), 0);
    std::copy(args, args + m.params.size(), stack_.begin() + static_cast<std::ptrdiff_t>(base));
    const std::size_t saved_base = base_;
    const bool saved_direct = direct_;
    base_ = base;
    direct_ = direct;
    ++depth_;
    ret_ = 0;
    exec_block(m.body);
    std::int64_t result = ret_;
    --depth_;
    base_ = saved_base;
    direct_ = saved_direct;
    stack_.resize(base);
    tr_.completed[method] |= flag;
    return result;
  }

  Flow exec_block(const std::vector<Stmt>& body) {
    for (const auto& s : body) {
      if (exec(s) == Flow::Return) return Flow::Return;
    }
    return Flow::Next;
  }

  Flow exec(const Stmt& s) {
    tick();
    tr_.lines_hit[s.pos.line] = 1;
    switch (s.kind) {
      case Stmt::Kind::Let:
      case Stmt::Kind::Assign: {
        std::int64_t v = eval(*s.expr);
        stack_[base_ + static_cast<std::size_t>(s.slot)] = v;
        return Flow::Next;
      }
      case Stmt::Kind::ExprStmt: eval(*s.expr); return Flow::Next;
      case Stmt::Kind::If:
        if (branch(s)) return exec_block(s.body);
        return exec_block(s.else_body);
      case Stmt::Kind::While:
        while (branch(s)) {
          if (exec_block(s.body) == Flow::Return) return Flow::Return;
          tick();
          tr_.lines_hit[s.pos.line] = 1;
        }
        return Flow::Next;
      case Stmt::Kind::Return:
        ret_ = s.expr ? eval(*s.expr) : 0;
        return Flow::Return;
      case Stmt::Kind::Throw: throw Fault{nullptr, &s.tag};
    }
    return Flow::Next;
  }

  bool branch(const Stmt& s) {
    Cond c = cond(*s.expr);
    PredicateExecution pe{s.site, c.to_true, c.to_false, direct_};
    tr_.predicate_log.push_back(pe);
    auto note = [&](SiteStats& st) {
      ++st.executions;
      st.min_true = std::min(st.min_true, pe.true_distance);
      st.min_false = std::min(st.min_false, pe.false_distance);
    };
    note(tr_.sites[s.site]);
    if (direct_) note(tr_.direct_sites[s.site]);
    return c.value;
  }

  Cond cond(const Expr& e) {
    if (e.kind == Expr::Kind::Binary) {
      if (e.binary_op == BinaryOp::LogicalAnd) {
        Cond l = cond(*e.lhs);
        if (!l.value) return {false, l.to_true + 1.0, 0.0};
        Cond r = cond(*e.rhs);
        return {r.value, l.to_true + r.to_true, std::min(l.to_false, r.to_false)};
      }
      if (e.binary_op == BinaryOp::LogicalOr) {
        Cond l = cond(*e.lhs);
        if (l.value) return {true, 0.0, l.to_false + 1.0};
        Cond r = cond(*e.rhs);
        return {r.value, std::min(l.to_true, r.to_true), l.to_false + r.to_false};
      }
      if (is_comparison(e.binary_op)) return comparison(e);
    }
    if (e.kind == Expr::Kind::Unary && e.unary_op == UnaryOp::Not) {
      Cond c = cond(*e.lhs);
      return {!c.value, c.to_false, c.to_true};
    }
    bool v = eval(e) != 0;
    return {v, v ? 0.0 : 1.0, v ? 1.0 : 0.0};
  }

  Cond comparison(const Expr& e) {
    std::int64_t a = eval(*e.lhs);
    std::int64_t b = eval(*e.rhs);
    BranchDistance orig = comparison_distance(e.binary_op, a, b);
    bool orig_value = orig.to_true == 0;
    if (!is_mutated(e)) return {orig_value, orig.to_true, orig.to_false};

    Cond mutated{};
    double flip_mutated = kNoDistance;
    if (mut_->kind == Mutation::Kind::ReplaceWithBool) {
      bool v = mut_->value != 0;
      mutated = {v, v ? 0.0 : 1.0, v ? 1.0 : 0.0};
    } else {
      BranchDistance md = comparison_distance(mut_->op, a, b);
      mutated = {md.to_true == 0, md.to_true, md.to_false};
      flip_mutated = mutated.value ? md.to_false : md.to_true;
    }
    double flip_orig = orig_value ? orig.to_false : orig.to_true;
    infect(mutated.value != orig_value ? 0.0 : std::min(flip_orig, flip_mutated));
    return mutated;
  }

  std::int64_t checked(Outcome o) {
    if (o.fault) throw Fault{o.tag};
    return o.value;
  }

  std::int64_t eval(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLiteral:
      case Expr::Kind::BoolLiteral:
        if (is_mutated(e) && mut_->kind == Mutation::Kind::ReplaceLiteral) {
          infect(mut_->value != e.value ? 0.0 : 1.0);
          return mut_->value;
        }
        return e.value;
      case Expr::Kind::Variable: {
        std::int64_t v = stack_[base_ + static_cast<std::size_t>(e.slot)];
        if (!is_mutated(e)) return v;
        if (mut_->kind == Mutation::Kind::ReplaceVariable) {
          std::int64_t other = stack_[base_ + static_cast<std::size_t>(mut_->value)];
          infect(other != v ? 0.0 : 1.0);
          return other;
        }
        if (mut_->kind == Mutation::Kind::InsertUnary) {
          infect(0.0);
          switch (mut_->unary) {
            case Mutation::Unary::PlusOne: return checked(arith(BinaryOp::Add, v, 1));
            case Mutation::Unary::MinusOne: return checked(arith(BinaryOp::Sub, v, 1));
            case Mutation::Unary::Negate: return checked(arith(BinaryOp::Sub, 0, v));
          }
        }
        return v;
      }
      case Expr::Kind::Unary: {
        if (e.unary_op == UnaryOp::Not) return eval(*e.lhs) == 0 ? 1 : 0;
        std::int64_t v = eval(*e.lhs);
        if (e.unary_op == UnaryOp::BitNot) return ~v;
        return checked(arith(BinaryOp::Sub, 0, v));
      }
      case Expr::Kind::Binary: {
        if (is_logical(e.binary_op) || is_comparison(e.binary_op)) return cond(e).value ? 1 : 0;
        std::int64_t a = eval(*e.lhs);
        std::int64_t b = eval(*e.rhs);
        Outcome orig = arith(e.binary_op, a, b);
        if (!is_mutated(e)) return checked(orig);
        Outcome mutated = arith(mut_->op, a, b);
        infect(orig == mutated ? 1.0 : 0.0);
        return checked(mutated);
      }
      case Expr::Kind::Call: {
        std::int64_t buf[16];
        std::vector<std::int64_t> heap;
        std::int64_t* args = buf;
        if (e.args.size() > 16) {
          heap.resize(e.args.size());
          args = heap.data();
        }
        for (std::size_t k = 0; k < e.args.size(); ++k) args[k] = eval(*e.args[k]);
        return invoke(e.callee, args, false);
      }
    }
    return 0;
  }

  const Program& p_;
  const Mutation* mut_;
  std::int64_t fuel_;
  ExecutionTrace& tr_;
  std::vector<std::int64_t> stack_;
  std::size_t base_ = 0;
  bool direct_ = false;
  int depth_ = 0;
  std::int64_t ret_ = 0;
};

}  // namespace

void Interpreter::validate(const TestCase& test) const {
  const int n = static_cast<int>(program_.methods.size());
  for (std::size_t i = 0; i < test.calls.size(); ++i) {
    const auto& call = test.calls[i];
    if (call.method < 0 || call.method >= n) {
      throw InvalidCall("statement " + std::to_string(i) + ": unknown method " + std::to_string(call.method));
    }
    const auto& m = program_.methods[call.method];
    if (call.args.size() != m.params.size()) {
      throw InvalidCall("statement " + std::to_string(i) + ": '" + m.name + "' expects " +
                        std::to_string(m.params.size()) + " arguments");
    }
    for (std::size_t k = 0; k < call.args.size(); ++k) {
      const auto& a = call.args[k];
      const Type want = m.params[k].type;
      if (a.kind == Argument::Kind::Literal) {
        if (want == Type::Bool && a.value != 0 && a.value != 1) {
          throw InvalidCall("statement " + std::to_string(i) + ": argument " + std::to_string(k) + " is not a bool");
        }
      } else {
        if (a.slot < 0 || a.slot >= static_cast<int>(i)) {
          throw InvalidCall("statement " + std::to_string(i) + ": slot " + std::to_string(a.slot) +
                            " is not an earlier statement");
        }
        Type got = program_.methods[test.calls[a.slot].method].return_type;
        if (got != want) {
          throw InvalidCall("statement " + std::to_string(i) + ": slot " + std::to_string(a.slot) + " has type " +
                            std::string(to_string(got)) + ", expected " + std::string(to_string(want)));
        }
      }
    }
  }
}

ExecutionTrace Interpreter::execute(const TestCase& test, const Mutation* mutant, std::int64_t fuel) const {
  validate(test);
  ExecutionTrace tr;
  Run run(program_, mutant, fuel, tr);
  run.test(test);
  return tr;
}

nlohmann::json to_json(const ExecutionTrace& trace) {
  using nlohmann::json;
  auto distance = [](double d) { return std::isinf(d) ? json(nullptr) : json(d); };
  json preds = json::array();
  for (const auto& pe : trace.predicate_log) {
    preds.push_back({pe.site, distance(pe.true_distance), distance(pe.false_distance), pe.direct});
  }
  json lines = json::array();
  for (std::size_t l = 0; l < trace.lines_hit.size(); ++l) {
    if (trace.lines_hit[l]) lines.push_back(l);
  }
  json exceptions = json::array();
  for (const auto& ev : trace.exceptions) exceptions.push_back({ev.method, ev.tag});
  json returns = json::array();
  for (const auto& r : trace.returns) returns.push_back({r.method, r.value});
  json out = {
      {"predicates", preds},
      {"lines_hit", lines},
      {"entered", trace.entered},
      {"completed", trace.completed},
      {"exceptions", exceptions},
      {"returns", returns},
      {"fuel_exhausted", trace.fuel_exhausted},
      {"steps", trace.steps},
  };
  out["mutant_infection"] = trace.mutant_infection ? json(*trace.mutant_infection) : json(nullptr);
  return out;
}

}  // namespace sbst::lang
