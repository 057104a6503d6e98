#include "sbst/parser.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "sbst/errors.hpp"

namespace sbst::lang {
namespace {

enum class Tok {
  End, Ident, Number,
  KwFn, KwLet, KwIf, KwElse, KwWhile, KwReturn, KwThrow, KwTrue, KwFalse, KwInt, KwBool, KwVoid,
  LParen, RParen, LBrace, RBrace, Comma, Colon, Semi, Arrow, Assign,
  EqEq, NotEq, Lt, Le, Gt, Ge, Plus, Minus, Star, Slash, Percent,
  Amp, Pipe, Caret, Tilde, Bang, AndAnd, OrOr,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourcePos pos;
};

std::string describe(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::Number: return "integer literal";
    case Tok::KwFn: return "'fn'";
    case Tok::KwLet: return "'let'";
    case Tok::KwIf: return "'if'";
    case Tok::KwElse: return "'else'";
    case Tok::KwWhile: return "'while'";
    case Tok::KwReturn: return "'return'";
    case Tok::KwThrow: return "'throw'";
    case Tok::KwTrue: return "'true'";
    case Tok::KwFalse: return "'false'";
    case Tok::KwInt: return "'int'";
    case Tok::KwBool: return "'bool'";
    case Tok::KwVoid: return "'void'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Semi: return "';'";
    case Tok::Arrow: return "'->'";
    case Tok::Assign: return "'='";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Percent: return "'%'";
    case Tok::Amp: return "'&'";
    case Tok::Pipe: return "'|'";
    case Tok::Caret: return "'^'";
    case Tok::Tilde: return "'~'";
    case Tok::Bang: return "'!'";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.pos = {line_, col_};
      if (at_end()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = peek();
      if (is_ident_start(c)) {
        std::size_t start = i_;
        while (!at_end() && is_ident_char(peek())) advance();
        t.text = std::string(src_.substr(start, i_ - start));
        t.kind = keyword(t.text);
      } else if (c >= '0' && c <= '9') {
        std::size_t start = i_;
        while (!at_end() && peek() >= '0' && peek() <= '9') advance();
        if (!at_end() && is_ident_start(peek())) {
          throw SyntaxError(line_, col_, "malformed integer literal");
        }
        t.text = std::string(src_.substr(start, i_ - start));
        t.kind = Tok::Number;
      } else {
        t.kind = punct();
      }
      out.push_back(std::move(t));
    }
  }

 private:
  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

  static Tok keyword(const std::string& s) {
    static const std::map<std::string, Tok> kw = {
        {"fn", Tok::KwFn},         {"let", Tok::KwLet},     {"if", Tok::KwIf},
        {"else", Tok::KwElse},     {"while", Tok::KwWhile}, {"return", Tok::KwReturn},
        {"throw", Tok::KwThrow},   {"true", Tok::KwTrue},   {"false", Tok::KwFalse},
        {"int", Tok::KwInt},       {"bool", Tok::KwBool},   {"void", Tok::KwVoid},
    };
    auto it = kw.find(s);
    return it == kw.end() ? Tok::Ident : it->second;
  }

  bool at_end() const { return i_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
  }
  void advance() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip_space() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  Tok punct() {
    char c = peek();
    char n = peek(1);
    auto two = [&](Tok t) {
      advance();
      advance();
      return t;
    };
    auto one = [&](Tok t) {
      advance();
      return t;
    };
    switch (c) {
      case '(': return one(Tok::LParen);
      case ')': return one(Tok::RParen);
      case '{': return one(Tok::LBrace);
      case '}': return one(Tok::RBrace);
      case ',': return one(Tok::Comma);
      case ':': return one(Tok::Colon);
      case ';': return one(Tok::Semi);
      case '+': return one(Tok::Plus);
      case '*': return one(Tok::Star);
      case '/': return one(Tok::Slash);
      case '%': return one(Tok::Percent);
      case '^': return one(Tok::Caret);
      case '~': return one(Tok::Tilde);
      case '-': return n == '>' ? two(Tok::Arrow) : one(Tok::Minus);
      case '=': return n == '=' ? two(Tok::EqEq) : one(Tok::Assign);
      case '!': return n == '=' ? two(Tok::NotEq) : one(Tok::Bang);
      case '<': return n == '=' ? two(Tok::Le) : one(Tok::Lt);
      case '>': return n == '=' ? two(Tok::Ge) : one(Tok::Gt);
      case '&': return n == '&' ? two(Tok::AndAnd) : one(Tok::Amp);
      case '|': return n == '|' ? two(Tok::OrOr) : one(Tok::Pipe);
      default: break;
    }
    throw SyntaxError(line_, col_, std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program(std::string name) {
    Program p;
    p.name = std::move(name);
    while (!at(Tok::End)) p.methods.push_back(method());
    return p;
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  bool at(Tok t) const { return cur().kind == t; }
  Token take() { return toks_[i_++]; }

  [[noreturn]] void fail(std::vector<Tok> expected) const {
    std::vector<std::string> names;
    std::string msg = "expected ";
    for (std::size_t k = 0; k < expected.size(); ++k) {
      names.push_back(describe(expected[k]));
      if (k) msg += k + 1 == expected.size() ? " or " : ", ";
      msg += names.back();
    }
    msg += ", found " + (cur().kind == Tok::Ident || cur().kind == Tok::Number
                             ? "'" + cur().text + "'"
                             : describe(cur().kind));
    throw SyntaxError(cur().pos.line, cur().pos.column, msg, names);
  }

  Token expect(Tok t) {
    if (!at(t)) fail({t});
    return take();
  }

  bool accept(Tok t) {
    if (!at(t)) return false;
    ++i_;
    return true;
  }

  Type type_name(bool allow_void) {
    if (accept(Tok::KwInt)) return Type::Int;
    if (accept(Tok::KwBool)) return Type::Bool;
    if (allow_void && accept(Tok::KwVoid)) return Type::Void;
    if (allow_void) fail({Tok::KwInt, Tok::KwBool, Tok::KwVoid});
    fail({Tok::KwInt, Tok::KwBool});
  }

  MethodDef method() {
    MethodDef m;
    if (!at(Tok::KwFn)) fail({Tok::KwFn});
    m.pos = take().pos;
    m.name = expect(Tok::Ident).text;
    expect(Tok::LParen);
    if (!at(Tok::RParen)) {
      do {
        Param p;
        p.name = expect(Tok::Ident).text;
        expect(Tok::Colon);
        p.type = type_name(false);
        m.params.push_back(std::move(p));
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen);
    if (accept(Tok::Arrow)) m.return_type = type_name(true);
    m.body = block();
    return m;
  }

  std::vector<Stmt> block() {
    expect(Tok::LBrace);
    std::vector<Stmt> body;
    while (!at(Tok::RBrace)) {
      if (at(Tok::End)) fail({Tok::RBrace});
      body.push_back(statement());
    }
    take();
    return body;
  }

  Stmt statement() {
    Stmt s;
    s.pos = cur().pos;
    switch (cur().kind) {
      case Tok::KwLet: {
        take();
        s.kind = Stmt::Kind::Let;
        s.name = expect(Tok::Ident).text;
        if (accept(Tok::Colon)) {
          s.has_declared_type = true;
          s.declared_type = type_name(false);
        }
        expect(Tok::Assign);
        s.expr = expression();
        expect(Tok::Semi);
        return s;
      }
      case Tok::KwIf: return if_statement();
      case Tok::KwWhile: {
        take();
        s.kind = Stmt::Kind::While;
        expect(Tok::LParen);
        s.expr = expression();
        expect(Tok::RParen);
        s.body = block();
        return s;
      }
      case Tok::KwReturn: {
        take();
        s.kind = Stmt::Kind::Return;
        if (!at(Tok::Semi)) s.expr = expression();
        expect(Tok::Semi);
        return s;
      }
      case Tok::KwThrow: {
        take();
        s.kind = Stmt::Kind::Throw;
        s.tag = expect(Tok::Ident).text;
        expect(Tok::Semi);
        return s;
      }
      case Tok::Ident:
        if (toks_[i_ + 1].kind == Tok::Assign) {
          s.kind = Stmt::Kind::Assign;
          s.name = take().text;
          take();
          s.expr = expression();
          expect(Tok::Semi);
          return s;
        }
        break;
      default: break;
    }
    if (!starts_expression()) {
      fail({Tok::KwLet, Tok::KwIf, Tok::KwWhile, Tok::KwReturn, Tok::KwThrow, Tok::Ident, Tok::RBrace});
    }
    s.kind = Stmt::Kind::ExprStmt;
    s.expr = expression();
    expect(Tok::Semi);
    return s;
  }

  Stmt if_statement() {
    Stmt s;
    s.pos = cur().pos;
    expect(Tok::KwIf);
    s.kind = Stmt::Kind::If;
    expect(Tok::LParen);
    s.expr = expression();
    expect(Tok::RParen);
    s.body = block();
    if (accept(Tok::KwElse)) {
      if (at(Tok::KwIf)) {
        s.else_body.push_back(if_statement());
      } else {
        s.else_body = block();
      }
    }
    return s;
  }

  bool starts_expression() const {
    switch (cur().kind) {
      case Tok::Ident:
      case Tok::Number:
      case Tok::KwTrue:
      case Tok::KwFalse:
      case Tok::LParen:
      case Tok::Minus:
      case Tok::Bang:
      case Tok::Tilde: return true;
      default: return false;
    }
  }

  static std::unique_ptr<Expr> binary(BinaryOp op, SourcePos pos, std::unique_ptr<Expr> l,
                                      std::unique_ptr<Expr> r) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Binary;
    e->binary_op = op;
    e->pos = pos;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    return e;
  }

  std::unique_ptr<Expr> expression() { return level(0); }

  // Precedence levels from loosest to tightest.
  std::unique_ptr<Expr> level(int depth) {
    struct Entry {
      Tok tok;
      BinaryOp op;
    };
    static const std::vector<std::vector<Entry>> table = {
        {{Tok::OrOr, BinaryOp::LogicalOr}},
        {{Tok::AndAnd, BinaryOp::LogicalAnd}},
        {{Tok::Pipe, BinaryOp::BitOr}},
        {{Tok::Caret, BinaryOp::BitXor}},
        {{Tok::Amp, BinaryOp::BitAnd}},
        {{Tok::EqEq, BinaryOp::Eq}, {Tok::NotEq, BinaryOp::Ne}},
        {{Tok::Lt, BinaryOp::Lt}, {Tok::Le, BinaryOp::Le}, {Tok::Gt, BinaryOp::Gt}, {Tok::Ge, BinaryOp::Ge}},
        {{Tok::Plus, BinaryOp::Add}, {Tok::Minus, BinaryOp::Sub}},
        {{Tok::Star, BinaryOp::Mul}, {Tok::Slash, BinaryOp::Div}, {Tok::Percent, BinaryOp::Mod}},
    };
    if (depth == static_cast<int>(table.size())) return unary();
    auto lhs = level(depth + 1);
    for (;;) {
      const Entry* hit = nullptr;
      for (const auto& en : table[depth]) {
        if (at(en.tok)) hit = &en;
      }
      if (!hit) return lhs;
      SourcePos pos = take().pos;
      auto rhs = level(depth + 1);
      lhs = binary(hit->op, pos, std::move(lhs), std::move(rhs));
    }
  }

  std::unique_ptr<Expr> unary() {
    auto make = [&](UnaryOp op) {
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Unary;
      e->unary_op = op;
      e->pos = take().pos;
      e->lhs = unary();
      return e;
    };
    if (at(Tok::Minus)) return make(UnaryOp::Neg);
    if (at(Tok::Bang)) return make(UnaryOp::Not);
    if (at(Tok::Tilde)) return make(UnaryOp::BitNot);
    return primary();
  }

  std::unique_ptr<Expr> primary() {
    auto e = std::make_unique<Expr>();
    e->pos = cur().pos;
    switch (cur().kind) {
      case Tok::Number: {
        Token t = take();
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc()) throw SyntaxError(t.pos.line, t.pos.column, "integer literal out of range");
        e->kind = Expr::Kind::IntLiteral;
        e->value = v;
        return e;
      }
      case Tok::KwTrue:
      case Tok::KwFalse:
        e->kind = Expr::Kind::BoolLiteral;
        e->value = take().kind == Tok::KwTrue ? 1 : 0;
        return e;
      case Tok::LParen: {
        take();
        auto inner = expression();
        expect(Tok::RParen);
        return inner;
      }
      case Tok::Ident: {
        e->name = take().text;
        if (accept(Tok::LParen)) {
          e->kind = Expr::Kind::Call;
          if (!at(Tok::RParen)) {
            do {
              e->args.push_back(expression());
            } while (accept(Tok::Comma));
          }
          expect(Tok::RParen);
        } else {
          e->kind = Expr::Kind::Variable;
        }
        return e;
      }
      default:
        fail({Tok::Ident, Tok::Number, Tok::KwTrue, Tok::KwFalse, Tok::LParen});
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

// Name resolution, typing, id assignment and the all-paths-return check.
class Checker {
 public:
  explicit Checker(Program& p) : p_(p) {}

  void run() {
    std::map<std::string, int> seen;
    for (std::size_t k = 0; k < p_.methods.size(); ++k) {
      auto& m = p_.methods[k];
      m.index = static_cast<int>(k);
      if (!seen.emplace(m.name, m.index).second) throw DuplicateMethod(m.pos.line, m.pos.column, m.name);
    }
    for (auto& m : p_.methods) method(m);
    p_.int_constants.assign(constants_.begin(), constants_.end());
  }

 private:
  struct Var {
    std::string name;
    int slot;
    Type type;
  };

  void method(MethodDef& m) {
    method_ = &m;
    scopes_.clear();
    scopes_.emplace_back();
    m.slot_types.clear();
    m.slot_names.clear();
    note_line(m.pos.line);
    for (const auto& param : m.params) declare(param.name, param.type, m.pos);
    stmts(m.body);
    m.frame_size = static_cast<int>(m.slot_types.size());
    if (m.return_type != Type::Void && !terminates(m.body)) {
      throw TypeError(m.pos.line, m.pos.column, "method '" + m.name + "' does not return on all paths");
    }
  }

  void note_line(int line) { p_.max_line = std::max(p_.max_line, line); }

  int declare(const std::string& name, Type type, SourcePos pos) {
    if (lookup(name)) throw TypeError(pos.line, pos.column, "variable '" + name + "' already declared");
    int slot = static_cast<int>(method_->slot_types.size());
    method_->slot_types.push_back(type);
    method_->slot_names.push_back(name);
    scopes_.back().push_back({name, slot, type});
    return slot;
  }

  const Var* lookup(const std::string& name) const {
    for (auto s = scopes_.rbegin(); s != scopes_.rend(); ++s) {
      for (const auto& v : *s) {
        if (v.name == name) return &v;
      }
    }
    return nullptr;
  }

  static bool terminates(const std::vector<Stmt>& body) {
    for (const auto& s : body) {
      if (s.kind == Stmt::Kind::Return || s.kind == Stmt::Kind::Throw) return true;
      if (s.kind == Stmt::Kind::If && !s.else_body.empty() && terminates(s.body) && terminates(s.else_body)) {
        return true;
      }
    }
    return false;
  }

  void stmts(std::vector<Stmt>& body) {
    for (auto& s : body) stmt(s);
  }

  void scoped(std::vector<Stmt>& body) {
    scopes_.emplace_back();
    stmts(body);
    scopes_.pop_back();
  }

  static TypeError mismatch(SourcePos pos, const std::string& what, Type want, Type got) {
    return TypeError(pos.line, pos.column,
                     what + ": expected " + std::string(to_string(want)) + ", found " + std::string(to_string(got)));
  }

  void stmt(Stmt& s) {
    s.id = p_.stmt_count++;
    note_line(s.pos.line);
    switch (s.kind) {
      case Stmt::Kind::Let: {
        Type t = expr(*s.expr);
        if (t == Type::Void) throw TypeError(s.pos.line, s.pos.column, "cannot bind a void value");
        if (s.has_declared_type && s.declared_type != t) throw mismatch(s.pos, "initializer", s.declared_type, t);
        s.declared_type = t;
        s.slot = declare(s.name, t, s.pos);
        break;
      }
      case Stmt::Kind::Assign: {
        const Var* v = lookup(s.name);
        if (!v) throw TypeError(s.pos.line, s.pos.column, "unknown variable '" + s.name + "'");
        s.slot = v->slot;
        Type want = v->type;
        Type t = expr(*s.expr);
        if (t != want) throw mismatch(s.pos, "assignment", want, t);
        break;
      }
      case Stmt::Kind::If: {
        s.site = p_.site_count++;
        Type t = expr(*s.expr);
        if (t != Type::Bool) throw mismatch(s.expr->pos, "condition", Type::Bool, t);
        scoped(s.body);
        scoped(s.else_body);
        break;
      }
      case Stmt::Kind::While: {
        s.site = p_.site_count++;
        Type t = expr(*s.expr);
        if (t != Type::Bool) throw mismatch(s.expr->pos, "condition", Type::Bool, t);
        scoped(s.body);
        break;
      }
      case Stmt::Kind::Return: {
        Type t = s.expr ? expr(*s.expr) : Type::Void;
        if (t != method_->return_type) throw mismatch(s.pos, "return value", method_->return_type, t);
        break;
      }
      case Stmt::Kind::Throw: break;
      case Stmt::Kind::ExprStmt:
        if (s.expr->kind != Expr::Kind::Call) {
          throw TypeError(s.pos.line, s.pos.column, "expression statement must be a call");
        }
        expr(*s.expr);
        break;
    }
  }

  Type expr(Expr& e) {
    e.id = p_.expr_count++;
    note_line(e.pos.line);
    switch (e.kind) {
      case Expr::Kind::IntLiteral:
        constants_.insert(e.value);
        return e.type = Type::Int;
      case Expr::Kind::BoolLiteral: return e.type = Type::Bool;
      case Expr::Kind::Variable: {
        const Var* v = lookup(e.name);
        if (!v) throw TypeError(e.pos.line, e.pos.column, "unknown variable '" + e.name + "'");
        e.slot = v->slot;
        for (const auto& scope : scopes_) {
          for (const auto& other : scope) {
            if (other.slot != v->slot && other.type == v->type) e.same_type_slots.push_back(other.slot);
          }
        }
        return e.type = v->type;
      }
      case Expr::Kind::Unary: {
        // Literal negation folds into the constant pool as well.
        if (e.unary_op == UnaryOp::Neg && e.lhs->kind == Expr::Kind::IntLiteral) constants_.insert(-e.lhs->value);
        Type t = expr(*e.lhs);
        Type want = e.unary_op == UnaryOp::Not ? Type::Bool : Type::Int;
        if (t != want) throw mismatch(e.pos, std::string("operand of '") + std::string(symbol(e.unary_op)) + "'", want, t);
        return e.type = want;
      }
      case Expr::Kind::Binary: {
        Type l = expr(*e.lhs);
        Type r = expr(*e.rhs);
        std::string what = std::string("operand of '") + std::string(symbol(e.binary_op)) + "'";
        if (is_logical(e.binary_op)) {
          if (l != Type::Bool) throw mismatch(e.pos, what, Type::Bool, l);
          if (r != Type::Bool) throw mismatch(e.pos, what, Type::Bool, r);
          return e.type = Type::Bool;
        }
        if (e.binary_op == BinaryOp::Eq || e.binary_op == BinaryOp::Ne) {
          if (l == Type::Void) throw TypeError(e.pos.line, e.pos.column, what + ": void value");
          if (l != r) throw mismatch(e.pos, what, l, r);
          return e.type = Type::Bool;
        }
        if (l != Type::Int) throw mismatch(e.pos, what, Type::Int, l);
        if (r != Type::Int) throw mismatch(e.pos, what, Type::Int, r);
        return e.type = is_comparison(e.binary_op) ? Type::Bool : Type::Int;
      }
      case Expr::Kind::Call: {
        int callee = p_.find_method(e.name);
        if (callee < 0) throw TypeError(e.pos.line, e.pos.column, "unknown method '" + e.name + "'");
        e.callee = callee;
        const auto& target = p_.methods[callee];
        if (target.params.size() != e.args.size()) {
          throw TypeError(e.pos.line, e.pos.column,
                          "method '" + e.name + "' expects " + std::to_string(target.params.size()) +
                              " arguments, found " + std::to_string(e.args.size()));
        }
        for (std::size_t k = 0; k < e.args.size(); ++k) {
          Type t = expr(*e.args[k]);
          if (t != target.params[k].type) throw mismatch(e.args[k]->pos, "argument", target.params[k].type, t);
        }
        return e.type = target.return_type;
      }
    }
    return Type::Void;
  }

  Program& p_;
  MethodDef* method_ = nullptr;
  std::vector<std::vector<Var>> scopes_;
  std::set<std::int64_t> constants_;
};

}  // namespace

Program parse(std::string_view source, std::string name) {
  Parser parser(Lexer(source).run());
  Program p = parser.program(std::move(name));
  Checker(p).run();
  return p;
}

Program parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  if (auto dot = name.rfind(".mini"); dot != std::string::npos && dot + 5 == name.size()) name.resize(dot);
  return parse(buf.str(), name);
}

}  // namespace sbst::lang
