#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sbst::lang {

enum class Type : std::uint8_t { Int, Bool, Void };

enum class BinaryOp : std::uint8_t {
  Add, Sub, Mul, Div, Mod,
  BitAnd, BitOr, BitXor,
  Lt, Le, Gt, Ge, Eq, Ne,
  LogicalAnd, LogicalOr,
};

enum class UnaryOp : std::uint8_t { Neg, Not, BitNot };

std::string_view to_string(Type type);
std::string_view symbol(BinaryOp op);
std::string_view symbol(UnaryOp op);
// Short mnemonic used in goal ids and subsumption-table keys ("lt", "add", ...).
std::string_view mnemonic(BinaryOp op);

bool is_arithmetic(BinaryOp op);
bool is_bitwise(BinaryOp op);
bool is_comparison(BinaryOp op);
bool is_logical(BinaryOp op);

struct SourcePos {
  int line = 0;
  int column = 0;
};

struct Expr {
  enum class Kind : std::uint8_t { IntLiteral, BoolLiteral, Variable, Unary, Binary, Call };

  Kind kind = Kind::IntLiteral;
  Type type = Type::Void;
  int id = -1;  // pre-order index over the whole program
  SourcePos pos;

  std::int64_t value = 0;  // literal value; bools are 0/1
  std::string name;        // variable or callee
  int slot = -1;
  int callee = -1;
  UnaryOp unary_op = UnaryOp::Neg;
  BinaryOp binary_op = BinaryOp::Add;

  std::unique_ptr<Expr> lhs;  // unary operand uses lhs
  std::unique_ptr<Expr> rhs;
  std::vector<std::unique_ptr<Expr>> args;

  // Other variables of the same type visible at this read.
  std::vector<int> same_type_slots;
};

struct Stmt {
  enum class Kind : std::uint8_t { Let, Assign, If, While, Return, Throw, ExprStmt };

  Kind kind = Kind::ExprStmt;
  int id = -1;
  SourcePos pos;

  std::string name;  // Let / Assign target
  int slot = -1;
  bool has_declared_type = false;
  Type declared_type = Type::Int;

  std::unique_ptr<Expr> expr;  // value, condition, or return value (null for bare return)
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;

  int site = -1;    // branch site of If / While
  std::string tag;  // Throw
};

struct Param {
  std::string name;
  Type type = Type::Int;
};

struct MethodDef {
  std::string name;
  std::vector<Param> params;
  Type return_type = Type::Void;
  std::vector<Stmt> body;
  SourcePos pos;
  int index = -1;
  int frame_size = 0;
  std::vector<Type> slot_types;
  std::vector<std::string> slot_names;
};

struct Program {
  std::string name;
  std::vector<MethodDef> methods;

  int expr_count = 0;
  int stmt_count = 0;
  int site_count = 0;
  int max_line = 0;

  // Integer constants appearing in the text, sorted and unique.
  std::vector<std::int64_t> int_constants;

  int find_method(std::string_view name) const;
};

// Pre-order traversal helpers.
template <typename Fn>
void for_each_expr(const Expr& e, Fn&& fn) {
  fn(e);
  if (e.lhs) for_each_expr(*e.lhs, fn);
  if (e.rhs) for_each_expr(*e.rhs, fn);
  for (const auto& a : e.args) for_each_expr(*a, fn);
}

template <typename Fn>
void for_each_stmt(const std::vector<Stmt>& body, Fn&& fn) {
  for (const auto& s : body) {
    fn(s);
    for_each_stmt(s.body, fn);
    for_each_stmt(s.else_body, fn);
  }
}

}  // namespace sbst::lang
