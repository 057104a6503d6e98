#pragma once

#include <string>
#include <vector>

#include "sbst/ast.hpp"

namespace sbst::lang {

// One outcome of a branch site; the unit of control dependence.
struct BranchOutcome {
  int site = -1;
  bool outcome = true;

  friend bool operator==(const BranchOutcome&, const BranchOutcome&) = default;
  friend auto operator<=>(const BranchOutcome&, const BranchOutcome&) = default;
};

struct BasicBlock {
  int id = -1;
  int method = -1;
  std::vector<int> lines;       // owned source lines, ascending
  std::vector<int> statements;  // statement ids in execution order
  std::vector<int> successors;  // block ids; the method exit is not a block
  bool exits = false;           // has an edge to the method exit
};

struct BranchSite {
  int id = -1;
  int method = -1;
  int block = -1;  // block evaluating the condition
  int line = 0;
  std::string op;  // top-level operator of the condition ("<", "&&", "var", ...)
  int true_block = -1;
  int false_block = -1;
  bool loop = false;
};

struct MethodDescriptor {
  int index = -1;
  std::string name;
  std::vector<Type> params;
  Type return_type = Type::Void;
  int entry_block = -1;
};

// Basic blocks, branch sites and the control-dependence graph of a program.
//
// `control_deps[b]` is the full postdominance-based dependence set of block b.
// `guards[b]` keeps only dependences whose outcome edge lies on every path
// from the entry to b; it is acyclic and is what the approach level and goal
// activation walk.
struct ControlFlowModel {
  std::vector<BasicBlock> blocks;
  std::vector<BranchSite> branch_sites;
  std::vector<std::vector<BranchOutcome>> control_deps;
  std::vector<std::vector<BranchOutcome>> guards;
  std::vector<int> depth;  // guard-chain length to the method entry
  std::vector<MethodDescriptor> public_methods;

  std::vector<int> line_block;  // line -> owning block, -1 when the line has no statement
  std::vector<int> stmt_block;  // statement id -> block

  std::vector<int> lines() const;  // every statement line, ascending
  int block_of_line(int line) const;
  int site_depth(int site) const { return depth[branch_sites[site].block]; }
};

ControlFlowModel build_cfm(const Program& program);

// Dominator tree over an arbitrary digraph rooted at `root`.
// Returns idom per node; root maps to itself, unreachable nodes to -1.
std::vector<int> immediate_dominators(const std::vector<std::vector<int>>& successors, int root);

}  // namespace sbst::lang
