#include "sbst/cfg.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace sbst::lang {

std::vector<int> immediate_dominators(const std::vector<std::vector<int>>& successors, int root) {
  const int n = static_cast<int>(successors.size());
  std::vector<std::vector<int>> preds(n);
  for (int u = 0; u < n; ++u) {
    for (int v : successors[u]) preds[v].push_back(u);
  }

  // Iterative DFS postorder.
  std::vector<int> order;
  std::vector<int> rpo_index(n, -1);
  std::vector<char> seen(n, 0);
  std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
  seen[root] = 1;
  while (!stack.empty()) {
    auto& [u, next] = stack.back();
    if (next < successors[u].size()) {
      int v = successors[u][next++];
      if (!seen[v]) {
        seen[v] = 1;
        stack.emplace_back(v, 0);
      }
    } else {
      order.push_back(u);
      stack.pop_back();
    }
  }
  std::reverse(order.begin(), order.end());
  for (std::size_t k = 0; k < order.size(); ++k) rpo_index[order[k]] = static_cast<int>(k);

  std::vector<int> idom(n, -1);
  idom[root] = root;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (rpo_index[a] > rpo_index[b]) a = idom[a];
      while (rpo_index[b] > rpo_index[a]) b = idom[b];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int u : order) {
      if (u == root) continue;
      int pick = -1;
      for (int p : preds[u]) {
        if (idom[p] == -1) continue;
        pick = pick == -1 ? p : intersect(p, pick);
      }
      if (pick != -1 && idom[u] != pick) {
        idom[u] = pick;
        changed = true;
      }
    }
  }
  return idom;
}

namespace {

std::string condition_op(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Binary: return std::string(symbol(e.binary_op));
    case Expr::Kind::Unary: return std::string(symbol(e.unary_op));
    case Expr::Kind::Variable: return "var";
    case Expr::Kind::Call: return "call";
    default: return "const";
  }
}

class Builder {
 public:
  Builder(const Program& p, ControlFlowModel& m) : p_(p), m_(m) {}

  void run() {
    m_.branch_sites.resize(p_.site_count);
    m_.stmt_block.assign(p_.stmt_count, -1);
    m_.line_block.assign(p_.max_line + 1, -1);
    for (const auto& method : p_.methods) build_method(method);
    for (auto& b : m_.blocks) {
      std::sort(b.lines.begin(), b.lines.end());
      b.lines.erase(std::unique(b.lines.begin(), b.lines.end()), b.lines.end());
    }
  }

 private:
  struct Edge {
    int from;
    int to;  // -1 = exit
    int site;
    bool outcome;
  };

  int new_block() {
    BasicBlock b;
    b.id = static_cast<int>(m_.blocks.size());
    b.method = method_;
    m_.blocks.push_back(std::move(b));
    return m_.blocks.back().id;
  }

  void edge(int from, int to, int site = -1, bool outcome = false) {
    edges_.push_back({from, to, site, outcome});
    if (to >= 0) {
      m_.blocks[from].successors.push_back(to);
    } else {
      m_.blocks[from].exits = true;
    }
  }

  void place(const Stmt& s, int block) {
    m_.stmt_block[s.id] = block;
    m_.blocks[block].statements.push_back(s.id);
    if (m_.line_block[s.pos.line] == -1) {
      m_.line_block[s.pos.line] = block;
      m_.blocks[block].lines.push_back(s.pos.line);
    }
  }

  // Returns the block control continues in, or -1 after return/throw.
  int walk(const std::vector<Stmt>& body, int cur) {
    for (const auto& s : body) {
      if (cur == -1) cur = new_block();  // unreachable code after return/throw
      switch (s.kind) {
        case Stmt::Kind::Let:
        case Stmt::Kind::Assign:
        case Stmt::Kind::ExprStmt: place(s, cur); break;
        case Stmt::Kind::Return:
        case Stmt::Kind::Throw:
          place(s, cur);
          edge(cur, -1);
          cur = -1;
          break;
        case Stmt::Kind::If: {
          place(s, cur);
          auto& site = m_.branch_sites[s.site];
          site.id = s.site;
          site.method = method_;
          site.block = cur;
          site.line = s.pos.line;
          site.op = condition_op(*s.expr);
          int t = new_block();
          site.true_block = t;
          edge(cur, t, s.site, true);
          int t_end = walk(s.body, t);
          int f = -1;
          int f_end = -1;
          if (!s.else_body.empty()) {
            f = new_block();
            m_.branch_sites[s.site].false_block = f;
            edge(cur, f, s.site, false);
            f_end = walk(s.else_body, f);
          }
          int join = new_block();
          if (f == -1) {
            m_.branch_sites[s.site].false_block = join;
            edge(cur, join, s.site, false);
          }
          if (t_end != -1) edge(t_end, join);
          if (f_end != -1) edge(f_end, join);
          cur = join;
          break;
        }
        case Stmt::Kind::While: {
          int header = new_block();
          edge(cur, header);
          place(s, header);
          auto& site = m_.branch_sites[s.site];
          site.id = s.site;
          site.method = method_;
          site.block = header;
          site.line = s.pos.line;
          site.op = condition_op(*s.expr);
          site.loop = true;
          int body = new_block();
          site.true_block = body;
          edge(header, body, s.site, true);
          int b_end = walk(s.body, body);
          if (b_end != -1) edge(b_end, header);
          int after = new_block();
          m_.branch_sites[s.site].false_block = after;
          edge(header, after, s.site, false);
          cur = after;
          break;
        }
      }
    }
    return cur;
  }

  void build_method(const MethodDef& method) {
    method_ = method.index;
    edges_.clear();
    const int first = static_cast<int>(m_.blocks.size());
    int entry = new_block();
    int end = walk(method.body, entry);
    if (end != -1) edge(end, -1);
    const int last = static_cast<int>(m_.blocks.size());
    const int n = last - first;
    const int exit = n;

    MethodDescriptor d;
    d.index = method.index;
    d.name = method.name;
    for (const auto& prm : method.params) d.params.push_back(prm.type);
    d.return_type = method.return_type;
    d.entry_block = entry;
    m_.public_methods.push_back(std::move(d));

    // Local graphs: nodes 0..n-1 are this method's blocks, n is the exit.
    std::vector<std::vector<int>> fwd(n + 1), rev(n + 1);
    for (const auto& e : edges_) {
      int u = e.from - first;
      int v = e.to < 0 ? exit : e.to - first;
      fwd[u].push_back(v);
      rev[v].push_back(u);
    }
    auto idom = immediate_dominators(fwd, entry - first);
    auto ipdom = immediate_dominators(rev, exit);

    m_.control_deps.resize(last);
    m_.guards.resize(last);
    m_.depth.resize(last, 0);
    for (const auto& e : edges_) {
      if (e.site < 0) continue;
      int u = e.from - first;
      int stop = ipdom[u];
      int runner = e.to < 0 ? exit : e.to - first;
      while (runner != -1 && runner != stop && runner != exit) {
        auto& deps = m_.control_deps[runner + first];
        BranchOutcome bo{e.site, e.outcome};
        if (std::find(deps.begin(), deps.end(), bo) == deps.end()) deps.push_back(bo);
        if (ipdom[runner] == runner) break;
        runner = ipdom[runner];
      }
    }

    // A dependence guards b only when its outcome edge lies on every path from
    // the entry to b; such a site's block strictly dominates b, so guard chains
    // are acyclic and every hit line has all its guards taken.
    auto reachable_without = [&](int target, const Edge& cut) {
      std::vector<char> seen(n + 1, 0);
      std::vector<int> stack{entry - first};
      seen[entry - first] = 1;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        if (u == target) return true;
        for (const auto& e : edges_) {
          if (e.from - first != u || e.to < 0) continue;
          if (e.site == cut.site && e.outcome == cut.outcome && e.from == cut.from) continue;
          int v = e.to - first;
          if (!seen[v]) {
            seen[v] = 1;
            stack.push_back(v);
          }
        }
      }
      return false;
    };
    for (int b = first; b < last; ++b) {
      auto& deps = m_.control_deps[b];
      std::sort(deps.begin(), deps.end());
      if (idom[b - first] == -1) continue;  // dead code
      for (const auto& bo : deps) {
        for (const auto& e : edges_) {
          if (e.site != bo.site || e.outcome != bo.outcome) continue;
          if (!reachable_without(b - first, e)) m_.guards[b].push_back(bo);
          break;
        }
      }
    }
    std::vector<char> done(last - first, 0);
    std::function<int(int)> depth_of = [&](int b) {
      if (!done[b - first]) {
        int best = 0;
        bool any = false;
        for (const auto& bo : m_.guards[b]) {
          int cand = depth_of(m_.branch_sites[bo.site].block) + 1;
          best = any ? std::min(best, cand) : cand;
          any = true;
        }
        m_.depth[b] = best;
        done[b - first] = 1;
      }
      return m_.depth[b];
    };
    for (int b = first; b < last; ++b) depth_of(b);
  }

  const Program& p_;
  ControlFlowModel& m_;
  int method_ = -1;
  std::vector<Edge> edges_;
};

}  // namespace

std::vector<int> ControlFlowModel::lines() const {
  std::vector<int> out;
  for (int l = 0; l < static_cast<int>(line_block.size()); ++l) {
    if (line_block[l] >= 0) out.push_back(l);
  }
  return out;
}

int ControlFlowModel::block_of_line(int line) const {
  if (line < 0 || line >= static_cast<int>(line_block.size())) return -1;
  return line_block[line];
}

ControlFlowModel build_cfm(const Program& program) {
  ControlFlowModel m;
  Builder(program, m).run();
  return m;
}

}  // namespace sbst::lang
