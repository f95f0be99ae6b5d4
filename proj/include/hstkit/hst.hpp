#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hstkit/metric.hpp"

namespace hstkit {

struct HstNode {
  double delta = 0;
  std::vector<int> children;
  std::string point;  // leaves only
  bool is_leaf() const { return children.empty(); }
};

// Rooted labeled tree; d(x, y) = delta(lca(x, y)) on the leaves.
struct HstTree {
  std::vector<HstNode> nodes;
  int root = -1;

  bool empty() const { return root < 0; }
  const HstNode& operator[](int v) const { return nodes[v]; }
  double root_label() const { return nodes[root].delta; }

  int add_leaf(std::string id) {
    nodes.push_back({0.0, {}, std::move(id)});
    return int(nodes.size()) - 1;
  }
  int add_node(double delta, std::vector<int> children) {
    nodes.push_back({delta, std::move(children), {}});
    return int(nodes.size()) - 1;
  }

  static HstTree single(std::string id) {
    HstTree t;
    t.root = t.add_leaf(std::move(id));
    return t;
  }

  // Appends a copy of other's subtree rooted at v, returning the new id.
  int graft(const HstTree& other, int v) {
    const HstNode& src = other.nodes[v];
    if (src.is_leaf()) return add_leaf(src.point);
    std::vector<int> ch;
    ch.reserve(src.children.size());
    for (int c : src.children) ch.push_back(graft(other, c));
    return add_node(src.delta, std::move(ch));
  }
};

inline void for_each_preorder(const HstTree& t, const std::function<void(int, int)>& f) {
  // f(vertex, depth)
  if (t.empty()) return;
  std::vector<std::pair<int, int>> st{{t.root, 0}};
  while (!st.empty()) {
    auto [v, dep] = st.back();
    st.pop_back();
    f(v, dep);
    const auto& ch = t.nodes[v].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) st.push_back({*it, dep + 1});
  }
}

inline std::vector<int> leaf_nodes(const HstTree& t) {
  std::vector<int> out;
  for_each_preorder(t, [&](int v, int) {
    if (t.nodes[v].is_leaf()) out.push_back(v);
  });
  return out;
}

inline std::vector<std::string> leaf_points(const HstTree& t) {
  std::vector<std::string> out;
  for (int v : leaf_nodes(t)) out.push_back(t.nodes[v].point);
  return out;
}

inline std::vector<int> parents(const HstTree& t) {
  std::vector<int> par(t.nodes.size(), -1);
  for_each_preorder(t, [&](int v, int) {
    for (int c : t.nodes[v].children) par[c] = v;
  });
  return par;
}

inline std::vector<int> subtree_leaf_counts(const HstTree& t) {
  std::vector<int> cnt(t.nodes.size(), 0);
  std::vector<int> order;
  for_each_preorder(t, [&](int v, int) { order.push_back(v); });
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto& n = t.nodes[*it];
    if (n.is_leaf()) cnt[*it] = 1;
    else
      for (int c : n.children) cnt[*it] += cnt[c];
  }
  return cnt;
}

inline int tree_height(const HstTree& t) {
  int h = 0;
  for_each_preorder(t, [&](int, int d) { h = std::max(h, d); });
  return h;
}

// Throws ValidationError on a malformed tree.
inline void validate_hst(const HstTree& t) {
  if (t.empty()) throw ValidationError("hst: empty tree");
  std::unordered_set<std::string> ids;
  std::vector<char> seen(t.nodes.size(), 0);
  bool ok = true;
  std::string why;
  for_each_preorder(t, [&](int v, int) {
    if (!ok) return;
    if (seen[v]++) ok = false, why = "vertex reachable twice";
    const auto& n = t.nodes[v];
    if (!(n.delta >= 0) || !std::isfinite(n.delta)) ok = false, why = "invalid label";
    if (n.is_leaf()) {
      if (n.delta != 0) ok = false, why = "leaf with nonzero label";
      if (!ids.insert(n.point).second) ok = false, why = "duplicate leaf id '" + n.point + "'";
    } else {
      if (n.delta == 0) ok = false, why = "internal vertex with zero label";
      for (int c : n.children)
        if (c < 0 || c >= int(t.nodes.size())) ok = false, why = "child index out of range";
        else if (t.nodes[c].delta > n.delta) ok = false, why = "child label exceeds parent label";
    }
  });
  if (!ok) throw ValidationError("hst: " + why);
}

// Leaves ordered as in preorder.
inline MetricSpace hst_to_metric(const HstTree& t) {
  validate_hst(t);
  std::vector<int> leaves = leaf_nodes(t);
  const std::size_t n = leaves.size();
  std::unordered_map<int, std::size_t> pos;
  for (std::size_t i = 0; i < n; ++i) pos[leaves[i]] = i;
  std::vector<double> flat(n * n, 0);
  std::vector<std::vector<std::size_t>> below(t.nodes.size());
  std::vector<int> order;
  for_each_preorder(t, [&](int v, int) { order.push_back(v); });
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    const auto& nd = t.nodes[v];
    if (nd.is_leaf()) {
      below[v] = {pos[v]};
      continue;
    }
    for (std::size_t a = 0; a < nd.children.size(); ++a)
      for (std::size_t b = a + 1; b < nd.children.size(); ++b)
        for (std::size_t x : below[nd.children[a]])
          for (std::size_t y : below[nd.children[b]]) flat[x * n + y] = flat[y * n + x] = nd.delta;
    for (int c : nd.children) {
      below[v].insert(below[v].end(), below[c].begin(), below[c].end());
      below[c].clear();
    }
  }
  std::vector<std::string> names;
  for (int v : leaves) names.push_back(t.nodes[v].point);
  return MetricSpace::trusted(std::move(names), std::move(flat));
}

struct KhstCheck {
  bool ok = true;
  int parent = -1, child = -1;
  double parent_label = 0, child_label = 0;
};

inline KhstCheck check_khst(const HstTree& t, double k, double tol = kDefaultTol) {
  KhstCheck r;
  for_each_preorder(t, [&](int v, int) {
    if (!r.ok) return;
    for (int c : t.nodes[v].children) {
      double dc = t.nodes[c].delta, dv = t.nodes[v].delta;
      if (!leq_tol(dc * k, dv, tol)) {
        r = {false, v, c, dv, dc};
        return;
      }
    }
  });
  return r;
}

// Rebuilds the reachable part in preorder with a fresh node array.
inline HstTree compact(const HstTree& t) {
  HstTree out;
  if (t.empty()) return out;
  out.root = out.graft(t, t.root);
  return out;
}

inline HstTree remove_degenerate(const HstTree& t) {
  HstTree out;
  if (t.empty()) return out;
  std::function<int(int)> rec = [&](int v) -> int {
    while (t.nodes[v].children.size() == 1) v = t.nodes[v].children[0];
    const auto& n = t.nodes[v];
    if (n.is_leaf()) return out.add_leaf(n.point);
    std::vector<int> ch;
    for (int c : n.children) ch.push_back(rec(c));
    return out.add_node(n.delta, std::move(ch));
  };
  out.root = rec(t.root);
  return out;
}

// Deletes every non-root v whose label is at least (label of its kept parent) / ell.
inline HstTree to_ell_hst(const HstTree& t, double ell) {
  if (!(ell > 1)) throw DomainError("to_ell_hst: ell must exceed 1");
  HstTree out;
  std::function<int(int)> rec = [&](int v) -> int {
    const auto& n = t.nodes[v];
    if (n.is_leaf()) return out.add_leaf(n.point);
    std::vector<int> pending(n.children.rbegin(), n.children.rend());
    std::vector<int> kept;
    while (!pending.empty()) {
      int c = pending.back();
      pending.pop_back();
      const auto& cn = t.nodes[c];
      if (!cn.is_leaf() && cn.delta >= n.delta / ell) {
        for (auto it = cn.children.rbegin(); it != cn.children.rend(); ++it) pending.push_back(*it);
      } else {
        kept.push_back(c);
      }
    }
    std::vector<int> ch;
    for (int c : kept) ch.push_back(rec(c));
    return out.add_node(n.delta, std::move(ch));
  };
  out.root = rec(t.root);
  return out;
}

// Keeps exactly the given leaves (node ids of t) and their ancestors; no coalescing.
inline HstTree induced_subtree(const HstTree& t, const std::vector<int>& keep_leaves) {
  std::vector<char> keep(t.nodes.size(), 0);
  for (int v : keep_leaves) keep[v] = 1;
  std::vector<int> order;
  for_each_preorder(t, [&](int v, int) { order.push_back(v); });
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    for (int c : t.nodes[*it].children)
      if (keep[c]) keep[*it] = 1;
  HstTree out;
  if (!keep[t.root]) return out;
  std::function<int(int)> rec = [&](int v) -> int {
    const auto& n = t.nodes[v];
    if (n.is_leaf()) return out.add_leaf(n.point);
    std::vector<int> ch;
    for (int c : n.children)
      if (keep[c]) ch.push_back(rec(c));
    return out.add_node(n.delta, std::move(ch));
  };
  out.root = rec(t.root);
  return out;
}

inline HstTree scale_labels(const HstTree& t, double gamma) {
  HstTree out = t;
  for (auto& n : out.nodes) n.delta *= gamma;
  return out;
}

// Single-linkage merge; equal-weight merges happen simultaneously.
inline HstTree subdominant_ultrametric(const MetricSpace& m) {
  const std::size_t n = m.size();
  HstTree t;
  std::vector<int> comp_node(n);
  for (std::size_t i = 0; i < n; ++i) comp_node[i] = t.add_leaf(m.name(i));
  if (n == 1) {
    t.root = comp_node[0];
    return t;
  }
  std::vector<std::size_t> uf(n);
  std::iota(uf.begin(), uf.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  struct Edge {
    double w;
    std::size_t a, b;
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({m(i, j), i, j});
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.w < y.w; });
  std::size_t comps = n;
  for (std::size_t e = 0; e < edges.size() && comps > 1;) {
    std::size_t f = e;
    while (f < edges.size() && edges[f].w == edges[e].w) ++f;
    // Group merges among current components at this weight.
    std::map<std::size_t, std::size_t> local;  // component root -> local id
    std::vector<std::size_t> luf;
    auto lid = [&](std::size_t r) {
      auto it = local.find(r);
      if (it != local.end()) return it->second;
      local.emplace(r, luf.size());
      luf.push_back(luf.size());
      return luf.size() - 1;
    };
    std::function<std::size_t(std::size_t)> lfind = [&](std::size_t x) {
      while (luf[x] != x) x = luf[x] = luf[luf[x]];
      return x;
    };
    for (std::size_t g = e; g < f; ++g) {
      std::size_t ra = find(edges[g].a), rb = find(edges[g].b);
      if (ra == rb) continue;
      std::size_t la = lid(ra), lb = lid(rb);
      luf[lfind(la)] = lfind(lb);
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;  // local root -> component roots
    for (auto& [r, l] : local) groups[lfind(l)].push_back(r);
    for (auto& [lr, members] : groups) {
      if (members.size() < 2) continue;
      std::vector<int> ch;
      for (std::size_t r : members) ch.push_back(comp_node[r]);
      int node = t.add_node(edges[e].w, std::move(ch));
      std::size_t head = members[0];
      for (std::size_t r : members) uf[r] = head;
      comp_node[head] = node;
      comps -= members.size() - 1;
    }
    e = f;
  }
  t.root = comp_node[find(0)];
  return compact(t);
}

struct HstClass {
  bool is_khst = false;
  bool binary_balanced = false;
  bool binary_uniform = false;
  bool bkrs = false;
  bool bfm = false;
  bool krr = false;
};

inline HstClass classify_hst(const HstTree& t, double k, double tol = kDefaultTol) {
  HstClass c;
  c.is_khst = check_khst(t, k, tol).ok;
  const auto cnt = subtree_leaf_counts(t);
  auto balanced = [&](int v) {
    int lo = INT32_MAX, hi = 0;
    for (int ch : t.nodes[v].children) lo = std::min(lo, cnt[ch]), hi = std::max(hi, cnt[ch]);
    return hi - lo <= 1;
  };
  auto all_leaf_children = [&](int v) {
    for (int ch : t.nodes[v].children)
      if (!t.nodes[ch].is_leaf()) return false;
    return true;
  };
  auto internal_children = [&](int v) {
    int x = 0;
    for (int ch : t.nodes[v].children) x += !t.nodes[ch].is_leaf();
    return x;
  };
  bool bb = true, bu = true, bk = true, bf = true, super_inc = true;
  for_each_preorder(t, [&](int v, int) {
    const auto& n = t.nodes[v];
    if (n.is_leaf()) return;
    const std::size_t deg = n.children.size();
    if (!(deg <= 2 || balanced(v))) bb = false;
    if (!(deg <= 2 || all_leaf_children(v))) bu = false;
    if (deg == 2 && !(balanced(v) || internal_children(v) < 2)) bk = false;
    if (!(deg <= 2 && internal_children(v) <= 1)) bf = false;
    if (!(deg <= 2 && internal_children(v) <= 1)) super_inc = false;
  });
  c.binary_balanced = bb;
  c.binary_uniform = bu;
  c.bkrs = bu && bk;
  c.bfm = bf;
  const MetricSpace m = hst_to_metric(t);
  bool uniform = true;
  for (std::size_t i = 0; i < m.size() && uniform; ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j)
      if (m(i, j) != m(0, 1)) {
        uniform = false;
        break;
      }
  c.krr = uniform || (c.is_khst && super_inc);
  return c;
}

struct LcaCheck {
  bool ok = true;
  std::string a, b, c, d;  // lca_T(a,b) = lca_T(c,d) but lca_W differs
};

inline std::vector<int> pairwise_lca(const HstTree& t, const std::vector<int>& leaves_in_order) {
  const std::size_t n = leaves_in_order.size();
  auto par = parents(t);
  std::vector<int> depth(t.nodes.size(), 0);
  for_each_preorder(t, [&](int v, int d) { depth[v] = d; });
  std::vector<int> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      int x = leaves_in_order[i], y = leaves_in_order[j];
      while (depth[x] > depth[y]) x = par[x];
      while (depth[y] > depth[x]) y = par[y];
      while (x != y) x = par[x], y = par[y];
      out[i * n + j] = x;
    }
  return out;
}

inline LcaCheck check_lca_consistency(const HstTree& t, const HstTree& w) {
  auto lt = leaf_nodes(t), lw_all = leaf_nodes(w);
  if (lt.size() != lw_all.size()) throw DomainError("lca consistency: leaf-set mismatch");
  std::unordered_map<std::string, int> wpos;
  for (int v : lw_all) wpos[w.nodes[v].point] = v;
  std::vector<int> lw;
  for (int v : lt) {
    auto it = wpos.find(t.nodes[v].point);
    if (it == wpos.end()) throw DomainError("lca consistency: leaf-set mismatch");
    lw.push_back(it->second);
  }
  const std::size_t n = lt.size();
  auto at = pairwise_lca(t, lt), aw = pairwise_lca(w, lw);
  std::unordered_map<int, std::pair<std::size_t, std::size_t>> rep;
  LcaCheck r;
  for (std::size_t i = 0; i < n && r.ok; ++i)
    for (std::size_t j = i; j < n; ++j) {
      auto [it, fresh] = rep.emplace(at[i * n + j], std::make_pair(i, j));
      if (fresh) continue;
      auto [p, q] = it->second;
      if (aw[p * n + q] != aw[i * n + j]) {
        r = {false, t.nodes[lt[p]].point, t.nodes[lt[q]].point, t.nodes[lt[i]].point, t.nodes[lt[j]].point};
        break;
      }
    }
  return r;
}

// ---- builders used by generators and tests ----

// Complete tree with the given branching, depth-i label top * ratio^i; leaf ids 0..n-1.
inline HstTree complete_tree(int branching, int height, double top, double ratio) {
  HstTree t;
  int next = 0;
  std::function<int(int, double)> rec = [&](int h, double label) -> int {
    if (h == 0) return t.add_leaf(std::to_string(next++));
    std::vector<int> ch;
    for (int i = 0; i < branching; ++i) ch.push_back(rec(h - 1, label * ratio));
    return t.add_node(label, std::move(ch));
  };
  t.root = rec(height, top);
  return t;
}

inline HstTree star_tree(int b, double delta = 1) {
  HstTree t;
  std::vector<int> ch;
  for (int i = 0; i < b; ++i) ch.push_back(t.add_leaf(std::to_string(i)));
  t.root = b == 1 ? ch[0] : t.add_node(delta, ch);
  return t;
}

// Each internal vertex has one leaf child and one subtree; depth internal vertices.
inline HstTree caterpillar_tree(int depth, double top = 1, double ratio = 0.5) {
  HstTree t;
  int next = 0;
  std::function<int(int, double)> rec = [&](int d, double label) -> int {
    if (d == 0) return t.add_leaf(std::to_string(next++));
    int leaf = t.add_leaf(std::to_string(next++));
    int sub = rec(d - 1, label * ratio);
    return t.add_node(label, {leaf, sub});
  };
  t.root = rec(depth, top);
  return t;
}

}  // namespace hstkit
