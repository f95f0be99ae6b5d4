#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hstkit/hst.hpp"
#include "hstkit/metric.hpp"

namespace hstkit {

struct Extraction {
  std::vector<std::string> subset;
  HstTree tree;
  double guaranteed_size = 1;
  double guaranteed_factor = 1;
  double measured_factor = 1;
  int t = 0;  // shell parameter (0 when unused)
};

inline int robust_ceil(double x) { return int(std::ceil(x - 1e-9)); }

// ---------------------------------------------------------------------------
// Shell extraction: subset approximating a 1-HST.

inline int shell_parameter(std::size_t n, double beta) {
  if (n <= 2) return 0;
  double L = std::log2(double(n));
  double b = std::min(beta, L);
  return robust_ceil(std::log(L) / std::log(b) + 1);
}

inline Extraction shell_extract(const MetricSpace& m, double beta) {
  if (!(beta > 1)) throw DomainError("shell_extract: beta must exceed 1");
  const std::size_t n = m.size();
  Extraction ex;
  ex.guaranteed_size = std::pow(double(n), 1.0 / beta);
  if (n <= 2) {
    ex.subset = m.points();
    if (n == 1) {
      ex.tree = HstTree::single(m.name(0));
    } else {
      int a = ex.tree.add_leaf(m.name(0)), b = ex.tree.add_leaf(m.name(1));
      ex.tree.root = ex.tree.add_node(m(0, 1), {a, b});
    }
    return ex;
  }
  const double L = std::log2(double(n));
  const double b = std::min(beta, L);
  const int t = shell_parameter(n, beta);
  const int K = 2 * t + 1;
  ex.t = t;
  ex.guaranteed_factor = K;

  HstTree& tree = ex.tree;
  std::function<int(const std::vector<std::size_t>&)> rec = [&](const std::vector<std::size_t>& S) -> int {
    if (S.size() == 1) return tree.add_leaf(m.name(S[0]));
    double D = 0;
    std::size_t x = S[0];
    for (std::size_t a = 0; a < S.size(); ++a)
      for (std::size_t c = a + 1; c < S.size(); ++c)
        if (m(S[a], S[c]) > D) D = m(S[a], S[c]), x = S[a];
    // shell index of y: smallest j with d(x,y)*K <= D*j
    std::vector<int> idx(S.size());
    std::vector<std::size_t> cnt(K + 1, 0);
    for (std::size_t a = 0; a < S.size(); ++a) {
      double v = m(x, S[a]) * K;
      int j = std::clamp(int(std::ceil(v / D)), 0, K);
      while (j > 0 && v <= D * (j - 1)) --j;
      while (j < K && v > D * j) ++j;
      idx[a] = j;
      ++cnt[j];
    }
    const double sz = double(S.size());
    std::vector<double> eps(K + 1);
    std::size_t acc = 0;
    for (int i = 0; i <= K; ++i) acc += cnt[i], eps[i] = double(acc) / sz;
    const bool flip = eps[t] > 0.5;
    auto e = [&](int i) { return flip ? 1.0 - eps[2 * t - i] : eps[i]; };
    int best = 1;
    double best_val = -1;
    for (int i = 1; i <= 2 * t; ++i) {
      double v = std::pow(e(i - 1), 1.0 / b) + std::pow(1.0 - e(i), 1.0 / b);
      if (v > best_val) best_val = v, best = i;
    }
    std::vector<std::size_t> B, C;
    for (std::size_t a = 0; a < S.size(); ++a) {
      int j = idx[a];
      if (!flip) {
        if (j <= best - 1) B.push_back(S[a]);
        else if (j > best) C.push_back(S[a]);
      } else {
        if (j > 2 * t - best + 1) B.push_back(S[a]);
        else if (j <= 2 * t - best) C.push_back(S[a]);
      }
    }
    int lb = rec(B), lc = rec(C);
    return tree.add_node(D / K, {lb, lc});
  };
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  tree.root = rec(all);
  tree = compact(tree);
  ex.subset = leaf_points(tree);
  ex.measured_factor = approximation_factor(restrict_to(m, ex.subset), hst_to_metric(tree)).alpha;
  return ex;
}

// ---------------------------------------------------------------------------
// h-sparse subtree: branching (>= 2 children) internal vertices pairwise >= h edges apart.

inline std::vector<int> sparse_subtree_leaves(const HstTree& t, int h) {
  if (h < 1) throw DomainError("sparse_subtree: h must be >= 1");
  std::vector<int> order;
  for_each_preorder(t, [&](int v, int) { order.push_back(v); });
  std::vector<std::vector<long long>> g(t.nodes.size(), std::vector<long long>(h, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto& nd = t.nodes[*it];
    if (nd.is_leaf()) continue;
    auto& gv = g[*it];
    for (int i = 1; i < h; ++i) {
      long long best = 0;
      for (int c : nd.children) best = std::max(best, g[c][i - 1]);
      gv[i] = best;
    }
    long long sum = 0, best0 = 0;
    for (int c : nd.children) sum += g[c][h - 1], best0 = std::max(best0, g[c][0]);
    gv[0] = std::max(sum, best0);
  }
  std::vector<int> out;
  std::function<void(int, int)> collect = [&](int v, int i) {
    const auto& nd = t.nodes[v];
    if (nd.is_leaf()) {
      out.push_back(v);
      return;
    }
    if (i == 0 && nd.children.size() >= 2) {
      long long sum = 0, best0 = 0;
      for (int c : nd.children) sum += g[c][h - 1], best0 = std::max(best0, g[c][0]);
      if (sum >= best0) {
        for (int c : nd.children) collect(c, h - 1);
        return;
      }
    }
    int src = i == 0 ? 0 : i - 1;
    int arg = nd.children[0];
    for (int c : nd.children)
      if (g[c][src] > g[arg][src]) arg = c;
    collect(arg, src);
  };
  collect(t.root, 0);
  return out;
}

inline HstTree sparse_subtree(const HstTree& t, int h) { return induced_subtree(t, sparse_subtree_leaves(t, h)); }

// Smallest edge distance between two branching vertices (INT_MAX if fewer than two).
inline int min_branching_gap(const HstTree& t) {
  int best = INT32_MAX;
  std::function<void(int, int)> rec = [&](int v, int since) {
    // since: edges from the nearest branching ancestor (-1 when none)
    const auto& nd = t.nodes[v];
    bool branching = nd.children.size() >= 2;
    if (branching && since >= 0) best = std::min(best, since);
    int next = branching ? 1 : (since >= 0 ? since + 1 : -1);
    for (int c : nd.children) rec(c, next);
  };
  if (!t.empty()) rec(t.root, -1);
  return best;
}

inline bool is_h_sparse(const HstTree& t, int h) { return min_branching_gap(t) >= h; }

// ---------------------------------------------------------------------------
// 1-HST -> k-HST pruning and the composed extraction.

inline Extraction prune_to_khst(const HstTree& t, double k, double ell) {
  if (!(k > 1)) throw DomainError("prune_to_khst: k must exceed 1");
  if (!(ell > 1 && ell <= k)) throw DomainError("prune_to_khst: ell must lie in (1, k]");
  validate_hst(t);
  const int h = ceil_log(k, ell);
  const std::size_t n = leaf_nodes(t).size();
  Extraction ex;
  ex.guaranteed_size = std::pow(double(n), 1.0 / h);
  ex.guaranteed_factor = ell;
  HstTree nd = remove_degenerate(t);
  if (check_khst(nd, k).ok) {
    ex.tree = compact(t);
  } else {
    HstTree e = to_ell_hst(t, ell);
    ex.tree = remove_degenerate(sparse_subtree(e, h));
  }
  ex.subset = leaf_points(ex.tree);
  ex.measured_factor =
      approximation_factor(restrict_to(hst_to_metric(t), ex.subset), hst_to_metric(ex.tree)).rescaled_alpha;
  return ex;
}

inline Extraction ramsey_extract(const MetricSpace& m, double beta, double k, double ell) {
  if (!(k > 1)) throw DomainError("ramsey_extract: k must exceed 1");
  if (!(ell > 1 && ell <= k)) throw DomainError("ramsey_extract: ell must lie in (1, k]");
  Extraction shell = shell_extract(m, beta);
  Extraction pr = prune_to_khst(shell.tree, k, ell);
  const int h = ceil_log(k, ell);
  Extraction ex;
  ex.t = shell.t;
  ex.subset = pr.subset;
  ex.guaranteed_size = std::pow(double(m.size()), 1.0 / (beta * h));
  ex.guaranteed_factor = ell * (2 * shell.t + 1);
  auto rep = approximation_factor(restrict_to(m, ex.subset), hst_to_metric(pr.tree));
  ex.tree = ex.subset.size() >= 2 ? scale_labels(pr.tree, rep.optimal_rescale) : pr.tree;
  ex.measured_factor = ex.subset.size() >= 2 ? rep.rescaled_alpha : 1.0;
  return ex;
}

// ---------------------------------------------------------------------------
// Greedy lexicographic binary code.

struct BinaryCode {
  int h = 0;
  std::vector<std::uint32_t> words;
  int min_distance = 0;
};

inline double binary_entropy(double x) {
  if (x <= 0 || x >= 1) return 0;
  return -(x * std::log2(x) + (1 - x) * std::log2(1 - x));
}

inline int code_min_distance(int h, double alpha) { return std::max(1, robust_ceil(alpha * h)); }

inline BinaryCode gv_code(int h, double alpha) {
  if (h < 1) throw DomainError("gv_code: h must be >= 1");
  if (h > 24) throw BudgetError("gv_code: h exceeds 24");
  if (!(alpha > 0 && alpha < 0.5)) throw DomainError("gv_code: alpha must lie in (0, 0.5)");
  BinaryCode code;
  code.h = h;
  code.min_distance = code_min_distance(h, alpha);
  const std::uint32_t N = std::uint32_t(1) << h;
  std::vector<char> covered(N, 0);
  const int r = code.min_distance - 1;
  std::vector<int> pos(r);
  std::function<void(std::uint32_t, int, int)> mark = [&](std::uint32_t w, int start, int left) {
    covered[w] = 1;
    if (left == 0) return;
    for (int b = start; b < h; ++b) mark(w ^ (std::uint32_t(1) << b), b + 1, left - 1);
  };
  for (std::uint32_t w = 0; w < N; ++w) {
    if (covered[w]) continue;
    code.words.push_back(w);
    mark(w, 0, r);
  }
  return code;
}

// ---------------------------------------------------------------------------
// Mesh extraction: 9-HST on a subset of [s]^h.

struct MeshExtraction {
  Extraction ex;
  std::vector<std::vector<int>> coords;  // aligned with ex.subset
  int depth = 0;
  std::size_t code_size = 0;
};

inline MeshExtraction mesh_extract(int s, int h, double p, std::size_t budget = 10000) {
  if (!(p >= 1)) throw DomainError("mesh_extract: p must lie in [1, inf]");
  const std::size_t n = mesh_size_checked(s, h, budget);
  MeshExtraction out;
  HstTree& tree = out.ex.tree;
  const double root_scale = std::isinf(p) ? 1.0 : std::pow(double(h), 1.0 / p);
  std::vector<std::uint32_t> words = s > 1 ? gv_code(h, 1.0 / 3).words : std::vector<std::uint32_t>{};
  out.code_size = words.size();
  std::function<int(std::vector<int>, int, int)> rec = [&](std::vector<int> origin, int side, int depth) -> int {
    out.depth = std::max(out.depth, depth);
    if (side == 1) {
      out.coords.push_back(origin);
      return tree.add_leaf(coord_id(origin));
    }
    const int sub = (side + 8) / 9;
    std::vector<int> ch;
    for (std::uint32_t w : words) {
      std::vector<int> o = origin;
      for (int c = 0; c < h; ++c)
        if ((w >> (h - 1 - c)) & 1u) o[c] += side - sub;
      ch.push_back(rec(o, sub, depth + 1));
    }
    return tree.add_node(root_scale * (side - 1) / 12.0, std::move(ch));
  };
  tree.root = rec(std::vector<int>(h, 0), s, 0);
  tree = compact(tree);
  out.ex.subset = leaf_points(tree);
  // coords follow the creation order, which matches preorder
  out.ex.guaranteed_factor = 12;
  out.ex.guaranteed_size = s >= 9 ? std::pow(double(n), 0.08 * std::log(2.0) / std::log(9.0)) : 1.0;
  const std::size_t L = out.coords.size();
  std::vector<double> flat(L * L);
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = 0; b < L; ++b) flat[a * L + b] = lp_distance(out.coords[a], out.coords[b], p);
  MetricSpace sub = MetricSpace::trusted(out.ex.subset, std::move(flat));
  out.ex.measured_factor = approximation_factor(sub, hst_to_metric(tree)).alpha;
  return out;
}

// ---------------------------------------------------------------------------
// Branch selectors.

struct Branching {
  bool binary = true;
  int ell = 2;  // meaningful when !binary
};

inline void check_non_increasing(const std::vector<double>& v, const char* who) {
  if (v.empty()) throw DomainError(std::string(who) + ": empty list");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0)) throw DomainError(std::string(who) + ": entries must be positive");
    if (i && v[i] > v[i - 1]) throw DomainError(std::string(who) + ": list must be non-increasing");
  }
}

// Exact for integer inputs: sqrt(n1)+sqrt(n2) >= sqrt(n), else smallest l >= 3 with l^2 n_l > n.
inline Branching select_branching(const std::vector<long long>& nl) {
  std::vector<double> chk(nl.begin(), nl.end());
  check_non_increasing(chk, "select_branching");
  __int128 n = 0;
  for (long long x : nl) n += x;
  __int128 n1 = nl[0], n2 = nl.size() > 1 ? nl[1] : 0;
  __int128 R = n - n1 - n2;
  if (R <= 0 || 4 * n1 * n2 >= R * R) return {true, 2};
  for (std::size_t l = 3; l <= nl.size(); ++l)
    if (__int128(l) * __int128(l) * nl[l - 1] > n) return {false, int(l)};
  throw DomainError("select_branching: no case applies");
}

inline Branching select_branching(const std::vector<double>& nl) {
  check_non_increasing(nl, "select_branching");
  double n = 0;
  for (double x : nl) n += x;
  double lhs = std::sqrt(nl[0]) + (nl.size() > 1 ? std::sqrt(nl[1]) : 0.0);
  if (lhs >= std::sqrt(n)) return {true, 2};
  for (std::size_t l = 3; l <= nl.size(); ++l)
    if (double(l) * std::sqrt(nl[l - 1]) > std::sqrt(n)) return {false, int(l)};
  throw DomainError("select_branching: no case applies");
}

inline double log_sum_exp(const std::vector<double>& x) {
  double mx = *std::max_element(x.begin(), x.end());
  double s = 0;
  for (double v : x) s += std::exp(v - mx);
  return mx + std::log(s);
}

// Same rule on ln n_i, for sizes too large to represent.
inline Branching select_branching_log(const std::vector<double>& logn) {
  if (logn.empty()) throw DomainError("select_branching: empty list");
  for (std::size_t i = 1; i < logn.size(); ++i)
    if (logn[i] > logn[i - 1]) throw DomainError("select_branching: list must be non-increasing");
  const double half_ln_n = 0.5 * log_sum_exp(logn);
  std::vector<double> top{0.5 * logn[0]};
  if (logn.size() > 1) top.push_back(0.5 * logn[1]);
  if (log_sum_exp(top) >= half_ln_n) return {true, 2};
  for (std::size_t l = 3; l <= logn.size(); ++l)
    if (std::log(double(l)) + 0.5 * logn[l - 1] > half_ln_n) return {false, int(l)};
  throw DomainError("select_branching: no case applies");
}

enum class BkrsCase { wide, heavy2, heavy1 };

inline const char* to_string(BkrsCase c) {
  switch (c) {
    case BkrsCase::wide: return "Wide";
    case BkrsCase::heavy2: return "Heavy2";
    default: return "Heavy1";
  }
}

inline double bkrs_threshold(long long n) { return n <= 1 ? 1.0 : std::exp2(std::sqrt(std::log2(double(n))) / 2); }

inline BkrsCase bkrs_select(const std::vector<long long>& nl) {
  std::vector<double> chk(nl.begin(), nl.end());
  check_non_increasing(chk, "bkrs_select");
  long long n = 0;
  for (long long x : nl) n += x;
  const double T = bkrs_threshold(n);
  if (double(nl.size()) >= T) return BkrsCase::wide;
  const double e = 1.0 / (2 * std::sqrt(std::log2(double(n))));
  if (nl.size() > 1 && 2 * std::pow(double(nl[1]), e) >= T) return BkrsCase::heavy2;
  if (std::pow(double(nl[0]), e) + 1 >= T) return BkrsCase::heavy1;
  throw DomainError("bkrs_select: no case applies");
}

// ---------------------------------------------------------------------------
// Special subtrees.

namespace detail {

inline std::vector<int> children_by_size(const HstTree& t, int v, const std::vector<int>& cnt) {
  std::vector<int> ch = t.nodes[v].children;
  std::stable_sort(ch.begin(), ch.end(), [&](int a, int b) { return cnt[a] > cnt[b]; });
  return ch;
}

inline int first_leaf(const HstTree& t, int v) {
  while (!t.nodes[v].is_leaf()) v = t.nodes[v].children[0];
  return v;
}

inline long long ceil_sqrt(long long n) {
  long long r = (long long)std::sqrt(double(n));
  while (r * r < n) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= n) --r;
  return r;
}

}  // namespace detail

// Subtree with exactly m leaves that is binary/balanced; 0 <= m <= ceil(sqrt(n)).
inline HstTree binary_balanced_extract(const HstTree& t, long long m) {
  const auto cnt = subtree_leaf_counts(t);
  const long long n = cnt[t.root];
  if (m < 0 || m > detail::ceil_sqrt(n)) throw DomainError("binary_balanced_extract: m out of range");
  std::vector<int> keep;
  std::function<void(int, long long)> rec = [&](int v, long long want) {
    if (want == 0) return;
    const auto& nd = t.nodes[v];
    if (nd.is_leaf()) {
      keep.push_back(v);
      return;
    }
    auto ch = detail::children_by_size(t, v, cnt);
    if (ch.size() == 1) return rec(ch[0], want);
    std::vector<long long> sizes;
    for (int c : ch) sizes.push_back(cnt[c]);
    Branching br = select_branching(sizes);
    if (br.binary) {
      long long m1 = std::min(detail::ceil_sqrt(sizes[0]), want);
      long long m2 = want - m1;
      if (m2 > detail::ceil_sqrt(sizes[1])) throw DomainError("binary_balanced_extract: split failed");
      rec(ch[0], m1);
      rec(ch[1], m2);
    } else {
      long long q = want / br.ell, r = want % br.ell;
      for (int i = 0; i < br.ell; ++i) rec(ch[i], q + (i < r ? 1 : 0));
    }
  };
  rec(t.root, m);
  if (keep.empty()) return HstTree{};
  return remove_degenerate(induced_subtree(t, keep));
}

enum class SpecialKind { krr, bfm, bkrs };

struct SpecialExtraction {
  HstTree tree;
  double guaranteed_size = 1;
};

inline long long bkrs_limit(long long n) { return (long long)std::ceil(bkrs_threshold(n) - 1e-12); }

inline SpecialExtraction special_extract(const HstTree& t0, SpecialKind kind, long long m = -1) {
  validate_hst(t0);
  SpecialExtraction out;
  if (kind == SpecialKind::bkrs) {
    const auto cnt = subtree_leaf_counts(t0);
    const long long n = cnt[t0.root];
    if (m < 0 || m > bkrs_limit(n)) throw DomainError("special_extract: m out of range");
    std::vector<int> keep;
    std::function<void(int, long long)> rec = [&](int v, long long want) {
      if (want == 0) return;
      const auto& nd = t0.nodes[v];
      if (nd.is_leaf() || want == 1) {
        keep.push_back(detail::first_leaf(t0, v));
        return;
      }
      auto ch = detail::children_by_size(t0, v, cnt);
      if (ch.size() == 1) return rec(ch[0], want);
      std::vector<long long> sizes;
      for (int c : ch) sizes.push_back(cnt[c]);
      switch (bkrs_select(sizes)) {
        case BkrsCase::wide:
          for (long long i = 0; i < want; ++i) keep.push_back(detail::first_leaf(t0, ch[i]));
          break;
        case BkrsCase::heavy2:
          rec(ch[0], (want + 1) / 2);
          rec(ch[1], want / 2);
          break;
        case BkrsCase::heavy1:
          rec(ch[0], want - 1);
          keep.push_back(detail::first_leaf(t0, ch[1]));
          break;
      }
    };
    rec(t0.root, m);
    out.guaranteed_size = double(m);
    out.tree = keep.empty() ? HstTree{} : remove_degenerate(induced_subtree(t0, keep));
    return out;
  }

  const double n = double(leaf_nodes(t0).size());
  const double L = std::log2(std::max(n, 1.0));
  if (kind == SpecialKind::krr) {
    HstTree t = remove_degenerate(t0);
    out.guaranteed_size = n <= 2 ? n : std::min(L, L / std::log2(L));
    // uniform candidate: one leaf under each child of a widest vertex
    int widest = t.root;
    for_each_preorder(t, [&](int v, int) {
      if (t.nodes[v].children.size() > t.nodes[widest].children.size()) widest = v;
    });
    std::vector<int> uni;
    for (int c : t.nodes[widest].children) uni.push_back(detail::first_leaf(t, c));
    if (t.nodes[widest].is_leaf()) uni = {widest};
    // super-increasing candidate: longest vertical path plus one side leaf per vertex
    auto depth_below = std::vector<int>(t.nodes.size(), 0);
    std::vector<int> order;
    for_each_preorder(t, [&](int v, int) { order.push_back(v); });
    for (auto it = order.rbegin(); it != order.rend(); ++it)
      for (int c : t.nodes[*it].children) depth_below[*it] = std::max(depth_below[*it], depth_below[c] + 1);
    std::vector<int> path_leaves;
    int v = t.root;
    while (!t.nodes[v].is_leaf()) {
      int next = t.nodes[v].children[0];
      for (int c : t.nodes[v].children)
        if (depth_below[c] > depth_below[next]) next = c;
      for (int c : t.nodes[v].children)
        if (c != next) {
          path_leaves.push_back(detail::first_leaf(t, c));
          break;
        }
      v = next;
    }
    path_leaves.push_back(v);
    const auto& pick = uni.size() >= path_leaves.size() ? uni : path_leaves;
    out.tree = remove_degenerate(induced_subtree(t, pick));
    return out;
  }

  // bfm: chain-binarize, then longest path with one side leaf per vertex.
  HstTree b;
  std::function<int(int)> bin = [&](int v) -> int {
    const auto& nd = t0.nodes[v];
    if (nd.is_leaf()) return b.add_leaf(nd.point);
    std::vector<int> ch;
    for (int c : nd.children) ch.push_back(bin(c));
    if (ch.size() == 1) return ch[0];
    int acc = b.add_node(nd.delta, {ch[ch.size() - 2], ch.back()});
    for (std::size_t i = ch.size() - 2; i-- > 0;) acc = b.add_node(nd.delta, {ch[i], acc});
    return acc;
  };
  b.root = bin(t0.root);
  b = compact(b);
  out.guaranteed_size = L;
  std::vector<int> depth_below(b.nodes.size(), 0), order;
  for_each_preorder(b, [&](int v, int) { order.push_back(v); });
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    for (int c : b.nodes[*it].children) depth_below[*it] = std::max(depth_below[*it], depth_below[c] + 1);
  std::vector<int> pick;
  int v = b.root;
  while (!b.nodes[v].is_leaf()) {
    const auto& ch = b.nodes[v].children;
    int next = depth_below[ch[1]] > depth_below[ch[0]] ? ch[1] : ch[0];
    int side = next == ch[0] ? ch[1] : ch[0];
    pick.push_back(detail::first_leaf(b, side));
    v = next;
  }
  pick.push_back(v);
  out.tree = remove_degenerate(induced_subtree(b, pick));
  return out;
}

// ---------------------------------------------------------------------------
// k-HST approximability oracle: does the subset ell-approximate some k-HST (up to scaling)?

namespace detail {

inline bool khst_feasible(const MetricSpace& m, const std::vector<std::size_t>& R, double U, double k, double ell,
                          double tol) {
  if (R.size() <= 1) return true;
  std::vector<double> ds;
  for (std::size_t a = 0; a < R.size(); ++a)
    for (std::size_t b = a + 1; b < R.size(); ++b) ds.push_back(m(R[a], R[b]));
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  for (auto it = ds.rbegin(); it != ds.rend(); ++it) {
    const double thr = *it;
    // components of {d < thr}
    std::vector<int> comp(R.size(), -1);
    int nc = 0;
    for (std::size_t s = 0; s < R.size(); ++s) {
      if (comp[s] >= 0) continue;
      std::vector<std::size_t> st{s};
      comp[s] = nc;
      while (!st.empty()) {
        std::size_t x = st.back();
        st.pop_back();
        for (std::size_t y = 0; y < R.size(); ++y)
          if (comp[y] < 0 && m(R[x], R[y]) < thr) comp[y] = nc, st.push_back(y);
      }
      ++nc;
    }
    if (nc < 2) continue;
    const double L = std::min(U, thr);
    bool ok = true;
    for (std::size_t a = 0; a < R.size() && ok; ++a)
      for (std::size_t b = a + 1; b < R.size() && ok; ++b) {
        double d = m(R[a], R[b]);
        if (comp[a] != comp[b]) ok = leq_tol(L, d, tol) && leq_tol(d, ell * L, tol);
      }
    if (!ok) continue;
    std::vector<std::vector<std::size_t>> blocks(nc);
    for (std::size_t a = 0; a < R.size(); ++a) blocks[comp[a]].push_back(R[a]);
    bool all = true;
    for (auto& blk : blocks)
      if (!khst_feasible(m, blk, L / k, k, ell, tol)) {
        all = false;
        break;
      }
    if (all) return true;
  }
  return false;
}

}  // namespace detail

inline bool khst_approximable(const MetricSpace& m, const std::vector<std::size_t>& subset, double k, double ell,
                              double tol = kDefaultTol) {
  if (!(ell >= 1) || !(k > ell)) throw DomainError("khst_approximable: need 1 <= ell < k");
  return detail::khst_feasible(m, subset, kInf, k, ell, tol);
}

struct SubsetSearch {
  std::size_t best = 0;
  std::vector<std::size_t> witness;
  std::size_t checks = 0;
};

// Largest subset satisfying a property that is closed under taking subsets.
// Candidates are filtered against the current set, so |cur| + |candidates| bounds every extension.
inline SubsetSearch max_hereditary_subset(std::size_t n,
                                          const std::function<bool(const std::vector<std::size_t>&)>& ok) {
  SubsetSearch res;
  std::vector<std::size_t> cur;
  std::function<void(const std::vector<std::size_t>&)> dfs = [&](const std::vector<std::size_t>& cand) {
    if (cur.size() > res.best) res.best = cur.size(), res.witness = cur;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (cur.size() + (cand.size() - i) <= res.best) return;
      cur.push_back(cand[i]);
      std::vector<std::size_t> next;
      for (std::size_t j = i + 1; j < cand.size(); ++j) {
        if (cur.size() + next.size() + (cand.size() - j) <= res.best) break;
        cur.push_back(cand[j]);
        ++res.checks;
        if (ok(cur)) next.push_back(cand[j]);
        cur.pop_back();
      }
      if (cur.size() + next.size() > res.best) dfs(next);
      else if (cur.size() > res.best) res.best = cur.size(), res.witness = cur;
      cur.pop_back();
    }
  };
  std::vector<std::size_t> all;
  for (std::size_t x = 0; x < n; ++x) {
    std::vector<std::size_t> one{x};
    ++res.checks;
    if (ok(one)) all.push_back(x);
  }
  dfs(all);
  return res;
}

inline SubsetSearch max_khst_subset(const MetricSpace& m, double k, double ell) {
  return max_hereditary_subset(m.size(), [&](const std::vector<std::size_t>& s) { return khst_approximable(m, s, k, ell); });
}

// Smallest alpha with an ultrametric u <= d <= alpha u on the subset.
inline double ultrametric_distortion(const MetricSpace& m, const std::vector<std::size_t>& subset) {
  if (subset.size() <= 1) return 1;
  MetricSpace sub = restrict_to(m, subset);
  return approximation_factor(sub, hst_to_metric(subdominant_ultrametric(sub))).alpha;
}

inline SubsetSearch max_ultrametric_subset(const MetricSpace& m, double alpha, double tol = kDefaultTol) {
  return max_hereditary_subset(m.size(), [&](const std::vector<std::size_t>& s) {
    return leq_tol(ultrametric_distortion(m, s), alpha, tol);
  });
}

// ---------------------------------------------------------------------------
// Tight examples: complete ell'-HSTs with depth-i label ell'^{-i}.

struct TightExample {
  HstTree tree;
  int kase = 1;
  double k = 0, ell = 0, eps = 0, ell_prime = 0;
  int q = 0;  // ceil(log_{ell'} k)
  int h = 0;
  std::size_t n = 0;
  double ceiling = 0;
  bool eps_admissible = true;
};

inline double default_tight_eps(double k, double ell) { return (k / ell - 1) / 2; }

inline TightExample tight_example(int kase, double k, double ell, int h, std::optional<double> eps = std::nullopt,
                                  std::size_t budget = std::size_t(1) << 20) {
  if (!(ell > 1 && k > ell)) throw DomainError("tight_example: need k > ell > 1");
  if (h < 1) throw DomainError("tight_example: h must be >= 1");
  if (kase < 1 || kase > 4) throw DomainError("tight_example: case must be 1..4");
  TightExample ex;
  ex.kase = kase, ex.k = k, ex.ell = ell, ex.h = h;
  ex.eps = eps.value_or(default_tight_eps(k, ell));
  ex.ell_prime = (1 + ex.eps) * ell;
  if (!(ex.eps > 0) || !(ex.ell_prime < k)) throw DomainError("tight_example: need eps > 0 and (1+eps) ell < k");
  ex.q = ceil_log(k, ex.ell_prime);
  int degree = 2, height = h;
  switch (kase) {
    case 1: height = h * ex.q; break;
    case 2:
      if (h >= 20) throw BudgetError("tight_example: degree too large");
      degree = 1 << h, height = h * ex.q;
      break;
    case 3:
      if (h < ex.q) throw DomainError("tight_example: case 3 needs h >= ceil(log_{ell'} k)");
      degree = h, height = h * ex.q;
      break;
    default: break;
  }
  double nn = std::pow(double(degree), double(height));
  if (nn > double(budget)) throw BudgetError("tight_example: leaf count exceeds budget");
  ex.n = std::size_t(std::llround(nn));
  ex.tree = complete_tree(degree, height, 1.0, 1.0 / ex.ell_prime);
  const double logk = std::log(k) / std::log(ell);
  switch (kase) {
    case 1: ex.ceiling = std::pow(double(ex.n), 1.0 / logk) + 1; break;
    case 2: ex.ceiling = std::exp2(2 * std::sqrt(std::log2(double(ex.n)) / logk)); break;
    default: ex.ceiling = h + 1; break;
  }
  ex.eps_admissible = kase != 1 || double(ex.q) >= logk - 1e-12;
  return ex;
}

}  // namespace hstkit
