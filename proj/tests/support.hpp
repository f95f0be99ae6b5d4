#pragma once

// Random generators and brute-force oracles shared by the test suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "hstkit/hst.hpp"
#include "hstkit/metric.hpp"

namespace testsupport {

using hstkit::HstTree;
using hstkit::MetricSpace;
using hstkit::Rng;

// Shortest-path closure of random positive weights; always a valid metric.
inline MetricSpace random_metric(Rng& rng, std::size_t n, double lo = 1, double hi = 10) {
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = U(rng);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return hstkit::validate_metric(d);
}

// Euclidean points in the unit square; distinct with probability one.
inline MetricSpace random_euclidean(Rng& rng, std::size_t n, int dim = 2) {
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<std::vector<double>> x(n, std::vector<double>(dim));
  for (auto& p : x)
    for (auto& c : p) c = U(rng);
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (int c = 0; c < dim; ++c) s += (x[i][c] - x[j][c]) * (x[i][c] - x[j][c]);
      d[i][j] = std::sqrt(s);
    }
  return hstkit::validate_metric(d);
}

// Random rooted tree with the given leaf count; labels shrink by a random factor in [1, max_ratio].
inline HstTree random_tree(Rng& rng, int leaves, int max_children = 4, double max_ratio = 3,
                           double unary_prob = 0.0) {
  HstTree t;
  int next = 0;
  std::uniform_real_distribution<double> U(0, 1);
  std::function<int(int, double)> rec = [&](int n, double label) -> int {
    if (n == 1 && U(rng) >= unary_prob) return t.add_leaf(std::to_string(next++));
    int parts = n == 1 ? 1 : 2 + int(hstkit::uniform_index(rng, std::size_t(std::min(max_children, n) - 1)));
    if (n > 1 && unary_prob > 0 && U(rng) < unary_prob) parts = 1;
    std::vector<int> sizes(parts, 1);
    for (int r = n - parts; r > 0; --r) ++sizes[hstkit::uniform_index(rng, std::size_t(parts))];
    std::vector<int> ch;
    for (int s : sizes) ch.push_back(rec(s, label / (1 + (max_ratio - 1) * U(rng))));
    return t.add_node(label, std::move(ch));
  };
  t.root = rec(leaves, 1.0);
  return t;
}

// Minimax-path distances by a Floyd-Warshall variant.
inline std::vector<std::vector<double>> minimax_paths(const MetricSpace& m) {
  const std::size_t n = m.size();
  auto u = m.matrix();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) u[i][j] = std::min(u[i][j], std::max(u[i][k], u[k][j]));
  return u;
}

// Least max d/u over ultrametrics u <= d, by exhaustive enumeration of hierarchies.
// For a fixed hierarchy the best labels are the largest admissible: each vertex takes
// min(parent label, smallest distance crossing its split).
inline double best_dominated_ultrametric_factor(const MetricSpace& m) {
  const double inf = std::numeric_limits<double>::infinity();
  std::function<double(const std::vector<std::size_t>&, double)> solve = [&](const std::vector<std::size_t>& blk,
                                                                              double cap) -> double {
    const std::size_t k = blk.size();
    if (k < 2) return 1.0;
    double out = inf;
    std::vector<int> lab(k, 0);
    std::function<void(std::size_t, int)> rgs = [&](std::size_t i, int mx) {
      if (i == k) {
        if (mx < 1) return;
        double h = cap;
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t b = a + 1; b < k; ++b)
            if (lab[a] != lab[b]) h = std::min(h, m(blk[a], blk[b]));
        double worst = 1;
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t b = a + 1; b < k; ++b)
            if (lab[a] != lab[b]) worst = std::max(worst, m(blk[a], blk[b]) / h);
        for (int p = 0; p <= mx && worst < out; ++p) {
          std::vector<std::size_t> sub;
          for (std::size_t a = 0; a < k; ++a)
            if (lab[a] == p) sub.push_back(blk[a]);
          worst = std::max(worst, solve(sub, h));
        }
        out = std::min(out, worst);
        return;
      }
      for (int c = 0; c <= mx + 1; ++c) {
        lab[i] = c;
        rgs(i + 1, std::max(mx, c));
      }
    };
    rgs(1, 0);
    return out;
  };
  std::vector<std::size_t> all(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) all[i] = i;
  return solve(all, inf);
}

// All rooted-subtree leaf subsets: a subtree keeps, for each kept vertex, any nonempty subset of children.
inline std::vector<std::vector<int>> all_leaf_subsets(const HstTree& t) {
  std::function<std::vector<std::vector<int>>(int)> rec = [&](int v) -> std::vector<std::vector<int>> {
    if (t[v].is_leaf()) return {{v}};
    std::vector<std::vector<int>> acc{{}};
    for (int c : t[v].children) {
      auto sub = rec(c);
      std::vector<std::vector<int>> nxt;
      for (const auto& a : acc) {
        nxt.push_back(a);  // skip child
        for (const auto& s : sub) {
          auto x = a;
          x.insert(x.end(), s.begin(), s.end());
          nxt.push_back(std::move(x));
        }
      }
      acc = std::move(nxt);
    }
    acc.erase(std::remove_if(acc.begin(), acc.end(), [](const auto& a) { return a.empty(); }), acc.end());
    return acc;
  };
  return rec(t.root);
}

// Branching vertices of the induced subtree must be pairwise at least h edges apart.
inline bool induced_is_h_sparse(const HstTree& t, const std::vector<int>& keep, int h) {
  HstTree s = hstkit::induced_subtree(t, keep);
  std::vector<int> par = hstkit::parents(s), depth(s.nodes.size(), 0), branching;
  hstkit::for_each_preorder(s, [&](int v, int d) {
    depth[v] = d;
    if (s[v].children.size() >= 2) branching.push_back(v);
  });
  for (std::size_t a = 0; a < branching.size(); ++a)
    for (std::size_t b = a + 1; b < branching.size(); ++b) {
      int x = branching[a], y = branching[b], dist = 0;
      while (x != y) {
        if (depth[x] >= depth[y]) x = par[x];
        else y = par[y];
        ++dist;
      }
      if (dist < h) return false;
    }
  return true;
}

}  // namespace testsupport
