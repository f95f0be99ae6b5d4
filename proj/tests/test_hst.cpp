#include <gtest/gtest.h>

#include "hstkit/hst.hpp"
#include "support.hpp"

using namespace hstkit;

namespace {

HstTree two_leaves(double delta) {
  HstTree t;
  int a = t.add_leaf("a"), b = t.add_leaf("b");
  t.root = t.add_node(delta, {a, b});
  return t;
}

// root 4: leaf a, (1: b, c)
HstTree small_tree() {
  HstTree t;
  int a = t.add_leaf("a"), b = t.add_leaf("b"), c = t.add_leaf("c");
  int v = t.add_node(1, {b, c});
  t.root = t.add_node(4, {a, v});
  return t;
}

double dist(const MetricSpace& m, const std::string& x, const std::string& y) {
  return m(*m.index_of(x), *m.index_of(y));
}

bool same_distances(const HstTree& a, const HstTree& b) {
  auto ma = hst_to_metric(a), mb = hst_to_metric(b);
  if (ma.size() != mb.size()) return false;
  for (const auto& x : ma.points())
    for (const auto& y : ma.points()) {
      if (!mb.index_of(x) || !mb.index_of(y)) return false;
      if (dist(ma, x, y) != dist(mb, x, y)) return false;
    }
  return true;
}

}  // namespace

TEST(HstToMetric, Examples) {
  EXPECT_EQ(hst_to_metric(two_leaves(3)).matrix(), (std::vector<std::vector<double>>{{0, 3}, {3, 0}}));
  EXPECT_EQ(hst_to_metric(HstTree::single("x")).size(), 1u);
  auto m = hst_to_metric(small_tree());
  EXPECT_EQ(dist(m, "b", "c"), 1);
  EXPECT_EQ(dist(m, "a", "b"), 4);
  EXPECT_EQ(dist(m, "a", "c"), 4);
}

TEST(HstToMetric, DuplicateLeafRejected) {
  HstTree t;
  int a = t.add_leaf("a"), b = t.add_leaf("a");
  t.root = t.add_node(1, {a, b});
  EXPECT_THROW(validate_hst(t), ValidationError);
}

TEST(HstToMetric, StrongTriangleOnRandomTrees) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = testsupport::random_tree(rng, 2 + int(uniform_index(rng, 14)));
    auto m = hst_to_metric(t);
    for (std::size_t x = 0; x < m.size(); ++x)
      for (std::size_t y = 0; y < m.size(); ++y)
        for (std::size_t z = 0; z < m.size(); ++z) ASSERT_LE(m(x, z), std::max(m(x, y), m(y, z)));
  }
}

TEST(CheckKhst, Examples) {
  HstTree t;
  int a = t.add_leaf("a"), b = t.add_leaf("b"), c = t.add_leaf("c");
  int v = t.add_node(1, {b, c});
  t.root = t.add_node(4, {a, v});
  EXPECT_TRUE(check_khst(t, 4).ok);
  t.nodes[v].delta = 2;
  auto r = check_khst(t, 4);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.parent_label, 4);
  EXPECT_EQ(r.child_label, 2);
  EXPECT_TRUE(check_khst(t, 1).ok);
}

TEST(RemoveDegenerate, Examples) {
  HstTree t;
  int l = t.add_leaf("x");
  int v = t.add_node(0.5, {l});
  t.root = t.add_node(1, {v});
  auto s = remove_degenerate(t);
  EXPECT_EQ(s.nodes.size(), 1u);
  EXPECT_TRUE(s[s.root].is_leaf());

  auto st = small_tree();
  auto same = remove_degenerate(st);
  EXPECT_EQ(same.nodes.size(), st.nodes.size());
  EXPECT_TRUE(same_distances(st, same));

  HstTree c;
  int a = c.add_leaf("a"), b = c.add_leaf("b");
  int bottom = c.add_node(0.25, {a, b});
  int d1 = c.add_node(0.5, {bottom});
  int d2 = c.add_node(0.75, {d1});
  c.root = c.add_node(1, {d2});
  auto cc = remove_degenerate(c);
  EXPECT_EQ(cc.nodes.size(), 3u);
  EXPECT_EQ(cc.root_label(), 0.25);
}

TEST(RemoveDegenerate, IdempotentAndDistancePreserving) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    auto t = testsupport::random_tree(rng, 1 + int(uniform_index(rng, 12)), 3, 3, 0.3);
    auto a = remove_degenerate(t);
    auto b = remove_degenerate(a);
    ASSERT_TRUE(same_distances(t, a));
    ASSERT_EQ(a.nodes.size(), b.nodes.size());
    for (const auto& n : a.nodes) ASSERT_NE(n.children.size(), 1u);
  }
}

TEST(ToEllHst, Examples) {
  auto k = small_tree();
  auto same = to_ell_hst(k, 2);
  EXPECT_EQ(same.nodes.size(), k.nodes.size());
  EXPECT_TRUE(same_distances(k, same));
  // Ratio exactly ell is deleted by the >= rule.
  auto boundary = to_ell_hst(k, 4);
  EXPECT_EQ(dist(hst_to_metric(boundary), "b", "c"), 4);

  // chain 1 -> 0.5 -> 0.25 with a leaf hanging at each level
  HstTree c;
  int a = c.add_leaf("a"), b = c.add_leaf("b"), x = c.add_leaf("x"), y = c.add_leaf("y");
  int low = c.add_node(0.25, {x, y});
  int mid = c.add_node(0.5, {b, low});
  c.root = c.add_node(1, {a, mid});
  auto e = to_ell_hst(c, 4);
  auto m = hst_to_metric(e);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      if (i != j) EXPECT_EQ(m(i, j), 1);

  auto two = to_ell_hst(c, 2);
  // 0.5 >= 1/2 is deleted; 0.25 is then compared with the root: 0.25 < 0.5 keeps it
  auto m2 = hst_to_metric(two);
  EXPECT_EQ(dist(m2, "a", "b"), 1);
  EXPECT_EQ(dist(m2, "x", "y"), 0.25);
  EXPECT_THROW(to_ell_hst(c, 1), DomainError);
}

TEST(ToEllHst, OutputIsEllHstWithBoundedStretch) {
  Rng rng(3);
  for (double ell : {1.5, 2.0, 4.0}) {
    for (int trial = 0; trial < 100; ++trial) {
      auto t = testsupport::random_tree(rng, 2 + int(uniform_index(rng, 15)), 3, 2.5);
      auto e = to_ell_hst(t, ell);
      ASSERT_TRUE(check_khst(e, ell).ok);
      auto mo = hst_to_metric(t), mn = hst_to_metric(e);
      for (const auto& x : mo.points())
        for (const auto& y : mo.points()) {
          if (x == y) continue;
          double q = dist(mn, x, y) / dist(mo, x, y);
          ASSERT_GE(q, 1);
          ASSERT_LE(q, ell * (1 + 1e-12));
        }
    }
  }
}

TEST(Subdominant, Examples) {
  auto s = subdominant_ultrametric(uniform_metric(4, 2.5));
  EXPECT_EQ(s[s.root].children.size(), 4u);
  EXPECT_EQ(s.root_label(), 2.5);
  auto p = hst_to_metric(subdominant_ultrametric(path_metric(3)));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(p(i, j), i == j ? 0 : 1);
  auto two = validate_metric({{0, 3}, {3, 0}});
  EXPECT_EQ(approximation_factor(two, hst_to_metric(subdominant_ultrametric(two))).alpha, 1);
}

TEST(Subdominant, EqualsMinimaxPathsAndIsOptimal) {
  Rng rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t n = 2 + uniform_index(rng, 5);
    auto m = trial % 2 ? testsupport::random_metric(rng, n) : testsupport::random_euclidean(rng, n);
    auto u = hst_to_metric(subdominant_ultrametric(m));
    auto mm = testsupport::minimax_paths(m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        auto a = *u.index_of(m.name(i)), b = *u.index_of(m.name(j));
        ASSERT_EQ(u(a, b), mm[i][j]);
      }
    auto rep = approximation_factor(m, u);
    ASSERT_TRUE(rep.dominated);
    ASSERT_NEAR(rep.alpha, testsupport::best_dominated_ultrametric_factor(m), 1e-12);
  }
}

TEST(Subdominant, TieOrderDoesNotChangeValues) {
  // Integer distances produce many ties; permuting the points must give the same ultrametric.
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 3 + uniform_index(rng, 5);
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = double(2 + uniform_index(rng, 2));
    auto m = validate_metric(d);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto pm = restrict_to(m, perm);
    auto u1 = hst_to_metric(subdominant_ultrametric(m)), u2 = hst_to_metric(subdominant_ultrametric(pm));
    for (const auto& x : m.points())
      for (const auto& y : m.points()) ASSERT_EQ(dist(u1, x, y), dist(u2, x, y));
  }
}

TEST(Classify, Examples) {
  auto star = star_tree(5);
  auto c = classify_hst(star, 2);
  EXPECT_TRUE(c.binary_uniform);
  EXPECT_TRUE(c.krr);
  EXPECT_TRUE(classify_hst(complete_tree(2, 3, 1, 0.5), 2).binary_balanced);
  auto cat = classify_hst(caterpillar_tree(4, 1, 0.5), 2);
  EXPECT_TRUE(cat.bfm);
  EXPECT_TRUE(cat.bkrs);
  EXPECT_TRUE(cat.krr);
  // A 3-ary root over internal children is balanced but not uniform.
  auto mixed = complete_tree(3, 2, 1, 0.25);
  auto mc = classify_hst(mixed, 2);
  EXPECT_TRUE(mc.binary_balanced);
  EXPECT_FALSE(mc.binary_uniform);
  EXPECT_FALSE(mc.krr);
}

TEST(Classify, HierarchyOnRandomTrees) {
  Rng rng(6);
  int bfm = 0, bkrs = 0, bu = 0, bb = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto t = testsupport::random_tree(rng, 2 + int(uniform_index(rng, 10)), trial % 3 == 0 ? 2 : 4);
    auto c = classify_hst(t, 2);
    if (c.bfm) ASSERT_TRUE(c.bkrs);
    if (c.bkrs) ASSERT_TRUE(c.binary_uniform);
    if (c.binary_uniform) ASSERT_TRUE(c.binary_balanced);
    bfm += c.bfm, bkrs += c.bkrs, bu += c.binary_uniform, bb += c.binary_balanced;
  }
  EXPECT_GT(bfm, 0);
  EXPECT_GT(bb, bfm);
}

TEST(LcaConsistency, Examples) {
  auto t = complete_tree(2, 2, 1, 0.5);  // {0,1},{2,3}
  EXPECT_TRUE(check_lca_consistency(t, t).ok);
  HstTree w;
  int a = w.add_leaf("0"), b = w.add_leaf("1"), c = w.add_leaf("2"), d = w.add_leaf("3");
  int p = w.add_node(0.5, {a, c}), q = w.add_node(0.5, {b, d});
  w.root = w.add_node(1, {p, q});
  auto r = check_lca_consistency(t, w);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.a.empty());
  EXPECT_TRUE(check_lca_consistency(t, star_tree(4)).ok);
  EXPECT_THROW(check_lca_consistency(t, star_tree(3)), DomainError);
}
