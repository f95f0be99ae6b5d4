#include <gtest/gtest.h>

#include "hstkit/hst.hpp"
#include "hstkit/metric.hpp"
#include "support.hpp"

using namespace hstkit;

TEST(ValidateMetric, AcceptsSingletonAndPair) {
  EXPECT_EQ(validate_metric({{0}}).size(), 1u);
  auto m = validate_metric({{0, 1}, {1, 0}});
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m(0, 1), 1);
}

TEST(ValidateMetric, RejectsTriangleViolationWithWitness) {
  try {
    validate_metric({{0, 1, 3}, {1, 0, 1}, {3, 1, 0}});
    FAIL() << "expected rejection";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("triangle violation (0,2) via 1"), std::string::npos) << e.what();
  }
}

TEST(ValidateMetric, RejectsEachAxiom) {
  EXPECT_THROW(validate_metric({{0, 1}, {2, 0}}), ValidationError);
  EXPECT_THROW(validate_metric({{0, -1}, {-1, 0}}), ValidationError);
  EXPECT_THROW(validate_metric({{0, 0}, {0, 0}}), ValidationError);
  EXPECT_THROW(validate_metric({{1, 1}, {1, 0}}), ValidationError);
  EXPECT_THROW(validate_metric({{0, 1}}), ValidationError);
  EXPECT_THROW(validate_metric({}), ValidationError);
  EXPECT_THROW(validate_metric({{0, 1}, {1, 0}}, {"a", "a"}), ValidationError);
}

TEST(ValidateMetric, ToleranceIsRelative) {
  EXPECT_NO_THROW(validate_metric({{0, 1, 2 + 1e-12}, {1, 0, 1}, {2 + 1e-12, 1, 0}}));
  EXPECT_THROW(validate_metric({{0, 1, 2.001}, {1, 0, 1}, {2.001, 1, 0}}), ValidationError);
}

// Fuzz: perturbations of valid metrics are accepted exactly when an independent axiom check passes.
TEST(ValidateMetric, FuzzAgreesWithDirectAxiomCheck) {
  Rng rng(11);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  int accepted = 0, rejected = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::size_t n = 2 + uniform_index(rng, 5);
    auto mat = testsupport::random_metric(rng, n).matrix();
    std::size_t i = uniform_index(rng, n), j = uniform_index(rng, n);
    if (i != j && trial % 2 == 0) {
      double v = mat[i][j] + U(rng);
      mat[i][j] = mat[j][i] = v;
    }
    bool ok = true;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) ok = ok && mat[a][b] == 0;
        else ok = ok && mat[a][b] > 0 && mat[a][b] == mat[b][a];
        for (std::size_t c = 0; c < n; ++c)
          if (a != b && b != c && a != c) ok = ok && leq_tol(mat[a][c], mat[a][b] + mat[b][c], kDefaultTol);
      }
    bool got = true;
    try {
      validate_metric(mat);
    } catch (const ValidationError&) {
      got = false;
    }
    EXPECT_EQ(got, ok) << "trial " << trial;
    (got ? accepted : rejected)++;
  }
  EXPECT_GT(accepted, 50);
  EXPECT_GT(rejected, 20);
}

TEST(Restrict, CopiesDistances) {
  auto u = uniform_metric(3, 1);
  EXPECT_EQ(restrict_to(u, std::vector<std::string>{"0", "1"}).matrix(), uniform_metric(2, 1).matrix());
  EXPECT_EQ(restrict_to(u, u.points()), u);
  auto p = restrict_to(path_metric(4), std::vector<std::string>{"0", "3"});
  EXPECT_EQ(p.matrix(), (std::vector<std::vector<double>>{{0, 3}, {3, 0}}));
  EXPECT_THROW(restrict_to(u, std::vector<std::string>{"9"}), DomainError);
  EXPECT_THROW(restrict_to(u, std::vector<std::string>{}), DomainError);
}

TEST(Restrict, ComposesAsIntersection) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = testsupport::random_metric(rng, 8);
    std::vector<std::string> a, b, both;
    for (const auto& id : m.points()) {
      bool in_a = uniform_index(rng, 2) == 0, in_b = uniform_index(rng, 2) == 0;
      if (in_a) a.push_back(id);
      if (in_a && in_b) b.push_back(id), both.push_back(id);
    }
    if (both.empty()) continue;
    EXPECT_EQ(restrict_to(restrict_to(m, a), b), restrict_to(m, both));
    EXPECT_LE(diameter(restrict_to(m, a)).value, diameter(m).value);
  }
}

TEST(Scale, ExactlyMultiplicative) {
  EXPECT_EQ(scale(uniform_metric(2, 1), 2).matrix(), uniform_metric(2, 2).matrix());
  auto m = path_metric(5, 0.7);
  EXPECT_EQ(scale(m, 1), m);
  auto back = scale(scale(m, 3.3), 1 / 3.3);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(back(i, j), m(i, j), 1e-12);
  auto s = scale(m, 2.5);
  for (std::size_t i = 0; i < m.flat().size(); ++i) EXPECT_EQ(s.flat()[i], m.flat()[i] * 2.5);
  EXPECT_THROW(scale(m, 0), DomainError);
  EXPECT_THROW(scale(m, -1), DomainError);
}

TEST(Diameter, Examples) {
  EXPECT_EQ(diameter(uniform_metric(4, 5)).value, 5);
  auto d = diameter(path_metric(3));
  EXPECT_EQ(d.value, 2);
  EXPECT_EQ(d.i, 0u);
  EXPECT_EQ(d.j, 2u);
  auto s = diameter(uniform_metric(1));
  EXPECT_EQ(s.value, 0);
  EXPECT_EQ(s.i, s.j);
}

TEST(ApproximationFactor, Examples) {
  auto r = approximation_factor(uniform_metric(3, 2), uniform_metric(3, 1));
  EXPECT_TRUE(r.dominated);
  EXPECT_DOUBLE_EQ(r.alpha, 2);
  EXPECT_DOUBLE_EQ(approximation_factor(path_metric(4), path_metric(4)).alpha, 1);
  auto p = path_metric(3);
  auto q = approximation_factor(p, hst_to_metric(subdominant_ultrametric(p)));
  EXPECT_TRUE(q.dominated);
  EXPECT_DOUBLE_EQ(q.alpha, 2);
  EXPECT_EQ(q.worst_pair, std::make_pair(std::string("0"), std::string("2")));
  EXPECT_THROW(approximation_factor(uniform_metric(2), uniform_metric(3)), DomainError);
}

TEST(ApproximationFactor, NotDominatedReportsInfinityAndRescale) {
  auto r = approximation_factor(uniform_metric(3, 1), uniform_metric(3, 2));
  EXPECT_FALSE(r.dominated);
  EXPECT_TRUE(std::isinf(r.alpha));
  EXPECT_DOUBLE_EQ(r.optimal_rescale, 0.5);
  EXPECT_DOUBLE_EQ(r.rescaled_alpha, 1);
}

TEST(ApproximationFactor, ScaledCopyGivesGamma) {
  Rng rng(5);
  for (double g : {1.0, 1.5, 2.0, 7.25, 100.0}) {
    auto m = testsupport::random_metric(rng, 6);
    auto r = approximation_factor(m, scale(m, 1 / g));
    EXPECT_TRUE(r.dominated);
    EXPECT_NEAR(r.alpha, g, 1e-12 * g);
  }
}

TEST(TransferBound, DividesByAlpha) {
  EXPECT_DOUBLE_EQ(transfer_bound(10, 2), 5);
  EXPECT_DOUBLE_EQ(transfer_bound(3.7, 1), 3.7);
  EXPECT_THROW(transfer_bound(1, 0.5), DomainError);
}

TEST(Generate, StandardSpaces) {
  auto u = uniform_metric(3, 1);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(u(i, j), i == j ? 0 : 1);
  auto p = path_metric(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(p(i, j), std::fabs(double(i) - double(j)));
  auto m = mesh_metric(2, 2, 1);
  EXPECT_EQ(m.size(), 4u);
  EXPECT_EQ(diameter(m).value, 2);
  EXPECT_EQ(diameter(mesh_metric(2, 2, kInf)).value, 1);
  EXPECT_NEAR(diameter(mesh_metric(3, 2, 2)).value, std::sqrt(8.0), 1e-12);
  EXPECT_THROW(mesh_metric(10, 5, 1, 4096), BudgetError);
}

TEST(Dedupe, CollapsesZeroDistancePoints) {
  auto m = dedupe({{0, 0, 1}, {0, 0, 1}, {1, 1, 0}}, {"a", "b", "c"});
  EXPECT_EQ(m.points(), (std::vector<std::string>{"a", "c"}));
}
