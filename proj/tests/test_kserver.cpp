#include <gtest/gtest.h>

#include <map>

#include "hstkit/adversary.hpp"
#include "hstkit/kserver.hpp"
#include "support.hpp"

using namespace hstkit;

namespace {

using Config = std::vector<std::size_t>;  // sorted server positions, repeats allowed

void multisets(std::size_t n, std::size_t k, std::size_t from, Config& cur, std::vector<Config>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t p = from; p < n; ++p) {
    cur.push_back(p);
    multisets(n, k, p, cur, out);
    cur.pop_back();
  }
}

double transport(const Dist<double>& d, const Config& a, Config b) {
  double best = kInf;
  do {
    double c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += d(a[i], b[i]);
    best = std::min(best, c);
  } while (std::next_permutation(b.begin(), b.end()));
  return best;
}

// Offline K-server optimum over all configurations, co-located servers included.
double brute_server_opt(const Dist<double>& d, const std::vector<std::size_t>& sigma, std::size_t uncovered) {
  const std::size_t n = d.n, k = n - 1;
  std::vector<Config> all;
  Config cur;
  multisets(n, k, 0, cur, all);
  Config start;
  for (std::size_t p = 0; p < n; ++p)
    if (p != uncovered) start.push_back(p);
  std::vector<double> cost(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) cost[i] = transport(d, start, all[i]);
  for (std::size_t l : sigma) {
    std::vector<double> nxt(all.size(), kInf);
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (std::find(all[j].begin(), all[j].end(), l) == all[j].end()) continue;
      for (std::size_t i = 0; i < all.size(); ++i) nxt[j] = std::min(nxt[j], cost[i] + transport(d, all[i], all[j]));
    }
    cost = std::move(nxt);
  }
  return *std::min_element(cost.begin(), cost.end());
}

TaskSeq<double> random_tasks(Rng& rng, std::size_t n, std::size_t len) {
  std::uniform_real_distribution<double> U(0, 2.5);
  TaskSeq<double> s;
  for (std::size_t i = 0; i < len; ++i) s.push_back({uniform_index(rng, n), uniform_index(rng, 4) == 0 ? 0 : U(rng)});
  return s;
}

}  // namespace

TEST(ReduceTask, Examples) {
  auto d = to_dist<double>(uniform_metric(2));
  WorkFunction<double> w{{0, 0}, 0};
  EXPECT_FALSE(reduce_task(w, {0, 0.5}, d));
  EXPECT_TRUE(reduce_task(w, {0, 2}, d));
  EXPECT_TRUE(reduce_task(w, {0, 1}, d));  // ties emit a request
  WorkFunction<double> w2{{5, 0}, 0};
  EXPECT_TRUE(reduce_task(w2, {0, 0}, d));
  EXPECT_THROW(reduce_task(w, {3, 1}, d), DomainError);
}

TEST(ServerOpt, Examples) {
  auto d = to_dist<double>(uniform_metric(2));
  EXPECT_EQ(server_opt(d, {0}, 0), 1);
  EXPECT_EQ(server_opt(d, {1}, 0), 0);
  WorkFunction<double> w{{0, 1}, 0};
  server_wf_update(w, d, 1);
  EXPECT_EQ(w.w, (std::vector<double>{0, 1}));
  EXPECT_EQ(server_opt(d, {}, 1), 0);
}

TEST(ServerOpt, MatchesConfigurationDp) {
  Rng rng(51);
  for (int trial = 0; trial < 150; ++trial) {
    std::size_t n = 2 + uniform_index(rng, 4);
    auto d = to_dist<double>(trial % 2 ? testsupport::random_metric(rng, n, 0.5, 3) : uniform_metric(n));
    std::vector<std::size_t> sigma(uniform_index(rng, 7));
    for (auto& l : sigma) l = uniform_index(rng, n);
    std::size_t u0 = uniform_index(rng, n);
    ASSERT_NEAR(server_opt(d, sigma, u0), brute_server_opt(d, sigma, u0), 1e-9) << "trial " << trial;
  }
}

TEST(ServerOpt, BelowSimulatedAlgorithms) {
  Rng rng(52);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 2 + uniform_index(rng, 6);
    auto d = to_dist<double>(testsupport::random_metric(rng, n, 0.5, 3));
    auto tau = random_tasks(rng, n, 40);
    for (const auto& name : server_algorithm_names()) {
      auto a = server_algorithm<double>(name);
      auto tr = run_reduction(*a, tau, d, 0, rng);
      ASSERT_LE(tr.opt_S, tr.cost_AS() + 1e-9);
    }
  }
  EXPECT_THROW(server_algorithm<double>("nope"), DomainError);
}

TEST(RunReduction, Examples) {
  auto d = to_dist<double>(uniform_metric(3));
  Rng rng(1);
  GreedyServer<double> g;
  auto empty = run_reduction(g, {}, d, 0, rng);
  EXPECT_TRUE(empty.sigma.empty());
  EXPECT_EQ(empty.cost_AT(), 0);
  EXPECT_EQ(empty.cost_AS(), 0);
  EXPECT_TRUE(verify_relation(empty).ok);
  auto tr = run_reduction(g, {{0, 1}, {0, 1}, {0, 1}}, d, 0, rng);
  EXPECT_FALSE(tr.sigma.empty());
  EXPECT_TRUE(std::isfinite(tr.cost_AT()));
  EXPECT_EQ(tr.mcost_AT, tr.mcost_AS);
  EXPECT_TRUE(verify_relation(tr).ok);
  EXPECT_THROW(run_reduction(g, {}, to_dist<double>(uniform_metric(1)), 0, rng), DomainError);
}

TEST(VerifyRelation, RandomTasksOnUniformSpace) {
  Rng rng(53);
  auto d = to_dist<double>(uniform_metric(3));
  for (int trial = 0; trial < 500; ++trial) {
    GreedyServer<double> g;
    auto tr = run_reduction(g, random_tasks(rng, 3, 30), d, uniform_index(rng, 3), rng);
    auto rep = verify_relation(tr);
    ASSERT_TRUE(rep.ok) << rep.what << " at " << rep.first_violation;
  }
}

TEST(VerifyRelation, ExactArithmeticOnRandomMetrics) {
  Rng rng(54);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 2 + uniform_index(rng, 4);
    auto d = to_dist<Rational>(testsupport::random_metric(rng, n, 1, 4));
    TaskSeq<Rational> tau;
    for (int i = 0; i < 25; ++i) tau.push_back({uniform_index(rng, n), Rational(long(uniform_index(rng, 9)), 3)});
    for (const auto& name : server_algorithm_names()) {
      auto a = server_algorithm<Rational>(name);
      auto tr = run_reduction(*a, tau, d, uniform_index(rng, n), rng);
      auto rep = verify_relation(tr);
      ASSERT_TRUE(rep.ok) << name << ": " << rep.what;
    }
  }
}

TEST(VerifyRelation, AdversarialTasksOnThreePointHst) {
  auto adv = hst_adversary(star_tree(3), Constants::defaults(), true);
  auto d = to_dist<double>(hst_to_metric(adv.tree));
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    TaskSeq<double> tau;
    adv.sample(adv.beta, rng, tau);
    for (const auto& name : server_algorithm_names()) {
      auto a = server_algorithm<double>(name);
      auto rep = verify_relation(run_reduction(*a, tau, d, seed % 3, rng));
      ASSERT_TRUE(rep.ok) << name << ": " << rep.what;
    }
  }
}

TEST(VerifyRelation, DetectsTamperedTrace) {
  auto d = to_dist<double>(uniform_metric(3));
  Rng rng(2);
  GreedyServer<double> g;
  auto tr = run_reduction(g, {{0, 2}, {1, 2}, {2, 2}}, d, 0, rng);
  tr.mcost_AS += 1;
  EXPECT_FALSE(verify_relation(tr).ok);
}

TEST(RunReduction, RequestsIgnoreAlgorithmRandomness) {
  Rng rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 2 + uniform_index(rng, 5);
    auto d = to_dist<double>(testsupport::random_metric(rng, n, 0.5, 3));
    auto tau = random_tasks(rng, n, 30);
    std::size_t u0 = uniform_index(rng, n);
    std::vector<std::size_t> ref;
    bool first = true;
    for (const auto& name : server_algorithm_names())
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto a = server_algorithm<double>(name);
        Rng arng(seed * 977 + 1);
        auto tr = run_reduction(*a, tau, d, u0, arng);
        if (first) ref = tr.sigma, first = false;
        ASSERT_EQ(tr.sigma, ref);
      }
  }
}
