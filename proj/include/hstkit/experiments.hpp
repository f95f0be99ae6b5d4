#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hstkit/adversary.hpp"
#include "hstkit/io.hpp"
#include "hstkit/kserver.hpp"
#include "hstkit/ramsey.hpp"

namespace hstkit {

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t trials = 200;
  double tol = kDefaultTol;
  std::size_t budget_points = 4096;
  Constants constants = Constants::defaults();
  bool override_k = true;
};

inline Json module_versions() {
  Json j;
  for (const char* m : {"metric-core", "hst", "ramsey", "mts-sim", "adversary", "kserver", "probcheck", "cli"})
    j[m] = kVersion;
  return j;
}

inline Json report_header(const std::string& name, const ExperimentConfig& cfg) {
  Json j;
  j["experiment"] = name;
  j["version"] = kVersion;
  j["modules"] = module_versions();
  j["constants"] = constants_to_json(cfg.constants);
  j["config"] = Json{{"seed", cfg.seed}, {"trials", cfg.trials}, {"tol", cfg.tol}, {"budget_points", cfg.budget_points}};
  return j;
}

inline Json adversary_summary(const HstAdversary& a) {
  Json j;
  j["r"] = a.r;
  j["beta"] = a.beta;
  j["eta"] = a.eta;
  j["fixed_r"] = a.fixed_r;
  j["fixed_beta"] = a.fixed_beta;
  j["k_tree"] = std::isinf(a.k_tree) ? Json("inf") : Json(a.k_tree);
  j["k_theorem"] = a.k_theorem;
  j["k_ok"] = a.k_ok;
  bool r_inv = true, b_inv = true, pre = true;
  for (const auto& nd : a.nodes) {
    if (nd.leaf) continue;
    r_inv = r_inv && nd.r_invariant;
    b_inv = b_inv && nd.beta_invariant;
    pre = pre && nd.preconditions_met;
  }
  j["r_invariant_all"] = r_inv;
  j["beta_invariant_all"] = b_inv;
  j["ratio_preconditions_all"] = pre;
  return j;
}

// Runs the flexible member beta' on the tree metric; verdicts use the construction's claims.
inline Json evaluate_hst_adversary(const HstAdversary& adv, double beta_prime, const ExperimentConfig& cfg,
                                   std::optional<MetricSpace> alt = std::nullopt, double alt_alpha = 1) {
  Json j;
  const MetricSpace tm = hst_to_metric(adv.tree);
  const double delta = adv.tree.root_label();
  auto u = Umts<double>::fair(to_dist<double>(tm));
  auto est = estimate_ratio(adv.sampler(beta_prime), u, builtin_names(), cfg.trials, cfg.seed, adv.r * beta_prime * delta,
                            beta_prime * delta);
  j["beta_prime"] = beta_prime;
  j["estimate"] = estimate_to_json(est);
  bool consistent = true;
  for (const auto& a : est.algorithms) consistent = consistent && a.consistent;
  j["verdicts"] = Json{{"opt0_within_bound", est.opt0_clear}, {"online_not_below_bound", consistent}};
  if (alt) {
    auto ua = Umts<double>::fair(to_dist<double>(*alt));
    auto ea = estimate_ratio(adv.sampler(beta_prime), ua, builtin_names(), cfg.trials, cfg.seed, 0, kInf);
    Json x;
    x["transfer_r"] = transfer_bound(adv.r, alt_alpha);
    x["estimate"] = estimate_to_json(ea);
    j["subspace"] = std::move(x);
  }
  return j;
}

inline Json experiment_hst_lb(const HstTree& tree, const ExperimentConfig& cfg, std::optional<double> beta_prime = {}) {
  Json rep = report_header("hst-lb", cfg);
  rep["tree"] = hst_to_json(tree);
  HstAdversary adv = hst_adversary(tree, cfg.constants, cfg.override_k);
  rep["adversary"] = adversary_summary(adv);
  if (adv.nodes[adv.root].leaf) {
    rep["results"] = Json::object();
    rep["pass"] = true;
    return rep;
  }
  double bp = beta_prime.value_or(adv.beta_lo());
  rep["results"] = evaluate_hst_adversary(adv, bp, cfg);
  const auto& v = rep["results"]["verdicts"];
  rep["pass"] = v["opt0_within_bound"].get<bool>() && v["online_not_below_bound"].get<bool>();
  return rep;
}

inline Json experiment_mesh_lb(int s, int h, double p, const ExperimentConfig& cfg) {
  Json rep = report_header("mesh-lb", cfg);
  rep["config"]["s"] = s;
  rep["config"]["h"] = h;
  rep["config"]["p"] = std::isinf(p) ? Json("inf") : Json(p);
  MeshExtraction mx = mesh_extract(s, h, p, cfg.budget_points);
  Json ex;
  ex["points"] = mx.ex.subset.size();
  ex["depth"] = mx.depth;
  ex["code_size"] = mx.code_size;
  ex["measured_factor"] = mx.ex.measured_factor;
  ex["khst9"] = check_khst(mx.ex.tree, 9, cfg.tol).ok;
  rep["extraction"] = ex;
  if (mx.ex.subset.size() < 2) {
    rep["results"] = Json::object();
    rep["pass"] = true;
    return rep;
  }
  HstAdversary adv = hst_adversary(mx.ex.tree, cfg.constants, cfg.override_k);
  rep["adversary"] = adversary_summary(adv);
  MetricSpace full = mesh_metric(s, h, p, cfg.budget_points);
  MetricSpace sub = restrict_to(full, leaf_points(adv.tree));
  rep["results"] = evaluate_hst_adversary(adv, adv.beta_lo(), cfg, sub, mx.ex.measured_factor);
  const auto& v = rep["results"]["verdicts"];
  rep["pass"] = ex["khst9"].get<bool>() && v["opt0_within_bound"].get<bool>() && v["online_not_below_bound"].get<bool>();
  return rep;
}

inline Json experiment_kserver_lb(const MetricSpace& m, std::size_t K, const ExperimentConfig& cfg) {
  Json rep = report_header("kserver-lb", cfg);
  rep["config"]["K"] = K;
  rep["config"]["n"] = m.size();
  Extraction ex = ramsey_extract(m, 2, 4, 2);
  std::vector<std::string> pts = leaf_points(ex.tree);
  const std::size_t keep = std::min(pts.size(), K + 1);
  std::vector<int> leaves = leaf_nodes(ex.tree);
  leaves.resize(keep);
  HstTree sub_tree = remove_degenerate(induced_subtree(ex.tree, leaves));
  MetricSpace sub = restrict_to(m, leaf_points(sub_tree));
  rep["extraction"] = Json{{"subset", ex.subset.size()}, {"used", keep}, {"padding_points", K + 1 > keep ? K + 1 - keep : 0}};
  if (keep < 2) {
    rep["results"] = Json::object();
    rep["pass"] = true;
    return rep;
  }
  const auto d = to_dist<Rational>(sub);
  std::optional<HstAdversary> adv;
  try {
    adv = hst_adversary(sub_tree, cfg.constants, true);
  } catch (const DomainError&) {
  }
  rep["tau_source"] = adv ? "hst_adversary" : "uniform_random";
  Json per = Json::object();
  bool all_ok = true;
  for (const auto& name : server_algorithm_names()) {
    std::size_t violations = 0;
    RunningStat ratio;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      Rng rng(mix_seed(cfg.seed, t));
      TaskSeq<double> tau;
      if (adv) {
        adv->sample(adv->beta_lo(), rng, tau);
      } else {
        for (int i = 0; i < 20; ++i) tau.push_back({uniform_index(rng, keep), double(uniform_index(rng, 4))});
      }
      TaskSeq<Rational> exact;
      for (const auto& x : tau) exact.push_back({x.point, Rational(x.cost)});
      auto alg = server_algorithm<Rational>(name);
      Rng arng(mix_seed(cfg.seed, 7000 + t));
      auto tr = run_reduction(*alg, exact, d, 0, arng);
      auto vr = verify_relation(tr);
      if (!vr.ok) ++violations;
      if (tr.opt_S > 0) ratio.add(as_double(tr.cost_AS()) / as_double(tr.opt_S));
    }
    per[name] = Json{{"violations", violations}, {"mean_server_ratio", ratio.mean}};
    all_ok = all_ok && violations == 0;
  }
  rep["results"] = per;
  rep["pass"] = all_ok;
  return rep;
}

inline Json experiment_line_impossibility(int n_lo, int n_hi, const std::vector<double>& alphas, const ExperimentConfig& cfg) {
  Json rep = report_header("line-impossibility", cfg);
  rep["config"]["n_lo"] = n_lo;
  rep["config"]["n_hi"] = n_hi;
  rep["config"]["alphas"] = alphas;
  if (n_lo < 1 || n_hi > 16 || n_lo > n_hi) throw BudgetError("line-impossibility: need 1 <= n_lo <= n_hi <= 16");
  Json rows = Json::array();
  bool pass = true;
  for (int n = n_lo; n <= n_hi; ++n) {
    MetricSpace line = path_metric(std::size_t(n));
    for (double a : alphas) {
      auto res = max_ultrametric_subset(line, a, cfg.tol);
      Json row{{"n", n}, {"alpha", a}, {"max_subset", res.best}, {"witness", res.witness}};
      if (a == 1 && n >= 2) {
        row["expected_two"] = res.best == 2;
        pass = pass && res.best == 2;
      }
      if (a == 2 && n >= 4) {
        row["strictly_smaller"] = res.best < std::size_t(n);
        pass = pass && res.best < std::size_t(n);
      }
      rows.push_back(std::move(row));
    }
  }
  rep["results"] = rows;
  rep["pass"] = pass;
  return rep;
}

struct TightInstance {
  int kase = 1;
  double k = 4, ell = 2;
  int h = 1;
  std::optional<double> eps;
};

inline Json experiment_tight_examples(const std::vector<TightInstance>& inst, const ExperimentConfig& cfg,
                                      std::size_t exhaustive_limit = 64) {
  Json rep = report_header("tight-examples", cfg);
  Json rows = Json::array();
  bool pass = true;
  for (const auto& in : inst) {
    TightExample ex = tight_example(in.kase, in.k, in.ell, in.h, in.eps, cfg.budget_points);
    Json row{{"case", in.kase}, {"k", in.k},  {"ell", in.ell}, {"h", in.h}, {"eps", ex.eps},
             {"ell_prime", ex.ell_prime}, {"n", ex.n}, {"ceiling", ex.ceiling}, {"eps_admissible", ex.eps_admissible}};
    if (ex.n <= exhaustive_limit) {
      auto res = max_khst_subset(hst_to_metric(ex.tree), in.k, in.ell);
      row["max_subset"] = res.best;
      bool ok = double(res.best) <= ex.ceiling + 1e-9;
      row["within_ceiling"] = ok;
      if (ex.eps_admissible) pass = pass && ok;
    } else {
      row["max_subset"] = nullptr;
    }
    rows.push_back(std::move(row));
  }
  rep["results"] = rows;
  rep["pass"] = pass;
  return rep;
}

}  // namespace hstkit
