// Command-line front end: hstkit <subcommand> [options]
// Exit codes: 0 all checks pass, 1 a check failed, 2 usage error.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hstkit/experiments.hpp"
#include "hstkit/probcheck.hpp"

using namespace hstkit;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::size_t trials = 200;
  double tol = kDefaultTol;
  std::size_t budget_points = 4096;
  std::string constants_file;
  std::string out;
  std::string format = "json";
  bool timing = false;
};

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Constants load_constants(const Globals& g) {
  if (g.constants_file.empty()) return Constants::defaults();
  if (g.constants_file == "aggressive") return Constants::aggressive();
  return constants_from_json(read_json_file(g.constants_file));
}

ExperimentConfig make_config(const Globals& g) {
  ExperimentConfig c;
  c.seed = g.seed;
  c.trials = g.trials;
  c.tol = g.tol;
  c.budget_points = g.budget_points;
  c.constants = load_constants(g);
  return c;
}

std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Tabular results become rows; anything else is flattened to key/value lines.
std::string to_tsv(const Json& j) {
  std::ostringstream os;
  const Json* rows = nullptr;
  if (j.is_array()) rows = &j;
  else if (j.contains("results") && j["results"].is_array()) rows = &j["results"];
  else if (j.contains("rows") && j["rows"].is_array()) rows = &j["rows"];
  if (rows && !rows->empty() && (*rows)[0].is_object()) {
    std::vector<std::string> keys;
    for (const auto& r : *rows)
      for (auto it = r.begin(); it != r.end(); ++it)
        if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) keys.push_back(it.key());
    for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "\t" : "") << keys[i];
    os << "\n";
    for (const auto& r : *rows) {
      for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "\t" : "") << (r.contains(keys[i]) ? scalar_text(r[keys[i]]) : "");
      os << "\n";
    }
    return os.str();
  }
  std::function<void(const std::string&, const Json&)> flat = [&](const std::string& prefix, const Json& v) {
    if (v.is_object()) {
      for (auto it = v.begin(); it != v.end(); ++it) flat(prefix.empty() ? it.key() : prefix + "." + it.key(), it.value());
    } else {
      os << prefix << "\t" << scalar_text(v) << "\n";
    }
  };
  flat("", j);
  return os.str();
}

void emit_text(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw DomainError("cannot write '" + g.out + "'");
  f << text;
}

void emit(const Globals& g, const Json& j) { emit_text(g, g.format == "tsv" ? to_tsv(j) : j.dump(2) + "\n"); }

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    if (tok == "inf") out.push_back(kInf);
    else out.push_back(std::stod(tok));
  }
  return out;
}

double parse_norm(const std::string& p) { return p == "inf" ? kInf : std::stod(p); }

Rational parse_rational(const std::string& s) {
  Rational q;
  if (s.find('/') != std::string::npos) {
    q = Rational(s);
  } else if (s.find('.') != std::string::npos) {
    auto dot = s.find('.');
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    mpz_class den = 1;
    for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    q = Rational(mpz_class(digits), den);
  } else {
    q = Rational(mpz_class(s));
  }
  q.canonicalize();
  return q;
}

MetricSpace load_metric(const std::string& path, double tol) { return metric_from_json(read_json_file(path), tol); }
HstTree load_tree(const std::string& path) { return hst_from_json(read_json_file(path)); }

TaskSeq<double> load_tasks(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  return tasks_from_jsonl(in, n);
}

Json class_to_json(const HstClass& c) {
  return Json{{"is_khst", c.is_khst}, {"binary_balanced", c.binary_balanced}, {"binary_uniform", c.binary_uniform},
              {"bkrs", c.bkrs},       {"bfm", c.bfm},                         {"krr", c.krr}};
}

Json tail_to_json(const TailCheck& c) {
  Json j{{"m", c.m}, {"p", c.p.get_str()}, {"mu", c.mu.get_str()}, {"delta", c.delta.get_str()}, {"x", c.x},
         {"main", to_string(c.main.verdict)}, {"main_log_margin", c.main.log_margin}};
  j["point"] = c.point_applicable ? Json(to_string(c.point.verdict)) : Json("n/a");
  j["window"] = c.window_applicable ? Json(to_string(c.window.verdict)) : Json("n/a");
  j["ok"] = c.ok();
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metric Ramsey extraction, HST tools and task-system lower-bound harness"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--trials", g.trials, "Monte Carlo trials");
  app.add_option("--tol", g.tol, "relative tolerance for metric checks");
  app.add_option("--budget-points", g.budget_points, "point budget for generated spaces");
  app.add_option("--constants", g.constants_file, "constants JSON file, or 'aggressive'");
  app.add_option("--out", g.out, "write the report here instead of stdout");
  app.add_option("--format", g.format, "json or tsv")->check(CLI::IsMember({"json", "tsv"}));
  app.add_flag("--timing", g.timing, "print wall-clock seconds to stderr");

  std::string in_path, tree_path, tasks_path;
  // validate
  auto* validate = app.add_subcommand("validate", "check metric axioms");
  validate->add_option("-i,--input", in_path, "metric JSON")->required();

  // generate
  std::string kind = "uniform";
  int gb = 3, gn = 4, gs = 2, gh = 2;
  double gdelta = 1, gstep = 1;
  std::string gp = "1";
  auto* generate = app.add_subcommand("generate", "emit a standard metric or tree");
  generate->add_option("--kind", kind, "uniform|path|mesh|complete-tree|star|caterpillar")
      ->check(CLI::IsMember({"uniform", "path", "mesh", "complete-tree", "star", "caterpillar"}));
  generate->add_option("--b", gb, "points (uniform), branching (trees)");
  generate->add_option("--n", gn, "points (path)");
  generate->add_option("--delta", gdelta, "distance (uniform), top label (trees)");
  generate->add_option("--step", gstep, "spacing (path), per-level label factor in (0, 1] (trees)");
  generate->add_option("--s", gs, "mesh side");
  generate->add_option("--h", gh, "mesh dimension, tree height");
  generate->add_option("--p", gp, "norm (1, 2, ..., inf)");

  // extract
  std::string mode = "ramsey", special = "krr";
  double beta = 2, k = 4, ell = 2;
  int sh = 2;
  long long em = -1;
  auto* extract = app.add_subcommand("extract", "subspace extraction");
  extract->add_option("--mode", mode, "shell|ramsey|prune|sparse|mesh|binary-balanced|special")
      ->check(CLI::IsMember({"shell", "ramsey", "prune", "sparse", "mesh", "binary-balanced", "special"}));
  extract->add_option("-i,--input", in_path, "metric JSON");
  extract->add_option("--tree", tree_path, "HST JSON");
  extract->add_option("--beta", beta);
  extract->add_option("--k", k);
  extract->add_option("--ell", ell);
  extract->add_option("--h", sh, "sparseness (sparse) or mesh dimension (mesh)");
  extract->add_option("--s", gs, "mesh side");
  extract->add_option("--p", gp, "mesh norm");
  extract->add_option("--m", em, "target size (binary-balanced, special bkrs)");
  extract->add_option("--kind", special, "krr|bfm|bkrs")->check(CLI::IsMember({"krr", "bfm", "bkrs"}));

  // code
  int ch = 4;
  double calpha = 1.0 / 3;
  auto* code = app.add_subcommand("code", "greedy binary code");
  code->add_option("--h", ch, "word length")->required();
  code->add_option("--alpha", calpha, "relative distance in (0, 0.5)");

  // classify
  double ck = 1;
  std::string other_tree;
  auto* classify = app.add_subcommand("classify", "HST subclass flags");
  classify->add_option("--tree", tree_path, "HST JSON")->required();
  classify->add_option("--k", ck);
  classify->add_option("--against", other_tree, "second tree for the lca-pattern check");

  // oracle
  std::string okind = "subdominant";
  double oalpha = 1;
  auto* oracle = app.add_subcommand("oracle", "brute-force oracles");
  oracle->add_option("--kind", okind, "subdominant|ultrametric-subset|khst-subset|approx")
      ->check(CLI::IsMember({"subdominant", "ultrametric-subset", "khst-subset", "approx"}));
  oracle->add_option("-i,--input", in_path, "metric JSON")->required();
  oracle->add_option("--other", tree_path, "second metric JSON (approx)");
  oracle->add_option("--alpha", oalpha);
  oracle->add_option("--k", k);
  oracle->add_option("--ell", ell);

  // mts
  std::string alg = "wfa_like", ratios_s;
  std::size_t start = 0;
  double sratio = 1;
  auto* mts = app.add_subcommand("mts", "run an online algorithm on a task sequence");
  mts->add_option("-i,--input", in_path, "metric JSON")->required();
  mts->add_option("--tasks", tasks_path, "task JSONL")->required();
  mts->add_option("--alg", alg)->check(CLI::IsMember(builtin_names()));
  mts->add_option("--start", start);
  mts->add_option("--ratios", ratios_s, "comma-separated cost ratios");
  mts->add_option("--s", sratio, "distance ratio");

  // adversary
  std::string akind = "fair";
  std::size_t ab = 2, sample_n = 0;
  double adelta = 1, abeta = -1;
  auto* adversary = app.add_subcommand("adversary", "describe or sample a lower-bound distribution");
  adversary->add_option("--kind", akind, "fair|unfair|composed|flexible|hst")
      ->check(CLI::IsMember({"fair", "unfair", "composed", "flexible", "hst"}));
  adversary->add_option("--b", ab);
  adversary->add_option("--delta", adelta);
  adversary->add_option("--ratios", ratios_s, "comma-separated cost ratios (sizes n_i for flexible)");
  adversary->add_option("--tree", tree_path);
  adversary->add_option("--beta-prime", abeta, "member of a flexible family");
  adversary->add_option("--sample", sample_n, "emit this many sampled sequences as task JSONL");

  // kserver
  std::string salg = "greedy";
  auto* kserver = app.add_subcommand("kserver", "task system to (n-1)-server reduction");
  kserver->add_option("-i,--input", in_path, "metric JSON")->required();
  kserver->add_option("--tasks", tasks_path, "task JSONL")->required();
  kserver->add_option("--alg", salg)->check(CLI::IsMember(server_algorithm_names()));
  kserver->add_option("--start", start);

  // probcheck
  std::string grid, pm, pp, pdelta;
  int nb_m = -1, nb_n = -1;
  auto* probcheck = app.add_subcommand("probcheck", "exact binomial tail and balls-in-bins checks");
  probcheck->add_option("--grid", grid, "default")->check(CLI::IsMember({"default"}));
  probcheck->add_option("--m", pm, "trials");
  probcheck->add_option("--p", pp, "success probability (rational or decimal)");
  probcheck->add_option("--delta", pdelta, "relative deviation");
  probcheck->add_option("--balls", nb_m, "balls (negative dependence)");
  probcheck->add_option("--bins", nb_n, "bins (negative dependence)");

  // experiment
  std::string ename;
  int es = 10, eh = 2, nlo = 4, nhi = 8, tcase = 1;
  std::string ealphas = "1,2", tinst;
  std::size_t eK = 3;
  double tk = 4, tell = 2;
  auto* experiment = app.add_subcommand("experiment", "composite pipelines");
  experiment->add_option("name", ename, "mesh-lb|hst-lb|kserver-lb|line-impossibility|tight-examples")
      ->required()
      ->check(CLI::IsMember({"mesh-lb", "hst-lb", "kserver-lb", "line-impossibility", "tight-examples"}));
  experiment->add_option("--tree", tree_path);
  experiment->add_option("-i,--input", in_path, "metric JSON (kserver-lb)");
  experiment->add_option("--s", es);
  experiment->add_option("--h", eh);
  experiment->add_option("--p", gp);
  experiment->add_option("--K", eK);
  experiment->add_option("--n-lo", nlo);
  experiment->add_option("--n-hi", nhi);
  experiment->add_option("--alphas", ealphas);
  experiment->add_option("--case", tcase);
  experiment->add_option("--k", tk);
  experiment->add_option("--ell", tell);
  experiment->add_option("--heights", tinst, "comma-separated heights (tight-examples)");
  experiment->add_option("--beta-prime", abeta);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  int rc = 0;
  try {
    if (*validate) {
      Json j;
      try {
        MetricSpace m = load_metric(in_path, g.tol);
        auto d = diameter(m);
        j = Json{{"valid", true}, {"n", m.size()}, {"diameter", d.value}, {"diameter_pair", {m.name(d.i), m.name(d.j)}}};
      } catch (const ValidationError& e) {
        j = Json{{"valid", false}, {"error", e.what()}};
        rc = 1;
      }
      emit(g, j);
    } else if (*generate) {
      Json j;
      if (kind == "uniform") j = metric_to_json(uniform_metric(std::size_t(gb), gdelta));
      else if (kind == "path") j = metric_to_json(path_metric(std::size_t(gn), gstep));
      else if (kind == "mesh") j = metric_to_json(mesh_metric(gs, gh, parse_norm(gp), g.budget_points));
      else if ((kind == "complete-tree" || kind == "caterpillar") && !(gstep > 0 && gstep <= 1))
        throw DomainError("generate: --step for trees must lie in (0, 1]");
      else if (kind == "complete-tree") j = hst_to_json(complete_tree(gb, gh, gdelta, gstep));
      else if (kind == "star") j = hst_to_json(star_tree(gb, gdelta));
      else j = hst_to_json(caterpillar_tree(gh, gdelta, gstep));
      emit(g, j);
    } else if (*extract) {
      Json j;
      bool ok = true;
      auto finish = [&](const Extraction& ex) {
        j = extraction_to_json(ex);
        ok = double(ex.subset.size()) >= ex.guaranteed_size - 1e-9 && ex.measured_factor <= ex.guaranteed_factor + 1e-9;
        j["checks_pass"] = ok;
      };
      if (mode == "shell" || mode == "ramsey") {
        if (in_path.empty()) throw DomainError("extract: --input required");
        MetricSpace m = load_metric(in_path, g.tol);
        finish(mode == "shell" ? shell_extract(m, beta) : ramsey_extract(m, beta, k, ell));
      } else if (mode == "prune") {
        if (tree_path.empty()) throw DomainError("extract: --tree required");
        finish(prune_to_khst(load_tree(tree_path), k, ell));
      } else if (mode == "mesh") {
        auto mx = mesh_extract(gs, sh, parse_norm(gp), g.budget_points);
        finish(mx.ex);
        j["depth"] = mx.depth;
        j["code_size"] = mx.code_size;
      } else {
        if (tree_path.empty()) throw DomainError("extract: --tree required");
        HstTree t = load_tree(tree_path);
        HstTree out;
        if (mode == "sparse") {
          out = sparse_subtree(t, sh);
          ok = is_h_sparse(out, sh) &&
               double(leaf_nodes(out).size()) >= std::pow(double(leaf_nodes(t).size()), 1.0 / sh) - 1e-9;
        } else if (mode == "binary-balanced") {
          out = binary_balanced_extract(t, em);
          ok = classify_hst(out, 1).binary_balanced;
        } else {
          SpecialKind sk = special == "krr" ? SpecialKind::krr : special == "bfm" ? SpecialKind::bfm : SpecialKind::bkrs;
          auto se = special_extract(t, sk, em);
          out = se.tree;
          auto c = classify_hst(out, 1);
          ok = sk == SpecialKind::krr ? c.krr : sk == SpecialKind::bfm ? c.bfm : c.bkrs;
          j["guaranteed_size"] = se.guaranteed_size;
        }
        j["subset"] = leaf_points(out);
        j["tree"] = hst_to_json(out);
        j["checks_pass"] = ok;
      }
      emit(g, j);
      rc = ok ? 0 : 1;
    } else if (*code) {
      auto c = gv_code(ch, calpha);
      int md = ch + 1;
      for (std::size_t a = 0; a < c.words.size(); ++a)
        for (std::size_t b = a + 1; b < c.words.size(); ++b) md = std::min(md, std::popcount(c.words[a] ^ c.words[b]));
      const double bound = std::exp2(ch * (1 - binary_entropy(calpha)));
      bool ok = (c.words.size() < 2 || md >= c.min_distance) && double(c.words.size()) >= bound - 1e-9;
      Json words = Json::array();
      for (auto w : c.words) {
        std::string s;
        for (int b = ch - 1; b >= 0; --b) s += ((w >> b) & 1u) ? '1' : '0';
        words.push_back(s);
      }
      emit(g, Json{{"h", ch}, {"min_distance", c.min_distance}, {"measured_min_distance", c.words.size() < 2 ? Json(nullptr) : Json(md)},
                   {"size", c.words.size()}, {"size_bound", bound}, {"checks_pass", ok}, {"words", words}});
      rc = ok ? 0 : 1;
    } else if (*classify) {
      HstTree t = load_tree(tree_path);
      Json j = class_to_json(classify_hst(t, ck, g.tol));
      auto kc = check_khst(t, ck, g.tol);
      if (!kc.ok) j["khst_witness"] = {kc.parent_label, kc.child_label};
      if (!other_tree.empty()) {
        auto lc = check_lca_consistency(t, load_tree(other_tree));
        j["lca_consistent"] = lc.ok;
        if (!lc.ok) j["lca_witness"] = {lc.a, lc.b, lc.c, lc.d};
      }
      emit(g, j);
    } else if (*oracle) {
      MetricSpace m = load_metric(in_path, g.tol);
      Json j;
      if (okind == "subdominant") {
        HstTree u = subdominant_ultrametric(m);
        j["tree"] = hst_to_json(u);
        j["approx"] = approx_to_json(approximation_factor(m, hst_to_metric(u), g.tol));
      } else if (okind == "approx") {
        if (tree_path.empty()) throw DomainError("oracle approx: --other required");
        j = approx_to_json(approximation_factor(m, load_metric(tree_path, g.tol), g.tol));
      } else {
        if (m.size() > 16) throw BudgetError("oracle: subset search limited to 16 points");
        auto res = okind == "ultrametric-subset" ? max_ultrametric_subset(m, oalpha, g.tol) : max_khst_subset(m, k, ell);
        std::vector<std::string> w;
        for (auto i : res.witness) w.push_back(m.name(i));
        j = Json{{"max_subset", res.best}, {"witness", w}, {"subsets_checked", res.checks}};
      }
      emit(g, j);
    } else if (*mts) {
      MetricSpace m = load_metric(in_path, g.tol);
      auto seq = load_tasks(tasks_path, m.size());
      Umts<double> u = Umts<double>::fair(to_dist<double>(m));
      if (!ratios_s.empty()) {
        u.r = parse_list(ratios_s);
        if (u.r.size() != m.size()) throw DomainError("mts: need one ratio per point");
      }
      u.s = sratio;
      if (start >= m.size()) throw DomainError("mts: start out of range");
      auto a = builtin_algorithm<double>(alg);
      Rng rng(g.seed);
      auto rep = run_online(*a, u, seq, start, rng);
      Json j = cost_report_to_json(rep);
      j["algorithm"] = alg;
      j["opt"] = opt_cost(u.dist, seq, start);
      j["opt0"] = opt0_cost(u.dist, seq, start);
      emit(g, j);
    } else if (*adversary) {
      const Constants c = load_constants(g);
      Sampler sampler;
      Json j;
      if (akind == "hst") {
        if (tree_path.empty()) throw DomainError("adversary hst: --tree required");
        auto adv = std::make_shared<HstAdversary>(hst_adversary(load_tree(tree_path), c, true));
        j = adversary_summary(*adv);
        double bp = abeta > 0 ? abeta : adv->beta_lo();
        j["beta_prime"] = bp;
        if (!adv->nodes[adv->root].leaf) sampler = [adv, bp](Rng& r, TaskSeq<double>& o) { adv->sample(bp, r, o); };
      } else if (akind == "fair") {
        auto d = fair_uniform_adversary(ab, adelta);
        j = discrete_to_json(d);
        sampler = d.sampler();
      } else {
        auto r = parse_list(ratios_s);
        if (akind == "flexible") {
          auto f = flexible_uniform(r.size(), adelta, r, c);
          j = flexible_to_json(f.family);
          j["preconditions_met"] = f.preconditions_met;
          double bp = abeta > 0 ? abeta : f.family.beta_lo();
          j["beta_prime"] = bp;
          sampler = f.family.member(bp).sampler();
        } else {
          auto d = akind == "unfair" ? unfair_uniform_adversary(r.size(), adelta, r, c)
                                     : composed_uniform_adversary(r.size(), adelta, r, c);
          j = discrete_to_json(d);
          sampler = d.sampler();
        }
      }
      j["constants"] = constants_to_json(c);
      if (sample_n > 0) {
        if (!sampler) throw DomainError("adversary: nothing to sample");
        std::string text;
        for (std::size_t t = 0; t < sample_n; ++t) {
          Rng rng(mix_seed(g.seed, t));
          TaskSeq<double> seq;
          sampler(rng, seq);
          text += tasks_to_jsonl(seq);
        }
        emit_text(g, text);
      } else {
        emit(g, j);
      }
    } else if (*kserver) {
      MetricSpace m = load_metric(in_path, g.tol);
      auto seq = load_tasks(tasks_path, m.size());
      if (start >= m.size()) throw DomainError("kserver: start out of range");
      TaskSeq<Rational> exact;
      for (const auto& x : seq) exact.push_back({x.point, Rational(x.cost)});
      auto a = server_algorithm<Rational>(salg);
      Rng rng(g.seed);
      auto tr = run_reduction(*a, exact, to_dist<Rational>(m), start, rng);
      auto vr = verify_relation(tr);
      std::vector<std::string> sigma;
      for (auto l : tr.sigma) sigma.push_back(m.name(l));
      Json j{{"requests", sigma},
             {"mcost_tasks", as_double(tr.mcost_AT)},
             {"lcost_tasks", as_double(tr.lcost_AT)},
             {"cost_servers", as_double(tr.cost_AS())},
             {"opt_tasks", as_double(tr.opt_T)},
             {"opt_servers", as_double(tr.opt_S)},
             {"relations_hold", vr.ok}};
      if (!vr.ok) j["first_violation"] = Json{{"step", vr.first_violation}, {"what", vr.what}};
      emit(g, j);
      rc = vr.ok ? 0 : 1;
    } else if (*probcheck) {
      Json j;
      bool ok = true;
      if (!grid.empty()) {
        Json rows = Json::array();
        auto rep = check_tail_grid(TailGrid::standard(), {}, [&](const TailCheck& c) { rows.push_back(tail_to_json(c)); });
        j = Json{{"checks", rep.checks}, {"point_checks", rep.point_checks}, {"window_checks", rep.window_checks},
                 {"failures", rep.failures}, {"min_main_log_margin", rep.min_main_margin}};
        j["rows"] = std::move(rows);
        ok = rep.failures == 0;
      } else if (nb_m >= 0 && nb_n >= 1) {
        auto r = check_negdep(nb_m, nb_n);
        j = Json{{"balls", nb_m}, {"bins", nb_n}, {"product_checks", r.product_checks},
                 {"conditional_checks", r.conditional_checks}, {"conditional_skipped", r.conditional_skipped}, {"ok", r.ok}};
        if (!r.ok) j["first_violation"] = r.first_violation;
        ok = r.ok;
      } else if (!pm.empty() && !pp.empty() && !pdelta.empty()) {
        auto c = check_tail_lb(std::stol(pm), parse_rational(pp), parse_rational(pdelta));
        j = tail_to_json(c);
        j["tail"] = binom_tail(c.m, c.p, c.x).get_str();
        ok = c.ok();
      } else {
        throw DomainError("probcheck: give --grid default, --m/--p/--delta, or --balls/--bins");
      }
      j["pass"] = ok;
      emit(g, j);
      rc = ok ? 0 : 1;
    } else if (*experiment) {
      ExperimentConfig cfg = make_config(g);
      Json rep;
      if (ename == "hst-lb") {
        if (tree_path.empty()) throw DomainError("experiment hst-lb: --tree required");
        rep = experiment_hst_lb(load_tree(tree_path), cfg, abeta > 0 ? std::optional<double>(abeta) : std::nullopt);
      } else if (ename == "mesh-lb") {
        rep = experiment_mesh_lb(es, eh, parse_norm(gp), cfg);
      } else if (ename == "kserver-lb") {
        MetricSpace m = in_path.empty() ? mesh_metric(es, eh, parse_norm(gp), cfg.budget_points) : load_metric(in_path, g.tol);
        rep = experiment_kserver_lb(m, eK, cfg);
      } else if (ename == "line-impossibility") {
        rep = experiment_line_impossibility(nlo, nhi, parse_list(ealphas), cfg);
      } else {
        std::vector<TightInstance> inst;
        for (double h : parse_list(tinst.empty() ? "1" : tinst)) inst.push_back({tcase, tk, tell, int(h), std::nullopt});
        rep = experiment_tight_examples(inst, cfg);
      }
      emit(g, rep);
      rc = rep["pass"].get<bool>() ? 0 : 1;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    rc = 1;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    rc = 2;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    rc = 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    rc = 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    rc = 2;
  }
  if (g.timing) {
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "wall_clock_s\t" << s << "\n";
  }
  return rc;
}
