#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "hstkit/common.hpp"
#include "hstkit/exact.hpp"
#include "hstkit/hst.hpp"
#include "hstkit/mts.hpp"
#include "hstkit/ramsey.hpp"

namespace hstkit {

struct Constants {
  double lambda1 = 1.0 / 180;
  double lambda2 = 13;
  double lambda3 = 1300;
  double rho = 0;
  double c1 = 0, c2 = 0, c3 = 0;

  static Constants defaults() {
    Constants c;
    c.lambda3 = 100 * c.lambda2;
    c.rho = c.lambda1 / (2 * 64 * std::exp(1.0) * c.lambda2);
    c.c2 = 0.5 * c.rho;
    c.c3 = 4 * c.lambda3;
    c.c1 = 2 * c.c3;
    return c;
  }
  // Larger rho so that claimed bounds are visible at small sizes.
  static Constants aggressive() {
    Constants c = defaults();
    c.rho = 0.1;
    c.c2 = 0.5 * c.rho;
    return c;
  }
  void validate() const {
    for (double v : {lambda1, lambda2, lambda3, rho, c1, c2, c3})
      if (!(v > 0) || !std::isfinite(v)) throw DomainError("constants must be positive and finite");
  }
};

enum class AdvKind { empty, fair, unfair_equal, unfair_binary };

inline const char* to_string(AdvKind k) {
  switch (k) {
    case AdvKind::empty: return "empty";
    case AdvKind::fair: return "fair";
    case AdvKind::unfair_equal: return "unfair_equal";
    case AdvKind::unfair_binary: return "unfair_binary";
  }
  return "?";
}

// Distribution over elementary task sequences on the uniform space of b points.
// Every task is (v_i, scale * alpha_i * delta).
struct DiscreteAdversary {
  AdvKind kind = AdvKind::empty;
  std::size_t b = 0;
  double delta = 1;
  std::vector<double> alpha;
  std::vector<std::size_t> label;  // internal index -> emitted point
  double scale = 1;

  double r = 1;        // certified by the construction
  double beta = 0;
  double r_bound = 0;  // closed-form lower bound on r
  double eta = 1;

  // Unfair parameters.
  int ell = 0;
  double mu_tilde = 0, delta1 = 0, delta2 = 0, p_hat_lb = 0;
  std::size_t mu = 0, m = 0;

  std::vector<double> coefficients() const {
    std::vector<double> out(alpha);
    for (double& a : out) a *= scale;
    return out;
  }

  std::size_t point(std::size_t i) const { return label.empty() ? i : label[i]; }

  void sample(Rng& rng, TaskSeq<double>& out) const {
    switch (kind) {
      case AdvKind::empty: return;
      case AdvKind::fair: {
        std::vector<std::size_t> pi(b);
        std::iota(pi.begin(), pi.end(), 0);
        for (std::size_t i = b; i > 1; --i) std::swap(pi[i - 1], pi[uniform_index(rng, i)]);
        for (std::size_t i = 1; i <= b; ++i)
          for (std::size_t j = 0; j < i; ++j) out.push_back({point(pi[j]), scale * alpha[pi[j]] * delta});
        return;
      }
      case AdvKind::unfair_equal:
      case AdvKind::unfair_binary:
        for (std::size_t t = 0; t < m; ++t) {
          std::size_t i = uniform_index(rng, b);
          out.push_back({point(i), scale * alpha[i] * delta});
        }
        return;
    }
  }

  Sampler sampler() const {
    DiscreteAdversary copy = *this;
    return [copy](Rng& rng, TaskSeq<double>& out) { copy.sample(rng, out); };
  }

  std::size_t expected_length() const {
    if (kind == AdvKind::fair) return b * (b + 1) / 2;
    return m;
  }
};

inline void check_ratios(const std::vector<double>& r, const char* who) {
  if (r.empty()) throw DomainError(std::string(who) + ": empty ratio list");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] >= 1) || !std::isfinite(r[i])) throw DomainError(std::string(who) + ": ratios must be finite and >= 1");
    if (i && r[i] > r[i - 1]) throw DomainError(std::string(who) + ": ratios must be non-increasing");
  }
}

// rho * ln(sum_i exp(r_i / rho)).
inline double ratio_target(const std::vector<double>& r, double rho) {
  std::vector<double> x(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) x[i] = r[i] / rho;
  return rho * log_sum_exp(x);
}

inline DiscreteAdversary fair_uniform_adversary(std::size_t b, double delta = 1) {
  if (b < 2) throw DomainError("fair adversary: need b >= 2");
  if (!(delta > 0)) throw DomainError("fair adversary: delta must be positive");
  DiscreteAdversary d;
  d.kind = AdvKind::fair;
  d.b = b;
  d.delta = delta;
  d.alpha.assign(b, 1.0);
  d.r = harmonic(int(b)) / 2;
  d.beta = 2;
  d.r_bound = d.r;
  return d;
}

// Tasks are drawn uniformly from all b points, m = b * mu of them, each (v_i, delta / r_i).
inline DiscreteAdversary unfair_uniform_adversary(std::size_t b, double delta, const std::vector<double>& r,
                                                  const Constants& c = Constants::defaults()) {
  check_ratios(r, "unfair adversary");
  if (b < 2 || r.size() != b) throw DomainError("unfair adversary: need b >= 2 ratios");
  if (!(delta > 0)) throw DomainError("unfair adversary: delta must be positive");
  if (r[0] < 0.25 * std::log(double(b))) throw DomainError("unfair adversary: need r_1 >= ln(b)/4");
  DiscreteAdversary d;
  d.b = b;
  d.delta = delta;
  d.alpha.resize(b);
  for (std::size_t i = 0; i < b; ++i) d.alpha[i] = 1 / r[i];
  d.r_bound = ratio_target(r, c.rho);

  bool all_equal = r.front() == r.back();
  Branching br{false, int(b)};
  if (!all_equal) {
    std::vector<double> logn(b);
    for (std::size_t i = 0; i < b; ++i) logn[i] = r[i] / c.rho;
    br = select_branching_log(logn);
  }
  double rr;
  if (!br.binary) {
    d.kind = AdvKind::unfair_equal;
    d.ell = br.ell;
    rr = r[br.ell - 1];
    d.mu_tilde = 16 * rr * rr * c.lambda2 / std::log(double(br.ell));
    d.mu = std::size_t(std::ceil(d.mu_tilde));
    d.delta1 = 4 * rr / d.mu_tilde;
    d.p_hat_lb = std::min(0.25, 0.5 * (br.ell - 1) * c.lambda1 *
                                    std::exp(-c.lambda2 * d.delta1 * d.delta1 * double(d.mu)));
  } else {
    d.kind = AdvKind::unfair_binary;
    d.ell = 2;
    rr = r[0];
    const double r2 = r[1];
    d.delta1 = (r[0] - r2 + 1 / (20 * c.lambda2)) / r[0];
    d.mu_tilde = 4 * r[0] / d.delta1;
    d.mu = std::size_t(std::ceil(d.mu_tilde));
    d.delta2 = (r[0] - r2) / r[0] + d.delta1 * r2 / r[0];
    d.p_hat_lb = c.lambda1 * std::exp(-c.lambda2 * d.delta2 * d.delta2 * double(d.mu));
  }
  if (d.mu < 4) d.mu = 4;
  d.m = b * d.mu;
  d.beta = (double(d.mu) / rr) * (1 - d.p_hat_lb * d.delta1 / 2);
  d.r = double(d.mu) / d.beta;
  return d;
}

inline DiscreteAdversary composed_uniform_adversary(std::size_t b, double delta, const std::vector<double>& r,
                                                    const Constants& c = Constants::defaults()) {
  check_ratios(r, "composed adversary");
  if (r.size() != b) throw DomainError("composed adversary: need b ratios");
  if (r[0] <= 0.25 * std::log(double(b))) {
    DiscreteAdversary d = fair_uniform_adversary(b, delta);
    d.r_bound = ratio_target(r, c.rho);
    return d;
  }
  return unfair_uniform_adversary(b, delta, r, c);
}

// Ratios given as r_i = rho (1 + ln n_i).
inline std::vector<double> ratios_from_sizes(const std::vector<double>& n, double rho) {
  std::vector<double> r(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] >= 1)) throw DomainError("sizes must be >= 1");
    if (i && n[i] > n[i - 1]) throw DomainError("sizes must be non-increasing");
    r[i] = rho * (1 + std::log(n[i]));
  }
  return r;
}

// ---- flexible discrete families ----

// Members cover every beta' in [eta * beta, beta]; member beta' scales all tasks by beta' / base.beta.
struct FlexibleDiscrete {
  DiscreteAdversary base;
  double eta = 0.5;
  double gamma = 1;  // ratio normalization, 1 when the ratios already met the precondition
  double r = 0, beta = 0, r_bound = 0;
  std::vector<double> alpha;

  double beta_lo() const { return eta * beta; }

  DiscreteAdversary member(double beta_prime, double tol = 1e-9) const {
    if (!(beta_prime >= beta_lo() * (1 - tol) && beta_prime <= beta * (1 + tol)))
      throw DomainError("flexible adversary: beta' outside [eta beta, beta]");
    DiscreteAdversary d = base;
    d.scale = base.scale * beta_prime / base.beta;
    d.r = r;
    d.r_bound = r_bound;
    d.beta = beta_prime;
    d.eta = eta;
    return d;
  }
};

// base is a discrete adversary for the system with ratios r_i / eta.
inline FlexibleDiscrete flexify(const DiscreteAdversary& base, double eta, double gamma = 1) {
  if (!(eta > 0 && eta <= 1)) throw DomainError("flexify: eta must lie in (0, 1]");
  FlexibleDiscrete f;
  f.base = base;
  f.eta = eta;
  f.gamma = gamma;
  f.r = gamma * eta * base.r;
  f.r_bound = gamma * eta * base.r_bound;
  f.beta = base.beta / eta;
  f.alpha = base.coefficients();
  return f;
}

struct FlexibleUniform {
  FlexibleDiscrete family;
  std::vector<double> ratios;  // as given
  bool preconditions_met = true;
};

// Ratios in any order; points keep their input indices.
inline FlexibleUniform flexible_uniform_ratios(std::size_t b, double delta, const std::vector<double>& ratios,
                                               const Constants& c = Constants::defaults(), double eta = 0.5) {
  if (ratios.size() != b || b < 2) throw DomainError("flexible uniform: need b >= 2 ratios");
  double rmin = kInf;
  for (double x : ratios) {
    if (!(x > 0) || !std::isfinite(x)) throw DomainError("flexible uniform: ratios must be positive");
    rmin = std::min(rmin, x);
  }
  const double gamma = std::min(1.0, rmin / eta);
  std::vector<std::size_t> order(b);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t z) { return ratios[a] > ratios[z]; });
  std::vector<double> rbar(b);
  for (std::size_t i = 0; i < b; ++i) rbar[i] = std::max(1.0, ratios[order[i]] / (gamma * eta));
  DiscreteAdversary d = composed_uniform_adversary(b, delta, rbar, c);
  d.label = order;
  std::vector<double> alpha(b);
  for (std::size_t i = 0; i < b; ++i) alpha[order[i]] = d.alpha[i];
  FlexibleUniform out;
  out.family = flexify(d, eta, gamma);
  out.family.alpha = alpha;
  out.ratios = ratios;
  out.preconditions_met = gamma == 1;
  return out;
}

inline FlexibleUniform flexible_uniform(std::size_t b, double delta, const std::vector<double>& n,
                                       const Constants& c = Constants::defaults()) {
  if (n.empty()) throw DomainError("flexible uniform: empty size list");
  auto r = ratios_from_sizes(n, c.rho);
  for (double& x : r) x *= 0.5;
  return flexible_uniform_ratios(b, delta, r, c, 0.5);
}

// ---- HST driver ----

struct CombineStep {
  int child = 0;        // child position
  double x = 0;         // alpha'_j Delta / Delta_j
  long long t = 0;
  double beta_child = 0;  // beta'_j
  double lo = 0, hi = 0;  // (eta beta_j, beta_j]
};

// Picks the smallest t with x / t <= beta_j; the window (eta beta_j, beta_j] is nonempty
// whenever x >= eta beta_j / (1 - eta).
inline CombineStep combine_window(double x, double beta_j, double eta) {
  if (!(x > 0 && beta_j > 0)) throw DomainError("combine: x and beta_j must be positive");
  CombineStep s;
  s.x = x;
  s.lo = eta * beta_j;
  s.hi = beta_j;
  s.t = (long long)std::ceil(x / beta_j * (1 - 1e-12));
  if (s.t < 1) s.t = 1;
  s.beta_child = x / double(s.t);
  if (!(s.beta_child > s.lo) || s.beta_child > s.hi * (1 + 1e-9))
    throw ValidationError("combine: empty integrality window");
  s.beta_child = std::min(s.beta_child, s.hi);
  return s;
}

struct HstAdvNode {
  int tree_node = -1;
  bool leaf = false;
  std::size_t point = 0;  // metric index for leaves
  double delta = 0;
  std::size_t n_leaves = 1;
  std::vector<int> kids;  // indices into HstAdversary::nodes
  bool base = false;      // every child is a leaf
  FlexibleDiscrete comb;
  double r = 1, beta = 0, eta = 0.5;
  bool preconditions_met = true;
  bool r_invariant = true;     // r >= max(1, c2 (1 + ln n))
  bool beta_invariant = true;  // beta <= c3 (1 + ln n)
  double k_required = 0;       // max over internal children of (eta/(1-eta)) beta_j / alpha_j
  double k_actual = kInf;      // min over internal children of Delta / Delta_j
};

struct HstAdversary {
  HstTree tree;  // non-degenerate copy; metric order is its preorder leaf order
  Constants constants;
  std::vector<HstAdvNode> nodes;
  int root = -1;
  double r = 1, beta = 0, eta = 0.5;
  double fixed_r = 1, fixed_beta = 0;  // strongest single-member claim at the root
  double k_tree = kInf, k_theorem = 0;
  bool k_ok = true;
  std::size_t max_tasks = 50000000;

  double beta_lo() const { return eta * beta; }

  std::vector<CombineStep> plan(int v, double beta_prime) const {
    const HstAdvNode& nd = nodes[v];
    std::vector<CombineStep> out;
    if (nd.leaf) return out;
    const DiscreteAdversary mem = nd.comb.member(beta_prime);
    const auto coef = mem.coefficients();
    std::vector<double> by_child(nd.kids.size());
    for (std::size_t i = 0; i < nd.kids.size(); ++i) by_child[mem.point(i)] = coef[i];
    for (std::size_t j = 0; j < nd.kids.size(); ++j) {
      const HstAdvNode& ch = nodes[nd.kids[j]];
      if (ch.leaf) continue;
      CombineStep s = combine_window(by_child[j] * nd.delta / ch.delta, ch.beta, ch.eta);
      s.child = int(j);
      out.push_back(s);
    }
    return out;
  }

  void sample_node(int v, double beta_prime, Rng& rng, TaskSeq<double>& out) const {
    const HstAdvNode& nd = nodes[v];
    if (nd.leaf) return;
    const DiscreteAdversary mem = nd.comb.member(beta_prime);
    TaskSeq<double> top;
    mem.sample(rng, top);
    std::vector<CombineStep> steps(nd.kids.size());
    for (const auto& s : plan(v, beta_prime)) steps[s.child] = s;
    for (const auto& task : top) {
      const HstAdvNode& ch = nodes[nd.kids[task.point]];
      if (ch.leaf) {
        out.push_back({ch.point, task.cost});
      } else {
        const CombineStep& s = steps[task.point];
        for (long long i = 0; i < s.t; ++i) sample_node(nd.kids[task.point], s.beta_child, rng, out);
      }
      if (out.size() > max_tasks) throw BudgetError("hst adversary: sequence exceeds task budget");
    }
  }

  void sample(double beta_prime, Rng& rng, TaskSeq<double>& out) const { sample_node(root, beta_prime, rng, out); }

  Sampler sampler(double beta_prime) const {
    return [this, beta_prime](Rng& rng, TaskSeq<double>& out) { sample(beta_prime, rng, out); };
  }
};

inline HstAdversary hst_adversary(const HstTree& input, const Constants& c = Constants::defaults(),
                                  bool override_k = false, double eta = 0.5) {
  c.validate();
  validate_hst(input);
  HstAdversary adv;
  adv.constants = c;
  adv.eta = eta;
  adv.tree = remove_degenerate(input);
  const HstTree& t = adv.tree;
  const auto leaves = leaf_nodes(t);
  const double N = double(leaves.size());
  std::vector<std::size_t> point_of(t.nodes.size(), 0);
  for (std::size_t i = 0; i < leaves.size(); ++i) point_of[leaves[i]] = i;

  adv.k_theorem = c.c1 * std::pow(1 + std::log(N), 2);
  for_each_preorder(t, [&](int v, int) {
    for (int ch : t[v].children)
      if (!t[ch].is_leaf()) adv.k_tree = std::min(adv.k_tree, t[v].delta / t[ch].delta);
  });
  adv.k_ok = adv.k_tree >= adv.k_theorem;
  if (!adv.k_ok && !override_k)
    throw DomainError("hst adversary: tree separation " + std::to_string(adv.k_tree) + " below required " +
                      std::to_string(adv.k_theorem));

  std::function<int(int)> build = [&](int v) -> int {
    HstAdvNode nd;
    nd.tree_node = v;
    nd.eta = eta;
    if (t[v].is_leaf()) {
      nd.leaf = true;
      nd.point = point_of[v];
      nd.r = 1;
      adv.nodes.push_back(nd);
      return int(adv.nodes.size()) - 1;
    }
    nd.delta = t[v].delta;
    nd.n_leaves = 0;
    for (int ch : t[v].children) {
      int k = build(ch);
      nd.kids.push_back(k);
      nd.n_leaves += adv.nodes[k].n_leaves;
    }
    const std::size_t b = nd.kids.size();
    nd.base = std::all_of(nd.kids.begin(), nd.kids.end(), [&](int k) { return adv.nodes[k].leaf; });
    if (nd.base) {
      nd.comb = flexify(fair_uniform_adversary(b, nd.delta), eta);
    } else {
      std::vector<double> ratios(b);
      for (std::size_t j = 0; j < b; ++j) ratios[j] = adv.nodes[nd.kids[j]].r;
      auto fu = flexible_uniform_ratios(b, nd.delta, ratios, c, eta);
      nd.comb = fu.family;
      nd.preconditions_met = fu.preconditions_met;
      for (std::size_t j = 0; j < b; ++j) {
        const HstAdvNode& ch = adv.nodes[nd.kids[j]];
        if (ch.leaf) continue;
        double need = eta / (1 - eta) * ch.beta / nd.comb.alpha[j];
        nd.k_required = std::max(nd.k_required, need);
        nd.k_actual = std::min(nd.k_actual, nd.delta / ch.delta);
      }
      if (nd.k_actual < nd.k_required * (1 - 1e-12))
        throw DomainError("combine: separation " + std::to_string(nd.k_actual) + " below max_j (eta/(1-eta)) beta_j/alpha_j = " +
                          std::to_string(nd.k_required));
    }
    nd.r = nd.comb.r;
    nd.beta = nd.comb.beta;
    const double ln1 = 1 + std::log(double(nd.n_leaves));
    nd.r_invariant = nd.r >= std::max(1.0, c.c2 * ln1);
    nd.beta_invariant = nd.beta <= c.c3 * ln1;
    adv.nodes.push_back(std::move(nd));
    return int(adv.nodes.size()) - 1;
  };
  adv.root = build(t.root);
  const HstAdvNode& rt = adv.nodes[adv.root];
  adv.r = rt.r;
  adv.beta = rt.beta;
  adv.fixed_r = rt.r;
  adv.fixed_beta = rt.beta;
  if (rt.leaf) {
    adv.beta = 0;
    adv.fixed_beta = 0;
  } else if (rt.base) {
    adv.fixed_r = rt.comb.base.r;
    adv.fixed_beta = rt.comb.base.beta;
  }
  return adv;
}

// ---- exact distributions for small fair adversaries ----

template <class T>
std::vector<WeightedSeq<T>> fair_distribution(std::size_t b, const T& delta) {
  if (b < 2 || b > 8) throw DomainError("fair distribution: need 2 <= b <= 8");
  std::vector<std::size_t> pi(b);
  std::iota(pi.begin(), pi.end(), 0);
  std::size_t fact = 1;
  for (std::size_t i = 2; i <= b; ++i) fact *= i;
  std::vector<WeightedSeq<T>> out;
  do {
    WeightedSeq<T> ws;
    ws.prob = T(1) / T(double(fact));
    for (std::size_t i = 1; i <= b; ++i)
      for (std::size_t j = 0; j < i; ++j) ws.seq.push_back({pi[j], delta});
    out.push_back(std::move(ws));
  } while (std::next_permutation(pi.begin(), pi.end()));
  return out;
}

}  // namespace hstkit
