#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hstkit/common.hpp"
#include "hstkit/exact.hpp"

namespace hstkit {

// ---- certified real intervals on MPFR with outward rounding ----

class BigFloat {
 public:
  explicit BigFloat(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  BigFloat(const BigFloat& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  BigFloat& operator=(const BigFloat& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  ~BigFloat() { mpfr_clear(v_); }
  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }

  Rational to_rational() const {
    Rational q;
    mpfr_get_q(q.get_mpq_t(), v_);
    return q;
  }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

 private:
  mpfr_t v_;
};

struct Interval {
  BigFloat lo, hi;
  explicit Interval(mpfr_prec_t prec) : lo(prec), hi(prec) {}
  mpfr_prec_t prec() const { return lo.prec(); }
};

inline Interval iv_from_q(const Rational& q, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_q(r.lo.get(), q.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(r.hi.get(), q.get_mpq_t(), MPFR_RNDU);
  return r;
}

inline Interval iv_mul(const Interval& a, const Interval& b) {
  const mpfr_prec_t prec = std::max(a.prec(), b.prec());
  Interval r(prec);
  BigFloat t(prec);
  bool first = true;
  for (const BigFloat* x : {&a.lo, &a.hi})
    for (const BigFloat* y : {&b.lo, &b.hi}) {
      mpfr_mul(t.get(), x->get(), y->get(), MPFR_RNDD);
      if (first || mpfr_less_p(t.get(), r.lo.get())) mpfr_set(r.lo.get(), t.get(), MPFR_RNDD);
      mpfr_mul(t.get(), x->get(), y->get(), MPFR_RNDU);
      if (first || mpfr_greater_p(t.get(), r.hi.get())) mpfr_set(r.hi.get(), t.get(), MPFR_RNDU);
      first = false;
    }
  return r;
}

inline Interval iv_div(const Interval& a, const Interval& b) {
  if (mpfr_sgn(b.lo.get()) <= 0 && mpfr_sgn(b.hi.get()) >= 0) throw DomainError("interval division by zero");
  const mpfr_prec_t prec = std::max(a.prec(), b.prec());
  Interval inv(prec);
  mpfr_ui_div(inv.lo.get(), 1, b.hi.get(), MPFR_RNDD);
  mpfr_ui_div(inv.hi.get(), 1, b.lo.get(), MPFR_RNDU);
  return iv_mul(a, inv);
}

inline Interval iv_neg(const Interval& a) {
  Interval r(a.prec());
  mpfr_neg(r.lo.get(), a.hi.get(), MPFR_RNDD);
  mpfr_neg(r.hi.get(), a.lo.get(), MPFR_RNDU);
  return r;
}

inline Interval iv_exp(const Interval& a) {
  Interval r(a.prec());
  mpfr_exp(r.lo.get(), a.lo.get(), MPFR_RNDD);
  mpfr_exp(r.hi.get(), a.hi.get(), MPFR_RNDU);
  return r;
}

inline Interval iv_log(const Interval& a) {
  if (mpfr_sgn(a.lo.get()) <= 0) throw DomainError("interval log of non-positive value");
  Interval r(a.prec());
  mpfr_log(r.lo.get(), a.lo.get(), MPFR_RNDD);
  mpfr_log(r.hi.get(), a.hi.get(), MPFR_RNDU);
  return r;
}

inline Interval iv_sqrt(const Interval& a) {
  if (mpfr_sgn(a.lo.get()) < 0) throw DomainError("interval sqrt of negative value");
  Interval r(a.prec());
  mpfr_sqrt(r.lo.get(), a.lo.get(), MPFR_RNDD);
  mpfr_sqrt(r.hi.get(), a.hi.get(), MPFR_RNDU);
  return r;
}

enum class Verdict { pass, fail, undecided };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::undecided: return "undecided";
  }
  return "?";
}

struct Comparison {
  Verdict verdict = Verdict::undecided;
  double log_margin = 0;  // ln(lhs) - ln(rhs) at the deciding precision
  mpfr_prec_t prec = 0;
};

// Decides num/den >= rhs, raising precision until the enclosure separates.
inline Comparison certify_geq(const mpz_class& num, const mpz_class& den, const std::function<Interval(mpfr_prec_t)>& rhs,
                              mpfr_prec_t start = 64, mpfr_prec_t max_prec = 8192) {
  Comparison c;
  for (mpfr_prec_t prec = start; prec <= max_prec; prec *= 2) {
    Interval r = rhs(prec);
    c.prec = prec;
    Rational hi = r.hi.to_rational(), lo = r.lo.to_rational();
    // num/den >= hi  <=>  num * hi_den >= hi_num * den   (den > 0)
    mpz_class lhs_hi = num * hi.get_den(), rhs_hi = hi.get_num() * den;
    mpz_class lhs_lo = num * lo.get_den(), rhs_lo = lo.get_num() * den;
    bool pass = lhs_hi >= rhs_hi;
    bool fail = lhs_lo < rhs_lo;
    if (pass || fail) {
      c.verdict = pass ? Verdict::pass : Verdict::fail;
      BigFloat l(prec), d(prec), x(prec);
      if (num > 0) {
        mpfr_set_z(l.get(), num.get_mpz_t(), MPFR_RNDN);
        mpfr_log(l.get(), l.get(), MPFR_RNDN);
        mpfr_set_z(d.get(), den.get_mpz_t(), MPFR_RNDN);
        mpfr_log(d.get(), d.get(), MPFR_RNDN);
        mpfr_sub(l.get(), l.get(), d.get(), MPFR_RNDN);
        mpfr_add(x.get(), r.lo.get(), r.hi.get(), MPFR_RNDN);
        mpfr_div_ui(x.get(), x.get(), 2, MPFR_RNDN);
        if (mpfr_sgn(x.get()) > 0) {
          mpfr_log(x.get(), x.get(), MPFR_RNDN);
          mpfr_sub(l.get(), l.get(), x.get(), MPFR_RNDN);
          c.log_margin = l.to_double();
        } else {
          c.log_margin = kInf;
        }
      } else {
        c.log_margin = -kInf;
      }
      return c;
    }
  }
  return c;
}

// ---- exact binomial tails ----

// Pr[X <= x] and Pr[X = k] for X ~ Bin(m, p), as integers over den^m.
class BinomialTable {
 public:
  BinomialTable(long m, const Rational& p) : m_(m), p_(p) {
    if (m < 0) throw DomainError("binomial: m must be >= 0");
    if (!(p > 0 && p < 1)) throw DomainError("binomial: p must lie in (0, 1)");
    a_ = p.get_num();
    den_ = p.get_den();
    b_ = den_ - a_;
    mpz_pow_ui(denm_.get_mpz_t(), den_.get_mpz_t(), (unsigned long)m);
  }

  long m() const { return m_; }
  const Rational& p() const { return p_; }
  const mpz_class& denominator() const { return denm_; }

  // Numerator of Pr[X = k].
  const mpz_class& term(long k) {
    extend(k);
    return terms_[k];
  }
  // Numerator of Pr[X <= x].
  const mpz_class& prefix(long x) {
    extend(x);
    return prefix_[x];
  }

  Rational tail(long x) {
    if (x < 0) return 0;
    if (x >= m_) return 1;
    Rational q(prefix(x), denm_);
    q.canonicalize();
    return q;
  }
  Rational pmf(long k) {
    if (k < 0 || k > m_) return 0;
    Rational q(term(k), denm_);
    q.canonicalize();
    return q;
  }

 private:
  void extend(long x) {
    if (x < 0 || x > m_) throw DomainError("binomial: index out of range");
    if (terms_.empty()) {
      mpz_class t0;
      mpz_pow_ui(t0.get_mpz_t(), b_.get_mpz_t(), (unsigned long)m_);
      terms_.push_back(t0);
      prefix_.push_back(t0);
    }
    while (long(terms_.size()) <= x) {
      const long j = long(terms_.size()) - 1;
      mpz_class t = terms_.back() * (m_ - j) * a_;
      mpz_class dv = mpz_class(j + 1) * b_;
      mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), dv.get_mpz_t());
      prefix_.push_back(prefix_.back() + t);
      terms_.push_back(std::move(t));
    }
  }

  long m_;
  Rational p_;
  mpz_class a_, b_, den_, denm_;
  std::vector<mpz_class> terms_, prefix_;
};

inline Rational binom_tail(long m, const Rational& p, long x) {
  if (x < 0 || x > m) throw DomainError("binom_tail: need 0 <= x <= m");
  BinomialTable t(m, p);
  return t.tail(x);
}

inline mpz_class floor_q(const Rational& q) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return f;
}

struct TailCheck {
  long m = 0;
  Rational p, mu, delta;
  long x = 0;
  Comparison main;  // Pr[X <= (1-delta) mu] >= lambda1 e^{-lambda2 delta^2 mu}
  bool point_applicable = false;
  Comparison point;  // Pr[X = k] >= (k/mu)^(mu-k) / (3 sqrt(mu))
  bool window_applicable = false;
  Comparison window;  // Pr[X <= (1-delta) mu] >= (delta sqrt(mu)/6) e^{-7 delta^2 mu}
  bool ok() const {
    return main.verdict == Verdict::pass && (!point_applicable || point.verdict == Verdict::pass) &&
           (!window_applicable || window.verdict == Verdict::pass);
  }
};

struct TailConstants {
  Rational lambda1{1, 180};
  Rational lambda2{13};
};

inline TailCheck check_tail_lb(BinomialTable& tab, const Rational& delta, const TailConstants& k = {}) {
  const long m = tab.m();
  const Rational& p = tab.p();
  const Rational mu = p * m;
  if (mu < 4) throw DomainError("check_tail_lb: need mu = p m >= 4");
  if (p > Rational(1, 2)) throw DomainError("check_tail_lb: need p <= 1/2");
  if (delta < 0 || delta > 1) throw DomainError("check_tail_lb: need delta in [0, 1]");
  TailCheck c;
  c.m = m;
  c.p = p;
  c.mu = mu;
  c.delta = delta;
  const Rational xq = (1 - delta) * mu;
  c.x = floor_q(xq).get_si();
  const Rational d2mu = delta * delta * mu;

  c.main = certify_geq(tab.prefix(c.x), tab.denominator(), [&](mpfr_prec_t prec) {
    Interval e = iv_exp(iv_neg(iv_from_q(k.lambda2 * d2mu, prec)));
    return iv_mul(iv_from_q(k.lambda1, prec), e);
  });

  const long kk = c.x;
  if (kk >= 1 && Rational(kk) < mu && kk <= m) {
    c.point_applicable = true;
    c.point = certify_geq(tab.term(kk), tab.denominator(), [&](mpfr_prec_t prec) {
      Interval lnr = iv_log(iv_from_q(Rational(kk) / mu, prec));
      Interval e = iv_exp(iv_mul(iv_from_q(mu - kk, prec), lnr));
      Interval den = iv_mul(iv_from_q(3, prec), iv_sqrt(iv_from_q(mu, prec)));
      return iv_div(e, den);
    });
  }

  if (delta <= Rational(1, 3) && delta * mu >= 4) {
    c.window_applicable = true;
    c.window = certify_geq(tab.prefix(c.x), tab.denominator(), [&](mpfr_prec_t prec) {
      Interval e = iv_exp(iv_neg(iv_from_q(7 * d2mu, prec)));
      Interval f = iv_div(iv_mul(iv_from_q(delta, prec), iv_sqrt(iv_from_q(mu, prec))), iv_from_q(6, prec));
      return iv_mul(f, e);
    });
  }
  return c;
}

inline TailCheck check_tail_lb(long m, const Rational& p, const Rational& delta, const TailConstants& k = {}) {
  BinomialTable tab(m, p);
  return check_tail_lb(tab, delta, k);
}

// m = round(mu / p), bumped until p m >= 4.
inline long grid_trials(const Rational& p, long mu) {
  Rational t = Rational(mu) / p;
  mpz_class f = floor_q(t + Rational(1, 2));
  long m = f.get_si();
  while (p * m < 4) ++m;
  return m;
}

struct TailGrid {
  std::vector<Rational> ps, deltas;
  long mu_lo = 4, mu_hi = 200;

  static TailGrid standard() {
    TailGrid g;
    for (int i = 1; i <= 10; ++i) g.ps.push_back(Rational(i, 20));
    for (int i = 0; i <= 10; ++i) g.deltas.push_back(Rational(i, 10));
    return g;
  }
};

struct TailGridReport {
  std::size_t checks = 0, point_checks = 0, window_checks = 0, failures = 0;
  std::vector<TailCheck> failed;
  double min_main_margin = kInf;
};

inline TailGridReport check_tail_grid(const TailGrid& g, const TailConstants& k = {},
                                      const std::function<void(const TailCheck&)>& each = {}) {
  TailGridReport rep;
  for (const auto& p : g.ps)
    for (long mu = g.mu_lo; mu <= g.mu_hi; ++mu) {
      BinomialTable tab(grid_trials(p, mu), p);
      for (const auto& d : g.deltas) {
        TailCheck c = check_tail_lb(tab, d, k);
        ++rep.checks;
        rep.point_checks += c.point_applicable;
        rep.window_checks += c.window_applicable;
        rep.min_main_margin = std::min(rep.min_main_margin, c.main.log_margin);
        if (!c.ok()) {
          ++rep.failures;
          if (rep.failed.size() < 20) rep.failed.push_back(c);
        }
        if (each) each(c);
      }
    }
  return rep;
}

// ---- balls in bins ----

struct ExactDist {
  std::vector<std::vector<int>> outcomes;
  std::vector<Rational> prob;
};

inline void check_bins_budget(int m, int n, double budget) {
  if (m < 0 || n < 1) throw DomainError("balls in bins: need m >= 0 and n >= 1");
  if (std::pow(double(n), double(m)) > budget) throw BudgetError("balls in bins: n^m exceeds enumeration budget");
}

// Count vectors with multinomial weights; weights sum to n^m.
inline void bins_weights(int m, int n, std::vector<std::vector<int>>& outs, std::vector<mpz_class>& w) {
  std::vector<mpz_class> fact(m + 1, 1);
  for (int i = 1; i <= m; ++i) fact[i] = fact[i - 1] * i;
  std::vector<int> x(n, 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == n - 1) {
      x[i] = left;
      mpz_class c = fact[m];
      for (int v : x) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), fact[v].get_mpz_t());
      outs.push_back(x);
      w.push_back(c);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      x[i] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, m);
}

inline ExactDist balls_bins_joint(int m, int n, double budget = 1e7) {
  check_bins_budget(m, n, budget);
  ExactDist d;
  std::vector<mpz_class> w;
  bins_weights(m, n, d.outcomes, w);
  mpz_class total;
  mpz_ui_pow_ui(total.get_mpz_t(), (unsigned long)n, (unsigned long)m);
  for (auto& c : w) {
    Rational q(c, total);
    q.canonicalize();
    d.prob.push_back(q);
  }
  return d;
}

struct NegdepReport {
  int m = 0, n = 0;
  std::size_t product_checks = 0, conditional_checks = 0, conditional_skipped = 0;
  bool ok = true;
  std::string first_violation;
};

// Joint upper tails are at most the product of marginals, over all thresholds in {0..m}^l
// on bins 1..l; and E[X_1 | X_i > a for i = 2..l] <= E[X_1] for every a > 0.
inline NegdepReport check_negdep(int m, int n, double budget = 1e7) {
  check_bins_budget(m, n, budget);
  NegdepReport rep;
  rep.m = m;
  rep.n = n;
  std::vector<std::vector<int>> outs;
  std::vector<mpz_class> w;
  bins_weights(m, n, outs, w);
  mpz_class total;
  mpz_ui_pow_ui(total.get_mpz_t(), (unsigned long)n, (unsigned long)m);
  // Marginal upper tails (identical across bins): weight of X_1 > a.
  std::vector<mpz_class> marg(m + 1, 0);
  for (std::size_t o = 0; o < outs.size(); ++o)
    for (int a = 0; a <= m; ++a)
      if (outs[o][0] > a) marg[a] += w[o];
  auto fail = [&](std::string s) {
    if (rep.ok) rep.ok = false, rep.first_violation = std::move(s);
  };
  for (int l = 1; l <= n; ++l) {
    std::vector<int> alpha(l, 0);
    mpz_class tl;
    mpz_pow_ui(tl.get_mpz_t(), total.get_mpz_t(), (unsigned long)(l - 1));
    while (true) {
      mpz_class joint = 0, prod = 1;
      for (std::size_t o = 0; o < outs.size(); ++o) {
        bool all = true;
        for (int i = 0; i < l && all; ++i) all = outs[o][i] > alpha[i];
        if (all) joint += w[o];
      }
      for (int i = 0; i < l; ++i) prod *= marg[alpha[i]];
      ++rep.product_checks;
      // joint / total <= prod / total^l
      if (joint * tl > prod) {
        std::string s = "product bound fails at l=" + std::to_string(l) + " alpha=(";
        for (int i = 0; i < l; ++i) s += (i ? "," : "") + std::to_string(alpha[i]);
        fail(s + ")");
      }
      int i = 0;
      while (i < l && alpha[i] == m) alpha[i++] = 0;
      if (i == l) break;
      ++alpha[i];
    }
  }
  for (int l = 2; l <= n; ++l)
    for (int a = 1; a <= m; ++a) {
      mpz_class wz = 0, wx = 0;
      for (std::size_t o = 0; o < outs.size(); ++o) {
        bool z = true;
        for (int i = 1; i < l && z; ++i) z = outs[o][i] > a;
        if (z) wz += w[o], wx += w[o] * outs[o][0];
      }
      if (wz == 0) {
        ++rep.conditional_skipped;
        continue;
      }
      ++rep.conditional_checks;
      // wx / wz <= m / n
      if (wx * n > mpz_class(m) * wz)
        fail("conditional mean fails at l=" + std::to_string(l) + " a=" + std::to_string(a));
    }
  return rep;
}

}  // namespace hstkit
