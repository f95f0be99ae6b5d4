#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "hstkit/common.hpp"
#include "hstkit/exact.hpp"
#include "hstkit/metric.hpp"

namespace hstkit {

template <class T>
struct Task {
  std::size_t point = 0;
  T cost = 0;
};

template <class T>
using TaskSeq = std::vector<Task<T>>;

// Metric plus per-point cost ratios and a distance ratio.
template <class T>
struct Umts {
  Dist<T> dist;
  std::vector<T> r;
  T s = 1;
  T ratio_scale = 1;  // set by umts_normalize

  std::size_t size() const { return dist.n; }

  static Umts fair(Dist<T> d) {
    Umts u;
    u.r.assign(d.n, T(1));
    u.dist = std::move(d);
    return u;
  }
};

template <class T>
Umts<T> umts_normalize(const Umts<T>& u) {
  if (!(u.s > 0)) throw DomainError("umts_normalize: s must be positive");
  Umts<T> out = u;
  for (auto& x : out.r) x = T(x / u.s);
  out.ratio_scale = T(u.ratio_scale * u.s);
  out.s = 1;
  return out;
}

// ---- work functions ----

template <class T>
struct WorkFunction {
  std::vector<T> w;
  std::size_t base = 0;
};

template <class T>
WorkFunction<T> wf_init(const Dist<T>& d, std::size_t u0) {
  WorkFunction<T> wf;
  wf.base = u0;
  wf.w.resize(d.n);
  for (std::size_t i = 0; i < d.n; ++i) wf.w[i] = d(u0, i);
  return wf;
}

// Elementary task (v, c); valid because w is 1-Lipschitz.
template <class T>
void wf_update(WorkFunction<T>& wf, const Dist<T>& d, const Task<T>& task) {
  if (wf.w.size() != d.n || task.point >= d.n) throw DomainError("wf_update: dimension mismatch");
  const std::size_t v = task.point;
  T best = wf.w[v] + task.cost;
  for (std::size_t j = 0; j < d.n; ++j) {
    if (j == v) continue;
    T cand = wf.w[j] + d(j, v);
    if (cand < best) best = cand;
  }
  wf.w[v] = best;
}

// Full cost vector: w'(i) = min_j (w(j) + c_j + d(j, i)).
template <class T>
void wf_update(WorkFunction<T>& wf, const Dist<T>& d, const std::vector<T>& costs) {
  if (wf.w.size() != d.n || costs.size() != d.n) throw DomainError("wf_update: dimension mismatch");
  std::vector<T> out(d.n);
  for (std::size_t i = 0; i < d.n; ++i) {
    T best = wf.w[0] + costs[0] + d(0, i);
    for (std::size_t j = 1; j < d.n; ++j) {
      T cand = wf.w[j] + costs[j] + d(j, i);
      if (cand < best) best = cand;
    }
    out[i] = best;
  }
  wf.w = std::move(out);
}

template <class T>
T min_of(const std::vector<T>& v) {
  T best = v[0];
  for (const T& x : v)
    if (x < best) best = x;
  return best;
}

template <class T>
WorkFunction<T> run_work_function(const Dist<T>& d, const TaskSeq<T>& seq, std::size_t u0) {
  auto wf = wf_init(d, u0);
  for (const auto& t : seq) wf_update(wf, d, t);
  return wf;
}

template <class T>
T opt_cost(const Dist<T>& d, const TaskSeq<T>& seq, std::size_t u0) {
  return min_of(run_work_function(d, seq, u0).w);
}

template <class T>
T opt0_cost(const Dist<T>& d, const TaskSeq<T>& seq, std::size_t u0) {
  auto wf = run_work_function(d, seq, u0);
  T best = wf.w[u0];
  for (std::size_t i = 0; i < d.n; ++i) {
    T cand = wf.w[i] + d(i, u0);
    if (cand < best) best = cand;
  }
  return best;
}

// ---- online algorithms ----

template <class T>
class OnlineAlgorithm {
 public:
  virtual ~OnlineAlgorithm() = default;
  virtual std::string name() const = 0;
  virtual void reset(const Umts<T>& u, std::size_t u0, Rng& rng) = 0;
  // Returns the point at which the task is served.
  virtual std::size_t step(const Task<T>& task, std::size_t current, Rng& rng) = 0;
};

template <class T>
class StayPut final : public OnlineAlgorithm<T> {
 public:
  std::string name() const override { return "stay_put"; }
  void reset(const Umts<T>&, std::size_t, Rng&) override {}
  std::size_t step(const Task<T>&, std::size_t current, Rng&) override { return current; }
};

// Leaves to a uniformly random other point when hit at its own position.
template <class T>
class RandomJump final : public OnlineAlgorithm<T> {
 public:
  std::string name() const override { return "random_jump"; }
  void reset(const Umts<T>& u, std::size_t, Rng&) override { n_ = u.size(); }
  std::size_t step(const Task<T>& task, std::size_t current, Rng& rng) override {
    if (n_ < 2 || task.point != current || !(task.cost > 0)) return current;
    std::size_t j = uniform_index(rng, n_ - 1);
    return j >= current ? j + 1 : j;
  }

 private:
  std::size_t n_ = 0;
};

// Phase-based marking: a point is marked once its online cost in the phase reaches
// the cost of leaving it; a marked position triggers a move to a random unmarked point.
template <class T>
class Marking final : public OnlineAlgorithm<T> {
 public:
  std::string name() const override { return "marking"; }
  void reset(const Umts<T>& u, std::size_t, Rng&) override {
    u_ = &u;
    const std::size_t n = u.size();
    marked_.assign(n, 0);
    acc_.assign(n, T(0));
    thr_.assign(n, T(0));
    for (std::size_t i = 0; i < n; ++i) {
      bool first = true;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        T v = u.s * u.dist(i, j);
        if (first || v < thr_[i]) thr_[i] = v, first = false;
      }
    }
  }
  std::size_t step(const Task<T>& task, std::size_t current, Rng& rng) override {
    const std::size_t n = marked_.size();
    if (n < 2) return current;
    const std::size_t v = task.point;
    acc_[v] += u_->r[v] * task.cost;
    if (!marked_[v] && acc_[v] >= thr_[v]) marked_[v] = 1;
    if (!marked_[current]) return current;
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < n; ++i)
      if (!marked_[i]) free.push_back(i);
    if (free.empty()) {
      std::fill(marked_.begin(), marked_.end(), 0);
      std::fill(acc_.begin(), acc_.end(), T(0));
      return current;
    }
    return free[uniform_index(rng, free.size())];
  }

 private:
  const Umts<T>* u_ = nullptr;
  std::vector<char> marked_;
  std::vector<T> acc_, thr_;
};

// Tracks its own scaled work function and moves to argmin_j w(j) + s d(current, j).
template <class T>
class WfaLike final : public OnlineAlgorithm<T> {
 public:
  std::string name() const override { return "wfa_like"; }
  void reset(const Umts<T>& u, std::size_t u0, Rng&) override {
    u_ = &u;
    scaled_.n = u.size();
    scaled_.d.resize(u.dist.d.size());
    for (std::size_t i = 0; i < u.dist.d.size(); ++i) scaled_.d[i] = u.s * u.dist.d[i];
    wf_ = wf_init(scaled_, u0);
  }
  std::size_t step(const Task<T>& task, std::size_t current, Rng&) override {
    wf_update(wf_, scaled_, Task<T>{task.point, T(u_->r[task.point] * task.cost)});
    std::size_t best = current;
    T bv = wf_.w[current];
    for (std::size_t j = 0; j < scaled_.n; ++j) {
      T cand = wf_.w[j] + scaled_(current, j);
      if (cand < bv) bv = cand, best = j;
    }
    return best;
  }

 private:
  const Umts<T>* u_ = nullptr;
  Dist<T> scaled_;
  WorkFunction<T> wf_;
};

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"stay_put", "random_jump", "marking", "wfa_like"};
  return names;
}

template <class T>
std::unique_ptr<OnlineAlgorithm<T>> builtin_algorithm(const std::string& name) {
  if (name == "stay_put") return std::make_unique<StayPut<T>>();
  if (name == "random_jump") return std::make_unique<RandomJump<T>>();
  if (name == "marking") return std::make_unique<Marking<T>>();
  if (name == "wfa_like") return std::make_unique<WfaLike<T>>();
  throw DomainError("unknown algorithm '" + name + "'");
}

template <class T>
struct CostReport {
  T total = 0, moving = 0, local = 0;
  std::size_t moves = 0;
  std::size_t final_point = 0;
};

template <class T>
CostReport<T> run_online(OnlineAlgorithm<T>& alg, const Umts<T>& u, const TaskSeq<T>& seq, std::size_t u0, Rng& rng) {
  CostReport<T> rep;
  alg.reset(u, u0, rng);
  std::size_t cur = u0;
  for (const auto& task : seq) {
    std::size_t nxt = alg.step(task, cur, rng);
    if (nxt >= u.size()) throw DomainError("run_online: algorithm returned an invalid point");
    if (nxt != cur) {
      rep.moving += u.s * u.dist(cur, nxt);
      ++rep.moves;
      cur = nxt;
    }
    if (task.point == cur) rep.local += u.r[cur] * task.cost;
  }
  rep.total = rep.moving + rep.local;
  rep.final_point = cur;
  return rep;
}

// ---- expectimax over deterministic online algorithms ----

template <class T>
struct WeightedSeq {
  TaskSeq<T> seq;
  T prob;
};

template <class T>
T expectimax_online_opt(const std::vector<WeightedSeq<T>>& dist, const Umts<T>& u, std::size_t u0,
                        std::size_t budget = 1000000) {
  struct Node {
    T mass = 0;
    std::map<std::pair<std::size_t, T>, int> kids;
  };
  std::vector<Node> nodes(1);
  for (const auto& ws : dist) {
    int cur = 0;
    nodes[0].mass += ws.prob;
    for (const auto& t : ws.seq) {
      auto key = std::make_pair(t.point, t.cost);
      auto it = nodes[cur].kids.find(key);
      int nxt;
      if (it == nodes[cur].kids.end()) {
        nxt = int(nodes.size());
        nodes[cur].kids.emplace(key, nxt);
        nodes.emplace_back();
      } else {
        nxt = it->second;
      }
      nodes[nxt].mass += ws.prob;
      cur = nxt;
      if (nodes.size() * u.size() > budget) throw BudgetError("expectimax: state budget exceeded");
    }
  }
  const std::size_t b = u.size();
  // F[node][p]: expected cost mass of the remaining tasks below node when standing at p.
  std::vector<std::vector<T>> F(nodes.size(), std::vector<T>(b, T(0)));
  for (int v = int(nodes.size()) - 1; v >= 0; --v) {
    for (std::size_t p = 0; p < b; ++p) {
      T total = 0;
      for (const auto& [key, c] : nodes[v].kids) {
        const auto& [pt, cost] = key;
        T best = 0;
        for (std::size_t q = 0; q < b; ++q) {
          T local = q == pt ? T(u.r[q] * cost) : T(0);
          T val = nodes[c].mass * (u.s * u.dist(p, q) + local) + F[c][q];
          if (q == 0 || val < best) best = val;
        }
        total += best;
      }
      F[v][p] = total;
    }
  }
  return nodes[0].mass == 0 ? T(0) : T(F[0][u0] / nodes[0].mass);
}

// ---- Monte Carlo estimation ----

struct RunningStat {
  std::size_t n = 0;
  double mean = 0, m2 = 0;
  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / double(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / double(n - 1) : 0; }
  double se() const { return n > 0 ? std::sqrt(variance() / double(n)) : 0; }
};

inline constexpr double kZ99 = 2.5758293035489004;

struct Interval99 {
  double mean = 0, se = 0, lo = 0, hi = 0;
};

inline Interval99 ci99(const RunningStat& s) {
  return {s.mean, s.se(), s.mean - kZ99 * s.se(), s.mean + kZ99 * s.se()};
}

using Sampler = std::function<void(Rng&, TaskSeq<double>&)>;

struct AlgorithmStats {
  std::string name;
  std::vector<Interval99> cost_by_start;
  double min_mean = 0;
  bool consistent = true;  // the claimed bound is not rejected at every start
  bool clear = true;       // the whole interval lies above the claimed bound at every start
};

struct RatioEstimate {
  std::size_t trials = 0;
  double lower_target = 0;  // claimed r beta' Delta
  double upper_target = 0;  // claimed beta' Delta
  std::vector<Interval99> opt0_by_start;
  std::size_t best_start = 0;
  bool opt0_clear = false;
  std::vector<AlgorithmStats> algorithms;
  double mean_length = 0;
};

// Sweeps every start point; one sample sequence per trial is shared across starts and algorithms.
inline RatioEstimate estimate_ratio(const Sampler& sampler, const Umts<double>& u,
                                    const std::vector<std::string>& algs, std::size_t trials, std::uint64_t seed,
                                    double lower_target, double upper_target,
                                    std::vector<std::size_t> starts = {}) {
  if (trials == 0) throw DomainError("estimate_ratio: trials must be >= 1");
  if (starts.empty()) {
    starts.resize(u.size());
    std::iota(starts.begin(), starts.end(), 0);
  }
  RatioEstimate est;
  est.trials = trials;
  est.lower_target = lower_target;
  est.upper_target = upper_target;
  std::vector<RunningStat> opt0(starts.size());
  std::vector<std::vector<RunningStat>> cost(algs.size(), std::vector<RunningStat>(starts.size()));
  std::vector<std::unique_ptr<OnlineAlgorithm<double>>> impl;
  for (const auto& a : algs) impl.push_back(builtin_algorithm<double>(a));
  RunningStat len;
  TaskSeq<double> seq;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(mix_seed(seed, t));
    seq.clear();
    sampler(rng, seq);
    len.add(double(seq.size()));
    for (std::size_t s = 0; s < starts.size(); ++s) {
      opt0[s].add(opt0_cost(u.dist, seq, starts[s]));
      for (std::size_t a = 0; a < impl.size(); ++a) {
        Rng arng(mix_seed(mix_seed(seed, t), 1000 + a * 131 + s));
        cost[a][s].add(run_online(*impl[a], u, seq, starts[s], arng).total);
      }
    }
  }
  est.mean_length = len.mean;
  for (auto& s : opt0) est.opt0_by_start.push_back(ci99(s));
  for (std::size_t s = 0; s < starts.size(); ++s)
    if (est.opt0_by_start[s].mean < est.opt0_by_start[est.best_start].mean) est.best_start = s;
  est.best_start = starts[est.best_start];
  for (std::size_t s = 0; s < starts.size(); ++s)
    if (est.opt0_by_start[s].hi <= upper_target) est.opt0_clear = true;
  for (std::size_t a = 0; a < algs.size(); ++a) {
    AlgorithmStats st;
    st.name = algs[a];
    st.min_mean = kInf;
    for (std::size_t s = 0; s < starts.size(); ++s) {
      auto iv = ci99(cost[a][s]);
      st.cost_by_start.push_back(iv);
      st.min_mean = std::min(st.min_mean, iv.mean);
      if (iv.hi < lower_target) st.consistent = false;
      if (!(iv.lo >= lower_target)) st.clear = false;
    }
    est.algorithms.push_back(std::move(st));
  }
  return est;
}

}  // namespace hstkit
