#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hstkit/common.hpp"
#include "hstkit/exact.hpp"
#include "hstkit/mts.hpp"

namespace hstkit {

// n-1 servers on n points; a configuration is identified by its uncovered point.

template <class T>
bool reduce_task(const WorkFunction<T>& wT, const Task<T>& task, const Dist<T>& d) {
  if (wT.w.size() != d.n || task.point >= d.n) throw DomainError("reduce_task: dimension mismatch");
  const std::size_t i = task.point;
  std::optional<T> best;
  for (std::size_t j = 0; j < d.n; ++j) {
    if (j == i) continue;
    T cand = wT.w[j] + d(i, j);
    if (!best || cand < *best) best = cand;
  }
  if (!best) return false;  // single point: nothing to request
  return wT.w[i] + task.cost >= *best;
}

// Request at l: w'(l) = min_{j != l} (w(j) + d(l, j)); other entries unchanged.
template <class T>
void server_wf_update(WorkFunction<T>& wS, const Dist<T>& d, std::size_t l) {
  if (wS.w.size() != d.n || l >= d.n) throw DomainError("server_wf_update: dimension mismatch");
  std::optional<T> best;
  for (std::size_t j = 0; j < d.n; ++j) {
    if (j == l) continue;
    T cand = wS.w[j] + d(l, j);
    if (!best || cand < *best) best = cand;
  }
  if (best) wS.w[l] = *best;
}

template <class T>
T server_opt(const Dist<T>& d, const std::vector<std::size_t>& sigma, std::size_t uncovered0) {
  auto wf = wf_init(d, uncovered0);
  for (std::size_t l : sigma) server_wf_update(wf, d, l);
  return min_of(wf.w);
}

template <class T>
class ServerAlgorithm {
 public:
  virtual ~ServerAlgorithm() = default;
  virtual std::string name() const = 0;
  virtual void reset(const Dist<T>& d, std::size_t uncovered, Rng& rng) = 0;
  // Called only when the request hits the uncovered point; returns the point whose server moves.
  virtual std::size_t serve(std::size_t request, Rng& rng) = 0;
};

// Moves the nearest server (lowest index on ties).
template <class T>
class GreedyServer final : public ServerAlgorithm<T> {
 public:
  std::string name() const override { return "greedy"; }
  void reset(const Dist<T>& d, std::size_t, Rng&) override { d_ = &d; }
  std::size_t serve(std::size_t l, Rng&) override {
    std::size_t best = l;
    for (std::size_t j = 0; j < d_->n; ++j) {
      if (j == l) continue;
      if (best == l || (*d_)(j, l) < (*d_)(best, l)) best = j;
    }
    return best;
  }

 private:
  const Dist<T>* d_ = nullptr;
};

// Moves the server minimizing its accumulated travel plus the move.
template <class T>
class BalanceServer final : public ServerAlgorithm<T> {
 public:
  std::string name() const override { return "balance"; }
  void reset(const Dist<T>& d, std::size_t, Rng&) override {
    d_ = &d;
    acc_.assign(d.n, T(0));
  }
  std::size_t serve(std::size_t l, Rng&) override {
    std::size_t best = l;
    T bv = 0;
    for (std::size_t j = 0; j < d_->n; ++j) {
      if (j == l) continue;
      T v = acc_[j] + (*d_)(j, l);
      if (best == l || v < bv) best = j, bv = v;
    }
    acc_[l] = bv;
    acc_[best] = 0;
    return best;
  }

 private:
  const Dist<T>* d_ = nullptr;
  std::vector<T> acc_;
};

inline const std::vector<std::string>& server_algorithm_names() {
  static const std::vector<std::string> names{"greedy", "balance"};
  return names;
}

template <class T>
std::unique_ptr<ServerAlgorithm<T>> server_algorithm(const std::string& name) {
  if (name == "greedy") return std::make_unique<GreedyServer<T>>();
  if (name == "balance") return std::make_unique<BalanceServer<T>>();
  throw DomainError("unknown server algorithm '" + name + "'");
}

template <class T>
struct ReductionStep {
  bool request = false;
  std::size_t before = 0, after = 0;  // uncovered point
  T move = 0, local = 0;
  std::vector<T> wT, wS;
};

template <class T>
struct ReductionTrace {
  std::vector<std::size_t> sigma;
  std::vector<ReductionStep<T>> steps;
  std::size_t start = 0;
  T mcost_AT = 0, lcost_AT = 0, mcost_AS = 0;
  T opt_T = 0, opt_S = 0, diameter = 0;
  T cost_AT() const { return mcost_AT + lcost_AT; }
  T cost_AS() const { return mcost_AS; }
};

template <class T>
ReductionTrace<T> run_reduction(ServerAlgorithm<T>& alg, const TaskSeq<T>& tau, const Dist<T>& d, std::size_t u0,
                                Rng& rng) {
  if (d.n < 2) throw DomainError("run_reduction: need at least 2 points");
  if (u0 >= d.n) throw DomainError("run_reduction: start out of range");
  ReductionTrace<T> tr;
  tr.start = u0;
  tr.diameter = d.diameter();
  auto wT = wf_init(d, u0);
  auto wS = wf_init(d, u0);
  alg.reset(d, u0, rng);
  std::size_t cur = u0;
  for (const auto& task : tau) {
    ReductionStep<T> st;
    st.before = cur;
    st.request = reduce_task(wT, task, d);
    if (st.request) {
      tr.sigma.push_back(task.point);
      server_wf_update(wS, d, task.point);
      if (task.point == cur) {
        std::size_t j = alg.serve(task.point, rng);
        if (j == task.point || j >= d.n) throw ValidationError("server algorithm left a request unserved");
        st.move = d(cur, j);
        tr.mcost_AS += st.move;
        tr.mcost_AT += st.move;
        cur = j;
      }
    }
    if (task.point == cur) st.local = task.cost;
    tr.lcost_AT += st.local;
    wf_update(wT, d, task);
    st.after = cur;
    st.wT = wT.w;
    st.wS = wS.w;
    tr.steps.push_back(std::move(st));
  }
  tr.opt_T = min_of(wT.w);
  tr.opt_S = min_of(wS.w);
  return tr;
}

template <class T>
struct RelationReport {
  bool ok = true;
  std::size_t steps = 0;
  long long first_violation = -1;
  std::string what;
};

template <class T>
RelationReport<T> verify_relation(const ReductionTrace<T>& tr) {
  RelationReport<T> rep;
  rep.steps = tr.steps.size();
  auto fail = [&](long long at, std::string what) {
    if (rep.ok) rep.ok = false, rep.first_violation = at, rep.what = std::move(what);
  };
  T lcost = 0, mcost = 0;
  for (std::size_t k = 0; k < tr.steps.size(); ++k) {
    const auto& st = tr.steps[k];
    lcost += st.local;
    mcost += st.move;
    for (std::size_t i = 0; i < st.wT.size(); ++i)
      if (st.wS[i] > st.wT[i]) fail((long long)k, "server work function exceeds task work function");
    if (lcost > mcost + st.wT[st.after]) fail((long long)k, "local cost ledger violated");
  }
  if (tr.mcost_AT != tr.mcost_AS) fail((long long)tr.steps.size(), "moving costs differ");
  if (tr.cost_AT() > 2 * tr.cost_AS() + tr.opt_T + tr.diameter)
    fail((long long)tr.steps.size(), "final cost bound violated");
  if (tr.opt_S > tr.opt_T) fail((long long)tr.steps.size(), "server optimum exceeds task optimum");
  return rep;
}

}  // namespace hstkit
