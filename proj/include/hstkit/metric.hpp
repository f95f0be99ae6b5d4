#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hstkit/common.hpp"

namespace hstkit {

// Finite metric space with a validated, symmetric distance matrix.
class MetricSpace {
 public:
  MetricSpace() = default;

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& points() const { return names_; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * size() + j]; }
  const std::vector<double>& flat() const { return d_; }

  std::optional<std::size_t> index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::vector<double>> matrix() const {
    std::vector<std::vector<double>> m(size(), std::vector<double>(size()));
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j) m[i][j] = (*this)(i, j);
    return m;
  }

  // Builds without checking axioms. Callers guarantee a valid metric.
  static MetricSpace trusted(std::vector<std::string> names, std::vector<double> flat) {
    MetricSpace m;
    m.names_ = std::move(names);
    m.d_ = std::move(flat);
    for (std::size_t i = 0; i < m.names_.size(); ++i) m.index_.emplace(m.names_[i], i);
    return m;
  }

  friend bool operator==(const MetricSpace& a, const MetricSpace& b) {
    return a.names_ == b.names_ && a.d_ == b.d_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<double> d_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::to_string(i);
  return out;
}

// Throws ValidationError naming the violated axiom and a witness.
inline MetricSpace validate_metric(const std::vector<std::vector<double>>& mat,
                                   std::vector<std::string> names = {}, double tol = kDefaultTol) {
  const std::size_t n = mat.size();
  if (n == 0) throw ValidationError("empty matrix");
  for (std::size_t i = 0; i < n; ++i)
    if (mat[i].size() != n) throw ValidationError("matrix is not square (row " + std::to_string(i) + ")");
  if (names.empty()) names = default_names(n);
  if (names.size() != n) throw ValidationError("name count does not match matrix size");
  {
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < n; ++i)
      if (!seen.emplace(names[i], i).second) throw ValidationError("duplicate point id '" + names[i] + "'");
  }
  auto pair = [](std::size_t i, std::size_t j) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = mat[i][j];
      if (!std::isfinite(v)) throw ValidationError("non-finite entry " + pair(i, j));
      if (v < 0) throw ValidationError("negative entry " + pair(i, j));
      if (i == j && v != 0) throw ValidationError("nonzero diagonal " + pair(i, j));
      if (i != j && v == 0) throw ValidationError("zero off-diagonal " + pair(i, j));
      if (i < j && !eq_tol(v, mat[j][i], tol)) throw ValidationError("asymmetry " + pair(i, j));
    }
  }
  std::vector<double> flat(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) flat[i * n + j] = i <= j ? mat[i][j] : mat[j][i];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || j == k) continue;
        if (!leq_tol(flat[i * n + k], flat[i * n + j] + flat[j * n + k], tol))
          throw ValidationError("triangle violation " + pair(i, k) + " via " + std::to_string(j));
      }
  return MetricSpace::trusted(std::move(names), std::move(flat));
}

inline MetricSpace restrict_to(const MetricSpace& m, const std::vector<std::size_t>& idx) {
  if (idx.empty()) throw DomainError("restrict: empty subset");
  const std::size_t k = idx.size();
  std::vector<std::string> names(k);
  std::vector<double> flat(k * k);
  for (std::size_t a = 0; a < k; ++a) {
    if (idx[a] >= m.size()) throw DomainError("restrict: index out of range");
    names[a] = m.name(idx[a]);
    for (std::size_t b = 0; b < k; ++b) flat[a * k + b] = m(idx[a], idx[b]);
  }
  return MetricSpace::trusted(std::move(names), std::move(flat));
}

inline MetricSpace restrict_to(const MetricSpace& m, const std::vector<std::string>& ids) {
  std::vector<std::size_t> idx;
  idx.reserve(ids.size());
  for (const auto& id : ids) {
    auto i = m.index_of(id);
    if (!i) throw DomainError("restrict: unknown point id '" + id + "'");
    idx.push_back(*i);
  }
  return restrict_to(m, idx);
}

inline MetricSpace scale(const MetricSpace& m, double gamma) {
  if (!(gamma > 0)) throw DomainError("scale: gamma must be positive");
  std::vector<double> flat = m.flat();
  for (double& v : flat) v *= gamma;
  return MetricSpace::trusted(m.points(), std::move(flat));
}

struct Diameter {
  double value = 0;
  std::size_t i = 0, j = 0;
};

// Lowest-index pair among maximizers.
inline Diameter diameter(const MetricSpace& m) {
  Diameter d;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j)
      if (m(i, j) > d.value) d = {m(i, j), i, j};
  return d;
}

struct ApproxReport {
  double alpha = 1;  // +inf when not dominated
  bool dominated = true;
  std::pair<std::string, std::string> worst_pair;
  double optimal_rescale = 1;
  double rescaled_alpha = 1;
  double max_ratio = 1, min_ratio = 1;
};

// Compares M (target) with M' (approximation) on the same point ids.
inline ApproxReport approximation_factor(const MetricSpace& m, const MetricSpace& mp,
                                         double tol = kDefaultTol) {
  if (m.size() != mp.size()) throw DomainError("approximation_factor: mismatched point sets");
  std::vector<std::size_t> map(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto j = mp.index_of(m.name(i));
    if (!j) throw DomainError("approximation_factor: mismatched point sets ('" + m.name(i) + "')");
    map[i] = *j;
  }
  ApproxReport r;
  r.worst_pair = {m.name(0), m.name(0)};
  std::pair<std::size_t, std::size_t> arg_max{0, 0}, arg_min{0, 0};
  double mx = -1, mn = kInf;
  bool dominated = true;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      double a = m(i, j), b = mp(map[i], map[j]);
      double q = a / b;
      if (q > mx) mx = q, arg_max = {i, j};
      if (q < mn) mn = q, arg_min = {i, j};
      if (!leq_tol(b, a, tol)) dominated = false;
    }
  if (m.size() < 2) return r;
  r.max_ratio = mx;
  r.min_ratio = mn;
  r.dominated = dominated;
  r.optimal_rescale = mn;
  r.rescaled_alpha = mx / mn;
  if (dominated) {
    r.alpha = std::max(1.0, mx);
    r.worst_pair = {m.name(arg_max.first), m.name(arg_max.second)};
  } else {
    r.alpha = kInf;
    r.worst_pair = {m.name(arg_min.first), m.name(arg_min.second)};
  }
  return r;
}

inline double transfer_bound(double r_prime, double alpha) {
  if (!(alpha >= 1)) throw DomainError("transfer_bound: alpha must be >= 1");
  if (!(r_prime > 0)) throw DomainError("transfer_bound: r' must be positive");
  return r_prime / alpha;
}

// ---- generators ----

inline MetricSpace uniform_metric(std::size_t b, double delta = 1) {
  if (b == 0 || !(delta > 0)) throw DomainError("uniform: need b >= 1 and delta > 0");
  std::vector<double> flat(b * b, delta);
  for (std::size_t i = 0; i < b; ++i) flat[i * b + i] = 0;
  return MetricSpace::trusted(default_names(b), std::move(flat));
}

inline MetricSpace path_metric(std::size_t n, double step = 1) {
  if (n == 0 || !(step > 0)) throw DomainError("path: need n >= 1 and step > 0");
  std::vector<double> flat(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) flat[i * n + j] = step * std::fabs(double(i) - double(j));
  return MetricSpace::trusted(default_names(n), std::move(flat));
}

// p = +inf selects the max norm.
inline double lp_distance(const std::vector<int>& x, const std::vector<int>& y, double p) {
  double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double t = std::fabs(double(x[i] - y[i]));
    if (std::isinf(p)) acc = std::max(acc, t);
    else acc += std::pow(t, p);
  }
  return std::isinf(p) || acc == 0 ? acc : std::pow(acc, 1.0 / p);
}

inline std::string coord_id(const std::vector<int>& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(x[i]);
  }
  return s;
}

inline std::size_t mesh_size_checked(int s, int h, std::size_t budget) {
  if (s < 1 || h < 1) throw DomainError("mesh: need s >= 1 and h >= 1");
  std::size_t n = 1;
  for (int i = 0; i < h; ++i) {
    if (n > budget / std::size_t(s)) throw BudgetError("mesh: s^h exceeds point budget");
    n *= std::size_t(s);
  }
  if (n > budget) throw BudgetError("mesh: s^h exceeds point budget");
  return n;
}

inline MetricSpace mesh_metric(int s, int h, double p, std::size_t budget = 4096) {
  if (!(p >= 1)) throw DomainError("mesh: p must be in [1, inf]");
  const std::size_t n = mesh_size_checked(s, h, budget);
  std::vector<std::vector<int>> pts(n, std::vector<int>(h));
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t x = a;
    for (int c = h - 1; c >= 0; --c) pts[a][c] = int(x % s), x /= s;
  }
  std::vector<std::string> names(n);
  std::vector<double> flat(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    names[a] = coord_id(pts[a]);
    for (std::size_t b = 0; b < n; ++b) flat[a * n + b] = lp_distance(pts[a], pts[b], p);
  }
  return MetricSpace::trusted(std::move(names), std::move(flat));
}

// Collapses points at zero distance onto their first occurrence.
inline MetricSpace dedupe(const std::vector<std::vector<double>>& mat, std::vector<std::string> names = {}) {
  const std::size_t n = mat.size();
  if (names.empty()) names = default_names(n);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i) {
    bool dup = false;
    for (std::size_t k : keep)
      if (mat[i][k] == 0) dup = true;
    if (!dup) keep.push_back(i);
  }
  std::vector<std::vector<double>> out(keep.size(), std::vector<double>(keep.size()));
  std::vector<std::string> kn;
  for (std::size_t a = 0; a < keep.size(); ++a) {
    kn.push_back(names[keep[a]]);
    for (std::size_t b = 0; b < keep.size(); ++b) out[a][b] = mat[keep[a]][keep[b]];
  }
  return validate_metric(out, kn);
}

}  // namespace hstkit
