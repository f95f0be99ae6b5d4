#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "hstkit/metric.hpp"

namespace hstkit {

using Rational = mpq_class;

inline double as_double(double x) { return x; }
inline double as_double(const Rational& x) { return x.get_d(); }

template <class T>
T from_double(double x) {
  if constexpr (std::is_same_v<T, double>) return x;
  else return T(x);  // exact binary expansion
}

inline std::string to_string_exact(const Rational& q) { return q.get_str(); }

// Distance matrix in the arithmetic of choice.
template <class T>
struct Dist {
  std::size_t n = 0;
  std::vector<T> d;
  const T& operator()(std::size_t i, std::size_t j) const { return d[i * n + j]; }
  T diameter() const {
    T best = 0;
    for (const T& v : d)
      if (v > best) best = v;
    return best;
  }
};

template <class T>
Dist<T> to_dist(const MetricSpace& m) {
  Dist<T> out;
  out.n = m.size();
  out.d.reserve(out.n * out.n);
  for (double v : m.flat()) out.d.push_back(from_double<T>(v));
  return out;
}

}  // namespace hstkit
