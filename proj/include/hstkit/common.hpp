#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace hstkit {

inline constexpr const char* kVersion = "1.0.0";

// Invalid input or out-of-domain parameters.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A computation would exceed its configured size budget.
struct BudgetError : std::length_error {
  using std::length_error::length_error;
};

// An instance failed a structural check (metric axioms, HST shape, ...).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

inline constexpr double kDefaultTol = 1e-9;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// splitmix64 finalizer; used to derive independent per-trial seeds.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double uniform_real(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// a <= b up to relative tolerance.
inline bool leq_tol(double a, double b, double tol) {
  return a <= b + tol * std::max(std::fabs(a), std::fabs(b));
}

inline bool eq_tol(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

inline double harmonic(int b) {
  double h = 0;
  for (int i = b; i >= 1; --i) h += 1.0 / i;
  return h;
}

// Smallest h >= 0 with base^h >= k.
inline int ceil_log(double k, double base) {
  if (!(base > 1)) throw DomainError("ceil_log: base must exceed 1");
  int h = 0;
  double p = 1;
  while (p < k * (1 - 1e-12)) {
    p *= base;
    ++h;
  }
  return h;
}

}  // namespace hstkit
