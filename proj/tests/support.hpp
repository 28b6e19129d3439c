#pragma once

#include "hqe/admissibility.hpp"
#include "hqe/numerics.hpp"
#include "hqe/rational.hpp"
#include "hqe/spectra.hpp"

#include <cmath>
#include <vector>

namespace hqe::testing {

inline Rational random_rational(Rng& rng, long lo = -9, long hi = 9) {
  Rational q(rng.integer(lo, hi), rng.integer(1, 9));
  q.canonicalize();
  return q;
}

inline std::vector<Rational> random_rational_vector(Rng& rng, std::size_t n, long lo = -9, long hi = 9) {
  std::vector<Rational> v(n);
  for (auto& x : v) x = random_rational(rng, lo, hi);
  return v;
}

inline std::vector<double> random_positive(Rng& rng, std::size_t n, double lo = 0.2, double hi = 5.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

/// Haar-ish random orthogonal matrix via Gram-Schmidt on Gaussian rows.
inline DenseMatrix random_orthogonal(Rng& rng, std::size_t n) {
  DenseMatrix q(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    for (std::size_t j = 0; j < i; ++j) {
      double d = 0.0;
      for (std::size_t c = 0; c < n; ++c) d += v[c] * q(j, c);
      for (std::size_t c = 0; c < n; ++c) v[c] -= d * q(j, c);
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t c = 0; c < n; ++c) q(i, c) = v[c] / norm;
  }
  return q;
}

inline SymMatrix random_symmetric(Rng& rng, std::size_t n) {
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m.set(i, j, rng.uniform(-2.0, 2.0));
  return m;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Random A in A~_{k,l}: random positive spectrum, rotated, rescaled by rho,
/// redrawn until m > 2.
inline SymMatrix random_admissible(Rng& rng, std::size_t n, int k, int l) {
  for (;;) {
    auto a = random_positive(rng, n, 0.5, 2.0);
    const double rho = normalizing_factor(k, l, a);
    for (auto& x : a) x *= rho;
    if (!(m_exponent(k, l, a) > 2.0)) continue;
    const DenseMatrix q = random_orthogonal(rng, n);
    return conjugate_by(q, SymMatrix::diagonal(a));
  }
}

}  // namespace hqe::testing
