#pragma once

// Directional weights Xi_k(a, x), their extremes xi_lower_k / xi_upper_k, the
// decay exponent m_{k,l}, and membership in the admissible matrix classes
//
//   A_{k,l}  = { A symmetric : lambda(A) > 0, sigma_k(lambda) = sigma_l(lambda) }
//   A~_{k,l} = { A in A_{k,l} : m_{k,l}(lambda(A)) > 2 }.
//
// The extremes are computed from the closed forms
//   xi_lower_k(a) = a_1 sigma_{k-1;1}(a) / sigma_k(a)
//   xi_upper_k(a) = a_n sigma_{k-1;n}(a) / sigma_k(a)
// on the ascending copy of a; xi_at exists to cross-check them.

#include "hqe/spectra.hpp"
#include "hqe/symfunc.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace hqe {

template <class T>
struct XiBounds {
  T lower;
  T upper;
};

namespace detail {

template <class T>
std::vector<T> sorted_positive(std::span<const T> a) {
  std::vector<T> s(a.begin(), a.end());
  if (s.empty()) throw Error(ErrorCode::InvalidArgument, "empty spectrum");
  for (const T& v : s) {
    if (!(v > 0)) throw Error(ErrorCode::NotPositiveCone, "spectrum has a non-positive entry");
  }
  std::sort(s.begin(), s.end());
  return s;
}

inline void check_kl(int k, int l, std::size_t n) {
  if (!(0 <= l && l < k && static_cast<std::size_t>(k) <= n)) {
    throw Error(ErrorCode::InvalidArgument,
                "need 0 <= l < k <= n, got k=" + std::to_string(k) + " l=" + std::to_string(l));
  }
}

}  // namespace detail

/// (xi_lower_k(a), xi_upper_k(a)); xi_0 = 0 and xi_n = 1 on both sides.
template <ScalarRange R>
auto xi_bounds(int k, const R& a) {
  using T = scalar_of<R>;
  const std::vector<T> s = detail::sorted_positive<T>(as_span(a));
  const std::size_t n = s.size();
  if (k < 0 || static_cast<std::size_t>(k) > n) throw Error(ErrorCode::InvalidArgument, "need 0 <= k <= n");
  if (k == 0) return XiBounds<T>{T(0), T(0)};
  if (static_cast<std::size_t>(k) == n) return XiBounds<T>{T(1), T(1)};
  SymmetricTable<T> table{std::span<const T>(s)};
  const T sk = table.sigma(k);
  T lower = s.front() * table.sigma_omit(k - 1, 0) / sk;
  T upper = s.back() * table.sigma_omit(k - 1, n - 1) / sk;
  return XiBounds<T>{lower, upper};
}

/// Xi_k(a, x) = sum_i sigma_{k-1;i}(a) a_i^2 x_i^2 / (sigma_k(a) sum_i a_i x_i^2).
/// `a` and `x` are paired entrywise (no sorting); Xi_0 = 0.
template <ScalarRange R1, ScalarRange R2>
auto xi_at(int k, const R1& a, const R2& x) {
  using T = scalar_of<R1>;
  const auto as = as_span(a);
  const auto xs = as_span(x);
  if (as.size() != xs.size()) throw Error(ErrorCode::InvalidArgument, "a and x differ in length");
  for (const T& v : as) {
    if (!(v > 0)) throw Error(ErrorCode::NotPositiveCone, "spectrum has a non-positive entry");
  }
  bool nonzero = false;
  for (const T& v : xs) nonzero = nonzero || v != T(0);
  if (!nonzero) throw Error(ErrorCode::ZeroVector, "x must be non-zero");
  if (k < 0 || static_cast<std::size_t>(k) > as.size()) throw Error(ErrorCode::InvalidArgument, "need 0 <= k <= n");
  if (k == 0) return T(0);
  SymmetricTable<T> table(as);
  T num(0);
  T den(0);
  for (std::size_t i = 0; i < as.size(); ++i) {
    const T x2 = xs[i] * xs[i];
    num += table.sigma_omit(k - 1, i) * as[i] * as[i] * x2;
    den += as[i] * x2;
  }
  return T(num / (table.sigma(k) * den));
}

/// m_{k,l}(a) = (k - l) / (xi_upper_k(a) - xi_lower_l(a)).
template <ScalarRange R>
auto m_exponent(int k, int l, const R& a) {
  using T = scalar_of<R>;
  detail::check_kl(k, l, std::ranges::size(a));
  const T upper = xi_bounds(k, a).upper;
  const T lower = xi_bounds(l, a).lower;
  return T(T(k - l) / (upper - lower));
}

/// sigma_k(a) = sigma_l(a): exact for rationals, relative 1e-10 for doubles.
template <ScalarRange R>
bool sigma_balanced(int k, int l, const R& a) {
  using T = scalar_of<R>;
  const T sk = sigma(k, a);
  const T sl = sigma(l, a);
  if constexpr (is_exact_v<T>) {
    return sk == sl;
  } else {
    return std::abs(sk - sl) <= 1e-10 * std::max(std::abs(sk), std::abs(sl));
  }
}

/// Normalizing factor rho = (sigma_k(a) / sigma_l(a))^{-1/(k-l)}, so that
/// rho * a satisfies sigma_k = sigma_l.
double normalizing_factor(int k, int l, std::span<const double> a);

/// c_* = (C(n,l) / C(n,k))^{1/(k-l)}; c_* I lies in A_{k,l}.
double c_star(int n, int k, int l);

struct AdmissibleMatrix {
  SymMatrix A;
  SymVec a;  ///< ascending spectrum of A
  int k = 0;
  int l = 0;
  bool in_A_kl = false;
  bool in_Atilde_kl = false;
  double m = 0.0;  ///< m_{k,l}(a); NaN when a is not in the positive cone
  double rho = 0.0;
  double c_star = 0.0;
  bool positive = false;

  /// Human-readable reason why A is not in A~_{k,l} (empty when it is).
  [[nodiscard]] std::string rejection_reason() const;
};

/// Classifies a symmetric matrix. Non-symmetric input should be passed
/// through SymMatrix::symmetrized first.
AdmissibleMatrix classify(const SymMatrix& A, int k, int l);

/// Concrete evaluation of the A~_{k,l} facts on one balanced spectrum:
/// returns m_{k,l}(a) > 2, and additionally requires m_{n,0}(a) = n when
/// (k,l) = (n,0). For k - l >= 2 the result is always true; for k - l = 1 it
/// can be false. Throws NotAdmissible if sigma_k(a) != sigma_l(a).
template <ScalarRange R>
bool prop_wtakl_check(int k, int l, const R& a) {
  using T = scalar_of<R>;
  const std::size_t n = std::ranges::size(a);
  detail::check_kl(k, l, n);
  if (!in_gamma_plus(a)) throw Error(ErrorCode::NotPositiveCone, "spectrum not in the positive cone");
  if (!sigma_balanced(k, l, a)) throw Error(ErrorCode::NotAdmissible, "sigma_k(a) != sigma_l(a)");
  const T m = m_exponent(k, l, a);
  bool ok = m > T(2);
  if (l == 0 && static_cast<std::size_t>(k) == n) {
    if constexpr (is_exact_v<T>) {
      ok = ok && m == T(static_cast<long>(n));
    } else {
      ok = ok && std::abs(m - static_cast<double>(n)) <= 1e-12 * static_cast<double>(n);
    }
  }
  return ok;
}

}  // namespace hqe
