#pragma once

// Elementary symmetric functions sigma_k, their "omitted index" variants,
// the Gamma_k cones and the ellipticity numerator of sigma_k / sigma_l.
//
// Every routine is a template over the scalar type: `double` for the
// floating-point paths and `Rational` (GMP mpq) for the exact ones. Indices
// into vectors are zero-based throughout the C++ API.

#include "hqe/error.hpp"
#include "hqe/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ranges>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hqe {

/// Eigenvalue-like n-vector. Holds entries in the order given; `sorted()`
/// returns the ascending copy used by every formula that assumes
/// 0 < a_1 <= ... <= a_n.
template <class T>
class BasicSymVec {
 public:
  using value_type = T;

  BasicSymVec() = default;
  explicit BasicSymVec(std::vector<T> entries) : entries_(std::move(entries)) {}
  BasicSymVec(std::initializer_list<T> entries) : entries_(entries) {}

  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] const T& operator[](std::size_t i) const { return entries_[i]; }
  [[nodiscard]] const T* data() const noexcept { return entries_.data(); }
  [[nodiscard]] auto begin() const noexcept { return entries_.begin(); }
  [[nodiscard]] auto end() const noexcept { return entries_.end(); }
  [[nodiscard]] std::span<const T> span() const noexcept { return entries_; }
  [[nodiscard]] const std::vector<T>& entries() const noexcept { return entries_; }

  [[nodiscard]] BasicSymVec sorted() const {
    std::vector<T> s = entries_;
    std::sort(s.begin(), s.end());
    return BasicSymVec(std::move(s));
  }

 private:
  std::vector<T> entries_;
};

using SymVec = BasicSymVec<double>;
using RationalVec = BasicSymVec<Rational>;

template <class R>
concept ScalarRange = std::ranges::contiguous_range<R> && std::ranges::sized_range<R>;

template <ScalarRange R>
using scalar_of = std::remove_cvref_t<std::ranges::range_value_t<R>>;

template <ScalarRange R>
std::span<const scalar_of<R>> as_span(const R& r) {
  return {std::ranges::data(r), std::ranges::size(r)};
}

namespace detail {

/// Coefficients c_0..c_n of prod_i (1 + p_i t); c_j = sigma_j(p).
template <class T>
std::vector<T> product_coefficients(std::span<const T> p, std::size_t skip_a = SIZE_MAX,
                                    std::size_t skip_b = SIZE_MAX) {
  std::vector<T> c(p.size() + 1, T(0));
  c[0] = T(1);
  std::size_t deg = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i == skip_a || i == skip_b) continue;
    ++deg;
    for (std::size_t j = deg; j >= 1; --j) c[j] += p[i] * c[j - 1];
  }
  c.resize(deg + 1);
  return c;
}

template <class T>
T coefficient(const std::vector<T>& c, int k) {
  if (k < 0 || static_cast<std::size_t>(k) >= c.size()) return T(0);
  return c[static_cast<std::size_t>(k)];
}

inline void check_index(std::size_t i, std::size_t n) {
  if (i >= n) {
    throw Error(ErrorCode::IndexOutOfRange,
                "index " + std::to_string(i) + " not in [0, " + std::to_string(n) + ")");
  }
}

template <class T>
T abs_value(const T& x) {
  if constexpr (is_exact_v<T>) {
    return abs(x);
  } else {
    return std::abs(x);
  }
}

}  // namespace detail

/// sigma_0..sigma_n of p with one product expansion. sigma_k for k outside
/// [0, n] follows the conventions sigma_{-1} = 0, sigma_{>n} = 0.
template <class T>
class SymmetricTable {
 public:
  explicit SymmetricTable(std::span<const T> p)
      : p_(p.begin(), p.end()), c_(detail::product_coefficients<T>(p)) {}

  [[nodiscard]] std::size_t size() const noexcept { return p_.size(); }
  [[nodiscard]] T sigma(int k) const { return detail::coefficient(c_, k); }

  /// Coefficients of sigma_{.;i}, i.e. the product with factor i removed.
  /// Exact scalars use one synthetic division step; floating scalars
  /// re-expand, since forward division amplifies rounding by p_i per degree.
  [[nodiscard]] std::vector<T> omit_coefficients(std::size_t i) const {
    detail::check_index(i, p_.size());
    if constexpr (is_exact_v<T>) {
      std::vector<T> d(p_.size(), T(0));
      d[0] = T(1);
      for (std::size_t j = 1; j < d.size(); ++j) d[j] = c_[j] - p_[i] * d[j - 1];
      return d;
    } else {
      return detail::product_coefficients<T>(std::span<const T>(p_), i);
    }
  }

  [[nodiscard]] T sigma_omit(int k, std::size_t i) const {
    return detail::coefficient(omit_coefficients(i), k);
  }

 private:
  std::vector<T> p_;
  std::vector<T> c_;
};

template <ScalarRange R>
auto sigma(int k, const R& p) {
  using T = scalar_of<R>;
  if (k < 0 || static_cast<std::size_t>(k) > std::ranges::size(p)) return T(0);
  // Truncated expansion: only degrees <= k are needed.
  std::vector<T> c(static_cast<std::size_t>(k) + 1, T(0));
  c[0] = T(1);
  std::size_t deg = 0;
  for (const T& x : as_span(p)) {
    deg = std::min<std::size_t>(deg + 1, static_cast<std::size_t>(k));
    for (std::size_t j = deg; j >= 1; --j) c[j] += x * c[j - 1];
  }
  return c[static_cast<std::size_t>(k)];
}

/// sigma_{k;i}(p): sigma_k with entry i deleted.
template <ScalarRange R>
auto sigma_omit(int k, std::size_t i, const R& p) {
  using T = scalar_of<R>;
  const auto s = as_span(p);
  detail::check_index(i, s.size());
  return detail::coefficient(detail::product_coefficients<T>(s, i), k);
}

/// sigma_{k;i,j}(p), i != j.
template <ScalarRange R>
auto sigma_omit2(int k, std::size_t i, std::size_t j, const R& p) {
  using T = scalar_of<R>;
  const auto s = as_span(p);
  detail::check_index(i, s.size());
  detail::check_index(j, s.size());
  if (i == j) throw Error(ErrorCode::InvalidArgument, "sigma_omit2 needs distinct indices");
  return detail::coefficient(detail::product_coefficients<T>(s, i, j), k);
}

/// sigma_k of the spectrum of M = diag(p) + s q q^T, evaluated without
/// forming M: sigma_k(p) + s * sum_i sigma_{k-1;i}(p) q_i^2.
template <ScalarRange R1, ScalarRange R2>
auto sigma_rank_one(int k, const R1& p, const R2& q, const scalar_of<R1>& s) {
  using T = scalar_of<R1>;
  const auto ps = as_span(p);
  const auto qs = as_span(q);
  if (ps.size() != qs.size()) throw Error(ErrorCode::InvalidArgument, "p and q differ in length");
  SymmetricTable<T> table(ps);
  T acc(0);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (qs[i] == T(0)) continue;
    acc += table.sigma_omit(k - 1, i) * qs[i] * qs[i];
  }
  return T(table.sigma(k) + s * acc);
}

/// All of sigma_0(lambda(M))..sigma_n(lambda(M)) for M = diag(p) + s q q^T.
template <class T>
std::vector<T> sigma_rank_one_all(std::span<const T> p, std::span<const T> q, const T& s) {
  const std::size_t n = p.size();
  SymmetricTable<T> table(p);
  std::vector<T> out(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out[k] = table.sigma(static_cast<int>(k));
  for (std::size_t i = 0; i < n; ++i) {
    if (q[i] == T(0)) continue;
    const std::vector<T> omit = table.omit_coefficients(i);
    const T w = s * q[i] * q[i];
    for (std::size_t k = 1; k <= n; ++k) out[k] += w * omit[k - 1];
  }
  return out;
}

namespace detail {

template <class T>
bool positive_with_scale(const T& value, const T& scale) {
  if constexpr (is_exact_v<T>) {
    (void)scale;
    return value > 0;
  } else {
    return value > 1e-14 * scale;
  }
}

}  // namespace detail

/// lambda in Gamma_k, i.e. sigma_j(lambda) > 0 for j = 1..k. Exact under
/// rationals; in floating point sigma_j must exceed 1e-14 * sigma_j(|lambda|).
template <ScalarRange R>
bool in_gamma_k(int k, const R& lam) {
  using T = scalar_of<R>;
  const auto s = as_span(lam);
  if (k < 1 || static_cast<std::size_t>(k) > s.size()) {
    throw Error(ErrorCode::InvalidArgument, "in_gamma_k needs 1 <= k <= n");
  }
  const std::vector<T> c = detail::product_coefficients<T>(s);
  std::vector<T> mags(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) mags[i] = detail::abs_value(s[i]);
  const std::vector<T> scale = detail::product_coefficients<T>(std::span<const T>(mags));
  for (int j = 1; j <= k; ++j) {
    if (!detail::positive_with_scale(c[static_cast<std::size_t>(j)], scale[static_cast<std::size_t>(j)])) {
      return false;
    }
  }
  return true;
}

template <ScalarRange R>
bool in_gamma_plus(const R& lam) {
  for (const auto& x : as_span(lam)) {
    if (!(x > 0)) return false;
  }
  return true;
}

/// Numerator of d/d lambda_i (sigma_k / sigma_l):
/// sigma_{k-1;i} sigma_l - sigma_k sigma_{l-1;i}. Non-negative on Gamma_k.
template <ScalarRange R>
auto quotient_ellipticity_gap(int k, int l, std::size_t i, const R& lam) {
  using T = scalar_of<R>;
  const auto s = as_span(lam);
  if (!(0 <= l && l < k && static_cast<std::size_t>(k) <= s.size())) {
    throw Error(ErrorCode::InvalidArgument, "need 0 <= l < k <= n");
  }
  detail::check_index(i, s.size());
  if (!in_gamma_k(k, lam)) throw Error(ErrorCode::NotInCone, "lambda is not in Gamma_k");
  SymmetricTable<T> table(s);
  const std::vector<T> omit = table.omit_coefficients(i);
  return T(detail::coefficient(omit, k - 1) * table.sigma(l) -
           table.sigma(k) * detail::coefficient(omit, l - 1));
}

/// Newton's inequality sigma_{j-1} sigma_{j+1} <= sigma_j^2 (valid for every
/// real vector). In floating point a relative slack of 1e-12 is allowed.
template <ScalarRange R>
bool newton_check(int j, const R& lam) {
  using T = scalar_of<R>;
  const auto s = as_span(lam);
  const std::vector<T> c = detail::product_coefficients<T>(s);
  const T lhs = detail::coefficient(c, j - 1) * detail::coefficient(c, j + 1);
  const T rhs = detail::coefficient(c, j) * detail::coefficient(c, j);
  if constexpr (is_exact_v<T>) {
    return lhs <= rhs;
  } else {
    std::vector<T> mags(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) mags[i] = std::abs(s[i]);
    const std::vector<T> sc = detail::product_coefficients<T>(std::span<const T>(mags));
    const T scale = detail::coefficient(sc, j) * detail::coefficient(sc, j);
    return lhs <= rhs + 1e-12 * scale;
  }
}

}  // namespace hqe
