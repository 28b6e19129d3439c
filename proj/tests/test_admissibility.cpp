#include "doctest.h"
#include "hqe/admissibility.hpp"
#include "support.hpp"

#include <cmath>

using namespace hqe;

namespace {

RationalVec rv(std::initializer_list<long> xs) {
  std::vector<Rational> v;
  for (long x : xs) v.emplace_back(x);
  return RationalVec(std::move(v));
}

Rational q(const char* s) { return parse_rational(s); }

}  // namespace

TEST_CASE("worked example a = (1,2,3)") {
  const auto a = rv({1, 2, 3});
  CHECK(xi_bounds(2, a).upper == q("9/11"));
  CHECK(xi_bounds(2, a).lower == q("5/11"));
  CHECK(xi_bounds(1, a).upper == q("1/2"));
  CHECK(xi_bounds(1, a).lower == q("1/6"));
  CHECK(xi_bounds(3, a).upper == 1);
  CHECK(xi_bounds(3, a).lower == 1);
  CHECK(m_exponent(3, 2, a) == q("11/6"));
  CHECK(m_exponent(3, 1, a) == q("12/5"));
  CHECK(m_exponent(3, 0, a) == 3);
  CHECK(m_exponent(2, 1, a) == q("66/43"));
  CHECK(m_exponent(2, 0, a) == q("22/9"));
  CHECK(m_exponent(1, 0, a) == 2);
}

TEST_CASE("worked example a = (11,12,13)") {
  const auto a = rv({11, 12, 13});
  CHECK(xi_bounds(2, a).upper == q("299/431"));
  CHECK(xi_bounds(2, a).lower == q("275/431"));
  CHECK(xi_bounds(1, a).upper == q("13/36"));
  CHECK(xi_bounds(1, a).lower == q("11/36"));
  CHECK(m_exponent(3, 2, a) == q("431/156"));
  CHECK(m_exponent(3, 1, a) == q("72/25"));
  CHECK(m_exponent(2, 1, a) == q("15516/6023"));
  CHECK(m_exponent(2, 0, a) == q("862/299"));
  CHECK(m_exponent(1, 0, a) == q("36/13"));
}

TEST_CASE("xi_at") {
  const auto a = rv({1, 2, 3});
  const auto e1 = rv({1, 0, 0});
  const auto e3 = rv({0, 0, 1});
  CHECK(xi_at(2, a, e1) == q("5/11"));
  CHECK(xi_at(2, a, e3) == q("9/11"));
  CHECK(xi_at(2, rv({1, 1, 1}), rv({3, -1, 2})) == q("2/3"));
  CHECK(xi_at(0, a, e1) == 0);
  CHECK_THROWS_AS(xi_at(2, a, rv({0, 0, 0})), Error);
}

TEST_CASE("xi bounds bracket Xi and are attained on the axes") {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(2, 7));
    const auto a = testing::random_positive(rng, n);
    const auto sorted = SymVec(a).sorted();
    for (int k = 1; k <= static_cast<int>(n); ++k) {
      const auto b = xi_bounds(k, a);
      CHECK(b.lower <= static_cast<double>(k) / n + 1e-14);
      CHECK(b.upper >= static_cast<double>(k) / n - 1e-14);
      CHECK(b.upper <= 1.0 + 1e-14);
      double hi = 0.0, lo = 2.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> e(n, 0.0);
        e[i] = 1.0;
        const double v = xi_at(k, sorted, e);
        hi = std::max(hi, v);
        lo = std::min(lo, v);
      }
      CHECK(hi == doctest::Approx(b.upper).epsilon(1e-13));
      CHECK(lo == doctest::Approx(b.lower).epsilon(1e-13));
      for (int s = 0; s < 20; ++s) {
        const auto x = rng.unit_vector(n);
        const double v = xi_at(k, sorted, x);
        CHECK(v >= b.lower - 1e-13);
        CHECK(v <= b.upper + 1e-13);
      }
      const auto scaled = xi_bounds(k, std::vector<double>{[&] {
        std::vector<double> s2(a);
        for (auto& x : s2) x *= 3.7;
        return s2;
      }()});
      CHECK(scaled.upper == doctest::Approx(b.upper).epsilon(1e-13));
      CHECK(scaled.lower == doctest::Approx(b.lower).epsilon(1e-13));
    }
  }
}

TEST_CASE("monotone chains and pinch characterization") {
  Rng rng(22);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(3, 6));
    const auto a = testing::random_rational_vector(rng, n, 1, 9);
    for (int k = 1; k + 1 <= static_cast<int>(n); ++k) {
      CHECK(xi_bounds(k, a).upper <= xi_bounds(k + 1, a).upper);
      CHECK(xi_bounds(k, a).lower <= xi_bounds(k + 1, a).lower);
    }
    CHECK(xi_bounds(static_cast<int>(n) - 1, a).upper < 1);
    bool uniform = true;
    for (const auto& x : a) uniform = uniform && x == a[0];
    for (int k = 1; k < static_cast<int>(n); ++k) {
      const auto b = xi_bounds(k, a);
      const bool pinched = b.lower == Rational(k) / Rational(static_cast<long>(n)) && b.upper == Rational(k) / Rational(static_cast<long>(n));
      CHECK(pinched == uniform);
    }
  }
  const auto c = rv({4, 4, 4, 4});
  for (int k = 1; k < 4; ++k) CHECK(xi_bounds(k, c).upper == Rational(k) / 4);
}

TEST_CASE("m exponent bounds and the k-l = 1 remark") {
  Rng rng(23);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(2, 6));
    const auto a = testing::random_rational_vector(rng, n, 1, 9);
    for (int k = 1; k <= static_cast<int>(n); ++k) {
      for (int l = 0; l < k; ++l) {
        const Rational m = m_exponent(k, l, a);
        const Rational up = xi_bounds(k, a).upper;
        CHECK(Rational(k - l) <= m * up);
        if (l > 0) CHECK(Rational(k - l) < m * up);
        CHECK(m * up <= m);
        CHECK(m <= Rational(static_cast<long>(n)));
        if (k - l == 1) {
          const bool big = m > 2;
          CHECK(big == (up < xi_bounds(l, a).lower + Rational(1, 2)));
        }
      }
    }
  }
}

TEST_CASE("classify") {
  const double s3 = std::sqrt(3.0);
  const auto c1 = classify(SymMatrix::identity(3, s3), 3, 1);
  CHECK(c1.in_A_kl);
  CHECK(c1.in_Atilde_kl);
  CHECK(c1.m == doctest::Approx(3.0));
  CHECK(c1.rejection_reason().empty());

  const std::vector<double> d{1, 2, 3};
  const auto c2 = classify(SymMatrix::diagonal(d), 2, 1);
  CHECK_FALSE(c2.in_A_kl);
  CHECK(c2.rho == doctest::Approx(6.0 / 11.0).epsilon(1e-14));
  CHECK(c2.rejection_reason().find("rescale") != std::string::npos);

  const auto c3 = classify(SymMatrix::diagonal(d).scaled(c2.rho), 2, 1);
  CHECK(c3.in_A_kl);
  CHECK_FALSE(c3.in_Atilde_kl);
  CHECK(c3.m == doctest::Approx(66.0 / 43.0));
  CHECK(c3.rejection_reason().find("m > 2") != std::string::npos);

  CHECK(c_star(3, 2, 0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(c_star(3, 3, 1) == doctest::Approx(s3).epsilon(1e-15));

  const std::vector<double> neg{-1, 2, 3};
  const auto c4 = classify(SymMatrix::diagonal(neg), 2, 0);
  CHECK_FALSE(c4.positive);
  CHECK_FALSE(c4.in_A_kl);
}

TEST_CASE("c_* I is admissible with m = n") {
  for (int n = 2; n <= 6; ++n)
    for (int k = 1; k <= n; ++k)
      for (int l = 0; l < k; ++l) {
        const auto c = classify(SymMatrix::identity(static_cast<std::size_t>(n), c_star(n, k, l)), k, l);
        CHECK(c.in_A_kl);
        CHECK(c.m == doctest::Approx(n));
        CHECK(c.in_Atilde_kl == (n > 2));
      }
}

TEST_CASE("prop_wtakl_check") {
  Rng rng(24);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(3, 6));
    const int k = static_cast<int>(rng.integer(2, static_cast<long>(n)));
    const int l = static_cast<int>(rng.integer(0, k - 2));
    auto a = testing::random_positive(rng, n);
    const double rho = normalizing_factor(k, l, a);
    for (auto& x : a) x *= rho;
    CHECK(prop_wtakl_check(k, l, a));
  }
  // (n,0): m = n exactly
  std::vector<double> a{1, 2, 4};
  const double rho = normalizing_factor(3, 0, a);
  for (auto& x : a) x *= rho;
  CHECK(prop_wtakl_check(3, 0, a));
  CHECK(m_exponent(3, 0, a) == doctest::Approx(3.0).epsilon(1e-14));

  // k = 3, l = 2 with a_1 <= a_2 a_3 / (a_2 + a_3)
  std::vector<double> b{0.5, 2, 3};
  const double rb = normalizing_factor(3, 2, b);
  for (auto& x : b) x *= rb;
  CHECK_FALSE(prop_wtakl_check(3, 2, b));
  CHECK_THROWS_AS(prop_wtakl_check(3, 2, std::vector<double>{1, 2, 3}), Error);
}
