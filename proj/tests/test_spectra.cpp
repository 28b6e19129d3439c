#include "doctest.h"
#include "hqe/spectra.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace hqe;

TEST_CASE("eigh on small fixed matrices") {
  const std::vector<double> d{3, 1, 2};
  const auto e = eigh(SymMatrix::diagonal(d));
  CHECK(e.values[0] == 1.0);
  CHECK(e.values[1] == 2.0);
  CHECK(e.values[2] == 3.0);
  CHECK(std::abs(e.vectors(0, 1)) == 1.0);
  CHECK(std::abs(e.vectors(2, 0)) == 1.0);

  SymMatrix m(2);
  m.set(0, 0, 2);
  m.set(1, 1, 2);
  m.set(0, 1, 1);
  const auto e2 = eigh(m);
  CHECK(e2.values[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e2.values[1] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("eigh reconstruction and orthogonality on random input") {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(1, 10));
    const SymMatrix a = testing::random_symmetric(rng, n);
    const auto e = eigh(a);
    CHECK(e.vectors.orthogonality_residual() <= 1e-12);
    const SymMatrix back = e.reconstruct();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) worst = std::max(worst, std::abs(back(i, j) - a(i, j)));
    CHECK(worst <= 1e-10 * std::max(1.0, a.max_abs()));
    for (std::size_t i = 1; i < n; ++i) CHECK(e.values[i - 1] <= e.values[i]);
  }
}

TEST_CASE("eigh rejects non-finite input") {
  SymMatrix m(2);
  m.set(0, 1, std::nan(""));
  CHECK_THROWS_AS(eigh(m), Error);
}

TEST_CASE("conjugate_by") {
  const std::vector<double> d{1, 2};
  const SymMatrix m = SymMatrix::diagonal(d);
  const SymMatrix same = conjugate_by(DenseMatrix::identity(2), m);
  CHECK(same(0, 0) == 1.0);
  CHECK(same(1, 1) == 2.0);

  DenseMatrix rot(2, {0.0, -1.0, 1.0, 0.0});
  const SymMatrix swapped = conjugate_by(rot, m);
  CHECK(swapped(0, 0) == doctest::Approx(2.0));
  CHECK(swapped(1, 1) == doctest::Approx(1.0));
  CHECK(swapped(0, 1) == doctest::Approx(0.0));

  DenseMatrix bad(2, {1.0, 0.1, 0.0, 1.0});
  try {
    (void)conjugate_by(bad, m);
    FAIL("expected NotOrthogonal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotOrthogonal);
  }
}

TEST_CASE("conjugation preserves the spectrum") {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(2, 8));
    const SymMatrix m = testing::random_symmetric(rng, n);
    const DenseMatrix q = testing::random_orthogonal(rng, n);
    const auto before = eigh(m).values;
    const auto after = eigh(conjugate_by(q, m)).values;
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(before[i] - after[i]) <= 1e-10);
  }
}

TEST_CASE("symmetric storage") {
  DenseMatrix raw(2, {1.0, 2.0, 4.0, 3.0});
  CHECK_THROWS_AS(SymMatrix::from_dense(raw), Error);
  const SymMatrix s = SymMatrix::symmetrized(raw);
  CHECK(s(0, 1) == 3.0);
  CHECK(s(1, 0) == 3.0);
  const std::vector<double> x{1.0, -1.0};
  CHECK(s.quadratic_form(x) == doctest::Approx(1.0 + 3.0 - 6.0));
}
