#include "doctest.h"
#include "hqe/error.hpp"
#include "hqe/numerics.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

using namespace hqe;

TEST_CASE("bracketed_root") {
  const auto r = bracketed_root([](double x) { return x * x - 2.0; }, 0.0, 2.0);
  CHECK(r.x == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const auto dec = bracketed_root([](double x) { return std::cos(x); }, 0.0, 3.0);
  CHECK(dec.x == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
  CHECK(dec.iterations < 80);
  CHECK_THROWS_AS(bracketed_root([](double x) { return x * x + 1.0; }, -1.0, 1.0), Error);
  const auto at_end = bracketed_root([](double x) { return x - 1.0; }, 1.0, 3.0);
  CHECK(at_end.x == 1.0);
}

TEST_CASE("gauss_legendre") {
  CHECK(gauss_legendre([](double x) { return std::exp(x); }, 0.0, 1.0, 1) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-15));
  CHECK(gauss_legendre([](double x) { return 1.0 / x; }, 1.0, 100.0, 64) ==
        doctest::Approx(std::log(100.0)).epsilon(1e-12));
}

TEST_CASE("line fits") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9};
  const auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  const std::vector<double> xs{10, 100, 1000};
  const std::vector<double> ys{5e-3, 5e-6, 5e-9};
  CHECK(fit_loglog(xs, ys).slope == doctest::Approx(-3.0));
}

TEST_CASE("rng is reproducible") {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
  for (int i = 0; i < 100; ++i) {
    const auto v = a.integer(-3, 3);
    CHECK(v >= -3);
    CHECK(v <= 3);
  }
  const auto u = a.unit_vector(4);
  double s = 0;
  for (double x : u) s += x * x;
  CHECK(s == doctest::Approx(1.0));
}

TEST_CASE("sphere directions start with the axes") {
  const auto d = sphere_directions(3, 10, 1);
  CHECK(d.size() == 10);
  CHECK(d[0][0] == 1.0);
  CHECK(d[1][0] == -1.0);
  CHECK(d[5][2] == -1.0);
}

TEST_CASE("parallel_for covers every index once and propagates exceptions") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) hits[i]++;
  });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS(parallel_for(10, 3, [](std::size_t b, std::size_t) {
    if (b == 0) throw std::runtime_error("boom");
  }));
}
