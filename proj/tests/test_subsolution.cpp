#include "doctest.h"
#include "hqe/numerics.hpp"
#include "hqe/subsolution.hpp"
#include "support.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <chrono>
#include <cmath>

using namespace hqe;

namespace {

// Direct evaluation of int_R^inf tau (psi - 1) dtau on the original variable.
double mu_oracle(double R, const ProfileSpec& spec) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double t) {
    const double tau = R + t;
    return tau * solve_implicit_excess(spec, tau);
  };
  return integrator.integrate(f, 1e-14);
}

SymMatrix cstar(std::size_t n, int k, int l) {
  return SymMatrix::identity(n, c_star(static_cast<int>(n), k, l));
}

}  // namespace

TEST_CASE("mu against a direct oracle") {
  Rng rng(41);
  for (int t = 0; t < 15; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(3, 5));
    const int k = static_cast<int>(rng.integer(1, static_cast<long>(n)));
    const int l = static_cast<int>(rng.integer(0, k - 1));
    auto a = testing::random_positive(rng, n, 0.5, 2.0);
    const auto spec = ProfileSpec::from_spectrum(k, l, a, rng.uniform(1.1, 4.0));
    if (!(spec.m > 2.2)) continue;
    for (double R : {1.0, 1.5, 10.0}) {
      const double fast = mu(R, spec);
      CHECK(fast == doctest::Approx(mu_oracle(R, spec)).epsilon(1e-9));
    }
  }
}

TEST_CASE("mu basics") {
  const auto spec = ProfileSpec::from_spectrum(2, 0, std::vector<double>(3, c_star(3, 2, 0)), 2.0);
  CHECK(mu(2.0, 1.0, spec) == 0.0);
  double prev = 0.0;
  for (double beta : {1.0, 1.01, 1.5, 2.0, 4.0, 10.0}) {
    const double v = mu(1.5, beta, spec);
    CHECK(v >= prev);
    if (beta > 1.0) CHECK(v > prev);
    CHECK(v >= (beta - 1.0) * std::pow(1.5, 2.0 - spec.m) / (spec.m - 2.0) * (1 - 1e-12));
    prev = v;
  }
  const auto flat = ProfileSpec::from_spectrum(1, 0, std::vector<double>{1.0, 1.0}, 2.0);
  CHECK_THROWS_AS(mu(1.0, flat), Error);
}

TEST_CASE("mu decays like R^(2-m)") {
  for (const auto& spec : {ProfileSpec::from_spectrum(2, 0, std::vector<double>(3, c_star(3, 2, 0)), 3.0),
                           ProfileSpec::from_spectrum(3, 1, std::vector<double>{1.0, 2.0, 3.0}, 2.0)}) {
    std::vector<double> R, y;
    for (int i = 0; i <= 20; ++i) {
      R.push_back(std::pow(10.0, 2.0 + 0.1 * i));
      y.push_back(mu(R.back(), spec));
    }
    CHECK(std::abs(fit_loglog(R, y).slope + (spec.m - 2.0)) <= 0.01 * (spec.m - 2.0));
  }
}

TEST_CASE("Phi values") {
  const Subsolution sub(cstar(3, 2, 0), 2, 0, 0.5, 2.0, 1.5);
  const std::vector<double> on_sphere{sub.gamma() / std::sqrt(sub.spectrum()[0]), 0.0, 0.0};
  CHECK(phi_eval(sub, on_sphere) == doctest::Approx(0.5).epsilon(1e-12));
  const std::vector<double> inside{0.1, 0.0, 0.0};
  CHECK_THROWS_AS(phi_eval(sub, inside), Error);

  const Subsolution flat(cstar(3, 2, 0), 2, 0, 0.5, 1.0, 1.5);
  const std::vector<double> x{3.0, -1.0, 2.0};
  const double r = flat.r_A(x);
  CHECK(phi_eval(flat, x) == doctest::Approx(0.5 + 0.5 * (r * r - 1.5 * 1.5)).epsilon(1e-14));

  // Phi = alpha + int_gamma^r tau psi dtau by direct quadrature.
  const double direct = 0.5 + gauss_legendre([&](double t) { return t * sub.profile().value(t); }, 1.5, r, 64);
  CHECK(phi_eval(sub, x) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("Phi is increasing in r and in beta") {
  const auto A = cstar(3, 3, 1);
  const Subsolution lo(A, 3, 1, 0.0, 1.5, 1.2);
  const Subsolution hi(A, 3, 1, 0.0, 2.5, 1.2);
  double prev = -1e300;
  for (double r : {1.3, 2.0, 5.0, 30.0, 400.0}) {
    CHECK(lo.radial_value(r) > prev);
    prev = lo.radial_value(r);
    CHECK(hi.radial_value(r) > lo.radial_value(r));
  }
}

TEST_CASE("Phi approaches its quadratic asymptote like r^(2-m)") {
  const Subsolution sub(cstar(3, 2, 0), 2, 0, 0.0, 2.0, 1.0);
  std::vector<double> rs, gaps;
  for (double r : {1e2, 3e2, 1e3, 3e3}) {
    rs.push_back(r);
    gaps.push_back(0.5 * r * r + sub.offset() - sub.radial_value(r));
  }
  CHECK(std::abs(fit_loglog(rs, gaps).slope + 1.0) < 0.02);
}

TEST_CASE("Hessian: finite differences and the rank-one spectrum") {
  Rng rng(43);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(3, 5));
    const int k = static_cast<int>(rng.integer(2, static_cast<long>(n)));
    const int l = static_cast<int>(rng.integer(0, k - 2));
    const Subsolution sub(testing::random_admissible(rng, n, k, l), k, l, 0.0, rng.uniform(1.2, 3.0), 1.0);
    const auto samples = subsolution_samples(sub, 20, 7, 4.0);
    for (const auto& x : samples) {
      const SymMatrix h = phi_hessian(sub, x);
      const double step = 1e-4 * sub.r_A(x);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
          auto shifted = [&](double di, double dj) {
            auto y = x;
            y[i] += di;
            y[j] += dj;
            return phi_eval(sub, y);
          };
          const double fd = (shifted(step, step) - shifted(step, -step) - shifted(-step, step) +
                             shifted(-step, -step)) /
                            (4 * step * step);
          CHECK(std::abs(fd - h(i, j)) <= 1e-5 * std::max(1.0, h.max_abs()));
        }
      }
      const auto eig = eigh(h);
      const auto fast = sub.hessian_sigmas(x);
      for (int j = 1; j <= static_cast<int>(n); ++j) {
        CHECK(testing::rel_diff(sigma(j, eig.values), fast[j]) <= 1e-10);
      }
    }
  }
}

TEST_CASE("verify_subsolution on random admissible matrices") {
  Rng rng(44);
  const auto t0 = std::chrono::steady_clock::now();
  for (int t = 0; t < 4; ++t) {
    const Subsolution sub(testing::random_admissible(rng, 3, 2, 1), 2, 1, 0.0, rng.uniform(1.2, 5.0), 1.0);
    const auto samples = subsolution_samples(sub, 2000, 100 + t);
    const auto report = verify_subsolution(sub, samples);
    CHECK(report.passed());
    CHECK(report.samples == 2000);
    CHECK(report.worst.at("quotient") >= -1e-12);
  }
  MESSAGE("verify time "
          << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s");
}

TEST_CASE("beta = 1 gives equality") {
  const Subsolution sub(cstar(4, 3, 1), 3, 1, 0.0, 1.0, 1.0);
  const auto samples = subsolution_samples(sub, 200, 3);
  for (const auto& x : samples) {
    const auto s = sub.hessian_sigmas(x);
    CHECK(s[3] == doctest::Approx(s[1]).epsilon(1e-13));
  }
  CHECK(verify_subsolution(sub, samples, 1).passed());
}

TEST_CASE("rejects matrices outside the admissible class") {
  const std::vector<double> d{1, 2, 3};
  CHECK_THROWS_AS(Subsolution(SymMatrix::diagonal(d), 2, 1, 0.0, 2.0, 1.0), Error);
}

TEST_CASE("report merging is independent of thread count") {
  const Subsolution sub(cstar(3, 2, 0), 2, 0, 0.0, 2.0, 1.0);
  const auto samples = subsolution_samples(sub, 500, 9);
  const auto one = verify_subsolution(sub, samples, 1).to_json();
  const auto four = verify_subsolution(sub, samples, 4).to_json();
  CHECK(one.dump() == four.dump());
}

TEST_CASE("mu timing") {
  const auto spec = ProfileSpec::from_spectrum(3, 1, std::vector<double>(3, c_star(3, 3, 1)), 2.0);
  const auto t0 = std::chrono::steady_clock::now();
  double acc = 0.0;
  for (int i = 0; i < 1000; ++i) acc += mu(1.0 + i, spec);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("1000 mu evaluations: " << dt << " s");
  CHECK(acc > 0.0);
}
