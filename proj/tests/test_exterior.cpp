#include "doctest.h"
#include "hqe/admissibility.hpp"
#include "hqe/error.hpp"
#include "hqe/exterior.hpp"
#include "support.hpp"

#include <cmath>

using namespace hqe;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

ExteriorProblem ball_problem(std::size_t n, int k, int l, double r_A_of_ball, double c) {
  ExteriorProblem p;
  const double cs = c_star(static_cast<int>(n), k, l);
  p.A = SymMatrix::identity(n, cs);
  p.b.assign(n, 0.0);
  p.c = c;
  p.k = k;
  p.l = l;
  p.domain = ConvexDomain::ball(std::vector<double>(n, 0.0), r_A_of_ball / std::sqrt(cs));
  p.phi = BoundaryData::constant(n, 0.0);
  return p;
}

SandwichCheckOptions quick_checks() {
  SandwichCheckOptions o;
  o.samples = 1500;
  o.subsolution_samples = 300;
  o.shell_samples = 200;
  return o;
}

double c_tilde_of(const ExteriorProblem& p, std::size_t mesh = 200) {
  ExteriorProblem big = p;
  big.c = 1e6;
  return Sandwich(reduce_to_diagonal(big, mesh), {.mesh_size = mesh}).constants().c_tilde;
}

}  // namespace

TEST_CASE("problem json: defaults, symmetrization, errors") {
  const auto j = nlohmann::json::parse(R"({
    "k": 2, "l": 0, "c": 3.5,
    "A": [[1.0, 0.2], [0.0, 1.0]],
    "domain": {"type": "ball", "center": [0, 0], "radius": 2}
  })");
  const ExteriorProblem p = ExteriorProblem::from_json(j);
  CHECK(p.dim() == 2);
  CHECK(p.A(0, 1) == doctest::Approx(0.1));
  CHECK(p.warnings.size() == 1);
  CHECK(p.phi.value(std::vector<double>{0.3, 0.4}) == 0.0);
  const ExteriorProblem q = ExteriorProblem::from_json(p.to_json());
  CHECK(q.c == 3.5);
  CHECK(q.A(0, 1) == p.A(0, 1));

  for (const char* bad : {R"({"k": 2, "l": 0, "A": [[1,0],[0,1]], "domain": {"type": "ball", "center": [0,0], "radius": 2}})",
                          R"({"k": 2, "l": 0, "c": 1, "A": [[1,0],[0]], "domain": {"type": "ball", "center": [0,0], "radius": 2}})",
                          R"({"k": 1, "l": 1, "c": 1, "A": [[1,0],[0,1]], "domain": {"type": "ball", "center": [0,0], "radius": 2}})"}) {
    try {
      (void)ExteriorProblem::from_json(nlohmann::json::parse(bad));
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK((e.code() == ErrorCode::ParseError || e.code() == ErrorCode::InvalidArgument));
    }
  }
}

TEST_CASE("reduction: frame, shift, scale and pull back") {
  Rng rng(11);
  const std::size_t n = 3;
  ExteriorProblem p;
  p.A = testing::random_admissible(rng, n, 3, 1);
  p.k = 3;
  p.l = 1;
  p.b = {0.3, -0.2, 0.5};
  p.c = 2.0;
  p.domain = ConvexDomain::ellipsoid({3.0, -1.0, 0.5}, testing::random_orthogonal(rng, n), {0.8, 0.6, 0.5});
  p.phi = BoundaryData::from_polynomial(Polynomial(n, {{1.0, {1, 0, 0}}, {0.5, {0, 2, 1}}}));
  const Reduction r = reduce_to_diagonal(p, 200);

  const auto eig = eigh(p.A);
  const auto d = r.reduced.A.diagonal_entries();
  for (std::size_t i = 0; i < n; ++i) CHECK(d[i] == doctest::Approx(eig.values[i]).epsilon(1e-12));
  CHECK(r.reduced.A.is_diagonal());
  CHECK(r.shift == p.domain.center());
  CHECK(r.scale < 1.0);

  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(-4.0, 4.0);
    const auto y = r.to_reduced(x);
    const auto back = r.from_reduced(y);
    for (std::size_t i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
    CHECK(r.reduced.domain.gauge(y) == doctest::Approx(p.domain.gauge(x)).epsilon(1e-12));
    const double quad = 0.5 * p.A.quadratic_form(x) + dot(p.b, x) + p.c;
    const double reduced_quad = 0.5 * r.reduced.A.quadratic_form(y) + r.reduced.c;
    CHECK(r.pull_back(reduced_quad, x) == doctest::Approx(quad).epsilon(1e-12));
    CHECK(r.pull_back(r.reduced.phi.value(y), x) == doctest::Approx(p.phi.value(x)).epsilon(1e-12));
  }
  double r_in = 1e300;
  for (const auto& b : r.reduced.domain.mesh(400)) r_in = std::min(r_in, std::sqrt(r.reduced.A.quadratic_form(b.x)));
  CHECK(r_in > 1.05);

  ExteriorProblem diag = ball_problem(3, 2, 0, 3.0, 0.0);
  const Reduction rd = reduce_to_diagonal(diag);
  CHECK(rd.scale == 1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(rd.V(i, j) == (i == j ? 1.0 : 0.0));
  }
}

TEST_CASE("sandwich on balls with zero data") {
  for (auto [k, l] : {std::pair{2, 0}, std::pair{3, 0}, std::pair{3, 1}}) {
    CAPTURE(k);
    CAPTURE(l);
    ExteriorProblem p = ball_problem(3, k, l, 2.0, 0.0);
    p.c = c_tilde_of(p) + 1.0;
    const Sandwich s(reduce_to_diagonal(p, 200), {.mesh_size = 200});
    CHECK(s.beta_c() >= s.constants().beta_hat);
    const VerificationReport rep = verify_sandwich(s, quick_checks());
    CHECK_MESSAGE(rep.passed(), rep.to_json().dump());
    CHECK(rep.samples > 1500);
  }
}

TEST_CASE("c below c_tilde is rejected") {
  ExteriorProblem p = ball_problem(3, 2, 0, 2.0, 0.0);
  p.c = c_tilde_of(p) - 1.0;
  try {
    const Sandwich s(reduce_to_diagonal(p, 200), {.mesh_size = 200});
    FAIL("expected CTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CTooSmall);
  }
}

TEST_CASE("comparison check") {
  ExteriorProblem p = ball_problem(3, 2, 0, 2.0, 0.0);
  p.c = c_tilde_of(p) + 0.5;
  const Sandwich s(reduce_to_diagonal(p, 200), {.mesh_size = 200});
  std::vector<std::vector<double>> boundary;
  for (const auto& b : s.envelope().mesh()) boundary.push_back(b.x);
  const auto interior = exterior_samples(s, 500, 3);
  auto lo = [&](std::span<const double> y) { return s.lower(y); };
  auto up = [&](std::span<const double> y) { return s.upper(y); };

  const ComparisonResult ok = comparison_check(lo, up, boundary, interior);
  CHECK(ok.holds);
  CHECK(ok.checked == 500);
  CHECK(ok.worst >= 0.0);

  const auto& D = s.reduction().reduced.domain;
  auto dented = [&](std::span<const double> y) { return s.lower(y) - 1e-3 * (D.gauge(y) - 1.0); };
  const ComparisonResult bad = comparison_check(lo, dented, boundary, interior);
  CHECK_FALSE(bad.holds);
  CHECK(bad.witness.size() == 3);
  CHECK(bad.worst < 0.0);

  try {
    (void)comparison_check(up, lo, boundary, interior);
    FAIL("expected HypothesisViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HypothesisViolated);
  }
}

TEST_CASE("decay rate and the limsup constant") {
  ExteriorProblem p = ball_problem(3, 2, 0, 2.0, 0.0);
  const double ct = c_tilde_of(p);
  p.c = ct + 1.0;
  const Sandwich s1(reduce_to_diagonal(p, 200), {.mesh_size = 200});
  const DecayReport d1 = decay_report(s1, 300);
  CHECK(d1.m == doctest::Approx(3.0));
  CHECK(d1.slope_ok);
  CHECK(d1.limsup_estimate == doctest::Approx(d1.predicted_constant).epsilon(0.02));
  CHECK(d1.to_csv().rfind("r,w,", 0) == 0);

  p.c = ct + 5.0;
  const Sandwich s2(reduce_to_diagonal(p, 200), {.mesh_size = 200});
  const DecayReport d2 = decay_report(s2, 300);
  CHECK(s2.beta_c() > s1.beta_c());
  CHECK(d2.predicted_constant > d1.predicted_constant);
  CHECK(d2.limsup_estimate > d1.limsup_estimate);
}

TEST_CASE("sandwich is invariant under rotations and linear shifts") {
  Rng rng(5);
  const std::size_t n = 3;
  const int k = 3, l = 1;
  const std::vector<double> a = [&] {
    const SymMatrix m = testing::random_admissible(rng, n, k, l);
    return eigh(m).values.entries();
  }();
  const DenseMatrix R0 = testing::random_orthogonal(rng, n);
  const DenseMatrix Q = testing::random_orthogonal(rng, n);

  ExteriorProblem p0;
  p0.A = SymMatrix::diagonal(a);
  p0.k = k;
  p0.l = l;
  p0.b.assign(n, 0.0);
  p0.domain = ConvexDomain::ellipsoid({0.1, 0.0, -0.1}, R0, {2.5, 2.2, 2.0});
  p0.phi = BoundaryData::constant(n, 0.3);
  p0.c = c_tilde_of(p0) + 1.0;

  ExteriorProblem p1 = p0;
  p1.A = conjugate_by(Q, p0.A);
  p1.domain = ConvexDomain::ellipsoid(Q.apply_transpose(std::vector<double>{0.1, 0.0, -0.1}), R0 * Q, {2.5, 2.2, 2.0});

  const Sandwich s0(reduce_to_diagonal(p0, 200), {.mesh_size = 200});
  const Sandwich s1(reduce_to_diagonal(p1, 200), {.mesh_size = 200});
  const auto& c0 = s0.constants();
  const auto& c1 = s1.constants();
  CHECK(c1.eta == doctest::Approx(c0.eta).epsilon(1e-10));
  CHECK(c1.c_bar == doctest::Approx(c0.c_bar).epsilon(1e-10));
  CHECK(c1.c_tilde == doctest::Approx(c0.c_tilde).epsilon(1e-10));
  CHECK(s1.beta_c() == doctest::Approx(s0.beta_c()).epsilon(1e-10));

  ExteriorProblem p2 = p0;
  p2.b = {0.7, -0.4, 1.1};
  p2.phi = BoundaryData::from_polynomial(Polynomial(n, {{0.3, {0, 0, 0}}, {0.7, {1, 0, 0}}, {-0.4, {0, 1, 0}}, {1.1, {0, 0, 1}}}));
  const Sandwich s2(reduce_to_diagonal(p2, 200), {.mesh_size = 200});
  CHECK(s2.beta_c() == doctest::Approx(s0.beta_c()).epsilon(1e-12));

  const auto pts = exterior_samples(s0, 200, 9);
  for (const auto& y : pts) {
    const auto x0 = s0.reduction().from_reduced(y);
    const auto x1 = Q.apply_transpose(x0);
    CHECK(s1.deviation(x1) == doctest::Approx(s0.deviation(x0)).epsilon(1e-8).scale(1.0));
    CHECK(s2.lower_original(x0) == doctest::Approx(s0.lower_original(x0) + dot(p2.b, x0)).epsilon(1e-12));
    CHECK(s2.deviation(x0) == doctest::Approx(s0.deviation(x0)).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("exact ellipsoid solutions") {
  Rng rng(17);
  for (auto [k, l] : {std::pair{2, 0}, std::pair{3, 1}, std::pair{4, 2}}) {
    CAPTURE(k);
    CAPTURE(l);
    const std::size_t n = 4;
    const SymMatrix A = SymMatrix::identity(n, c_star(static_cast<int>(n), k, l));
    const Subsolution probe(A, k, l, 0.0, 2.0, 1.5);
    const auto pts = subsolution_samples(probe, 300, 4, 1e3);
    const VerificationReport rep = verify_exact_ellipsoid_solution(A, k, l, 1.5, -0.7, 2.0, pts);
    CHECK_MESSAGE(rep.passed(), rep.to_json().dump());
    CHECK(rep.parameters["balanced"].get<bool>());
  }
  {
    const SymMatrix A = testing::random_admissible(rng, 3, 3, 1);
    const Subsolution probe(A, 3, 1, 0.0, 3.0, 1.0);
    const auto pts = subsolution_samples(probe, 300, 4, 1e3);
    const VerificationReport rep = verify_exact_ellipsoid_solution(A, 3, 1, 1.0, 0.0, 3.0, pts);
    CHECK_MESSAGE(rep.passed(), rep.to_json().dump());
    CHECK_FALSE(rep.parameters["balanced"].get<bool>());
  }
}
