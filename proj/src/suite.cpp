#include "hqe/suite.hpp"

#include "hqe/admissibility.hpp"
#include "hqe/error.hpp"
#include "hqe/exterior.hpp"
#include "hqe/numerics.hpp"
#include "hqe/profile.hpp"
#include "hqe/rational.hpp"
#include "hqe/subsolution.hpp"
#include "hqe/symfunc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace hqe {

namespace {

using Battery = std::function<VerificationReport(const SuiteOptions&)>;

std::size_t or_default(std::size_t v, std::size_t d) { return v == 0 ? d : v; }

std::size_t pick_n(Rng& rng, const SuiteOptions& o, std::size_t lo, std::size_t hi) {
  if (o.n != 0) return o.n;
  return static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
}

Rational fraction(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational random_q(Rng& rng, long lo, long hi) {
  Rational q(rng.integer(lo, hi), rng.integer(1, 9));
  q.canonicalize();
  return q;
}

std::vector<Rational> random_q_vector(Rng& rng, std::size_t n, long lo, long hi) {
  std::vector<Rational> v(n);
  for (auto& x : v) x = random_q(rng, lo, hi);
  return v;
}

std::vector<double> as_doubles(const std::vector<Rational>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
  return out;
}

DenseMatrix random_rotation(Rng& rng, std::size_t n) {
  std::vector<std::vector<double>> rows;
  while (rows.size() < n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    for (const auto& r : rows) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += v[i] * r[i];
      for (std::size_t i = 0; i < n; ++i) v[i] -= d * r[i];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-8) continue;
    for (auto& x : v) x /= norm;
    rows.push_back(std::move(v));
  }
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return DenseMatrix(n, flat);
}

/// Spectrum in A~_{k,l}: random log-spread around 1, normalized; the spread
/// shrinks towards the always-admissible c_* (1,...,1) after repeated misses.
std::vector<double> random_admissible_spectrum(Rng& rng, std::size_t n, int k, int l) {
  double spread = 1.4;
  for (int attempt = 1;; ++attempt) {
    std::vector<double> a(n);
    for (auto& x : a) x = std::exp(rng.uniform(-0.5 * spread, 0.5 * spread));
    const double rho = normalizing_factor(k, l, a);
    for (auto& x : a) x *= rho;
    if (m_exponent(k, l, a) > 2.0) return a;
    if (attempt % 20 == 0) spread *= 0.5;
  }
}

std::string kl_tag(const std::string& what, int j) { return what + "_" + std::to_string(j); }

// ------------------------------------------------------------ identities

VerificationReport identities_impl(const SuiteOptions& o) {
  VerificationReport rep;
  rep.name = "identities";
  const std::size_t trials = or_default(o.trials, 10000);
  Rng rng(o.seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const bool fault = o.inject_fault && t == 0;
    const std::size_t n = o.n != 0 ? o.n : 3 + t % 6;
    const auto p = random_q_vector(rng, n, -9, 9);
    const auto pd = as_doubles(p);
    const int ni = static_cast<int>(n);
    SymmetricTable<Rational> table{std::span<const Rational>(p)};
    std::vector<std::vector<Rational>> omit(n);
    for (std::size_t i = 0; i < n; ++i) omit[i] = table.omit_coefficients(i);
    auto omit_sigma = [&](int k, std::size_t i) {
      return k < 0 || k >= ni ? Rational(0) : omit[i][static_cast<std::size_t>(k)];
    };
    for (int k = 0; k <= ni; ++k) {
      Rational sk = table.sigma(k);
      if (fault && k == 1) sk += Rational(1, 1000);
      Rational weighted(0);
      for (std::size_t i = 0; i < n; ++i) {
        const Rational diff = sk - omit_sigma(k, i) - p[i] * omit_sigma(k - 1, i);
        rep.observe("sk", -std::abs(to_double(diff)));
        if (diff != 0) rep.add_violation({t, "sigma_k = sigma_k;i + p_i sigma_k-1;i", to_double(diff), pd});
        weighted += p[i] * omit_sigma(k - 1, i);
      }
      const Rational diff = weighted - Rational(k) * sk;
      rep.observe("ksk", -std::abs(to_double(diff)));
      if (diff != 0) rep.add_violation({t, "sum p_i sigma_k-1;i = k sigma_k", to_double(diff), pd});
    }
    for (int j = 1; j < ni; ++j) {
      const Rational gap = table.sigma(j) * table.sigma(j) - table.sigma(j - 1) * table.sigma(j + 1);
      rep.observe("newton", to_double(gap));
      if (gap < 0) rep.add_violation({t, kl_tag("newton", j), to_double(gap), pd});
    }
    for (int k = 1; k < ni; ++k) {
      const bool nested = !in_gamma_k(k + 1, p) || in_gamma_k(k, p);
      rep.observe("cone_nesting", nested ? 0.0 : -1.0);
      if (!nested) rep.add_violation({t, kl_tag("Gamma_k+1 in Gamma_k", k), 0.0, pd});
    }

    // Ellipticity on a vector drawn inside Gamma_k.
    const int k = static_cast<int>(rng.integer(1, ni));
    const int l = static_cast<int>(rng.integer(0, k - 1));
    std::vector<Rational> lam;
    do {
      lam = random_q_vector(rng, n, -3, 9);
    } while (!in_gamma_k(k, lam));
    const Rational sl = sigma(l, lam);
    for (std::size_t i = 0; i < n; ++i) {
      const Rational g = quotient_ellipticity_gap(k, l, i, lam);
      rep.observe("ellipticity_gap", to_double(g));
      if (g < 0) rep.add_violation({t, "ellipticity gap >= 0", to_double(g), as_doubles(lam)});
      if (sl > 0 && !(g > 0)) rep.add_violation({t, "ellipticity gap > 0 when sigma_l > 0", to_double(g), as_doubles(lam)});
    }
    ++rep.samples;
  }
  rep.parameters = {{"trials", trials}, {"seed", o.seed}, {"arithmetic", "exact rational"}};
  return rep;
}

// ------------------------------------------------------------ rank one

VerificationReport rank_one_impl(const SuiteOptions& o) {
  VerificationReport rep;
  rep.name = "skm";
  const std::size_t trials = or_default(o.trials, 1000);
  Rng rng(o.seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = pick_n(rng, o, 1, 6);
    std::vector<double> p(n), q(n);
    for (auto& x : p) x = rng.uniform(-3, 3);
    for (auto& x : q) x = rng.uniform(-2, 2);
    const double s = rng.uniform(-1, 1);
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) m.set(i, j, (i == j ? p[i] : 0.0) + s * q[i] * q[j]);
    }
    const auto eig = eigh(m);
    std::vector<double> mags(n);
    for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(eig.values[i]);
    std::vector<double> witness = p;
    witness.insert(witness.end(), q.begin(), q.end());
    witness.push_back(s);
    for (int k = 1; k <= static_cast<int>(n); ++k) {
      double fast = sigma_rank_one(k, p, q, s);
      if (o.inject_fault && t == 0 && k == 1) fast *= 1.0 + 1e-6;
      const double direct = sigma(k, eig.values);
      const double rel = std::abs(direct - fast) / std::max(1.0, sigma(k, mags));
      rep.observe("rank_one", -rel);
      if (!(rel <= 1e-10)) rep.add_violation({t, kl_tag("sigma_rank_one vs eigenvalues, k", k), rel, witness});
    }
    ++rep.samples;
  }
  rep.parameters = {{"trials", trials}, {"seed", o.seed}, {"tolerance", 1e-10}};
  return rep;
}

// ------------------------------------------------------------ xi

VerificationReport xi_impl(const SuiteOptions& o) {
  VerificationReport rep;
  rep.name = "xik";
  const std::size_t trials = or_default(o.trials, 1000);
  Rng rng(o.seed);
  auto flag = [&](std::size_t t, bool ok, const std::string& check, double value, const std::vector<double>& w) {
    rep.observe(check, ok ? 0.0 : -1.0);
    if (!ok) rep.add_violation({t, check, value, w});
  };
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = pick_n(rng, o, 2, 8);
    const int ni = static_cast<int>(n);
    const auto a = random_q_vector(rng, n, 1, 9);
    const auto ad = as_doubles(a);
    const Rational scale = random_q(rng, 1, 9);
    std::vector<Rational> scaled(a);
    for (auto& x : scaled) x *= scale;
    std::vector<Rational> up(n + 1), lo(n + 1);
    for (int k = 0; k <= ni; ++k) {
      const auto b = xi_bounds(k, a);
      up[k] = b.upper;
      lo[k] = b.lower;
      if (o.inject_fault && t == 0 && k == 1) up[k] *= Rational(999, 1000);
    }
    for (int k = 1; k <= ni; ++k) {
      Rational ax_max(-1), ax_min(2);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<Rational> e(n, Rational(0));
        e[i] = 1;
        const Rational v = xi_at(k, a, e);
        ax_max = std::max(ax_max, v);
        ax_min = std::min(ax_min, v);
      }
      flag(t, ax_max == up[k] && ax_min == lo[k], "attained_on_axes", to_double(ax_max - up[k]), ad);
      for (int s = 0; s < 4; ++s) {
        std::vector<Rational> x = random_q_vector(rng, n, -9, 9);
        x[static_cast<std::size_t>(rng.integer(0, ni - 1))] += 10;
        const Rational v = xi_at(k, a, x);
        flag(t, lo[k] <= v && v <= up[k], "bracketing", to_double(v), ad);
      }
      const auto sb = xi_bounds(k, scaled);
      flag(t, sb.upper == up[k] && sb.lower == lo[k], "scale_invariance", to_double(sb.upper - up[k]), ad);
      if (k < ni) {
        flag(t, up[k] <= up[k + 1] && lo[k] <= lo[k + 1], "monotone_chains", to_double(up[k + 1] - up[k]), ad);
        const Rational kn = fraction(k, ni);
        const bool pinched = lo[k] == kn && up[k] == kn;
        const bool uniform = std::all_of(a.begin(), a.end(), [&](const Rational& v) { return v == a[0]; });
        flag(t, pinched == uniform, "pinch_iff_uniform", pinched ? 1.0 : 0.0, ad);
      }
    }
    flag(t, up[ni - 1] < 1 || ni == 1, "upper_below_one", to_double(up[ni - 1]), ad);
    for (int k = 1; k <= ni; ++k) {
      for (int l = 0; l < k; ++l) {
        const Rational m = m_exponent(k, l, a);
        const Rational mx = m * up[k];
        const bool lower_ok = l == 0 ? Rational(k - l) <= mx : Rational(k - l) < mx;
        flag(t, lower_ok && mx <= m && m <= Rational(ni), "m_range", to_double(m), ad);
        if (k - l == 1) {
          flag(t, (m > 2) == (up[k] < lo[l] + Rational(1, 2)), "m_k_k-1_criterion", to_double(m), ad);
        }
      }
    }
    ++rep.samples;
  }
  // The uniform direction of the pinch characterization.
  for (std::size_t n = 2; n <= 8; ++n) {
    const std::vector<Rational> a(n, Rational(7, 3));
    for (int k = 1; k < static_cast<int>(n); ++k) {
      const auto b = xi_bounds(k, a);
      const Rational kn = fraction(k, static_cast<long>(n));
      flag(trials + n, b.lower == kn && b.upper == kn, "pinch_iff_uniform", to_double(b.upper), as_doubles(a));
    }
  }
  rep.parameters = {{"trials", trials}, {"seed", o.seed}, {"arithmetic", "exact rational"}};
  return rep;
}

// ------------------------------------------------------------ psi

ProfileSpec random_spec(Rng& rng, const SuiteOptions& o, std::size_t t) {
  const bool unit_order = t % 3 == 2;
  for (;;) {
    const std::size_t n = pick_n(rng, o, unit_order ? 3 : 2, 6);
    const int k = static_cast<int>(rng.integer(1, static_cast<std::int64_t>(n)));
    const int l = unit_order ? k - 1 : static_cast<int>(rng.integer(0, k - 1));
    const double beta = rng.uniform(1.05, 6.0);
    if (unit_order) {
      if (k == 1 && n < 3) continue;
      const auto a = random_admissible_spectrum(rng, n, k, l);
      return ProfileSpec::from_spectrum(k, l, a, beta);
    }
    std::vector<double> a(n);
    for (auto& x : a) x = rng.uniform(0.2, 5.0);
    return ProfileSpec::from_spectrum(k, l, a, beta);
  }
}

nlohmann::json spec_json(const ProfileSpec& s) {
  return {{"k", s.k}, {"l", s.l}, {"xi_upper", s.xi_upper}, {"xi_lower", s.xi_lower}, {"m", s.m}, {"beta", s.beta}};
}

std::vector<double> spec_point(const ProfileSpec& s, double r) {
  return {static_cast<double>(s.k), static_cast<double>(s.l), s.xi_upper, s.xi_lower, s.beta, r};
}

VerificationReport psi_impl(const SuiteOptions& o) {
  VerificationReport rep;
  rep.name = "psi";
  const std::size_t trials = or_default(o.trials, 50);
  Rng rng(o.seed);
  std::vector<double> radii;
  for (int i = 0; i <= 30; ++i) radii.push_back(std::pow(1e3, i / 30.0));
  std::size_t unit_order = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const ProfileSpec spec = random_spec(rng, o, t);
    if (spec.order() == 1 && spec.m > 2.0) ++unit_order;
    const auto path = solve_ode_excess_path(spec, radii);
    const double bb = b_of_beta(spec);
    const double cst = asymptotic_constant(spec);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double r = radii[i];
      double implicit = solve_implicit(spec, r);
      if (o.inject_fault && t == 0 && i == 1) implicit += 1e-6;
      const double diff = std::abs(1.0 + path[i] - implicit);
      rep.observe("implicit_vs_ode", -diff);
      if (!(diff <= 1e-8)) rep.add_violation({t, "|solve_implicit - solve_ode| <= 1e-8", diff, spec_point(spec, r)});
      const double res = std::abs(implicit_residual(spec, r, implicit)) / std::max(1.0, bb);
      rep.observe("implicit_residual", -res);
      if (!(res <= 1e-12)) rep.add_violation({t, "implicit relation residual", res, spec_point(spec, r)});
      const bool bounded = implicit >= 1.0 && implicit <= spec.beta;
      rep.observe("bounds", bounded ? 0.0 : -1.0);
      if (!bounded) rep.add_violation({t, "1 <= psi <= beta", implicit, spec_point(spec, r)});
      const double scaled = solve_implicit_excess(spec, r) * std::pow(r, spec.m);
      const double lo_gap = scaled - (spec.beta - 1.0);
      const double hi_gap = cst - scaled;
      rep.observe("excess_lower_bound", lo_gap / (spec.beta - 1.0));
      rep.observe("excess_upper_bound", hi_gap / cst);
      if (!(lo_gap >= -1e-12 * (spec.beta - 1.0)) || !(hi_gap >= -1e-12 * cst)) {
        rep.add_violation({t, "beta - 1 <= (psi - 1) r^m <= B / (k - l)", scaled, spec_point(spec, r)});
      }
      if (spec.l == 0) {
        const double closed = std::pow(1.0 + (std::pow(spec.beta, spec.k) - 1.0) * std::pow(r, -spec.m), 1.0 / spec.k);
        const double d = std::abs(implicit - closed);
        rep.observe("l0_closed_form", -d);
        if (!(d <= 1e-12)) rep.add_violation({t, "l = 0 closed form", d, spec_point(spec, r)});
      }
    }
    ++rep.samples;
  }
  rep.parameters = {{"trials", trials}, {"seed", o.seed}, {"unit_order_cases_with_m_gt_2", unit_order},
                    {"radii", "31 log-spaced points on [1, 1e3]"}};
  return rep;
}

VerificationReport decay_impl(const SuiteOptions& o) {
  VerificationReport rep;
  rep.name = "decay";
  const std::size_t trials = or_default(o.trials, 10);
  Rng rng(o.seed);
  nlohmann::json fits = nlohmann::json::array();
  for (std::size_t t = 0; t < trials; ++t) {
    ProfileSpec spec = random_spec(rng, o, t);
    while (!(spec.m > 2.05)) spec = random_spec(rng, o, t);
    std::vector<double> r, psi_excess, mus;
    for (int i = 0; i <= 20; ++i) {
      r.push_back(std::pow(10.0, 2.0 + 0.1 * i));
      double e = solve_implicit_excess(spec, r.back());
      if (o.inject_fault && t == 0) e *= std::pow(r.back(), 0.05);
      psi_excess.push_back(e);
      mus.push_back(mu(r.back(), spec));
    }
    const double s_psi = fit_loglog(r, psi_excess).slope;
    const double s_mu = fit_loglog(r, mus).slope;
    const double e_psi = std::abs(s_psi + spec.m) / spec.m;
    const double e_mu = std::abs(s_mu + (spec.m - 2.0)) / (spec.m - 2.0);
    rep.observe("psi_slope", 0.005 - e_psi);
    rep.observe("mu_slope", 0.01 - e_mu);
    if (!(e_psi <= 0.005)) rep.add_violation({t, "slope of log(psi - 1) = -m within 0.5%", s_psi, spec_point(spec, 0)});
    if (!(e_mu <= 0.01)) rep.add_violation({t, "slope of log mu_R = -(m - 2) within 1%", s_mu, spec_point(spec, 0)});
    fits.push_back({{"spec", spec_json(spec)}, {"psi_slope", s_psi}, {"mu_slope", s_mu}});
    ++rep.samples;
  }
  rep.parameters = {{"trials", trials}, {"seed", o.seed}, {"range", "r in [1e2, 1e4], 21 points"}, {"fits", fits}};
  return rep;
}

// ------------------------------------------------------------ subsolution

VerificationReport subsolution_impl(const SuiteOptions& o) {
  VerificationReport rep;
  rep.name = "Phi-subsol";
  const std::size_t trials = or_default(o.trials, 20);
  const std::size_t samples = or_default(o.samples, 10000);
  std::vector<std::size_t> dims = o.n != 0 ? std::vector<std::size_t>{o.n} : std::vector<std::size_t>{3, 4, 5};
  Rng rng(o.seed);
  nlohmann::json combos = nlohmann::json::array();
  std::size_t instance = 0;
  for (std::size_t n : dims) {
    for (int k = 1; k <= static_cast<int>(n); ++k) {
      for (int l = 0; l < k; ++l) {
        VerificationReport combo;
        for (std::size_t t = 0; t < trials; ++t, ++instance) {
          const auto a = random_admissible_spectrum(rng, n, k, l);
          const SymMatrix A = conjugate_by(random_rotation(rng, n), SymMatrix::diagonal(a));
          const Subsolution sub(A, k, l, rng.uniform(-1.0, 1.0), rng.uniform(1.1, 5.0), rng.uniform(1.0, 2.0));
          const auto pts = subsolution_samples(sub, samples, o.seed * 1000003 + instance);
          VerificationReport r = verify_subsolution(sub, pts, o.threads);
          if (o.inject_fault && instance == 0) {
            // Shrinking the Hessian by 0.999 breaks sigma_k >= sigma_l where
            // the subsolution is nearly an equality.
            for (std::size_t i = 0; i < pts.size(); ++i) {
              const auto s = sub.hessian_sigmas(pts[i]);
              const double q = s[k] * std::pow(0.999, k) - s[l] * std::pow(0.999, l);
              if (!(q >= -1e-12 * std::max(s[k], 1.0))) r.add_violation({i, "sigma_k - sigma_l >= 0 (perturbed)", q, pts[i]});
            }
          }
          for (auto& v : r.violations) v.index += instance * samples;
          combo.merge(r);
        }
        combos.push_back({{"n", n}, {"k", k}, {"l", l}, {"matrices", trials}, {"violations", combo.violation_count},
                          {"worst_quotient", combo.worst.count("quotient") ? combo.worst.at("quotient") : 0.0}});
        rep.merge(combo);
      }
    }
  }
  rep.parameters = {{"matrices_per_combo", trials}, {"samples_per_matrix", samples}, {"seed", o.seed},
                    {"combos", combos}};
  return rep;
}

// ------------------------------------------------------------ sandwich

VerificationReport sandwich_impl(const SuiteOptions& o) {
  const std::size_t n = o.n != 0 ? o.n : 3;
  ExteriorProblem p;
  const double cs = c_star(static_cast<int>(n), 2, 0);
  p.A = SymMatrix::identity(n, cs);
  p.b.assign(n, 0.0);
  p.k = 2;
  p.l = 0;
  p.domain = ConvexDomain::ball(std::vector<double>(n, 0.0), 2.0 / std::sqrt(cs));
  p.phi = BoundaryData::constant(n, 0.0);
  p.c = 1e6;
  const SandwichOptions so{.mesh_size = 200, .touching = {}, .threads = o.threads};
  p.c = Sandwich(reduce_to_diagonal(p, 200), so).constants().c_tilde + 1.0;
  const Sandwich s(reduce_to_diagonal(p, 200), so);
  SandwichCheckOptions co;
  co.samples = or_default(o.samples, 2000);
  co.subsolution_samples = co.samples / 4;
  co.shell_samples = 200;
  co.seed = o.seed;
  co.threads = o.threads;
  VerificationReport rep = verify_sandwich(s, co);
  if (o.inject_fault) {
    const auto pts = exterior_samples(s, 1, o.seed);
    const double g = s.gap(pts[0]) - 1.0;
    if (!(g >= 0.0)) rep.add_violation({0, "u_lower <= u_upper (perturbed)", g, pts[0]});
  }
  rep.name = "sandwich";
  return rep;
}

const std::map<std::string, Battery>& registry() {
  static const std::map<std::string, Battery> r{
      {"identities", identities_impl}, {"skm", rank_one_impl},        {"xik", xi_impl},
      {"psi", psi_impl},               {"decay", decay_impl},         {"Phi-subsol", subsolution_impl},
      {"sandwich", sandwich_impl}};
  return r;
}

}  // namespace

const std::vector<std::string>& battery_names() {
  static const std::vector<std::string> names{"identities", "skm", "xik", "psi", "decay", "Phi-subsol", "sandwich"};
  return names;
}

VerificationReport run_battery(const std::string& name, const SuiteOptions& opts) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end()) {
    std::string known;
    for (const auto& n : battery_names()) known += (known.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::InvalidArgument, "unknown battery '" + name + "' (known: " + known + ")");
  }
  return it->second(opts);
}

VerificationReport battery_identities(const SuiteOptions& opts) { return identities_impl(opts); }
VerificationReport battery_rank_one(const SuiteOptions& opts) { return rank_one_impl(opts); }
VerificationReport battery_xi(const SuiteOptions& opts) { return xi_impl(opts); }
VerificationReport battery_psi(const SuiteOptions& opts) { return psi_impl(opts); }
VerificationReport battery_decay(const SuiteOptions& opts) { return decay_impl(opts); }
VerificationReport battery_subsolution(const SuiteOptions& opts) { return subsolution_impl(opts); }
VerificationReport battery_sandwich(const SuiteOptions& opts) { return sandwich_impl(opts); }

}  // namespace hqe
