#include "hqe/subsolution.hpp"

#include "hqe/error.hpp"
#include "hqe/numerics.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <string>

namespace hqe {

namespace {

constexpr double kMuTolerance = 1e-13;

void check_mu_inputs(double R, const ProfileSpec& spec) {
  spec.validate();
  if (!(R >= 1.0) || !std::isfinite(R)) throw Error(ErrorCode::InvalidArgument, "mu needs finite R >= 1");
  if (!(spec.m > 2.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "mu_R diverges unless m > 2 (m = " + std::to_string(spec.m) + ")");
  }
}

}  // namespace

double mu(double R, const ProfileSpec& spec) {
  check_mu_inputs(R, spec);
  if (spec.beta == 1.0) return 0.0;
  const double p = spec.m - 2.0;
  const double log_R = std::log(R);
  const double limit = asymptotic_constant(spec);
  auto scaled = [&](double w) {
    if (!(w > 0.0)) return limit;
    return std::exp(log_scaled_excess(spec, log_R - std::log(w) / p));
  };
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  const double integral = integrator.integrate(scaled, 0.0, 1.0, kMuTolerance, &error, &l1);
  return std::exp(-p * log_R) / p * integral;
}

double mu(double R, double beta, const ProfileSpec& spec) { return mu(R, spec.with_beta(beta)); }

double Ellipsoid::radius_of(std::span<const double> x) const { return std::sqrt(A.quadratic_form(x)); }

SymMatrix Subsolution::admissible(const SymMatrix& A, int k, int l) {
  const AdmissibleMatrix info = classify(A, k, l);
  if (!info.in_Atilde_kl) throw Error(ErrorCode::NotAdmissible, info.rejection_reason());
  return A;
}

Subsolution::Subsolution(const SymMatrix& A, int k, int l, double alpha, double beta, double gamma)
    : A_(admissible(A, k, l)),
      frame_(eigh(A_)),
      a_(frame_.values),
      profile_(ProfileSpec::from_spectrum(k, l, a_.span(), beta)),
      alpha_(alpha),
      gamma_(gamma) {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw Error(ErrorCode::InvalidArgument, "gamma must be >= 1");
  if (!std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "alpha must be finite");
  mu_gamma_ = mu(gamma_, profile_.spec());
  offset_ = mu_gamma_ + alpha_ - 0.5 * gamma_ * gamma_;
}

double Subsolution::r_A(std::span<const double> x) const {
  if (x.size() != dim()) throw Error(ErrorCode::InvalidArgument, "point has the wrong dimension");
  return std::sqrt(A_.quadratic_form(x));
}

std::vector<double> Subsolution::to_frame(std::span<const double> x) const { return frame_.vectors.apply(x); }

std::vector<double> Subsolution::from_frame(std::span<const double> y) const {
  return frame_.vectors.apply_transpose(y);
}

double Subsolution::radial_value(double r) const {
  if (!(r >= 1.0) || !std::isfinite(r)) {
    throw Error(ErrorCode::InsideExcludedRegion, "r_A = " + std::to_string(r) + " lies inside E_1");
  }
  if (r == gamma_) return alpha_;
  return 0.5 * r * r + offset_ - mu(r, profile_.spec());
}

double Subsolution::value(std::span<const double> x) const {
  const double r = r_A(x);
  if (!(r >= gamma_ * (1.0 - 1e-13))) {
    throw Error(ErrorCode::InsideExcludedRegion,
                "r_A(x) = " + std::to_string(r) + " lies inside E_gamma, gamma = " + std::to_string(gamma_));
  }
  return r <= gamma_ ? alpha_ : radial_value(r);
}

SymMatrix Subsolution::hessian_in_frame(std::span<const double> y) const {
  const std::size_t n = dim();
  double r2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) r2 += a_[i] * y[i] * y[i];
  const double r = std::sqrt(r2);
  if (!(r >= gamma_ * (1.0 - 1e-13))) throw Error(ErrorCode::InsideExcludedRegion, "point lies inside E_gamma");
  const double rr = std::max(r, gamma_);
  const double psi = profile_.value(rr);
  const double s = profile_.derivative(rr) / rr;
  SymMatrix h(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      h.set(i, j, (i == j ? psi * a_[i] : 0.0) + s * (a_[i] * y[i]) * (a_[j] * y[j]));
    }
  }
  return h;
}

SymMatrix Subsolution::hessian(std::span<const double> x) const {
  return conjugate_by(frame_.vectors, hessian_in_frame(to_frame(x)));
}

std::vector<double> Subsolution::hessian_sigmas(std::span<const double> x) const {
  const std::size_t n = dim();
  const std::vector<double> y = to_frame(x);
  double r2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) r2 += a_[i] * y[i] * y[i];
  const double r = std::sqrt(r2);
  if (!(r >= gamma_ * (1.0 - 1e-13))) throw Error(ErrorCode::InsideExcludedRegion, "point lies inside E_gamma");
  const double rr = std::max(r, gamma_);
  const double psi = profile_.value(rr);
  const double s = profile_.derivative(rr) / rr;
  std::vector<double> p(n), q(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = psi * a_[i];
    q[i] = a_[i] * y[i];
  }
  return sigma_rank_one_all<double>(p, q, s);
}

double phi_eval(const Subsolution& sub, std::span<const double> x) { return sub.value(x); }

SymMatrix phi_hessian(const Subsolution& sub, std::span<const double> x) { return sub.hessian(x); }

std::vector<std::vector<double>> subsolution_samples(const Subsolution& sub, std::size_t count, std::uint64_t seed,
                                                     double r_max) {
  const std::size_t n = sub.dim();
  const double gamma = sub.gamma();
  if (!(r_max > gamma)) throw Error(ErrorCode::InvalidArgument, "r_max must exceed gamma");
  const auto& a = sub.spectrum();
  std::vector<std::vector<double>> out;
  out.reserve(count);
  constexpr int kAxisRadii = 8;
  for (int j = 1; j <= kAxisRadii && out.size() < count; ++j) {
    const double r = gamma * std::pow(r_max / gamma, static_cast<double>(j) / kAxisRadii);
    for (std::size_t i = 0; i < n && out.size() < count; ++i) {
      for (double sgn : {1.0, -1.0}) {
        if (out.size() == count) break;
        std::vector<double> y(n, 0.0);
        y[i] = sgn * r / std::sqrt(a[i]);
        out.push_back(sub.from_frame(y));
      }
    }
  }
  Rng rng(seed);
  const double log_span = std::log(r_max / gamma);
  while (out.size() < count) {
    const double r = gamma * std::exp(log_span * (1.0 - rng.uniform()));
    std::vector<double> y = rng.unit_vector(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += a[i] * y[i] * y[i];
    scale = r / std::sqrt(scale);
    for (double& v : y) v *= scale;
    out.push_back(sub.from_frame(y));
  }
  return out;
}

VerificationReport verify_subsolution(const Subsolution& sub, std::span<const std::vector<double>> samples,
                                      unsigned threads) {
  const int k = sub.k();
  const int l = sub.l();
  const auto& a = sub.spectrum();
  std::vector<double> sigma_a(static_cast<std::size_t>(k) + 1);
  std::vector<double> xi_up(static_cast<std::size_t>(k) + 1);
  std::vector<std::string> sigma_name(static_cast<std::size_t>(k) + 1);
  std::vector<std::string> bound_name(static_cast<std::size_t>(k) + 1);
  for (int j = 1; j <= k; ++j) {
    sigma_name[j] = "sigma_" + std::to_string(j);
    bound_name[j] = "lower_bound_" + std::to_string(j);
    sigma_a[j] = sigma(j, a);
    xi_up[j] = xi_bounds(j, a).upper;
  }

  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(samples.size(), 64));
  std::vector<VerificationReport> partial(chunks);
  const std::size_t per = (samples.size() + chunks - 1) / chunks;
  parallel_for(chunks, threads == 0 ? default_threads() : threads, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t c = cb; c < ce; ++c) {
      VerificationReport& rep = partial[c];
      const std::size_t begin = c * per;
      const std::size_t end = std::min(samples.size(), begin + per);
      for (std::size_t idx = begin; idx < end; ++idx) {
        const auto& x = samples[idx];
        ++rep.samples;
        const double r = sub.r_A(x);
        if (!(r > sub.gamma())) {
          rep.add_violation({idx, "outside_E_gamma", r, x});
          continue;
        }
        const double psi = sub.profile().value(r);
        const double dpsi = sub.profile().derivative(r);
        const std::vector<double> s = sub.hessian_sigmas(x);
        for (int j = 1; j <= k; ++j) {
          const double scale = sigma_a[j] * std::pow(psi, j);
          const double rel = s[j] / scale;
          rep.observe(sigma_name[j], rel);
          if (!(s[j] > 0.0)) rep.add_violation({idx, sigma_name[j] + " > 0", s[j], x});
          const double bound = sigma_a[j] * std::pow(psi, j - 1) * (psi + xi_up[j] * r * dpsi);
          const double gap = (s[j] - bound) / scale;
          rep.observe(bound_name[j], gap);
          if (!(gap >= -1e-10)) rep.add_violation({idx, bound_name[j], gap, x});
        }
        const double q = s[k] - s[l];
        rep.observe("quotient", q);
        if (!(q >= -1e-12 * std::max(s[k], 1.0))) rep.add_violation({idx, "sigma_k - sigma_l >= 0", q, x});
      }
    }
  });

  VerificationReport report;
  report.name = "subsolution";
  for (const auto& p : partial) report.merge(p);
  report.parameters = {{"k", k},
                       {"l", l},
                       {"n", sub.dim()},
                       {"alpha", sub.alpha()},
                       {"beta", sub.beta()},
                       {"gamma", sub.gamma()},
                       {"m", sub.profile().spec().m},
                       {"spectrum", a.entries()}};
  return report;
}

}  // namespace hqe
