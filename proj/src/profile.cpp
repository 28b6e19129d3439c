#include "hqe/profile.hpp"

#include "hqe/admissibility.hpp"
#include "hqe/error.hpp"
#include "hqe/numerics.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <unordered_map>

namespace hqe {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kOdeAbsTol = 1e-12;
constexpr double kOdeRelTol = 1e-10;

/// log( psi^e (psi^d - 1) ) at psi = 1 + delta.
double log_relation(const ProfileSpec& spec, double delta) {
  const double lp = std::log1p(delta);
  return spec.growth_exponent() * lp + std::log(std::expm1(spec.order() * lp));
}

double log_b(const ProfileSpec& spec) { return log_relation(spec, spec.beta - 1.0); }

void check_radius(double r) {
  if (!(r >= 1.0) || !std::isfinite(r)) {
    throw Error(ErrorCode::InvalidArgument, "profile radius must be finite and >= 1, got " + std::to_string(r));
  }
}

}  // namespace

ProfileSpec ProfileSpec::from_spectrum(int k, int l, std::span<const double> a, double beta) {
  detail::check_kl(k, l, a.size());
  const double upper = xi_bounds(k, a).upper;
  const double lower = xi_bounds(l, a).lower;
  return from_xi(k, l, upper, lower, beta);
}

ProfileSpec ProfileSpec::from_xi(int k, int l, double xi_upper, double xi_lower, double beta) {
  ProfileSpec s;
  s.k = k;
  s.l = l;
  s.xi_upper = xi_upper;
  s.xi_lower = xi_lower;
  s.m = static_cast<double>(k - l) / (xi_upper - xi_lower);
  s.beta = beta;
  s.validate();
  return s;
}

void ProfileSpec::validate() const {
  if (!(0 <= l && l < k)) throw Error(ErrorCode::InvalidArgument, "profile needs 0 <= l < k");
  if (!(xi_upper > 0.0 && xi_upper <= 1.0)) throw Error(ErrorCode::InvalidArgument, "xi_upper must lie in (0, 1]");
  if (!(xi_lower >= 0.0 && xi_lower < xi_upper)) {
    throw Error(ErrorCode::InvalidArgument, "xi_lower must lie in [0, xi_upper)");
  }
  if (l == 0 && xi_lower != 0.0) throw Error(ErrorCode::InvalidArgument, "xi_lower must be 0 when l = 0");
  const double expected_m = static_cast<double>(k - l) / (xi_upper - xi_lower);
  if (!(std::abs(m - expected_m) <= 1e-12 * expected_m)) {
    throw Error(ErrorCode::InvalidArgument, "m is inconsistent with the xi values");
  }
  if (!(beta >= 1.0) || !std::isfinite(beta)) throw Error(ErrorCode::InvalidArgument, "beta must be finite and >= 1");
}

ProfileSpec ProfileSpec::with_beta(double b) const {
  ProfileSpec s = *this;
  s.beta = b;
  s.validate();
  return s;
}

double b_of_beta(const ProfileSpec& spec) {
  if (spec.beta == 1.0) return 0.0;
  return std::exp(log_b(spec));
}

double asymptotic_constant(const ProfileSpec& spec) { return b_of_beta(spec) / spec.order(); }

double log_scaled_excess(const ProfileSpec& spec, double log_r) {
  if (!(log_r >= 0.0) || std::isnan(log_r)) {
    throw Error(ErrorCode::InvalidArgument, "profile radius must be >= 1");
  }
  if (spec.beta == 1.0) return -std::numeric_limits<double>::infinity();
  const double cap = std::log(spec.beta - 1.0);
  if (log_r == 0.0) return cap;

  // With delta = exp(v - m L):  log H(1 + delta) = log B - m L  becomes
  //   e log1p(delta) + log d + v + log(expm1(d log1p delta) / (d delta)) = log B,
  // where m L no longer appears outside the (insensitive) delta terms.
  const double d = spec.order();
  const double e = spec.growth_exponent();
  const double lb = log_b(spec);
  const double ld = std::log(d);
  const double shift = spec.m * log_r;
  auto residual = [&](double v) {
    const double delta = std::exp(v - shift);
    if (delta < 1e-200) return ld + v - lb;
    const double lp = std::log1p(delta);
    return e * lp + ld + v + std::log(std::expm1(d * lp) / (d * delta)) - lb;
  };
  // beta - 1 <= (psi - 1) r^m <= min(B / (k - l), (beta - 1) r^m)
  const double slack = 1e-12;
  double lo = cap;
  double hi = std::min(cap + shift, lb - ld);
  lo -= slack * std::max(1.0, std::abs(lo));
  hi = std::min(cap + shift, hi + slack * std::max(1.0, std::abs(hi)));
  if (residual(lo) >= 0.0) return lo;
  if (residual(hi) <= 0.0) return hi;
  RootOptions opts;
  opts.secant_switch = 1e-3;
  return bracketed_root(residual, lo, hi, opts).x;
}

double log_excess_at(const ProfileSpec& spec, double log_r) {
  if (spec.beta != 1.0 && log_r == 0.0) return std::log(spec.beta - 1.0);
  return log_scaled_excess(spec, log_r) - spec.m * log_r;
}

double solve_implicit_excess(const ProfileSpec& spec, double r) {
  spec.validate();
  check_radius(r);
  if (spec.beta == 1.0) return 0.0;
  if (r == 1.0) return spec.beta - 1.0;
  return std::exp(log_excess_at(spec, std::log(r)));
}

double solve_implicit(const ProfileSpec& spec, double r) { return 1.0 + solve_implicit_excess(spec, r); }

double slope_from_excess(const ProfileSpec& spec, double delta) {
  const double e = std::expm1(spec.order() * std::log1p(delta));  // psi^(k-l) - 1
  return -((1.0 + delta) / spec.xi_upper) * e / (e + 1.0 - spec.ratio());
}

double slope_derivative_from_excess(const ProfileSpec& spec, double delta) {
  const double e = std::expm1(spec.order() * std::log1p(delta));
  const double q = spec.ratio();
  const double denom = e + 1.0 - q;  // psi^(k-l) - q
  return -(1.0 / spec.xi_upper) * (e / denom + spec.order() * (e + 1.0) * (1.0 - q) / (denom * denom));
}

double psi_derivative(const ProfileSpec& spec, double r, double psi_value) {
  check_radius(r);
  if (!(psi_value >= 1.0)) throw Error(ErrorCode::InvalidArgument, "psi value must be >= 1");
  return slope_from_excess(spec, psi_value - 1.0) / r;
}

double implicit_residual(const ProfileSpec& spec, double r, double psi_value) {
  const double e = spec.growth_exponent();
  const double d = spec.order();
  return std::pow(psi_value, e) * (std::pow(psi_value, d) - 1.0) - b_of_beta(spec) * std::pow(r, -spec.m);
}

namespace {

using OdeState = std::array<double, 1>;

/// The flow in (s, u) = (log r, log(psi - 1)); du/ds -> -m as psi -> 1.
struct LogExcessFlow {
  const ProfileSpec* spec;
  void operator()(const OdeState& u, OdeState& dudt, double /*s*/) const {
    const double delta = std::exp(u[0]);
    dudt[0] = slope_from_excess(*spec, delta) / delta;
  }
};

}  // namespace

std::vector<double> solve_ode_excess_path(const ProfileSpec& spec, std::span<const double> r_sorted) {
  spec.validate();
  std::vector<double> out(r_sorted.size(), 0.0);
  for (std::size_t i = 0; i < r_sorted.size(); ++i) {
    check_radius(r_sorted[i]);
    if (i > 0 && r_sorted[i] < r_sorted[i - 1]) throw Error(ErrorCode::InvalidArgument, "radii must ascend");
  }
  if (spec.beta == 1.0 || r_sorted.empty()) return out;

  std::vector<double> times;
  times.reserve(r_sorted.size() + 1);
  times.push_back(0.0);
  for (double r : r_sorted) times.push_back(std::log(r));

  OdeState u{std::log(spec.beta - 1.0)};
  std::vector<double> u_at;
  u_at.reserve(times.size());
  try {
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<OdeState>>(kOdeAbsTol, kOdeRelTol);
    odeint::integrate_times(stepper, LogExcessFlow{&spec}, u, times.begin(), times.end(), 1e-3,
                            [&](const OdeState& x, double) { u_at.push_back(x[0]); });
  } catch (const std::exception& e) {
    throw Error(ErrorCode::StepFailure, std::string("adaptive integration failed: ") + e.what());
  }
  if (u_at.size() != times.size()) throw Error(ErrorCode::StepFailure, "integration stopped early");
  for (std::size_t i = 0; i < r_sorted.size(); ++i) {
    if (!std::isfinite(u_at[i + 1])) throw Error(ErrorCode::StepFailure, "non-finite state");
    out[i] = std::exp(u_at[i + 1]);
  }
  return out;
}

double solve_ode(const ProfileSpec& spec, double r) {
  const double radii[1] = {r};
  return 1.0 + solve_ode_excess_path(spec, radii).front();
}

double beta_sensitivity(const ProfileSpec& spec, double r) {
  spec.validate();
  check_radius(r);
  if (r == 1.0) return 1.0;
  const double s_end = std::log(r);
  auto integrand = [&](double s) {
    return slope_derivative_from_excess(spec, solve_implicit_excess(spec, std::exp(s)));
  };
  int panels = std::max(1, static_cast<int>(std::ceil(s_end)));
  double coarse = gauss_legendre(integrand, 0.0, s_end, panels);
  for (int pass = 0; pass < 10; ++pass) {
    panels *= 2;
    const double fine = gauss_legendre(integrand, 0.0, s_end, panels);
    const bool done = std::abs(fine - coarse) <= 1e-12 * std::max(1.0, std::abs(fine));
    coarse = fine;
    if (done) break;
  }
  return std::exp(coarse);
}

struct Profile::Cache {
  std::mutex mutex;
  std::unordered_map<std::uint64_t, double> excess;
};

Profile::Profile(ProfileSpec spec) : spec_(spec), cache_(std::make_shared<Cache>()) {
  spec_.validate();
  b_beta_ = b_of_beta(spec_);
}

double Profile::asymptotic_constant() const noexcept { return b_beta_ / spec_.order(); }

double Profile::excess(double r) const {
  const auto key = std::bit_cast<std::uint64_t>(r);
  {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->excess.find(key); it != cache_->excess.end()) return it->second;
  }
  const double delta = solve_implicit_excess(spec_, r);
  std::lock_guard lock(cache_->mutex);
  if (cache_->excess.size() >= (std::size_t{1} << 20)) cache_->excess.clear();
  cache_->excess.emplace(key, delta);
  return delta;
}

double Profile::derivative(double r) const { return slope_from_excess(spec_, excess(r)) / r; }

std::size_t Profile::cache_size() const {
  std::lock_guard lock(cache_->mutex);
  return cache_->excess.size();
}

}  // namespace hqe
