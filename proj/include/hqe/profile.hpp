#pragma once

// The radial profile psi(r, beta): the solution on [1, inf) of
//
//   psi' = g(psi) / r,  psi(1) = beta,
//   g(v) = -(v / xi_upper) (v^(k-l) - 1) / (v^(k-l) - xi_lower / xi_upper),
//
// equivalently the root in [1, beta] of the integrated relation
//
//   psi^(m xi_upper - k + l) (psi^(k-l) - 1) = B(beta) r^(-m),
//   B(beta) = beta^(m xi_upper - k + l) (beta^(k-l) - 1).
//
// Internally everything is expressed through the excess delta = psi - 1 so
// that the tail (delta ~ r^-m, far below double epsilon relative to 1) keeps
// full relative precision.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace hqe {

struct ProfileSpec {
  int k = 0;
  int l = 0;
  double xi_upper = 0.0;  ///< xi_upper_k(a)
  double xi_lower = 0.0;  ///< xi_lower_l(a); 0 when l = 0
  double m = 0.0;         ///< (k - l) / (xi_upper - xi_lower)
  double beta = 1.0;

  /// Builds the spec from a positive spectrum a (any order).
  static ProfileSpec from_spectrum(int k, int l, std::span<const double> a, double beta);
  /// Builds the spec from the two xi values; m is derived.
  static ProfileSpec from_xi(int k, int l, double xi_upper, double xi_lower, double beta);

  /// Throws InvalidArgument when the invariants do not hold.
  void validate() const;

  [[nodiscard]] ProfileSpec with_beta(double b) const;
  [[nodiscard]] int order() const noexcept { return k - l; }
  [[nodiscard]] double ratio() const noexcept { return xi_lower / xi_upper; }
  /// m xi_upper - (k - l) >= 0 (zero exactly when l = 0).
  [[nodiscard]] double growth_exponent() const noexcept { return m * xi_upper - order(); }
};

/// B(beta) = beta^(m xi_upper - k + l) (beta^(k-l) - 1).
double b_of_beta(const ProfileSpec& spec);

/// psi(r) by bracketed root finding on the integrated relation.
double solve_implicit(const ProfileSpec& spec, double r);
/// psi(r) - 1 from the same solve, accurate to full relative precision.
double solve_implicit_excess(const ProfileSpec& spec, double r);

/// log(psi - 1) at r = exp(log_r), without forming r (usable far beyond the
/// double range of r). -inf when beta = 1. No spec validation.
double log_excess_at(const ProfileSpec& spec, double log_r);
/// log((psi - 1) r^m) at r = exp(log_r); lies in [log(beta - 1), log(B / (k - l))].
double log_scaled_excess(const ProfileSpec& spec, double log_r);

/// psi(r) by adaptive Dormand-Prince integration of the ODE from (1, beta).
double solve_ode(const ProfileSpec& spec, double r);
/// psi - 1 along an ascending grid (each entry >= 1), one integration pass.
std::vector<double> solve_ode_excess_path(const ProfileSpec& spec, std::span<const double> r_sorted);

/// g(psi) / r for psi in [1, beta]; never positive.
double psi_derivative(const ProfileSpec& spec, double r, double psi_value);
/// g(1 + delta), evaluated without forming 1 + delta.
double slope_from_excess(const ProfileSpec& spec, double delta);
/// g'(1 + delta).
double slope_derivative_from_excess(const ProfileSpec& spec, double delta);

/// d psi / d beta = exp( integral_1^r g'(psi(t)) / t dt ), by quadrature.
double beta_sensitivity(const ProfileSpec& spec, double r);

/// B(beta) / (k - l): the limit of (psi - 1) r^m as r -> inf.
double asymptotic_constant(const ProfileSpec& spec);

/// Residual F(psi) = psi^(m xi_upper - k + l)(psi^(k-l) - 1) - B(beta) r^(-m).
double implicit_residual(const ProfileSpec& spec, double r, double psi_value);

/// Evaluator bound to one spec. Excess values are memoized by the exact bit
/// pattern of r; copies share the cache, which is guarded by a mutex.
class Profile {
 public:
  explicit Profile(ProfileSpec spec);

  [[nodiscard]] const ProfileSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] double b_beta() const noexcept { return b_beta_; }
  [[nodiscard]] double asymptotic_constant() const noexcept;

  [[nodiscard]] double excess(double r) const;  ///< psi(r) - 1
  [[nodiscard]] double value(double r) const { return 1.0 + excess(r); }
  [[nodiscard]] double derivative(double r) const;  ///< psi'(r)
  [[nodiscard]] std::size_t cache_size() const;

 private:
  struct Cache;
  ProfileSpec spec_;
  double b_beta_ = 0.0;
  std::shared_ptr<Cache> cache_;
};

}  // namespace hqe
