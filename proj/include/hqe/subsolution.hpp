#pragma once

// The tail integral mu_R(beta) = int_R^inf tau (psi(tau, beta) - 1) dtau and
// the generalized radially symmetric subsolution
//
//   Phi(x) = alpha + int_gamma^{r_A(x)} tau psi(tau, beta) dtau
//          = r_A(x)^2 / 2 + (mu_gamma + alpha - gamma^2 / 2) - mu_{r_A(x)},
//
// r_A(x) = sqrt(x^T A x), together with its exact Hessian and a sampled check
// that sigma_k(lambda(D^2 Phi)) >= sigma_l(lambda(D^2 Phi)) with every
// sigma_j > 0 for j <= k.

#include "hqe/admissibility.hpp"
#include "hqe/profile.hpp"
#include "hqe/report.hpp"
#include "hqe/spectra.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hqe {

/// mu_R(beta) for R >= 1. Requires m > 2 (otherwise the integral diverges).
/// Uses the substitution w = (tau / R)^(2 - m), under which
///   mu_R = R^(2-m) / (m - 2) * int_0^1 (psi - 1) tau^m dw
/// has a bounded integrand tending to B(beta) / (k - l) at w = 0; the
/// integral is evaluated by tanh-sinh quadrature to 1e-13 relative.
double mu(double R, const ProfileSpec& spec);
/// Same with beta replaced.
double mu(double R, double beta, const ProfileSpec& spec);

/// The ellipsoid E_rho = { r_A(x) < rho } for positive definite A.
struct Ellipsoid {
  SymMatrix A;
  double rho = 1.0;

  [[nodiscard]] double radius_of(std::span<const double> x) const;  ///< r_A(x)
  [[nodiscard]] bool contains(std::span<const double> x) const { return radius_of(x) < rho; }
};

class Subsolution {
 public:
  /// A must lie in A~_{k,l}; gamma >= 1 and beta >= 1.
  Subsolution(const SymMatrix& A, int k, int l, double alpha, double beta, double gamma);

  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] double beta() const noexcept { return profile_.spec().beta; }
  [[nodiscard]] double gamma() const noexcept { return gamma_; }
  [[nodiscard]] int k() const noexcept { return profile_.spec().k; }
  [[nodiscard]] int l() const noexcept { return profile_.spec().l; }
  [[nodiscard]] std::size_t dim() const noexcept { return a_.size(); }
  [[nodiscard]] const SymMatrix& A() const noexcept { return A_; }
  [[nodiscard]] const SymVec& spectrum() const noexcept { return a_; }  ///< ascending
  [[nodiscard]] const EigenDecomposition& frame() const noexcept { return frame_; }
  [[nodiscard]] const Profile& profile() const noexcept { return profile_; }
  [[nodiscard]] double mu_gamma() const noexcept { return mu_gamma_; }
  /// mu_gamma + alpha - gamma^2 / 2: the constant in Phi = r^2/2 + offset - mu_r.
  [[nodiscard]] double offset() const noexcept { return offset_; }

  [[nodiscard]] double r_A(std::span<const double> x) const;
  /// Coordinates in the eigenframe, y = V x, so that r_A(x)^2 = sum a_i y_i^2.
  [[nodiscard]] std::vector<double> to_frame(std::span<const double> x) const;
  [[nodiscard]] std::vector<double> from_frame(std::span<const double> y) const;

  /// alpha + int_gamma^r tau psi dtau for any r >= 1 (below gamma this is
  /// the continuation inward, smaller than alpha).
  [[nodiscard]] double radial_value(double r) const;
  /// Phi(x); throws InsideExcludedRegion when r_A(x) < gamma.
  [[nodiscard]] double value(std::span<const double> x) const;
  /// D^2 Phi in the original frame.
  [[nodiscard]] SymMatrix hessian(std::span<const double> x) const;
  /// D^2 Phi in the eigenframe: psi a_i delta_ij + (psi'/r)(a_i y_i)(a_j y_j).
  [[nodiscard]] SymMatrix hessian_in_frame(std::span<const double> y) const;

  /// sigma_0..sigma_n of lambda(D^2 Phi(x)) via the rank-one formula.
  [[nodiscard]] std::vector<double> hessian_sigmas(std::span<const double> x) const;

 private:
  static SymMatrix admissible(const SymMatrix& A, int k, int l);

  SymMatrix A_;
  EigenDecomposition frame_;
  SymVec a_;
  Profile profile_;
  double alpha_;
  double gamma_;
  double mu_gamma_;
  double offset_;
};

double phi_eval(const Subsolution& sub, std::span<const double> x);
SymMatrix phi_hessian(const Subsolution& sub, std::span<const double> x);

/// Sample points outside E_gamma: first the 2n signed eigen-axes at radii
/// log-spaced over (gamma, r_max], then r_A log-uniform in (gamma, r_max]
/// with uniform directions. Deterministic in `seed`.
std::vector<std::vector<double>> subsolution_samples(const Subsolution& sub, std::size_t count,
                                                     std::uint64_t seed, double r_max = 1e3);

/// Checks at every sample: sigma_j > 0 for j <= k, sigma_k - sigma_l >=
/// -1e-12 max(sigma_k, 1), and the lower bound
/// sigma_j >= sigma_j(a) psi^(j-1) (psi + xi_upper_j r psi').
VerificationReport verify_subsolution(const Subsolution& sub, std::span<const std::vector<double>> samples,
                                      unsigned threads = 0);

}  // namespace hqe
