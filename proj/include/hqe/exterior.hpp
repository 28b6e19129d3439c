#pragma once

// The exterior Dirichlet problem
//
//   sigma_k(lambda(D^2 u)) / sigma_l(lambda(D^2 u)) = 1   in R^n \ cl(D),
//   u = phi on dD,   u(x) - (x^T A x / 2 + b.x + c) -> 0 at infinity,
//
// its reduction to a diagonal, normalized frame, and the explicit sandwich
// u_lower <= u <= u_upper built from the touching quadratics and the
// generalized radially symmetric subsolution.

#include "hqe/boundary.hpp"
#include "hqe/profile.hpp"
#include "hqe/report.hpp"
#include "hqe/spectra.hpp"
#include "hqe/subsolution.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hqe {

struct ExteriorProblem {
  ConvexDomain domain;
  BoundaryData phi;
  SymMatrix A;
  std::vector<double> b;
  double c = 0.0;
  int k = 0;
  int l = 0;
  /// Notes produced while reading the input (e.g. a symmetrized A).
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t dim() const noexcept { return b.size(); }
  /// Dimensions agree and 0 <= l < k <= n. Admissibility of A is checked
  /// when the sandwich is built.
  void validate() const;

  /// Schema: {"k", "l", "A": [[..]], "b": [..] (optional), "c",
  ///          "domain": {...}, "phi": number | {"terms": [...]} (optional)}.
  static ExteriorProblem from_json(const nlohmann::json& j);
  static ExteriorProblem load(const std::string& path);
  [[nodiscard]] nlohmann::json to_json() const;
};

/// x = shift + scale V^T y. In y the problem has A = N = diag(lambda(A)),
/// b = 0, c' = (c + b.shift + shift^T A shift / 2) / scale^2, and
/// u(x) = scale^2 u~(y) + b'.(x - shift) with b' = b + A shift.
struct Reduction {
  ExteriorProblem original;
  ExteriorProblem reduced;
  DenseMatrix V;
  std::vector<double> shift;
  std::vector<double> b_shifted;
  double scale = 1.0;
  double r_in_before_scaling = 0.0;

  [[nodiscard]] std::vector<double> to_reduced(std::span<const double> x) const;
  [[nodiscard]] std::vector<double> from_reduced(std::span<const double> y) const;
  /// u(x) from u~(y) at y = to_reduced(x).
  [[nodiscard]] double pull_back(double u_reduced, std::span<const double> x) const;
  /// The c of the input frame that reduces to `reduced_c`.
  [[nodiscard]] double original_c(double reduced_c) const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Rotates into the eigenframe of A (kept as the identity when A is already
/// diagonal), moves the origin to the domain center if it lies outside D, and
/// shrinks coordinates when min over dD of r_A is at most 1.05 so that
/// E_1 is compactly inside D.
Reduction reduce_to_diagonal(const ExteriorProblem& problem, std::size_t mesh_size = 400);

struct SandwichOptions {
  std::size_t mesh_size = 400;
  TouchingOptions touching;
  unsigned threads = 0;
};

/// Envelope of the reduced problem with beta_hat and c_tilde filled in.
/// Throws NotAdmissible and the boundary errors.
Envelope build_envelope(const Reduction& reduction, const SandwichOptions& opts = {});

class Sandwich {
 public:
  /// Throws NotAdmissible, CTooSmall and the boundary errors.
  explicit Sandwich(Reduction reduction, const SandwichOptions& opts = {});
  /// `envelope` must come from build_envelope on the same reduction.
  Sandwich(Reduction reduction, Envelope envelope);

  [[nodiscard]] const Reduction& reduction() const noexcept { return reduction_; }
  [[nodiscard]] const Envelope& envelope() const noexcept { return envelope_; }
  [[nodiscard]] const EnvelopeConstants& constants() const noexcept { return envelope_.constants(); }
  [[nodiscard]] const ProfileSpec& spec() const noexcept { return phi_.profile().spec(); }
  [[nodiscard]] const Subsolution& phi() const noexcept { return phi_; }
  [[nodiscard]] double beta_c() const noexcept { return phi_.beta(); }
  [[nodiscard]] double m() const noexcept { return spec().m; }
  /// c in the reduced frame.
  [[nodiscard]] double c() const noexcept { return reduction_.reduced.c; }

  // Reduced coordinates.
  [[nodiscard]] double r_N(std::span<const double> y) const;
  [[nodiscard]] double phi_branch(double r) const { return phi_.radial_value(r); }
  [[nodiscard]] double lower(std::span<const double> y) const;
  [[nodiscard]] double upper(std::span<const double> y) const;
  /// upper - lower; on the outer branch the quadratic parts are combined in
  /// extended precision.
  [[nodiscard]] double gap(std::span<const double> y) const;

  // Original coordinates.
  [[nodiscard]] double lower_original(std::span<const double> x) const;
  [[nodiscard]] double upper_original(std::span<const double> x) const;
  /// u_lower(x) - (x^T A x / 2 + b.x + c).
  [[nodiscard]] double deviation(std::span<const double> x) const;

  [[nodiscard]] nlohmann::json to_json() const;

 private:
  Reduction reduction_;
  Envelope envelope_;
  Subsolution phi_;
};

/// Sample points of the reduced frame outside D with r_N log-uniform between
/// the boundary (along each ray from the origin) and r_max.
std::vector<std::vector<double>> exterior_samples(const Sandwich& s, std::size_t count, std::uint64_t seed,
                                                  double r_max = 1e3);

struct SandwichCheckOptions {
  std::size_t samples = 100000;
  std::size_t subsolution_samples = 10000;
  std::size_t shell_samples = 2000;
  std::uint64_t seed = 1;
  double r_max = 1e3;
  unsigned threads = 0;
};

/// Every ordering and boundary property of the sandwich, as one report.
VerificationReport verify_sandwich(const Sandwich& s, const SandwichCheckOptions& opts = {});

struct DecayReport {
  std::vector<double> radii;
  std::vector<double> w;       ///< max over the shell of |u_lower - (x^T A x / 2 + b.x + c)|
  std::vector<double> scaled;  ///< r^(m-2) w(r)
  std::size_t directions = 0;
  double m = 0.0;
  double slope = 0.0;
  double expected_slope = 0.0;
  double relative_error = 0.0;
  double limsup_estimate = 0.0;  ///< max of scaled over the sampled shells
  double predicted_constant = 0.0;
  bool slope_ok = false;
  std::vector<double> center;          ///< shells are r_A(x - center) = r
  double origin_centered_slope = 0.0;  ///< same fit on r_A(x) = r shells

  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] std::string to_csv() const;
};

/// Shells r_A(x - shift) = 10^1.5, 10^2, ..., 10^4 in the original frame,
/// shift being the reduction's translation (zero when the origin is in D).
DecayReport decay_report(const Sandwich& s, std::size_t directions = 2000, unsigned threads = 0);

struct ComparisonResult {
  bool holds = true;
  std::size_t checked = 0;
  double worst = 0.0;  ///< min of (super - sub) over interior samples
  std::vector<double> witness;
};

/// Falsification harness for the comparison principle: requires sub <= super
/// on the boundary samples (HypothesisViolated otherwise) and reports the
/// interior ordering. `tol` is absolute slack scaled by max(1, |super|).
ComparisonResult comparison_check(const std::function<double(std::span<const double>)>& sub,
                                  const std::function<double(std::span<const double>)>& super,
                                  std::span<const std::vector<double>> boundary,
                                  std::span<const std::vector<double>> interior, double tol = 1e-10);

/// D = E_gamma, phi = alpha: Phi_{alpha,beta,gamma,A} itself. Checks the
/// subsolution inequalities, the PDE residual along the eigen-axis of the
/// largest eigenvalue (where the radial ODE is exact when l = 0 or the
/// spectrum is uniform), Phi = alpha on dE_gamma, and the asymptotic offset.
VerificationReport verify_exact_ellipsoid_solution(const SymMatrix& A, int k, int l, double gamma, double alpha,
                                                   double beta, std::span<const std::vector<double>> samples,
                                                   unsigned threads = 0);

}  // namespace hqe
