#pragma once

// Strictly convex domains, boundary data, the touching quadratics
//
//   Q_xi(x) = (x - xbar)^T A (x - xbar) / 2 - (xi - xbar)^T A (xi - xbar) / 2 + phi(xi)
//
// that stay below phi on the boundary, their envelope Q = max_xi Q_xi over a
// boundary mesh, and the constants eta, c_bar, beta_hat, c_tilde, beta(c).
//
// Every Q_xi differs from x^T A x / 2 by an affine function, so the code keeps
// Q_xi as (w, k) with Q_xi(x) = x^T A x / 2 - w.x + k, w = A xbar. Several of
// the constants then have closed forms per xi (support function of D, the
// A-distance to an ellipsoid); only eta for xbar inside D needs the mesh.

#include "hqe/profile.hpp"
#include "hqe/spectra.hpp"

#include "json.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hqe {

enum class DomainKind { Ball, Ellipsoid, Superellipsoid };

std::string_view to_string(DomainKind kind);

struct BoundaryPoint {
  std::vector<double> x;
  std::vector<double> normal;  ///< outward unit normal
};

/// D = { x : g(R (x - center)) < 1 } with the gauge
/// g(z) = (sum_i |z_i / s_i|^p)^(1/p); p = 2 gives balls and ellipsoids.
class ConvexDomain {
 public:
  ConvexDomain() = default;
  static ConvexDomain ball(std::vector<double> center, double radius);
  static ConvexDomain ellipsoid(std::vector<double> center, DenseMatrix rotation, std::vector<double> semi_axes);
  static ConvexDomain superellipsoid(std::vector<double> center, DenseMatrix rotation,
                                     std::vector<double> semi_axes, double exponent);

  [[nodiscard]] DomainKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t dim() const noexcept { return center_.size(); }
  [[nodiscard]] const std::vector<double>& center() const noexcept { return center_; }
  [[nodiscard]] const DenseMatrix& rotation() const noexcept { return rotation_; }
  [[nodiscard]] const std::vector<double>& semi_axes() const noexcept { return axes_; }
  [[nodiscard]] double exponent() const noexcept { return p_; }

  [[nodiscard]] double gauge(std::span<const double> x) const;
  [[nodiscard]] bool contains(std::span<const double> x) const { return gauge(x) < 1.0; }
  /// Outward unit normal of the gauge level set through x (x != center).
  [[nodiscard]] std::vector<double> normal(std::span<const double> x) const;
  /// h(u) = max over the closed domain of u.y.
  [[nodiscard]] double support(std::span<const double> u) const;
  /// Boundary point on the ray from the center in direction u.
  [[nodiscard]] std::vector<double> boundary_point(std::span<const double> u) const;

  /// Deterministic boundary mesh with `count` points: equal angles for n = 2,
  /// a Fibonacci lattice for n = 3, axes plus seeded random directions above.
  [[nodiscard]] std::vector<BoundaryPoint> mesh(std::size_t count) const;

  /// Image under y = V (x - shift) / s (V orthogonal, s > 0, empty shift = 0).
  [[nodiscard]] ConvexDomain transformed(const DenseMatrix& V, double s, std::span<const double> shift = {}) const;

  /// min over mesh pairs of -2 nu(xi).(x - xi) / |x - xi|^2: a discrete
  /// lower estimate of the principal curvatures (1/R for a ball of radius R).
  [[nodiscard]] static double chord_curvature(std::span<const BoundaryPoint> mesh);

  [[nodiscard]] nlohmann::json to_json() const;
  static ConvexDomain from_json(const nlohmann::json& j);

 private:
  ConvexDomain(DomainKind kind, std::vector<double> center, DenseMatrix rotation, std::vector<double> axes,
               double p);

  DomainKind kind_ = DomainKind::Ball;
  std::vector<double> center_;
  DenseMatrix rotation_;
  std::vector<double> axes_;
  double p_ = 2.0;
};

/// Polynomial sum_t coef_t prod_i x_i^powers_t[i].
class Polynomial {
 public:
  struct Term {
    double coef = 0.0;
    std::vector<int> powers;
  };

  Polynomial() = default;
  Polynomial(std::size_t n, std::vector<Term> terms);
  static Polynomial constant(std::size_t n, double value);

  [[nodiscard]] std::size_t dim() const noexcept { return n_; }
  [[nodiscard]] const std::vector<Term>& terms() const noexcept { return terms_; }
  [[nodiscard]] double value(std::span<const double> x) const;
  [[nodiscard]] std::vector<double> gradient(std::span<const double> x) const;

  [[nodiscard]] nlohmann::json to_json() const;
  static Polynomial from_json(const nlohmann::json& j, std::size_t n);

 private:
  std::size_t n_ = 0;
  std::vector<Term> terms_;
};

/// Boundary data phi, given as a C^2 function on a neighbourhood of the
/// boundary together with its gradient.
struct BoundaryData {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
  nlohmann::json description;

  static BoundaryData from_polynomial(const Polynomial& p);
  static BoundaryData constant(std::size_t n, double v);

  /// Data of the transformed problem y = V (x - shift) / s:
  /// phi~(y) = (phi(x) - b.(x - shift)) / s^2 with x = shift + s V^T y.
  [[nodiscard]] BoundaryData transformed(const DenseMatrix& V, std::span<const double> b, double s,
                                         std::span<const double> shift = {}) const;
};

/// Boundary points together with phi evaluated at each of them.
struct SampledBoundary {
  std::vector<BoundaryPoint> points;
  std::vector<double> phi;

  static SampledBoundary sample(const ConvexDomain& D, const BoundaryData& data, std::size_t count);
  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

/// A positive definite A with its inverse, shared by every Q_xi.
struct QuadraticMetric {
  SymMatrix A;
  SymMatrix A_inv;
  double lambda_min = 0.0;
  double lambda_max = 0.0;

  explicit QuadraticMetric(const SymMatrix& a);
  [[nodiscard]] double norm_sq(std::span<const double> x) const { return A.quadratic_form(x); }
};

struct TouchingOptions {
  double margin_floor = 1e-3;  ///< relative to the smallest eigenvalue of A
  double safety = 1e-3;        ///< relative inflation of the mesh-minimal t
  double t_max = 1e12;
  std::size_t refine_factor = 4;
  unsigned threads = 0;
};

struct TouchingQuadratic {
  std::vector<double> xi;
  std::vector<double> normal;
  std::vector<double> x_bar;
  std::vector<double> w;  ///< A x_bar
  double k = 0.0;         ///< Q_xi(x) = x^T A x / 2 - w.x + k
  double t = 0.0;         ///< A (xi - x_bar) = grad phi(xi) + t nu(xi)
  double value_at_xi = 0.0;
  double margin = 0.0;          ///< min over mesh x != xi of (phi - Q_xi)(x) / |x - xi|^2
  double refined_margin = 0.0;  ///< same on the refined mesh

  [[nodiscard]] double operator()(const QuadraticMetric& metric, std::span<const double> x) const;
};

/// Builds Q_xi for one mesh point. `mesh` is the boundary mesh the margin is
/// enforced on and `refined` the denser mesh used for the final check.
TouchingQuadratic touching_quadratic(const ConvexDomain& D, const BoundaryData& phi, const QuadraticMetric& metric,
                                     const BoundaryPoint& xi, const SampledBoundary& mesh,
                                     const SampledBoundary& refined, const TouchingOptions& opts = {});

struct EnvelopeConstants {
  double eta = 0.0;
  double c_bar = 0.0;
  double c_tilde = 0.0;
  double beta_hat = 0.0;
  double mu_beta_hat = 0.0;
  double r_in = 0.0;   ///< min of r_A over the boundary mesh
  double r_out = 0.0;  ///< max of r_A over the boundary mesh
  double r_bar = 0.0;
  double r_hat = 0.0;
  double K = 0.0;  ///< realized max |x_bar|
  double curvature = 0.0;
  double q_max_on_r_hat = 0.0;
  std::size_t mesh_size = 0;
  std::size_t refined_size = 0;

  [[nodiscard]] nlohmann::json to_json() const;
};

class Envelope {
 public:
  Envelope(const ConvexDomain& D, const BoundaryData& phi, const SymMatrix& A, std::size_t mesh_size,
           const TouchingOptions& opts = {});

  [[nodiscard]] const ConvexDomain& domain() const noexcept { return D_; }
  [[nodiscard]] const QuadraticMetric& metric() const noexcept { return metric_; }
  [[nodiscard]] const std::vector<BoundaryPoint>& mesh() const noexcept { return mesh_.points; }
  [[nodiscard]] const std::vector<TouchingQuadratic>& quadratics() const noexcept { return quads_; }
  [[nodiscard]] const EnvelopeConstants& constants() const noexcept { return constants_; }
  [[nodiscard]] EnvelopeConstants& constants() noexcept { return constants_; }
  [[nodiscard]] const BoundaryData& data() const noexcept { return phi_; }

  /// Q(x) = max over the mesh of Q_xi(x).
  [[nodiscard]] double operator()(std::span<const double> x) const;
  /// Exact max of Q over the ellipsoidal shell r_A(x) = r.
  [[nodiscard]] double max_on_shell(double r) const;
  /// max over mesh points of |Q(xi) - phi(xi)|.
  [[nodiscard]] double boundary_defect() const;

 private:
  ConvexDomain D_;
  BoundaryData phi_;
  QuadraticMetric metric_;
  SampledBoundary mesh_;
  std::vector<TouchingQuadratic> quads_;
  EnvelopeConstants constants_;
};

/// Phi_beta at r_A = r with alpha = eta, gamma = r_bar:
/// r^2/2 + mu(beta) - mu_r(beta).
double envelope_phi(const EnvelopeConstants& constants, const ProfileSpec& spec, double beta, double r);

/// mu(beta) = eta - r_bar^2 / 2 + mu_{r_bar}(beta).
double mu_of_beta(const EnvelopeConstants& constants, const ProfileSpec& spec, double beta);

/// First beta on 1 + 2^j / 8 (j = 0, 1, ...) with Phi_beta > Q on the shell
/// r_A = r_hat. Also fills beta_hat, mu_beta_hat, c_tilde in `env`.
double beta_hat(Envelope& env, const ProfileSpec& spec);

/// The unique beta with mu(beta) = c; throws CTooSmall when c < c_tilde.
double beta_of_c(double c, const EnvelopeConstants& constants, const ProfileSpec& spec);

}  // namespace hqe
