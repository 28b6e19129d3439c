#include "hqe/boundary.hpp"

#include "hqe/error.hpp"
#include "hqe/numerics.hpp"
#include "hqe/subsolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace hqe {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

void check_dim(std::span<const double> x, std::size_t n) {
  if (x.size() != n) {
    throw Error(ErrorCode::InvalidArgument,
                "point has dimension " + std::to_string(x.size()) + ", expected " + std::to_string(n));
  }
}

std::vector<double> json_vector(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing key '") + key + "'");
  return j.at(key).get<std::vector<double>>();
}

DenseMatrix json_matrix(const nlohmann::json& j, std::size_t n) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.size() != n) throw Error(ErrorCode::ParseError, "rotation has the wrong number of rows");
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (r.size() != n) throw Error(ErrorCode::ParseError, "rotation has a ragged row");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return DenseMatrix(n, std::move(flat));
}

nlohmann::json matrix_json(const DenseMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

}  // namespace

std::string_view to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::Ball: return "ball";
    case DomainKind::Ellipsoid: return "ellipsoid";
    case DomainKind::Superellipsoid: return "superellipsoid";
  }
  return "unknown";
}

// ---------------------------------------------------------------- domain

ConvexDomain::ConvexDomain(DomainKind kind, std::vector<double> center, DenseMatrix rotation,
                           std::vector<double> axes, double p)
    : kind_(kind), center_(std::move(center)), rotation_(std::move(rotation)), axes_(std::move(axes)), p_(p) {
  const std::size_t n = center_.size();
  require(n >= 2, "domain dimension must be at least 2");
  require(rotation_.size() == n && axes_.size() == n, "domain parts have inconsistent dimensions");
  for (double c : center_) require(std::isfinite(c), "center must be finite");
  for (double s : axes_) require(s > 0.0 && std::isfinite(s), "semi-axes must be positive");
  require(p_ > 1.0 && p_ <= 2.0, "superellipsoid exponent must lie in (1, 2]");
  if (rotation_.orthogonality_residual() > 1e-10) throw Error(ErrorCode::NotOrthogonal, "domain rotation");
}

ConvexDomain ConvexDomain::ball(std::vector<double> center, double radius) {
  const std::size_t n = center.size();
  return {DomainKind::Ball, std::move(center), DenseMatrix::identity(n), std::vector<double>(n, radius), 2.0};
}

ConvexDomain ConvexDomain::ellipsoid(std::vector<double> center, DenseMatrix rotation, std::vector<double> semi_axes) {
  return {DomainKind::Ellipsoid, std::move(center), std::move(rotation), std::move(semi_axes), 2.0};
}

ConvexDomain ConvexDomain::superellipsoid(std::vector<double> center, DenseMatrix rotation,
                                          std::vector<double> semi_axes, double exponent) {
  return {DomainKind::Superellipsoid, std::move(center), std::move(rotation), std::move(semi_axes), exponent};
}

double ConvexDomain::gauge(std::span<const double> x) const {
  check_dim(x, dim());
  std::vector<double> d(dim());
  for (std::size_t i = 0; i < dim(); ++i) d[i] = x[i] - center_[i];
  const std::vector<double> z = rotation_.apply(d);
  double s = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) s += std::pow(std::abs(z[i] / axes_[i]), p_);
  return std::pow(s, 1.0 / p_);
}

std::vector<double> ConvexDomain::normal(std::span<const double> x) const {
  check_dim(x, dim());
  const std::size_t n = dim();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - center_[i];
  const std::vector<double> z = rotation_.apply(d);
  std::vector<double> gz(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = z[i] / axes_[i];
    gz[i] = std::copysign(std::pow(std::abs(u), p_ - 1.0), u) / axes_[i];
  }
  std::vector<double> g = rotation_.apply_transpose(gz);
  const double len = norm(g);
  if (!(len > 0.0)) throw Error(ErrorCode::ZeroVector, "normal undefined at the domain center");
  for (double& v : g) v /= len;
  return g;
}

double ConvexDomain::support(std::span<const double> u) const {
  check_dim(u, dim());
  const std::vector<double> w = rotation_.apply(u);
  const double q = p_ / (p_ - 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) s += std::pow(std::abs(axes_[i] * w[i]), q);
  return dot(center_, u) + std::pow(s, 1.0 / q);
}

std::vector<double> ConvexDomain::boundary_point(std::span<const double> u) const {
  check_dim(u, dim());
  std::vector<double> probe(dim());
  for (std::size_t i = 0; i < dim(); ++i) probe[i] = center_[i] + u[i];
  const double g = gauge(probe);
  if (!(g > 0.0)) throw Error(ErrorCode::ZeroVector, "boundary_point needs a nonzero direction");
  for (std::size_t i = 0; i < dim(); ++i) probe[i] = center_[i] + u[i] / g;
  return probe;
}

std::vector<BoundaryPoint> ConvexDomain::mesh(std::size_t count) const {
  const std::size_t n = dim();
  require(count >= 2 * n, "boundary mesh needs at least 2n points");
  const auto dirs = quasi_uniform_directions(n, count, 0x6d657368ULL);
  std::vector<BoundaryPoint> out;
  out.reserve(count);
  for (const auto& u : dirs) {
    // Directions live in the local frame, so map them through R^T first.
    const std::vector<double> v = rotation_.apply_transpose(u);
    BoundaryPoint b;
    b.x = boundary_point(v);
    b.normal = normal(b.x);
    out.push_back(std::move(b));
  }
  return out;
}

ConvexDomain ConvexDomain::transformed(const DenseMatrix& V, double s, std::span<const double> shift) const {
  require(V.size() == dim(), "transform has the wrong dimension");
  require(s > 0.0 && std::isfinite(s), "scale must be positive");
  require(shift.empty() || shift.size() == dim(), "shift has the wrong dimension");
  std::vector<double> c = center_;
  for (std::size_t i = 0; i < shift.size(); ++i) c[i] -= shift[i];
  c = V.apply(c);
  for (double& v : c) v /= s;
  std::vector<double> axes = axes_;
  for (double& a : axes) a /= s;
  return {kind_, std::move(c), rotation_ * V.transpose(), std::move(axes), p_};
}

double ConvexDomain::chord_curvature(std::span<const BoundaryPoint> mesh) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : mesh) {
    for (const auto& b : mesh) {
      double d2 = 0.0;
      double lin = 0.0;
      for (std::size_t i = 0; i < a.x.size(); ++i) {
        const double d = b.x[i] - a.x[i];
        d2 += d * d;
        lin += a.normal[i] * d;
      }
      if (d2 == 0.0) continue;
      best = std::min(best, -2.0 * lin / d2);
    }
  }
  return best;
}

nlohmann::json ConvexDomain::to_json() const {
  nlohmann::json j;
  j["type"] = std::string(hqe::to_string(kind_));
  j["center"] = center_;
  if (kind_ == DomainKind::Ball) {
    j["radius"] = axes_.front();
    return j;
  }
  j["rotation"] = matrix_json(rotation_);
  j["semi_axes"] = axes_;
  if (kind_ == DomainKind::Superellipsoid) j["exponent"] = p_;
  return j;
}

ConvexDomain ConvexDomain::from_json(const nlohmann::json& in) {
  // Also accepts {"kind": ..., "parameters": {...}}.
  nlohmann::json j = in;
  if (j.is_object() && j.contains("parameters") && j.at("parameters").is_object()) {
    for (const auto& [key, value] : j.at("parameters").items()) j[key] = value;
    j.erase("parameters");
  }
  if (j.is_object() && !j.contains("type") && j.contains("kind")) j["type"] = j.at("kind");
  if (!j.is_object() || !j.contains("type")) throw Error(ErrorCode::ParseError, "domain needs a 'type'");
  const std::string type = j.at("type").get<std::string>();
  std::vector<double> center = json_vector(j, "center");
  const std::size_t n = center.size();
  if (type == "ball") {
    if (!j.contains("radius")) throw Error(ErrorCode::ParseError, "ball needs 'radius'");
    return ball(std::move(center), j.at("radius").get<double>());
  }
  DenseMatrix rot = j.contains("rotation") ? json_matrix(j.at("rotation"), n) : DenseMatrix::identity(n);
  std::vector<double> axes = json_vector(j, "semi_axes");
  if (type == "ellipsoid") return ellipsoid(std::move(center), std::move(rot), std::move(axes));
  if (type == "superellipsoid") {
    if (!j.contains("exponent")) throw Error(ErrorCode::ParseError, "superellipsoid needs 'exponent'");
    return superellipsoid(std::move(center), std::move(rot), std::move(axes), j.at("exponent").get<double>());
  }
  throw Error(ErrorCode::ParseError, "unknown domain type '" + type + "'");
}

// ---------------------------------------------------------------- polynomial

Polynomial::Polynomial(std::size_t n, std::vector<Term> terms) : n_(n), terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    require(t.powers.size() == n_, "polynomial term has the wrong number of powers");
    for (int p : t.powers) require(p >= 0, "polynomial powers must be non-negative");
    require(std::isfinite(t.coef), "polynomial coefficients must be finite");
  }
}

Polynomial Polynomial::constant(std::size_t n, double value) {
  return Polynomial(n, {Term{value, std::vector<int>(n, 0)}});
}

double Polynomial::value(std::span<const double> x) const {
  check_dim(x, n_);
  double s = 0.0;
  for (const auto& t : terms_) {
    double v = t.coef;
    for (std::size_t i = 0; i < n_; ++i) v *= std::pow(x[i], t.powers[i]);
    s += v;
  }
  return s;
}

std::vector<double> Polynomial::gradient(std::span<const double> x) const {
  check_dim(x, n_);
  std::vector<double> g(n_, 0.0);
  for (const auto& t : terms_) {
    for (std::size_t d = 0; d < n_; ++d) {
      if (t.powers[d] == 0) continue;
      double v = t.coef * t.powers[d];
      for (std::size_t i = 0; i < n_; ++i) v *= std::pow(x[i], i == d ? t.powers[i] - 1 : t.powers[i]);
      g[d] += v;
    }
  }
  return g;
}

nlohmann::json Polynomial::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : terms_) terms.push_back({{"coef", t.coef}, {"powers", t.powers}});
  return {{"terms", terms}};
}

Polynomial Polynomial::from_json(const nlohmann::json& j, std::size_t n) {
  if (j.is_number()) return constant(n, j.get<double>());
  if (!j.is_object() || !j.contains("terms")) throw Error(ErrorCode::ParseError, "polynomial needs 'terms'");
  std::vector<Term> terms;
  for (const auto& t : j.at("terms")) {
    if (!t.contains("coef") || !t.contains("powers")) {
      throw Error(ErrorCode::ParseError, "polynomial term needs 'coef' and 'powers'");
    }
    terms.push_back(Term{t.at("coef").get<double>(), t.at("powers").get<std::vector<int>>()});
    if (terms.back().powers.size() != n) throw Error(ErrorCode::ParseError, "polynomial term has the wrong dimension");
  }
  return Polynomial(n, std::move(terms));
}

// ---------------------------------------------------------------- boundary data

BoundaryData BoundaryData::from_polynomial(const Polynomial& p) {
  BoundaryData d;
  d.value = [p](std::span<const double> x) { return p.value(x); };
  d.gradient = [p](std::span<const double> x) { return p.gradient(x); };
  d.description = p.to_json();
  return d;
}

BoundaryData BoundaryData::constant(std::size_t n, double v) { return from_polynomial(Polynomial::constant(n, v)); }

BoundaryData BoundaryData::transformed(const DenseMatrix& V, std::span<const double> b, double s,
                                       std::span<const double> shift) const {
  const std::size_t n = V.size();
  require(b.size() == n, "linear term has the wrong dimension");
  require(s > 0.0, "scale must be positive");
  require(shift.empty() || shift.size() == n, "shift has the wrong dimension");
  std::vector<double> x0(n, 0.0);
  for (std::size_t i = 0; i < shift.size(); ++i) x0[i] = shift[i];
  BoundaryData out;
  const auto base_value = value;
  const auto base_gradient = gradient;
  std::vector<double> bb(b.begin(), b.end());
  auto to_x = [V, s, x0](std::span<const double> y) {
    std::vector<double> x = V.apply_transpose(y);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0[i] + s * x[i];
    return x;
  };
  out.value = [=](std::span<const double> y) {
    const std::vector<double> x = to_x(y);
    double lin = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) lin += bb[i] * (x[i] - x0[i]);
    return (base_value(x) - lin) / (s * s);
  };
  out.gradient = [=](std::span<const double> y) {
    const std::vector<double> x = to_x(y);
    std::vector<double> g = base_gradient(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= bb[i];
    std::vector<double> gy = V.apply(g);
    for (double& v : gy) v /= s;
    return gy;
  };
  out.description = {{"transformed_from", description}, {"scale", s}, {"shift", x0}};
  return out;
}

// ---------------------------------------------------------------- quadratics

SampledBoundary SampledBoundary::sample(const ConvexDomain& D, const BoundaryData& data, std::size_t count) {
  SampledBoundary s;
  s.points = D.mesh(count);
  s.phi.reserve(s.points.size());
  for (const auto& b : s.points) s.phi.push_back(data.value(b.x));
  return s;
}

QuadraticMetric::QuadraticMetric(const SymMatrix& a) : A(a) {
  const EigenDecomposition e = eigh(a);
  lambda_min = e.values[0];
  lambda_max = e.values[e.values.size() - 1];
  if (!(lambda_min > 0.0)) throw Error(ErrorCode::NotPositiveCone, "A must be positive definite");
  std::vector<double> inv(e.values.size());
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / e.values[i];
  A_inv = conjugate_by(e.vectors, SymMatrix::diagonal(inv));
}

double TouchingQuadratic::operator()(const QuadraticMetric& metric, std::span<const double> x) const {
  return 0.5 * metric.norm_sq(x) - dot(w, x) + k;
}

namespace {

/// Q_xi(x) - phi(x) = (x-xi)^T A (x-xi)/2 + (g + t nu).(x-xi) + phi(xi) - phi(x).
double touch_gap(const QuadraticMetric& metric, std::span<const double> dx, std::span<const double> g,
                 std::span<const double> nu, double t, double phi_xi, double phi_x) {
  double lin = 0.0;
  for (std::size_t i = 0; i < dx.size(); ++i) lin += (g[i] + t * nu[i]) * dx[i];
  return 0.5 * metric.norm_sq(dx) + lin + phi_xi - phi_x;
}

}  // namespace

TouchingQuadratic touching_quadratic(const ConvexDomain& D, const BoundaryData& phi, const QuadraticMetric& metric,
                                     const BoundaryPoint& xi, const SampledBoundary& mesh,
                                     const SampledBoundary& refined, const TouchingOptions& opts) {
  const std::size_t n = D.dim();
  check_dim(xi.x, n);
  const std::vector<double>& nu = xi.normal;
  const std::vector<double> g = phi.gradient(xi.x);
  const double phi_xi = phi.value(xi.x);
  const double floor = opts.margin_floor * metric.lambda_min;
  const double scale = std::max(1.0, norm(xi.x));
  const double same = 1e-12 * scale;

  // Smallest t with gap(x) + floor |x - xi|^2 <= 0, in closed form per
  // point since the gap is affine in t with slope nu.(x - xi) < 0.
  std::vector<double> dx(n);
  bool blocked = false;
  auto required_t = [&](std::span<const double> x, double phi_x) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] - xi.x[i];
    const double d2 = dot(dx, dx);
    if (d2 <= same * same) return -std::numeric_limits<double>::infinity();
    const double base = touch_gap(metric, dx, g, nu, 0.0, phi_xi, phi_x) + floor * d2;
    const double slope = dot(nu, dx);
    if (slope >= -1e-14 * d2) {
      if (base > 0.0) blocked = true;
      return -std::numeric_limits<double>::infinity();
    }
    return base / -slope;
  };

  constexpr std::size_t kSeeds = 4;
  std::vector<std::pair<double, std::vector<double>>> seeds;
  double t_needed = -std::numeric_limits<double>::infinity();
  auto consider = [&](std::span<const double> x, double need) {
    t_needed = std::max(t_needed, need);
    if (!std::isfinite(need)) return;
    if (seeds.size() < kSeeds) {
      seeds.emplace_back(need, std::vector<double>(x.begin(), x.end()));
    } else {
      auto lowest = std::min_element(seeds.begin(), seeds.end());
      if (need > lowest->first) *lowest = {need, std::vector<double>(x.begin(), x.end())};
    }
  };
  for (const SampledBoundary* pts : {&mesh, &refined}) {
    for (std::size_t j = 0; j < pts->size(); ++j) consider(pts->points[j].x, required_t(pts->points[j].x, pts->phi[j]));
  }
  if (blocked) throw Error(ErrorCode::NoTouchingQuadratic, "boundary is not strictly convex near a mesh point");

  // The sampled maximum can sit well below the true one between nodes, so
  // climb from the best few nodes by pattern search on the ray direction.
  // Points next to xi, where the slope is lost in rounding, are skipped.
  const std::vector<double>& c0 = D.center();
  for (const auto& [need0, x0] : seeds) {
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = x0[i] - c0[i];
    double best = need0;
    double h = 0.05;
    std::vector<double> trial(n);
    while (h > 1e-5) {
      bool improved = false;
      const double ulen = norm(u);
      for (std::size_t dir = 0; dir < n && !improved; ++dir) {
        for (double sgn : {1.0, -1.0}) {
          for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + (i == dir ? sgn * h * ulen : 0.0);
          const std::vector<double> x = D.boundary_point(trial);
          const double need = required_t(x, phi.value(x));
          if (need > best + 1e-12 * std::max(1.0, std::abs(best))) {
            best = need;
            u = trial;
            improved = true;
            break;
          }
        }
      }
      if (!improved) h *= 0.5;
    }
    t_needed = std::max(t_needed, best);
  }

  double t = std::isfinite(t_needed) ? t_needed : 0.0;
  t += opts.safety * std::max(std::abs(t), metric.lambda_min);
  if (t > opts.t_max) {
    throw Error(ErrorCode::NoTouchingQuadratic, "touching needs t = " + std::to_string(t) + " above the cap");
  }

  auto margins = [&](const SampledBoundary& pts) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const auto& x = pts.points[j].x;
      for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] - xi.x[i];
      const double d2 = dot(dx, dx);
      if (d2 <= same * same) continue;
      worst = std::min(worst, -touch_gap(metric, dx, g, nu, t, phi_xi, pts.phi[j]) / d2);
    }
    return worst;
  };

  // The denser mesh can expose points between mesh nodes where Q_xi pokes
  // above phi; keep doubling t until it does not.
  double refined_margin = margins(refined);
  while (!(refined_margin > 0.0)) {
    t = std::max(2.0 * t, metric.lambda_min);
    if (t > opts.t_max) {
      throw Error(ErrorCode::NoTouchingQuadratic,
                  "no touching quadratic below phi with t <= " + std::to_string(opts.t_max));
    }
    refined_margin = margins(refined);
  }

  TouchingQuadratic q;
  q.xi = xi.x;
  q.normal = nu;
  q.t = t;
  q.w = metric.A.apply(xi.x);
  for (std::size_t i = 0; i < n; ++i) q.w[i] -= g[i] + t * nu[i];
  q.x_bar = metric.A_inv.apply(q.w);
  q.k = dot(q.w, xi.x) - 0.5 * metric.norm_sq(xi.x) + phi_xi;
  q.value_at_xi = phi_xi;
  q.margin = margins(mesh);
  q.refined_margin = refined_margin;
  return q;
}

// ---------------------------------------------------------------- envelope

nlohmann::json EnvelopeConstants::to_json() const {
  return {{"eta", eta},
          {"c_bar", c_bar},
          {"c_tilde", c_tilde},
          {"beta_hat", beta_hat},
          {"mu_beta_hat", mu_beta_hat},
          {"r_in", r_in},
          {"r_out", r_out},
          {"r_bar", r_bar},
          {"r_hat", r_hat},
          {"K", K},
          {"curvature", curvature},
          {"q_max_on_r_hat", q_max_on_r_hat},
          {"mesh_size", mesh_size},
          {"refined_size", refined_size}};
}

Envelope::Envelope(const ConvexDomain& D, const BoundaryData& phi, const SymMatrix& A, std::size_t mesh_size,
                   const TouchingOptions& opts)
    : D_(D), phi_(phi), metric_(A) {
  const std::size_t n = D.dim();
  require(A.size() == n, "A and the domain have different dimensions");
  require(opts.refine_factor >= 1, "refine_factor must be at least 1");
  mesh_ = SampledBoundary::sample(D, phi_, mesh_size);
  const SampledBoundary refined = SampledBoundary::sample(D, phi_, mesh_size * opts.refine_factor);

  EnvelopeConstants& c = constants_;
  c.mesh_size = mesh_.size();
  c.refined_size = refined.size();
  c.r_in = std::numeric_limits<double>::infinity();
  c.r_out = 0.0;
  for (const SampledBoundary* pts : {static_cast<const SampledBoundary*>(&mesh_), &refined}) {
    for (const auto& b : pts->points) {
      const double r = std::sqrt(metric_.norm_sq(b.x));
      c.r_in = std::min(c.r_in, r);
      c.r_out = std::max(c.r_out, r);
    }
  }
  c.r_bar = 1.1 * c.r_out;
  c.r_hat = 2.0 * c.r_out;
  c.curvature = ConvexDomain::chord_curvature(mesh_.points);

  quads_.resize(mesh_.size());
  std::vector<double> eta_at(mesh_.size());
  parallel_for(mesh_.size(), opts.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      TouchingQuadratic q = touching_quadratic(D_, phi_, metric_, mesh_.points[j], mesh_, refined, opts);
      // inf of Q_xi over cl(E_rbar) \ D. A convex quadratic whose minimizer
      // xbar sits inside D is smallest on the boundary of D; one whose
      // minimizer lies beyond E_rbar is smallest on its A-sphere, at A-distance
      // r_A(xbar) - r_bar from xbar.
      const double unconstrained = phi_.value(q.xi) - 0.5 * metric_.norm_sq([&] {
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = q.xi[i] - q.x_bar[i];
        return d;
      }());
      const double rx = std::sqrt(metric_.norm_sq(q.x_bar));
      double eta = 0.0;
      if (D_.contains(q.x_bar)) {
        eta = std::numeric_limits<double>::infinity();
        for (const SampledBoundary* pts : {static_cast<const SampledBoundary*>(&mesh_), &refined}) {
          for (const auto& p : pts->points) eta = std::min(eta, q(metric_, p.x));
        }
      } else if (rx <= c.r_bar) {
        eta = unconstrained;
      } else {
        eta = unconstrained + 0.5 * (rx - c.r_bar) * (rx - c.r_bar);
      }
      eta_at[j] = eta;
      quads_[j] = std::move(q);
    }
  });

  c.eta = std::numeric_limits<double>::infinity();
  c.c_bar = -std::numeric_limits<double>::infinity();
  c.K = 0.0;
  for (std::size_t j = 0; j < quads_.size(); ++j) {
    const auto& q = quads_[j];
    c.eta = std::min(c.eta, eta_at[j]);
    std::vector<double> minus_w = q.w;
    for (double& v : minus_w) v = -v;
    // Q_xi - x^T A x / 2 = k - w.x is affine, so its max over the boundary
    // is the support function of D.
    c.c_bar = std::max(c.c_bar, q.k + D_.support(minus_w));
    c.K = std::max(c.K, norm(q.x_bar));
  }
  c.q_max_on_r_hat = max_on_shell(c.r_hat);
}

double Envelope::operator()(std::span<const double> x) const {
  check_dim(x, D_.dim());
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& q : quads_) best = std::max(best, q.k - dot(q.w, x));
  return 0.5 * metric_.norm_sq(x) + best;
}

double Envelope::max_on_shell(double r) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& q : quads_) {
    // max of -w.x over r_A(x) = r is r |w|_{A^-1} = r r_A(xbar).
    best = std::max(best, q.k + r * std::sqrt(metric_.norm_sq(q.x_bar)));
  }
  return 0.5 * r * r + best;
}

double Envelope::boundary_defect() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < mesh_.size(); ++j) {
    worst = std::max(worst, std::abs((*this)(mesh_.points[j].x) - mesh_.phi[j]));
  }
  return worst;
}

// ---------------------------------------------------------------- beta

double mu_of_beta(const EnvelopeConstants& constants, const ProfileSpec& spec, double beta) {
  return constants.eta - 0.5 * constants.r_bar * constants.r_bar + mu(constants.r_bar, beta, spec);
}

double envelope_phi(const EnvelopeConstants& constants, const ProfileSpec& spec, double beta, double r) {
  return 0.5 * r * r + mu_of_beta(constants, spec, beta) - mu(r, beta, spec);
}

double beta_hat(Envelope& env, const ProfileSpec& spec) {
  EnvelopeConstants& c = env.constants();
  const double target = c.q_max_on_r_hat;
  for (int j = 0; j < 1000; ++j) {
    const double beta = 1.0 + std::ldexp(1.0, j) / 8.0;
    if (!std::isfinite(beta)) break;
    if (envelope_phi(c, spec, beta, c.r_hat) > target) {
      c.beta_hat = beta;
      c.mu_beta_hat = mu_of_beta(c, spec, beta);
      c.c_tilde = std::max({c.eta, c.mu_beta_hat, c.c_bar});
      return beta;
    }
  }
  throw Error(ErrorCode::NoConvergence, "no beta on the doubling schedule lifts Phi above Q on r_A = r_hat");
}

double beta_of_c(double c, const EnvelopeConstants& constants, const ProfileSpec& spec) {
  if (!(constants.beta_hat >= 1.0)) throw Error(ErrorCode::InvalidArgument, "beta_hat has not been computed");
  if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "c must be finite");
  if (c < constants.c_tilde) {
    throw Error(ErrorCode::CTooSmall,
                "c = " + fmt17(c) + " is below the threshold c_tilde = " + fmt17(constants.c_tilde));
  }
  auto f = [&](double beta) { return mu_of_beta(constants, spec, beta) - c; };
  double hi = std::max(2.0, constants.beta_hat);
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw Error(ErrorCode::NoConvergence, "mu(beta) = c has no bracket");
  }
  if (f(1.0) >= 0.0) return 1.0;
  return bracketed_root(f, 1.0, hi).x;
}

}  // namespace hqe
