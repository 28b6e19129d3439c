#include "hqe/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hqe {

DenseMatrix::DenseMatrix(std::size_t n, std::vector<double> row_major) : n_(n), a_(std::move(row_major)) {
  if (a_.size() != n * n) throw Error(ErrorCode::InvalidArgument, "matrix data has wrong size");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& rhs) const {
  if (rhs.n_ != n_) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  DenseMatrix out(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k < n_; ++k) {
      const double aik = (*this)(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n_; ++j) out(i, j) += aik * rhs(k, j);
    }
  return out;
}

std::vector<double> DenseMatrix::apply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) y[i] += (*this)(i, j) * x[j];
  return y;
}

std::vector<double> DenseMatrix::apply_transpose(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) y[j] += (*this)(i, j) * x[i];
  return y;
}

double DenseMatrix::orthogonality_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n_; ++k) s += (*this)(k, i) * (*this)(k, j);
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

SymMatrix SymMatrix::identity(std::size_t n, double scale) {
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, scale);
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
  SymMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.set(i, i, d[i]);
  return m;
}

SymMatrix SymMatrix::from_dense(const DenseMatrix& d) {
  const std::size_t n = d.size();
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (d(i, j) != d(j, i)) {
        throw Error(ErrorCode::InvalidArgument,
                    "matrix not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      m.set(i, j, d(i, j));
    }
  return m;
}

SymMatrix SymMatrix::symmetrized(const DenseMatrix& d) {
  const std::size_t n = d.size();
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m.set(i, j, 0.5 * (d(i, j) + d(j, i)));
  return m;
}

DenseMatrix SymMatrix::to_dense() const {
  DenseMatrix d(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) d(i, j) = (*this)(i, j);
  return d;
}

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : upper_) m = std::max(m, std::abs(v));
  return m;
}

double SymMatrix::frobenius() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
  return std::sqrt(s);
}

bool SymMatrix::is_diagonal() const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if ((*this)(i, j) != 0.0) return false;
  return true;
}

std::vector<double> SymMatrix::diagonal_entries() const {
  std::vector<double> d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = (*this)(i, i);
  return d;
}

std::vector<double> SymMatrix::apply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) y[i] += (*this)(i, j) * x[j];
  return y;
}

double SymMatrix::quadratic_form(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    s += (*this)(i, i) * x[i] * x[i];
    for (std::size_t j = i + 1; j < n_; ++j) s += 2.0 * (*this)(i, j) * x[i] * x[j];
  }
  return s;
}

SymMatrix SymMatrix::scaled(double s) const {
  SymMatrix m = *this;
  for (double& v : m.upper_) v *= s;
  return m;
}

SymMatrix EigenDecomposition::reconstruct() const {
  const std::size_t n = values.size();
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += vectors(k, i) * values[k] * vectors(k, j);
      m.set(i, j, s);
    }
  return m;
}

EigenDecomposition eigh(const SymMatrix& input) {
  const std::size_t n = input.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty matrix");
  DenseMatrix a = input.to_dense();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!std::isfinite(a(i, j))) throw Error(ErrorCode::InvalidArgument, "non-finite matrix entry");

  DenseMatrix v = DenseMatrix::identity(n);  // columns accumulate eigenvectors
  const double target = 1e-14 * input.frobenius();
  constexpr int kMaxSweeps = 50;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > target) {
    if (sweep == kMaxSweeps) {
      throw Error(ErrorCode::NoConvergence, "Jacobi did not converge in 50 sweeps");
    }
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(1.0, theta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  std::vector<double> values(n);
  DenseMatrix q(n);
  for (std::size_t r = 0; r < n; ++r) {
    values[r] = a(order[r], order[r]);
    for (std::size_t k = 0; k < n; ++k) q(r, k) = v(k, order[r]);
  }
  return EigenDecomposition{SymVec(std::move(values)), std::move(q), sweep};
}

SymMatrix conjugate_by(const DenseMatrix& q, const SymMatrix& m) {
  if (q.size() != m.size()) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  const double resid = q.orthogonality_residual();
  if (resid > 1e-12) {
    throw Error(ErrorCode::NotOrthogonal, "max |Q^T Q - I| = " + std::to_string(resid));
  }
  const std::size_t n = m.size();
  const DenseMatrix mq = m.to_dense() * q;
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q(k, i) * mq(k, j);
      out.set(i, j, s);
    }
  return out;
}

}  // namespace hqe
