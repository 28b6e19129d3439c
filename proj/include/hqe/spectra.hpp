#pragma once

// Small dense symmetric eigenproblems (cyclic Jacobi) and the orthogonal
// change of frame A = Q^T N Q used to diagonalize a problem.

#include "hqe/symfunc.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hqe {

/// Square row-major matrix. Used for orthogonal frames and for raw input
/// that has not been symmetrized yet.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}
  DenseMatrix(std::size_t n, std::vector<double> row_major);

  static DenseMatrix identity(std::size_t n);

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  [[nodiscard]] std::span<const double> row(std::size_t i) const { return {a_.data() + i * n_, n_}; }

  [[nodiscard]] DenseMatrix transpose() const;
  [[nodiscard]] DenseMatrix operator*(const DenseMatrix& rhs) const;
  [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;
  [[nodiscard]] std::vector<double> apply_transpose(std::span<const double> x) const;

  /// max |Q^T Q - I| entry.
  [[nodiscard]] double orthogonality_residual() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// Symmetric matrix stored as its packed upper triangle, so (i,j) and (j,i)
/// are the same storage cell.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n) : n_(n), upper_(n * (n + 1) / 2, 0.0) {}

  static SymMatrix identity(std::size_t n, double scale = 1.0);
  static SymMatrix diagonal(std::span<const double> d);
  /// Throws InvalidArgument unless the input is exactly symmetric.
  static SymMatrix from_dense(const DenseMatrix& m);
  /// (M + M^T) / 2 for arbitrary square input.
  static SymMatrix symmetrized(const DenseMatrix& m);

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return upper_[index(i, j)]; }
  void set(std::size_t i, std::size_t j, double v) { upper_[index(i, j)] = v; }

  [[nodiscard]] DenseMatrix to_dense() const;
  [[nodiscard]] double max_abs() const;
  [[nodiscard]] double frobenius() const;
  [[nodiscard]] bool is_diagonal() const;
  [[nodiscard]] std::vector<double> diagonal_entries() const;
  [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;
  [[nodiscard]] double quadratic_form(std::span<const double> x) const;
  [[nodiscard]] SymMatrix scaled(double s) const;

 private:
  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j) const noexcept {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i + 1) / 2 + j;
  }

  std::size_t n_ = 0;
  std::vector<double> upper_;
};

/// A = Q^T diag(values) Q with Q orthogonal; rows of Q are eigenvectors and
/// values are ascending.
struct EigenDecomposition {
  SymVec values;
  DenseMatrix vectors;
  int sweeps = 0;

  [[nodiscard]] SymMatrix reconstruct() const;
};

/// Cyclic Jacobi to off-diagonal Frobenius norm <= 1e-14 ||A||_F.
/// Throws NoConvergence after 50 sweeps.
EigenDecomposition eigh(const SymMatrix& a);

/// Q^T M Q. Throws NotOrthogonal if max|Q^T Q - I| > 1e-12.
SymMatrix conjugate_by(const DenseMatrix& q, const SymMatrix& m);

}  // namespace hqe
