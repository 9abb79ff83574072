// Copyright 2026 The diamondlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense complex linear algebra with subsystem bookkeeping.
//
// Storage is row-major. A multi-index (i_1, ..., i_k) over subsystem
// dimensions (d_1, ..., d_k) maps to the flat index
//   i_1 * (d_2 ... d_k) + ... + i_k,
// so the leftmost factor is the slowest-varying one. Every module uses this.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "diamondlab/errors.hpp"

namespace diamondlab {

using cplx = std::complex<double>;
using Matrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

inline std::size_t dims_product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string dims_string(const Dims& dims) {
  std::string s = "(";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + ")";
}

/// A dense complex matrix together with the tensor-factor structure of its
/// row and column spaces.
class Operator {
 public:
  Operator() : Operator(Matrix(0, 0)) {}

  explicit Operator(Matrix entries)
      : entries_(std::move(entries)),
        row_dims_{static_cast<std::size_t>(entries_.rows())},
        col_dims_{static_cast<std::size_t>(entries_.cols())} {
    check_finite();
  }

  Operator(Matrix entries, Dims row_dims, Dims col_dims)
      : entries_(std::move(entries)), row_dims_(std::move(row_dims)), col_dims_(std::move(col_dims)) {
    if (dims_product(row_dims_) != static_cast<std::size_t>(entries_.rows()) ||
        dims_product(col_dims_) != static_cast<std::size_t>(entries_.cols())) {
      throw DimensionError("Operator: dims " + dims_string(row_dims_) + "x" + dims_string(col_dims_) +
                           " do not match a " + std::to_string(entries_.rows()) + "x" +
                           std::to_string(entries_.cols()) + " matrix");
    }
    for (auto d : row_dims_)
      if (d == 0) throw DimensionError("Operator: zero subsystem dimension");
    for (auto d : col_dims_)
      if (d == 0) throw DimensionError("Operator: zero subsystem dimension");
    check_finite();
  }

  /// Square operator on a space with the given factors.
  Operator(Matrix entries, const Dims& dims) : Operator(std::move(entries), dims, dims) {}

  static Operator identity(std::size_t d) { return Operator(Matrix::Identity(d, d)); }
  static Operator identity(const Dims& dims) {
    auto n = dims_product(dims);
    return Operator(Matrix::Identity(n, n), dims, dims);
  }
  static Operator zeros(std::size_t rows, std::size_t cols) { return Operator(Matrix::Zero(rows, cols)); }
  static Operator diagonal(std::span<const cplx> diag) {
    Matrix m = Matrix::Zero(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return Operator(std::move(m));
  }
  static Operator diagonal(std::initializer_list<cplx> diag) {
    return diagonal(std::span<const cplx>(diag.begin(), diag.size()));
  }
  /// |i><j| in dimension d.
  static Operator unit(std::size_t d, std::size_t i, std::size_t j) {
    Matrix m = Matrix::Zero(d, d);
    m(i, j) = 1.0;
    return Operator(std::move(m));
  }

  const Matrix& matrix() const { return entries_; }
  std::size_t rows() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(entries_.cols()); }
  const Dims& row_dims() const { return row_dims_; }
  const Dims& col_dims() const { return col_dims_; }
  bool is_square() const { return entries_.rows() == entries_.cols(); }
  cplx operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }

  /// Same entries, different factorization of the row/column spaces.
  Operator with_dims(Dims row_dims, Dims col_dims) const {
    return Operator(entries_, std::move(row_dims), std::move(col_dims));
  }
  Operator with_dims(const Dims& dims) const { return with_dims(dims, dims); }

  Operator adjoint() const { return Operator(entries_.adjoint(), col_dims_, row_dims_); }
  Operator transpose() const { return Operator(entries_.transpose(), col_dims_, row_dims_); }
  cplx trace() const {
    require_square("trace");
    return entries_.trace();
  }
  double frobenius_norm() const { return entries_.norm(); }

  friend Operator operator+(const Operator& a, const Operator& b) {
    a.require_same_shape(b, "+");
    return Operator(a.entries_ + b.entries_, a.row_dims_, a.col_dims_);
  }
  friend Operator operator-(const Operator& a, const Operator& b) {
    a.require_same_shape(b, "-");
    return Operator(a.entries_ - b.entries_, a.row_dims_, a.col_dims_);
  }
  friend Operator operator*(const Operator& a, const Operator& b) {
    if (a.cols() != b.rows())
      throw DimensionError("Operator *: inner dimensions " + std::to_string(a.cols()) + " and " +
                           std::to_string(b.rows()) + " differ");
    return Operator(a.entries_ * b.entries_, a.row_dims_, b.col_dims_);
  }
  friend Operator operator*(cplx s, const Operator& a) { return Operator(s * a.entries_, a.row_dims_, a.col_dims_); }
  friend Operator operator*(const Operator& a, cplx s) { return s * a; }

 private:
  void check_finite() const {
    if (!entries_.allFinite()) throw ContractViolation("Operator: entries must be finite");
  }
  void require_square(const char* what) const {
    if (!is_square()) throw DimensionError(std::string(what) + ": operator is not square");
  }
  void require_same_shape(const Operator& o, const char* what) const {
    if (rows() != o.rows() || cols() != o.cols())
      throw DimensionError(std::string("Operator ") + what + ": shape mismatch");
  }

  Matrix entries_;
  Dims row_dims_;
  Dims col_dims_;
};

/// Descending eigenvalues and matching eigenvectors (columns).
struct SpectralDecomposition {
  RealVector eigenvalues;
  Matrix eigenvectors;
};

inline constexpr double kHermitianTolerance = 1e-10;

// ---------------------------------------------------------------------------
// Tensor products and partial traces

inline Operator tensor(const Operator& a, const Operator& b) {
  const Matrix& A = a.matrix();
  const Matrix& B = b.matrix();
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  Dims rd = a.row_dims(), cd = a.col_dims();
  rd.insert(rd.end(), b.row_dims().begin(), b.row_dims().end());
  cd.insert(cd.end(), b.col_dims().begin(), b.col_dims().end());
  return Operator(std::move(out), std::move(rd), std::move(cd));
}

inline Operator tensor(std::initializer_list<Operator> factors) {
  auto it = factors.begin();
  Operator out = *it++;
  for (; it != factors.end(); ++it) out = tensor(out, *it);
  return out;
}

namespace detail {

// Flat offsets contributed by every multi-index over the selected subsystems.
inline std::vector<std::size_t> subsystem_offsets(const Dims& dims, const std::vector<std::size_t>& which) {
  std::vector<std::size_t> strides(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) strides[k - 1] = strides[k] * dims[k];
  std::vector<std::size_t> offsets{0};
  for (auto k : which) {
    std::vector<std::size_t> next;
    next.reserve(offsets.size() * dims[k]);
    for (auto base : offsets)
      for (std::size_t v = 0; v < dims[k]; ++v) next.push_back(base + v * strides[k]);
    offsets = std::move(next);
  }
  return offsets;
}

}  // namespace detail

/// Traces out every subsystem not listed in `keep`. Kept subsystems retain
/// their original relative order.
inline Operator partial_trace(const Operator& x, std::vector<std::size_t> keep) {
  if (!x.is_square() || x.row_dims() != x.col_dims())
    throw DimensionError("partial_trace: operator must be square with matching row/col dims");
  const Dims& dims = x.row_dims();
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end())
    throw DimensionError("partial_trace: repeated subsystem index");
  std::vector<std::size_t> traced;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (!std::binary_search(keep.begin(), keep.end(), k)) traced.push_back(k);
  }
  for (auto k : keep)
    if (k >= dims.size())
      throw DimensionError("partial_trace: subsystem index " + std::to_string(k) + " out of range for " +
                           dims_string(dims));

  const auto kept_off = detail::subsystem_offsets(dims, keep);
  const auto traced_off = detail::subsystem_offsets(dims, traced);
  const Matrix& m = x.matrix();
  Matrix out = Matrix::Zero(kept_off.size(), kept_off.size());
  for (std::size_t i = 0; i < kept_off.size(); ++i)
    for (std::size_t j = 0; j < kept_off.size(); ++j) {
      cplx acc = 0.0;
      for (auto t : traced_off) acc += m(kept_off[i] + t, kept_off[j] + t);
      out(i, j) = acc;
    }
  Dims kept_dims;
  for (auto k : keep) kept_dims.push_back(dims[k]);
  if (kept_dims.empty()) kept_dims.push_back(1);
  return Operator(std::move(out), kept_dims, kept_dims);
}

// ---------------------------------------------------------------------------
// Spectra and norms

inline RealVector singular_values(const Matrix& m) {
  if (m.size() == 0) return RealVector(0);
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

inline double trace_norm(const Operator& x) { return singular_values(x.matrix()).sum(); }

inline double operator_norm(const Matrix& m) {
  auto s = singular_values(m);
  return s.size() ? s.maxCoeff() : 0.0;
}
inline double operator_norm(const Operator& x) { return operator_norm(x.matrix()); }

/// sqrt(||A||_2^2 + ||B||_2^2), the l2-sum of Frobenius norms.
inline double pair_two_norm(const Operator& a, const Operator& b) {
  return std::sqrt(a.matrix().squaredNorm() + b.matrix().squaredNorm());
}

/// ||X - X^dag||_op <= tol * ||X||_op, checked cheaply via Frobenius bounds
/// before falling back to singular values.
inline bool is_hermitian(const Matrix& m, double tol = kHermitianTolerance) {
  if (m.rows() != m.cols()) return false;
  const double skew_f = (m - m.adjoint()).norm();
  if (skew_f == 0.0) return true;
  const double n = static_cast<double>(m.rows());
  if (skew_f <= tol * m.norm() / std::sqrt(n)) return true;
  return operator_norm(Matrix(m - m.adjoint())) <= tol * operator_norm(m);
}

/// Eigenvalues only, descending. Input is symmetrized; no Hermiticity check.
inline RealVector hermitian_eigenvalues_unchecked(const Matrix& m) {
  if (m.size() == 0) return RealVector(0);
  Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

inline SpectralDecomposition hermitian_eig(const Operator& x) {
  if (!is_hermitian(x.matrix()))
    throw ContractViolation("hermitian_eig: input is not Hermitian within tolerance");
  Matrix h = 0.5 * (x.matrix() + x.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  return {es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
}

inline RealVector hermitian_eigenvalues(const Operator& x) {
  if (!is_hermitian(x.matrix()))
    throw ContractViolation("hermitian_eigenvalues: input is not Hermitian within tolerance");
  return hermitian_eigenvalues_unchecked(x.matrix());
}

/// Nonzero eigenvalues of the Hermitian matrix M * Sigma * M^dag, computed
/// through a thin QR of M. Sigma must be Hermitian and M tall or square.
inline RealVector congruence_eigenvalues(const Matrix& m, const Matrix& sigma) {
  if (m.cols() != sigma.rows() || sigma.rows() != sigma.cols())
    throw DimensionError("congruence_eigenvalues: shape mismatch");
  if (m.cols() >= m.rows()) return hermitian_eigenvalues_unchecked(m * sigma * m.adjoint());
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  return hermitian_eigenvalues_unchecked(r * sigma * r.adjoint());
}

/// Singular values of A * B^dag for tall A, B with few columns.
inline RealVector low_rank_product_singular_values(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("low_rank_product_singular_values: A and B must have the same shape");
  if (a.cols() >= a.rows() || b.cols() >= b.rows()) return singular_values(a * b.adjoint());
  Eigen::HouseholderQR<Matrix> qa(a), qb(b);
  Matrix ra = qa.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
  Matrix rb = qb.matrixQR().topRows(b.cols()).triangularView<Eigen::Upper>();
  return singular_values(ra * rb.adjoint());
}

/// ||W1 W1^dag - W2 W2^dag||_1 without forming the full difference.
inline double gram_difference_trace_norm(const Matrix& w1, const Matrix& w2) {
  if (w1.rows() != w2.rows()) throw DimensionError("gram_difference_trace_norm: row mismatch");
  const Eigen::Index k1 = w1.cols(), k2 = w2.cols();
  Matrix m(w1.rows(), k1 + k2);
  m << w1, w2;
  Matrix sigma = Matrix::Zero(k1 + k2, k1 + k2);
  sigma.topLeftCorner(k1, k1).setIdentity();
  sigma.bottomRightCorner(k2, k2) = -Matrix::Identity(k2, k2);
  return congruence_eigenvalues(m, sigma).cwiseAbs().sum();
}

/// Principal square root of a positive semidefinite matrix.
inline Matrix psd_sqrt(const Matrix& m) {
  Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  RealVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

/// exp(i * H) for Hermitian H.
inline Matrix unitary_exp(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (h + h.adjoint())));
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, es.eigenvalues()(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace diamondlab
