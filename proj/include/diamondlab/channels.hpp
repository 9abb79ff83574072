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

// Kraus, Stinespring and Choi representations of quantum channels.
//
// An Isometry V maps C^{d_A} into E (x) B with the environment factor E on the
// left, so the Kraus operator K_e = <e|_E V is the row block e of V. Where a
// construction is naturally written with output (B, E), the repo uses the
// fixed permutation to (E, B); operator-norm and Choi distances are invariant
// under it.
//
// Diamond distances are never computed. Consumers use the sandwich
//   ||J_1 - J_2||_1 <= ||Phi_1 - Phi_2||_diamond <= 2 ||V_1 - V_2||_op.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diamondlab/errors.hpp"
#include "diamondlab/matrix.hpp"

namespace diamondlab {

inline constexpr double kIsometryTolerance = 1e-10;
inline constexpr double kCompletenessTolerance = 1e-10;

namespace detail {

/// ||M - 1||_op, with a Frobenius shortcut when that already certifies `tol`.
inline double identity_residual(const Matrix& m, double tol) {
  Matrix diff = m - Matrix::Identity(m.rows(), m.cols());
  const double f = diff.norm();
  if (f <= tol) return f;
  return operator_norm(diff);
}

}  // namespace detail

/// For an operator X : C^{d_A} -> E (x) B (rows ordered (E, B)), the matrix
/// W[(a, b), e] = X[(e, b), a] / sqrt(d_A). Then
///   W_1 W_2^dag = Tr_E[(1 (x) X_1) Psi (1 (x) X_2)^dag]
/// with Psi the normalized maximally entangled state on A'A.
inline Matrix choi_factor(const Matrix& x, std::size_t d_E, std::size_t d_B) {
  if (static_cast<std::size_t>(x.rows()) != d_E * d_B) throw DimensionError("choi_factor: rows must be d_E * d_B");
  const auto dA = static_cast<std::size_t>(x.cols());
  const double scale = 1.0 / std::sqrt(static_cast<double>(dA));
  Matrix w(dA * d_B, d_E);
  for (std::size_t e = 0; e < d_E; ++e)
    for (std::size_t b = 0; b < d_B; ++b)
      for (std::size_t a = 0; a < dA; ++a) w(a * d_B + b, e) = x(e * d_B + b, a) * scale;
  return w;
}

class Isometry {
 public:
  /// `v` has shape (d_E * d_B) x d_A with rows ordered (E, B).
  Isometry(Matrix v, std::size_t d_E, std::size_t d_B)
      : op_(make_operator(std::move(v), d_E, d_B)) {
    const double res = residual();
    if (!(res <= kIsometryTolerance))
      throw ContractViolation("Isometry: ||V^dag V - 1||_op = " + std::to_string(res) + " exceeds tolerance");
  }

  const Operator& op() const { return op_; }
  const Matrix& matrix() const { return op_.matrix(); }
  std::size_t d_A() const { return op_.cols(); }
  std::size_t d_E() const { return op_.row_dims()[0]; }
  std::size_t d_B() const { return op_.row_dims()[1]; }

  double residual() const {
    return detail::identity_residual(op_.matrix().adjoint() * op_.matrix(), kIsometryTolerance);
  }

  /// Kraus operator <e|_E V, a d_B x d_A matrix.
  Matrix kraus(std::size_t e) const { return op_.matrix().middleRows(e * d_B(), d_B()); }

  /// W with J = W W^dag.
  Matrix choi_factor() const;

 private:
  static Operator make_operator(Matrix v, std::size_t d_E, std::size_t d_B) {
    const auto d_A = static_cast<std::size_t>(v.cols());
    if (static_cast<std::size_t>(v.rows()) != d_E * d_B)
      throw DimensionError("Isometry: rows must equal d_E * d_B");
    return Operator(std::move(v), Dims{d_E, d_B}, Dims{d_A});
  }

  Operator op_;
};

inline Matrix Isometry::choi_factor() const { return diamondlab::choi_factor(matrix(), d_E(), d_B()); }

class KrausSet {
 public:
  KrausSet(std::vector<Matrix> operators) : ops_(std::move(operators)) {
    if (ops_.empty()) throw ContractViolation("KrausSet: empty");
    const auto rows = ops_.front().rows(), cols = ops_.front().cols();
    Matrix sum = Matrix::Zero(cols, cols);
    for (const auto& k : ops_) {
      if (k.rows() != rows || k.cols() != cols) throw DimensionError("KrausSet: operators differ in shape");
      sum += k.adjoint() * k;
    }
    const double res = detail::identity_residual(sum, kCompletenessTolerance);
    if (!(res <= kCompletenessTolerance))
      throw ContractViolation("KrausSet: completeness residual " + std::to_string(res) + " exceeds tolerance");
  }

  const std::vector<Matrix>& operators() const { return ops_; }
  std::size_t size() const { return ops_.size(); }
  std::size_t d_A() const { return static_cast<std::size_t>(ops_.front().cols()); }
  std::size_t d_B() const { return static_cast<std::size_t>(ops_.front().rows()); }
  const Matrix& operator[](std::size_t i) const { return ops_[i]; }

 private:
  std::vector<Matrix> ops_;
};

struct ChoiState {
  Operator matrix;  // dims (A', B)
  std::size_t d_A = 0;
  std::size_t d_B = 0;

  static constexpr double kPsdTolerance = 1e-10;
  static constexpr double kTraceTolerance = 1e-10;
  static constexpr double kMarginalTolerance = 1e-9;

  ChoiState(Operator j, std::size_t dA, std::size_t dB) : matrix(j.with_dims({dA, dB})), d_A(dA), d_B(dB) {
    const RealVector ev = hermitian_eigenvalues(matrix);
    if (ev.size() && ev(ev.size() - 1) < -kPsdTolerance)
      throw ContractViolation("ChoiState: not positive semidefinite");
    if (std::abs(matrix.trace() - 1.0) > kTraceTolerance) throw ContractViolation("ChoiState: trace is not 1");
    Matrix marg = partial_trace(matrix, {0}).matrix();
    marg -= Matrix::Identity(dA, dA) / static_cast<double>(dA);
    if (operator_norm(marg) > kMarginalTolerance)
      throw ContractViolation("ChoiState: A' marginal is not 1/d_A");
  }
};

// ---------------------------------------------------------------------------

inline KrausSet stinespring_to_kraus(const Isometry& v) {
  std::vector<Matrix> ops;
  ops.reserve(v.d_E());
  for (std::size_t e = 0; e < v.d_E(); ++e) ops.push_back(v.kraus(e));
  return KrausSet(std::move(ops));
}

/// V = sum_e |e>_E (x) K_e.
inline Isometry kraus_to_stinespring(const KrausSet& k) {
  const std::size_t dB = k.d_B(), dA = k.d_A();
  Matrix v(k.size() * dB, dA);
  for (std::size_t e = 0; e < k.size(); ++e) v.middleRows(e * dB, dB) = k[e];
  return Isometry(std::move(v), k.size(), dB);
}

/// Phi(rho) = Tr_E[V rho V^dag].
inline Operator apply_channel(const Isometry& v, const Operator& rho) {
  if (!rho.is_square() || rho.rows() != v.d_A())
    throw DimensionError("apply_channel: input must be " + std::to_string(v.d_A()) + "x" +
                         std::to_string(v.d_A()));
  Matrix out = Matrix::Zero(v.d_B(), v.d_B());
  for (std::size_t e = 0; e < v.d_E(); ++e) {
    const Matrix k = v.kraus(e);
    out += k * rho.matrix() * k.adjoint();
  }
  return Operator(std::move(out));
}

/// Tr_E[(1 (x) V1) Psi (1 (x) V2)^dag] with Psi the normalized maximally
/// entangled state on A'A; an operator on A' (x) B. For V1 = V2 this is the
/// Choi state.
inline Operator choi_cross(const Isometry& v1, const Isometry& v2) {
  if (v1.d_A() != v2.d_A() || v1.d_B() != v2.d_B() || v1.d_E() != v2.d_E())
    throw DimensionError("choi_cross: isometry shapes differ");
  return Operator(v1.choi_factor() * v2.choi_factor().adjoint(), Dims{v1.d_A(), v1.d_B()});
}

inline ChoiState choi_state(const Isometry& v) {
  const Matrix w = v.choi_factor();
  return ChoiState(Operator(w * w.adjoint()), v.d_A(), v.d_B());
}

/// Number of eigenvalues above `tol`; default tol is 1e-8 times the largest.
inline std::size_t choi_rank(const ChoiState& j, std::optional<double> tol = std::nullopt) {
  const RealVector ev = hermitian_eigenvalues(j.matrix);
  const double t = tol.value_or(1e-8 * (ev.size() ? ev.maxCoeff() : 0.0));
  if (t <= 0.0) throw DomainError("choi_rank: tolerance must be positive");
  return static_cast<std::size_t>((ev.array() > t).count());
}

inline double choi_trace_distance(const Isometry& v1, const Isometry& v2) {
  if (v1.d_A() != v2.d_A() || v1.d_B() != v2.d_B())
    throw DimensionError("choi_trace_distance: channels differ in (d_A, d_B)");
  return gram_difference_trace_norm(v1.choi_factor(), v2.choi_factor());
}

inline double isometry_distance(const Isometry& v1, const Isometry& v2) {
  if (v1.d_A() != v2.d_A() || v1.d_B() != v2.d_B() || v1.d_E() != v2.d_E())
    throw DimensionError("isometry_distance: isometry shapes differ");
  return operator_norm(Matrix(v1.matrix() - v2.matrix()));
}

/// Kraus set of (1 - p) Phi_a + p Phi_b.
inline KrausSet mix_channels(const KrausSet& a, const KrausSet& b, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("mix_channels: p must lie in [0, 1]");
  if (a.d_A() != b.d_A() || a.d_B() != b.d_B()) throw DimensionError("mix_channels: dimension mismatch");
  std::vector<Matrix> ops;
  ops.reserve(a.size() + b.size());
  for (const auto& k : a.operators()) ops.push_back(std::sqrt(1.0 - p) * k);
  for (const auto& k : b.operators()) ops.push_back(std::sqrt(p) * k);
  return KrausSet(std::move(ops));
}

}  // namespace diamondlab
