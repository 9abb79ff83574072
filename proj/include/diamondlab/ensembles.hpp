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

// The two randomized isometry ensembles and the fixed reference channel used
// by the tilted construction.
//
// EqualCase (d_A = r d_B): V_x = U_x (1 + O) U_x^dag read as a map
// A -> E (x) B with d_E = r.
//
// TiltedCase (2 d_A <= r d_B): with rows ordered (E, F, B) and F a qubit flag,
//   V_x = sum_e |e>_E (x) ( sqrt(1 - eps^2) |0>_F (x) K_{0,e} + eps |1>_F (x) K_{x,e} )
// where K_{x,e} are the row blocks of U_x S. The channel output is F (x) B.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "diamondlab/channels.hpp"
#include "diamondlab/errors.hpp"
#include "diamondlab/haar.hpp"
#include "diamondlab/matrix.hpp"
#include "diamondlab/parallel.hpp"

namespace diamondlab {

enum class EnsembleCase { Equal, Tilted };

inline std::string to_string(EnsembleCase c) { return c == EnsembleCase::Equal ? "equal" : "tilted"; }

inline EnsembleCase parse_ensemble_case(const std::string& s) {
  if (s == "equal") return EnsembleCase::Equal;
  if (s == "tilted") return EnsembleCase::Tilted;
  throw DomainError("unknown case '" + s + "' (expected equal or tilted)");
}

struct EnsembleParams {
  std::size_t d_A = 0;
  std::size_t d_B = 0;
  std::size_t r = 0;
  double eps = 0.0;
  std::size_t M = 1;
  std::uint64_t seed = 0;
  EnsembleCase kind = EnsembleCase::Equal;

  /// Dimension of the Haar unitaries, r * d_B.
  std::size_t unitary_dim() const { return r * d_B; }

  /// Output dimension of the channel: d_B, or 2 d_B with the tilted flag.
  std::size_t output_dim() const { return kind == EnsembleCase::Tilted ? 2 * d_B : d_B; }

  void validate() const {
    if (d_A == 0 || d_B == 0 || r == 0) throw DomainError("EnsembleParams: dimensions must be positive");
    if (M == 0) throw DomainError("EnsembleParams: M must be positive");
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("EnsembleParams: eps must lie in (0, 1)");
    if (kind == EnsembleCase::Equal && d_A != r * d_B)
      throw DomainError("EnsembleParams: equal case requires d_A = r * d_B");
    if (kind == EnsembleCase::Tilted && 2 * d_A > r * d_B)
      throw DomainError("EnsembleParams: tilted case requires d_A <= r * d_B / 2");
  }
};

namespace detail {

inline void check_eps_open(double eps, const char* what) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError(std::string(what) + ": eps must lie in (0, 1)");
}

inline void check_unitary(const Matrix& u, const char* what) {
  if (u.rows() != u.cols()) throw DimensionError(std::string(what) + ": U must be square");
  if (identity_residual(u.adjoint() * u, kIsometryTolerance) > kIsometryTolerance)
    throw ContractViolation(std::string(what) + ": U is not unitary");
}

}  // namespace detail

/// theta in (pi/2, pi] with eps = -2 cos(theta).
inline double o_angle(double eps) { return std::acos(-eps / 2.0); }

/// diag(eps e^{i theta}, eps e^{-i theta}, ...), with a trailing 0 for odd d_A.
inline Operator build_O(std::size_t d_A, double eps) {
  detail::check_eps_open(eps, "build_O");
  if (d_A == 0) throw DomainError("build_O: d_A must be positive");
  const double theta = o_angle(eps);
  std::vector<cplx> diag(d_A, cplx(0.0));
  for (std::size_t i = 0; i + 1 < d_A; i += 2) {
    diag[i] = std::polar(eps, theta);
    diag[i + 1] = std::polar(eps, -theta);
  }
  return Operator::diagonal(diag);
}

/// O - Tr[O] 1 / d_A.
inline Operator build_O_bar(std::size_t d_A, double eps) {
  const Operator o = build_O(d_A, eps);
  const cplx shift = o.trace() / static_cast<double>(d_A);
  return Operator(Matrix(o.matrix() - shift * Matrix::Identity(d_A, d_A)));
}

inline Isometry build_isometry_equal_case(const Operator& u, const Operator& o, std::size_t d_B) {
  detail::check_unitary(u.matrix(), "build_isometry_equal_case");
  if (!o.is_square() || o.rows() != u.rows()) throw DimensionError("build_isometry_equal_case: O and U differ in size");
  if (d_B == 0 || u.rows() % d_B != 0) throw DimensionError("build_isometry_equal_case: d_B must divide d_A");
  const std::size_t d = u.rows();
  Matrix v = u.matrix() * (Matrix::Identity(d, d) + o.matrix()) * u.matrix().adjoint();
  return Isometry(std::move(v), d / d_B, d_B);
}

/// X^a Z^b for a, b in [d), a outer.
inline std::vector<Operator> generalized_paulis(std::size_t d) {
  if (d == 0) throw DomainError("generalized_paulis: d must be positive");
  const cplx omega = std::polar(1.0, 2.0 * std::numbers::pi / static_cast<double>(d));
  std::vector<Operator> out;
  out.reserve(d * d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      // X^a Z^b |j> = omega^{b j} |j + a>
      Matrix p = Matrix::Zero(d, d);
      for (std::size_t j = 0; j < d; ++j) p((j + a) % d, j) = std::pow(omega, static_cast<double>((b * j) % d));
      out.emplace_back(std::move(p));
    }
  return out;
}

namespace detail {

/// `count` mutually trace-orthogonal isometries C^{d_small} -> C^{d_big}, each a
/// generalized Pauli placed on one of floor(d_big / d_small) row blocks.
inline std::vector<Matrix> block_pauli_isometries(std::size_t d_small, std::size_t d_big, std::size_t count) {
  const std::size_t blocks = d_big / d_small;
  if (count > blocks * d_small * d_small)
    throw DomainError("reference Kraus construction: needs " + std::to_string(count) + " operators but only " +
                      std::to_string(blocks * d_small * d_small) + " fit");
  const auto paulis = generalized_paulis(d_small);
  std::vector<Matrix> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t block = n / (d_small * d_small), j = n % (d_small * d_small);
    Matrix k = Matrix::Zero(d_big, d_small);
    k.middleRows(block * d_small, d_small) = paulis[j].matrix();
    out.push_back(std::move(k));
  }
  return out;
}

}  // namespace detail

/// The fixed reference channel A -> B of the tilted construction: Kraus
/// operators with |Tr[K_i^dag K_j]| <= (2 d_A / r) delta_ij, at most r of them.
inline KrausSet build_reference_kraus(std::size_t d_A, std::size_t d_B, std::size_t r) {
  if (d_A == 0 || d_B == 0 || r == 0) throw DomainError("build_reference_kraus: dimensions must be positive");
  if (2 * d_A > r * d_B) throw DomainError("build_reference_kraus: requires d_A <= r * d_B / 2");
  std::vector<Matrix> ops;
  if (d_A <= d_B) {
    const std::size_t s = (r + 1) / 2;
    const double scale = 1.0 / std::sqrt(static_cast<double>(s));
    for (auto& k : detail::block_pauli_isometries(d_A, d_B, s)) ops.push_back(scale * k);
  } else {
    const std::size_t k = d_A / d_B, d_C = d_A - k * d_B;
    const std::size_t l = (r + 2 * k - 1) / (2 * k);
    if (l > d_B * d_B) throw DomainError("build_reference_kraus: r too large for the block construction");
    const auto paulis = generalized_paulis(d_B);
    const double scale = 1.0 / std::sqrt(static_cast<double>(l));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < l; ++j) {
        Matrix op = Matrix::Zero(d_B, d_A);
        op.middleCols(i * d_B, d_B) = scale * paulis[j].matrix();
        ops.push_back(std::move(op));
      }
    const std::size_t r_c = (r * d_C + 2 * d_A - 1) / (2 * d_A);
    if (r_c > 0) {
      const double scale_c = 1.0 / std::sqrt(static_cast<double>(r_c));
      for (auto& v : detail::block_pauli_isometries(d_C, d_B, r_c)) {
        Matrix op = Matrix::Zero(d_B, d_A);
        op.rightCols(d_C) = scale_c * v;
        ops.push_back(std::move(op));
      }
    }
  }
  return KrausSet(std::move(ops));
}

/// Stinespring isometry of `k` with environment padded by zero Kraus operators
/// to dimension d_E.
inline Isometry padded_stinespring(const KrausSet& k, std::size_t d_E) {
  if (k.size() > d_E) throw DimensionError("padded_stinespring: more Kraus operators than d_E");
  Matrix v = Matrix::Zero(d_E * k.d_B(), k.d_A());
  for (std::size_t e = 0; e < k.size(); ++e) v.middleRows(e * k.d_B(), k.d_B()) = k[e];
  return Isometry(std::move(v), d_E, k.d_B());
}

/// S = sum_{i < d_A} |i><i| : C^{d_A} -> C^{r d_B}.
inline Operator build_embedding_S(std::size_t d_A, std::size_t d_B, std::size_t r) {
  if (d_A == 0 || d_B == 0 || r == 0) throw DomainError("build_embedding_S: dimensions must be positive");
  if (d_A > r * d_B) throw DomainError("build_embedding_S: requires d_A <= r * d_B");
  return Operator(Matrix(Matrix::Identity(r * d_B, d_A)));
}

/// `v0` is the reference isometry with d_E = r; `u` acts on E (x) B.
inline Isometry build_isometry_tilted(const Operator& u, const Isometry& v0, const Operator& s, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("build_isometry_tilted: eps must lie in [0, 1)");
  const std::size_t dE = v0.d_E(), dB = v0.d_B(), dA = v0.d_A();
  if (u.rows() != dE * dB || !u.is_square()) throw DimensionError("build_isometry_tilted: U must be (d_E d_B)-square");
  if (s.rows() != dE * dB || s.cols() != dA) throw DimensionError("build_isometry_tilted: S must be (d_E d_B) x d_A");
  detail::check_unitary(u.matrix(), "build_isometry_tilted");
  const Matrix vt = u.matrix() * s.matrix();
  const double c0 = std::sqrt(1.0 - eps * eps);
  Matrix v(dE * 2 * dB, dA);
  for (std::size_t e = 0; e < dE; ++e) {
    v.middleRows(e * 2 * dB, dB) = c0 * v0.matrix().middleRows(e * dB, dB);
    v.middleRows(e * 2 * dB + dB, dB) = eps * vt.middleRows(e * dB, dB);
  }
  return Isometry(std::move(v), dE, 2 * dB);
}

/// V phi V^dag with dims (E, F, B) for a tilted member.
inline Operator tilted_output_state(const Isometry& v, const Operator& phi) {
  if (v.d_B() % 2 != 0) throw DimensionError("tilted_output_state: output has no flag qubit");
  Matrix rho = v.matrix() * phi.matrix() * v.matrix().adjoint();
  return Operator(std::move(rho), Dims{v.d_E(), 2, v.d_B() / 2});
}

struct ChannelEnsemble {
  EnsembleParams params;
  std::vector<Isometry> isometries;
  double theta = 0.0;                 // equal case
  std::vector<Matrix> reference_kraus;  // tilted case, unpadded
};

/// Reference isometry of the tilted construction with d_E = r.
inline Isometry tilted_reference_isometry(const EnsembleParams& p) {
  return padded_stinespring(build_reference_kraus(p.d_A, p.d_B, p.r), p.r);
}

/// Member x is built from the Haar unitary drawn on substream x of `seed`.
inline Operator ensemble_unitary(const EnsembleParams& p, std::size_t x) {
  return sample_haar_unitary(p.unitary_dim(), derive_substream(SeededRng{p.seed, 0}, x));
}

inline ChannelEnsemble generate_ensemble(const EnsembleParams& p) {
  p.validate();
  ChannelEnsemble ens{p, {}, 0.0, {}};
  if (p.kind == EnsembleCase::Equal) {
    ens.theta = o_angle(p.eps);
    const Operator o = build_O(p.d_A, p.eps);
    ens.isometries = parallel_map(p.M, [&](std::size_t x) {
      return build_isometry_equal_case(ensemble_unitary(p, x), o, p.d_B);
    });
  } else {
    const KrausSet k = build_reference_kraus(p.d_A, p.d_B, p.r);
    ens.reference_kraus = k.operators();
    const Isometry v0 = padded_stinespring(k, p.r);
    const Operator s = build_embedding_S(p.d_A, p.d_B, p.r);
    ens.isometries = parallel_map(p.M, [&](std::size_t x) {
      return build_isometry_tilted(ensemble_unitary(p, x), v0, s, p.eps);
    });
  }
  return ens;
}

struct PairRecord {
  std::size_t i = 0;
  std::size_t j = 0;
  double choi_distance = 0.0;
  double isometry_distance = 0.0;
  bool separated = false;
  bool close = false;
};

struct CertificationReport {
  double sep_threshold = 0.0;
  double eta = 0.0;
  std::vector<PairRecord> pairs;
  double min_separation = 0.0;  // +inf for M = 1
  double max_closeness = 0.0;
  bool pass = true;
};

/// Absolute slack on the closeness check, for floating-point rounding only.
inline constexpr double kClosenessSlack = 1e-12;

inline std::vector<std::pair<std::size_t, std::size_t>> index_pairs(std::size_t m) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) out.emplace_back(i, j);
  return out;
}

inline CertificationReport certify_ensemble(const ChannelEnsemble& ens, double sep_threshold, double eta) {
  CertificationReport rep;
  rep.sep_threshold = sep_threshold;
  rep.eta = eta;
  rep.min_separation = std::numeric_limits<double>::infinity();
  const auto pairs = index_pairs(ens.isometries.size());
  rep.pairs = parallel_map(pairs.size(), [&](std::size_t n) {
    const auto [i, j] = pairs[n];
    PairRecord rec{i, j, choi_trace_distance(ens.isometries[i], ens.isometries[j]),
                   isometry_distance(ens.isometries[i], ens.isometries[j]), false, false};
    rec.separated = rec.choi_distance > sep_threshold;
    rec.close = rec.isometry_distance <= eta + kClosenessSlack;
    return rec;
  });
  for (const auto& rec : rep.pairs) {
    rep.min_separation = std::min(rep.min_separation, rec.choi_distance);
    rep.max_closeness = std::max(rep.max_closeness, rec.isometry_distance);
    rep.pass = rep.pass && rec.separated && rec.close;
  }
  return rep;
}

/// 0.25 times the mean pairwise Choi distance; 0 when there are no pairs.
inline double default_separation_threshold(const ChannelEnsemble& ens) {
  const auto pairs = index_pairs(ens.isometries.size());
  if (pairs.empty()) return 0.0;
  const auto d = parallel_map(pairs.size(), [&](std::size_t n) {
    return choi_trace_distance(ens.isometries[pairs[n].first], ens.isometries[pairs[n].second]);
  });
  double sum = 0.0;
  for (double x : d) sum += x;
  return 0.25 * sum / static_cast<double>(d.size());
}

}  // namespace diamondlab
