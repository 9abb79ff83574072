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

// Monte Carlo estimates of the Haar moments behind the separation argument,
// each reported next to the closed-form target it is compared with.
//
// Tilted case: C = Tr_E[V0 Psi (V1 - V2)^dag] with V_i = U_i S.
// Equal case:  D = A_1 + A_1^dag - A_2 - A_2^dag, A_i = Tr_E[U_i Obar U_i^dag Psi].
//
// Every sample i draws its unitaries from substream i of the caller's key.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "diamondlab/channels.hpp"
#include "diamondlab/ensembles.hpp"
#include "diamondlab/errors.hpp"
#include "diamondlab/haar.hpp"
#include "diamondlab/matrix.hpp"
#include "diamondlab/parallel.hpp"

namespace diamondlab {

enum class Relation { Equals, AtLeast, AtMost };

inline std::string to_string(Relation r) {
  switch (r) {
    case Relation::Equals: return "equals";
    case Relation::AtLeast: return "at_least";
    case Relation::AtMost: return "at_most";
  }
  return "?";
}

inline constexpr double kVerdictSigmas = 4.0;

struct MomentReport {
  std::string quantity;
  std::string anchor;  // the identity being tested, as a formula
  double estimate = 0.0;
  double std_error = std::numeric_limits<double>::infinity();
  double target = 0.0;
  Relation relation = Relation::Equals;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool pass = false;
};

/// Verdict with `sigmas` standard errors of slack. A report with an infinite
/// or NaN standard error never passes.
inline bool moment_verdict(double estimate, double std_error, double target, Relation rel,
                           double sigmas = kVerdictSigmas) {
  if (!std::isfinite(std_error) || !std::isfinite(estimate)) return false;
  const double slack = sigmas * std_error;
  switch (rel) {
    case Relation::Equals: return std::abs(estimate - target) <= slack;
    case Relation::AtLeast: return estimate >= target - slack;
    case Relation::AtMost: return estimate <= target + slack;
  }
  return false;
}

inline MomentReport make_report(std::string quantity, std::string anchor, const SampleStats& s, double target,
                                Relation rel, std::uint64_t seed) {
  MomentReport r{std::move(quantity), std::move(anchor), s.mean, s.std_error, target, rel, s.n, seed, false};
  r.pass = moment_verdict(r.estimate, r.std_error, r.target, r.relation);
  return r;
}

/// f(rs_i) for i < samples, where rs_i streams substream i of `rng`.
template <class F>
auto sample_map(std::size_t samples, const SeededRng& rng, F f) {
  return parallel_map(samples, [&](std::size_t i) {
    RandomStream rs(derive_substream(rng, i));
    return f(rs);
  });
}

// ---------------------------------------------------------------------------
// Tilted case

inline void require_case(const EnsembleParams& p, EnsembleCase c, const char* what) {
  p.validate();
  if (p.kind != c) throw DomainError(std::string(what) + ": requires the " + to_string(c) + " case");
}

inline Operator c_operator(const Isometry& v0, const Operator& u1, const Operator& u2, const Operator& s) {
  const std::size_t n = v0.d_E() * v0.d_B();
  if (u1.rows() != n || u2.rows() != n || !u1.is_square() || !u2.is_square())
    throw DimensionError("c_operator: U must be (d_E d_B)-square");
  if (s.rows() != n || s.cols() != v0.d_A()) throw DimensionError("c_operator: S must be (d_E d_B) x d_A");
  const Isometry v1(u1.matrix() * s.matrix(), v0.d_E(), v0.d_B());
  const Isometry v2(u2.matrix() * s.matrix(), v0.d_E(), v0.d_B());
  return choi_cross(v0, v1) - choi_cross(v0, v2);
}

struct SpectralMoments {
  double t1 = 0.0;  // Tr|X|
  double t2 = 0.0;  // Tr|X|^2
  double t4 = 0.0;  // Tr|X|^4
};

inline SpectralMoments spectral_moments(const RealVector& values) {
  SpectralMoments m;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double a = std::abs(values(i)), a2 = a * a;
    m.t1 += a;
    m.t2 += a2;
    m.t4 += a2 * a2;
  }
  return m;
}

struct MomentSeries {
  SampleStats m1, m2, m4;
};

inline MomentSeries summarize(const std::vector<SpectralMoments>& xs) {
  std::vector<double> a, b, c;
  a.reserve(xs.size());
  b.reserve(xs.size());
  c.reserve(xs.size());
  for (const auto& x : xs) {
    a.push_back(x.t1);
    b.push_back(x.t2);
    c.push_back(x.t4);
  }
  return {sample_stats(a), sample_stats(b), sample_stats(c)};
}

/// Moments of the singular values of C over `samples` Haar pairs.
inline MomentSeries sample_c_moments(const EnsembleParams& p, std::size_t samples, const SeededRng& rng) {
  require_case(p, EnsembleCase::Tilted, "C moments");
  const Isometry v0 = tilted_reference_isometry(p);
  const Matrix w0 = v0.choi_factor();
  const Matrix s = build_embedding_S(p.d_A, p.d_B, p.r).matrix();
  const std::size_t n = p.unitary_dim();
  const auto xs = sample_map(samples, rng, [&](RandomStream& rs) {
    const Matrix u1 = haar_unitary_matrix(n, rs);
    const Matrix u2 = haar_unitary_matrix(n, rs);
    const Matrix delta = choi_factor(Matrix((u1 - u2) * s), p.r, p.d_B);
    return spectral_moments(low_rank_product_singular_values(w0, delta));
  });
  return summarize(xs);
}

inline MomentReport estimate_c_second_moment(const EnsembleParams& p, std::size_t samples, const SeededRng& rng) {
  const auto m = sample_c_moments(p, samples, rng);
  return make_report("E Tr|C|^2", "E Tr|C|^2 = 2/r", m.m2, 2.0 / static_cast<double>(p.r), Relation::Equals,
                     rng.seed);
}

inline MomentReport estimate_c_fourth_moment(const EnsembleParams& p, std::size_t samples, const SeededRng& rng) {
  const auto m = sample_c_moments(p, samples, rng);
  const double r = static_cast<double>(p.r);
  return make_report("E Tr|C|^4", "E Tr|C|^4 <= 128/r^3", m.m4, 128.0 / (r * r * r), Relation::AtMost, rng.seed);
}

/// sqrt(m2^3 / m4), the Hoelder lower bound on E Tr|X|.
inline double holder_first_moment_bound(double m2, double m4) {
  if (!(m2 > 0.0 && m4 > 0.0)) throw DomainError("holder_first_moment_bound: moments must be positive");
  return std::sqrt(m2 * m2 * m2 / m4);
}

/// Sampled E Tr|C| against the Hoelder bound built from the same samples.
inline MomentReport estimate_c_first_moment(const EnsembleParams& p, std::size_t samples, const SeededRng& rng) {
  const auto m = sample_c_moments(p, samples, rng);
  return make_report("E Tr|C|", "(E Tr|C|)^2 >= (E Tr|C|^2)^3 / E Tr|C|^4", m.m1,
                     holder_first_moment_bound(m.m2.mean, m.m4.mean), Relation::AtLeast, rng.seed);
}

/// f(U1, U2) = ||J_1 - J_2||_1 for the members built from U1, U2.
class PairDistance {
 public:
  explicit PairDistance(const EnsembleParams& p) : p_(p) {
    p.validate();
    if (p.kind == EnsembleCase::Equal) {
      one_plus_o_ = Matrix::Identity(p.d_A, p.d_A) + build_O(p.d_A, p.eps).matrix();
    } else {
      v0_ = tilted_reference_isometry(p).matrix();
      s_ = build_embedding_S(p.d_A, p.d_B, p.r).matrix();
    }
  }

  Matrix member(const Matrix& u) const {
    if (p_.kind == EnsembleCase::Equal) return u * one_plus_o_ * u.adjoint();
    const Matrix vt = u * s_;
    const std::size_t dB = p_.d_B;
    const double c0 = std::sqrt(1.0 - p_.eps * p_.eps);
    Matrix v(p_.r * 2 * dB, p_.d_A);
    for (std::size_t e = 0; e < p_.r; ++e) {
      v.middleRows(e * 2 * dB, dB) = c0 * v0_.middleRows(e * dB, dB);
      v.middleRows(e * 2 * dB + dB, dB) = p_.eps * vt.middleRows(e * dB, dB);
    }
    return v;
  }

  double operator()(const Matrix& u1, const Matrix& u2) const {
    const std::size_t out = p_.output_dim();
    return gram_difference_trace_norm(choi_factor(member(u1), p_.r, out), choi_factor(member(u2), p_.r, out));
  }

 private:
  EnsembleParams p_;
  Matrix one_plus_o_, v0_, s_;
};

inline std::vector<double> sample_pair_distances(const EnsembleParams& p, std::size_t samples, const SeededRng& rng) {
  const PairDistance f(p);
  const std::size_t n = p.unitary_dim();
  return sample_map(samples, rng, [&](RandomStream& rs) {
    const Matrix u1 = haar_unitary_matrix(n, rs);
    const Matrix u2 = haar_unitary_matrix(n, rs);
    return f(u1, u2);
  });
}

inline double tilted_first_moment_target(double eps) { return 0.5 * eps * std::sqrt(1.0 - eps * eps) - 2.0 * eps * eps; }

inline MomentReport estimate_first_moment_tilted(const EnsembleParams& p, std::size_t samples, const SeededRng& rng) {
  require_case(p, EnsembleCase::Tilted, "estimate_first_moment_tilted");
  const auto xs = sample_pair_distances(p, samples, rng);
  return make_report("E||J_1 - J_2||_1", "E||J_1 - J_2||_1 >= eps sqrt(1 - eps^2)/2 - 2 eps^2", sample_stats(xs),
                     tilted_first_moment_target(p.eps), Relation::AtLeast, rng.seed);
}

// ---------------------------------------------------------------------------
// Equal case

/// Exact traces of Obar used by the D-moment formulas.
struct ObarTraces {
  double t = 0.0;       // Tr[Obar^dag Obar]
  double t_sq = 0.0;    // Tr[(Obar Obar^dag)^2]
  cplx tr_square = 0.0; // Tr[Obar^2]
};

inline ObarTraces obar_traces(const Operator& obar) {
  const Matrix& o = obar.matrix();
  const Matrix g = o * o.adjoint();
  return {g.trace().real(), (g * g).trace().real(), (o * o).trace()};
}

inline Operator d_operator(const Operator& u1, const Operator& u2, const Operator& obar, std::size_t d_B) {
  const std::size_t d = obar.rows();
  if (!obar.is_square() || u1.rows() != d || u2.rows() != d || !u1.is_square() || !u2.is_square())
    throw DimensionError("d_operator: U and Obar must share one square dimension");
  if (d_B == 0 || d % d_B != 0) throw DimensionError("d_operator: d_B must divide d_A");
  const std::size_t r = d / d_B;
  const Matrix wi = choi_factor(Matrix::Identity(d, d), r, d_B);
  auto a = [&](const Matrix& u) -> Matrix {
    return choi_factor(Matrix(u * obar.matrix() * u.adjoint()), r, d_B) * wi.adjoint();
  };
  const Matrix a1 = a(u1.matrix()), a2 = a(u2.matrix());
  return Operator(Matrix(a1 + a1.adjoint() - a2 - a2.adjoint()), Dims{d, d_B});
}

/// Eigenvalues of D via D = Delta W^dag + W Delta^dag.
inline RealVector d_eigenvalues(const Matrix& u1, const Matrix& u2, const Matrix& obar, const Matrix& wi,
                                std::size_t r, std::size_t d_B) {
  const Matrix delta = choi_factor(Matrix(u1 * obar * u1.adjoint() - u2 * obar * u2.adjoint()), r, d_B);
  const Eigen::Index k = wi.cols();
  Matrix m(delta.rows(), 2 * k);
  m << delta, wi;
  Matrix sigma = Matrix::Zero(2 * k, 2 * k);
  sigma.topRightCorner(k, k).setIdentity();
  sigma.bottomLeftCorner(k, k).setIdentity();
  return congruence_eigenvalues(m, sigma);
}

inline MomentSeries sample_d_moments(const EnsembleParams& p, std::size_t samples, const SeededRng& rng) {
  require_case(p, EnsembleCase::Equal, "D moments");
  const Matrix obar = build_O_bar(p.d_A, p.eps).matrix();
  const Matrix wi = choi_factor(Matrix::Identity(p.d_A, p.d_A), p.r, p.d_B);
  const auto xs = sample_map(samples, rng, [&](RandomStream& rs) {
    const Matrix u1 = haar_unitary_matrix(p.d_A, rs);
    const Matrix u2 = haar_unitary_matrix(p.d_A, rs);
    return spectral_moments(d_eigenvalues(u1, u2, obar, wi, p.r, p.d_B));
  });
  return summarize(xs);
}

/// (2/r) t/d_A + 4 r t / (d_A^2 (d_A + 1)), t = Tr[Obar^dag Obar].
inline double d_second_moment_stated(std::size_t d_A, std::size_t r, double t) {
  const double a = static_cast<double>(d_A), rr = static_cast<double>(r);
  return 2.0 / rr * t / a + 4.0 * rr * t / (a * a * (a + 1.0));
}

/// (2/r) t/d_A.
inline double d_second_moment_lower(std::size_t d_A, std::size_t r, double t) {
  return 2.0 / static_cast<double>(r) * t / static_cast<double>(d_A);
}

/// Exact Haar average of Tr[D^2]:
///   4 t / (r d_A) + 4 Re Tr[Obar^2] d_B (r^2 - 1) / (d_A^2 (d_A^2 - 1)).
inline double d_second_moment_weingarten(std::size_t d_A, std::size_t d_B, std::size_t r, const ObarTraces& o) {
  const double a = static_cast<double>(d_A), b = static_cast<double>(d_B), rr = static_cast<double>(r);
  double v = 4.0 * o.t / (rr * a);
  if (r > 1) v += 4.0 * o.tr_square.real() * b * (rr * rr - 1.0) / (a * a * (a * a - 1.0));
  return v;
}

/// 4^4 (2 / (r^2 d_A^3)) (t^2 d_B + Tr[(Obar Obar^dag)^2] r).
inline double d_fourth_moment_bound(std::size_t d_A, std::size_t d_B, std::size_t r, const ObarTraces& o) {
  const double a = static_cast<double>(d_A), b = static_cast<double>(d_B), rr = static_cast<double>(r);
  return 256.0 * 2.0 / (rr * rr * a * a * a) * (o.t * o.t * b + o.t_sq * rr);
}

inline MomentReport estimate_d_second_moment(const EnsembleParams& p, std::size_t samples, const SeededRng& rng) {
  const auto m = sample_d_moments(p, samples, rng);
  const auto o = obar_traces(build_O_bar(p.d_A, p.eps));
  return make_report("E Tr|D|^2", "E Tr|D|^2 = (2/r) t/d_A + 4 r t/(d_A^2 (d_A + 1))", m.m2,
                     d_second_moment_stated(p.d_A, p.r, o.t), Relation::Equals, rng.seed);
}

inline MomentReport estimate_d_second_moment_weingarten(const EnsembleParams& p, std::size_t samples,
                                                        const SeededRng& rng) {
  const auto m = sample_d_moments(p, samples, rng);
  const auto o = obar_traces(build_O_bar(p.d_A, p.eps));
  return make_report("E Tr|D|^2 (Weingarten)",
                     "E Tr|D|^2 = 4 t/(r d_A) + 4 Re Tr[Obar^2] d_B (r^2 - 1)/(d_A^2 (d_A^2 - 1))", m.m2,
                     d_second_moment_weingarten(p.d_A, p.d_B, p.r, o), Relation::Equals, rng.seed);
}

inline MomentReport estimate_d_second_moment_lower(const EnsembleParams& p, std::size_t samples,
                                                   const SeededRng& rng) {
  const auto m = sample_d_moments(p, samples, rng);
  const auto o = obar_traces(build_O_bar(p.d_A, p.eps));
  return make_report("E Tr|D|^2 (lower)", "E Tr|D|^2 >= (2/r) t/d_A", m.m2, d_second_moment_lower(p.d_A, p.r, o.t),
                     Relation::AtLeast, rng.seed);
}

inline MomentReport estimate_d_fourth_moment(const EnsembleParams& p, std::size_t samples, const SeededRng& rng) {
  const auto m = sample_d_moments(p, samples, rng);
  const auto o = obar_traces(build_O_bar(p.d_A, p.eps));
  return make_report("E Tr|D|^4", "E Tr|D|^4 <= 4^4 (2/(r^2 d_A^3)) (t^2 d_B + Tr[(Obar Obar^dag)^2] r)", m.m4,
                     d_fourth_moment_bound(p.d_A, p.d_B, p.r, o), Relation::AtMost, rng.seed);
}

// ---------------------------------------------------------------------------
// Lipschitz constant and concentration

inline double lipschitz_constant(std::size_t d_A, double eps) {
  return 4.0 * std::sqrt(2.0 / static_cast<double>(d_A)) * eps;
}

inline constexpr double kLipschitzSlack = 1e-6;
inline constexpr double kDefaultPerturbationScale = 1e-3;

/// Max over sampled pairs of |f(U) - f(U')| / ||(U - U')||_2 with
/// U'_i = exp(i s H_i) U_i and H_i random Hermitian of unit Frobenius norm.
inline MomentReport estimate_lipschitz_ratio(const EnsembleParams& p, std::size_t pair_samples,
                                             double perturbation_scale, const SeededRng& rng) {
  if (!(perturbation_scale > 0.0)) throw DomainError("estimate_lipschitz_ratio: perturbation_scale must be positive");
  const PairDistance f(p);
  const std::size_t n = p.unitary_dim();
  const auto ratios = sample_map(pair_samples, rng, [&](RandomStream& rs) {
    const Matrix u1 = haar_unitary_matrix(n, rs);
    const Matrix u2 = haar_unitary_matrix(n, rs);
    const Matrix w1 = unitary_exp(perturbation_scale * random_unit_hermitian(n, rs)) * u1;
    const Matrix w2 = unitary_exp(perturbation_scale * random_unit_hermitian(n, rs)) * u2;
    const double dist = std::sqrt((u1 - w1).squaredNorm() + (u2 - w2).squaredNorm());
    return std::abs(f(u1, u2) - f(w1, w2)) / dist;
  });
  MomentReport r{"max Lipschitz ratio", "|f(U) - f(U')| <= 4 sqrt(2/d_A) eps ||U - U'||_2", 0.0, 0.0,
                 lipschitz_constant(p.d_A, p.eps) + kLipschitzSlack, Relation::AtMost, pair_samples, rng.seed,
                 false};
  for (double x : ratios) r.estimate = std::max(r.estimate, x);
  r.pass = pair_samples > 0 && r.estimate <= r.target;
  return r;
}

struct TailRow {
  double t = 0.0;
  double upper_frequency = 0.0;  // P[f >= mean + t]
  double lower_frequency = 0.0;  // P[f <= mean - t]
  double bound = 0.0;            // exp(-d t^2 / (12 L^2))
  double slack = 0.0;            // 4 sqrt(p (1 - p) / n), p = min(bound, 1)
  bool pass = false;
};

struct TailReport {
  std::vector<TailRow> rows;
  double mean = 0.0;
  double lipschitz = 0.0;
  std::size_t dimension = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool pass = false;
};

inline std::vector<double> default_t_grid(double eps) {
  return {0.05 * eps, 0.1 * eps, 0.2 * eps, 0.5 * eps, eps};
}

/// Empirical tails of f around its sample mean against the Gaussian
/// concentration bound with d = r d_B.
inline TailReport concentration_experiment(const EnsembleParams& p, std::size_t samples,
                                           const std::vector<double>& t_grid, const SeededRng& rng) {
  for (double t : t_grid)
    if (!(t > 0.0)) throw DomainError("concentration_experiment: t values must be positive");
  const auto xs = sample_pair_distances(p, samples, rng);
  TailReport rep;
  rep.mean = sample_stats(xs).mean;
  rep.lipschitz = lipschitz_constant(p.d_A, p.eps);
  rep.dimension = p.unitary_dim();
  rep.samples = samples;
  rep.seed = rng.seed;
  rep.pass = samples > 0;
  const double n = static_cast<double>(samples);
  for (double t : t_grid) {
    TailRow row;
    row.t = t;
    std::size_t up = 0, down = 0;
    for (double x : xs) {
      if (x >= rep.mean + t) ++up;
      if (x <= rep.mean - t) ++down;
    }
    row.upper_frequency = static_cast<double>(up) / n;
    row.lower_frequency = static_cast<double>(down) / n;
    row.bound = std::exp(-static_cast<double>(rep.dimension) * t * t / (12.0 * rep.lipschitz * rep.lipschitz));
    const double pb = std::min(row.bound, 1.0);
    row.slack = kVerdictSigmas * std::sqrt(pb * (1.0 - pb) / n);
    row.pass = row.upper_frequency <= row.bound + row.slack && row.lower_frequency <= row.bound + row.slack;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace diamondlab
