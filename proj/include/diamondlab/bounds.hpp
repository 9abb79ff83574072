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

// Entropy utilities, query-count lower-bound calculators and a small
// coherent-protocol simulator. All logarithms are natural.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "diamondlab/channels.hpp"
#include "diamondlab/ensembles.hpp"
#include "diamondlab/errors.hpp"
#include "diamondlab/haar.hpp"
#include "diamondlab/matrix.hpp"

namespace diamondlab {

inline double binary_entropy(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw DomainError("binary_entropy: a must lie in [0, 1]");
  if (a == 0.0 || a == 1.0) return 0.0;
  return -a * std::log(a) - (1.0 - a) * std::log1p(-a);
}

inline constexpr double kStateTraceTolerance = 1e-8;
inline constexpr double kStatePsdTolerance = 1e-10;

inline double entropy_of_spectrum(const RealVector& ev) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > 0.0) s -= ev(i) * std::log(ev(i));
  return s;
}

inline double von_neumann_entropy(const Operator& rho) {
  if (!rho.is_square()) throw DimensionError("von_neumann_entropy: input must be square");
  if (!is_hermitian(rho.matrix())) throw ContractViolation("von_neumann_entropy: input is not Hermitian");
  const RealVector ev = hermitian_eigenvalues_unchecked(rho.matrix());
  if (ev.size() && ev(ev.size() - 1) < -kStatePsdTolerance)
    throw ContractViolation("von_neumann_entropy: input is not positive semidefinite");
  if (std::abs(ev.sum() - 1.0) > kStateTraceTolerance) throw ContractViolation("von_neumann_entropy: trace is not 1");
  return entropy_of_spectrum(ev);
}

/// S(A|B) = S(AB) - S(B) for dims = {d_A, d_B}.
inline double conditional_entropy(const Operator& rho_ab, const Dims& dims) {
  if (dims.size() != 2) throw DimensionError("conditional_entropy: dims must be {d_A, d_B}");
  const Operator rho = rho_ab.with_dims(dims);
  return von_neumann_entropy(rho) - von_neumann_entropy(partial_trace(rho, {1}));
}

/// t log(dim^2) + h2(t) for t in [0, 1].
inline double continuity_bound_rhs(double t, std::size_t dim) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("continuity_bound_rhs: t must lie in [0, 1]");
  if (dim == 0) throw DomainError("continuity_bound_rhs: dim must be positive");
  return t * std::log(static_cast<double>(dim) * static_cast<double>(dim)) + binary_entropy(t);
}

struct ContinuityCheck {
  bool holds = false;
  double lhs = 0.0;     // |S(A|B)_rho - S(A|B)_sigma|
  double rhs = 0.0;
  double distance = 0.0;  // ||rho - sigma||_1
  double margin = 0.0;  // rhs - lhs
};

inline constexpr double kMarginalMatchTolerance = 1e-9;

/// Checks |S(A|B)_rho - S(A|B)_sigma| <= t log(d_A^2) + h2(t), t = ||rho - sigma||_1.
/// For t > 1 the h2 term is taken at min(t, 1).
inline ContinuityCheck check_continuity_bound(const Operator& rho, const Operator& sigma, const Dims& dims) {
  if (dims.size() != 2) throw DimensionError("check_continuity_bound: dims must be {d_A, d_B}");
  const Operator r = rho.with_dims(dims), s = sigma.with_dims(dims);
  const Matrix diff_b = partial_trace(r, {1}).matrix() - partial_trace(s, {1}).matrix();
  if (hermitian_eigenvalues_unchecked(diff_b).cwiseAbs().sum() > kMarginalMatchTolerance)
    throw ContractViolation("check_continuity_bound: B marginals differ");
  ContinuityCheck c;
  c.distance = hermitian_eigenvalues_unchecked(Matrix(r.matrix() - s.matrix())).cwiseAbs().sum();
  c.lhs = std::abs(conditional_entropy(r, dims) - conditional_entropy(s, dims));
  const double da = static_cast<double>(dims[0]);
  c.rhs = c.distance * std::log(da * da) + binary_entropy(std::min(c.distance, 1.0));
  c.margin = c.rhs - c.lhs;
  c.holds = c.lhs <= c.rhs + 1e-12;
  return c;
}

// ---------------------------------------------------------------------------
// Calculators

inline double fano_rhs_log(double log_m) {
  if (!(log_m >= std::log(3.0) - 1e-15)) throw DomainError("fano_rhs: requires M >= 3");
  return 2.0 / 3.0 * log_m - std::numbers::ln2;
}

/// (2/3) log M - log 2.
inline double fano_rhs(std::uint64_t m) {
  if (m < 3) throw DomainError("fano_rhs: requires M >= 3");
  return fano_rhs_log(std::log(static_cast<double>(m)));
}

/// max(1, ceil(x)).
inline std::uint64_t ceil_floor_one(double x) {
  if (!std::isfinite(x)) throw DomainError("lower bound is not finite");
  return x <= 1.0 ? 1 : static_cast<std::uint64_t>(std::ceil(x));
}

/// ceil(fano / (4 eta log(dB_r / eta))) without the range checks on eta.
inline std::uint64_t general_bound_formula(double log_m, double eta, double dB_r) {
  const double den = 4.0 * eta * std::log(dB_r / eta);
  if (!(eta > 0.0 && den > 0.0)) throw DomainError("general bound: requires eta > 0 and d_B r > eta");
  return ceil_floor_one(fano_rhs_log(log_m) / den);
}

inline std::uint64_t general_lower_bound_log(double log_m, double eta, std::uint64_t dB_r) {
  if (!(eta > 0.0 && eta < 0.5)) throw DomainError("general_lower_bound: eta must lie in (0, 1/2)");
  if (dB_r < 1) throw DomainError("general_lower_bound: d_B r must be at least 1");
  return general_bound_formula(log_m, eta, static_cast<double>(dB_r));
}

inline std::uint64_t general_lower_bound(std::uint64_t m, double eta, std::uint64_t dB_r) {
  if (m < 3) throw DomainError("general_lower_bound: requires M >= 3");
  return general_lower_bound_log(std::log(static_cast<double>(m)), eta, dB_r);
}

/// ceil(fano / (16 eps^2 log(dB_r / eps))).
inline std::uint64_t tilted_bound_formula(double log_m, double eps, std::uint64_t dB_r) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("tilted bound: eps must lie in (0, 1)");
  if (dB_r < 1) throw DomainError("tilted bound: d_B r must be at least 1");
  return ceil_floor_one(fano_rhs_log(log_m) / (16.0 * eps * eps * std::log(static_cast<double>(dB_r) / eps)));
}

struct BoundEntry {
  std::string name;
  std::uint64_t n = 1;
  double log_m = 0.0;
  double eta = 0.0;
  std::string formula;
  std::vector<std::string> notes;
};

inline constexpr double kAsymptoticEpsilon = 1e-4;
inline constexpr double kAsymptoticDimension = 2500.0;

inline std::vector<std::string> regime_notes(std::size_t d_A, std::size_t d_B, std::size_t r, double eps) {
  std::vector<std::string> notes;
  if (!(eps < kAsymptoticEpsilon)) notes.push_back("eps >= 1e-4: outside the asymptotic regime");
  if (static_cast<double>(d_A) * static_cast<double>(d_B) * static_cast<double>(r) < kAsymptoticDimension)
    notes.push_back("d_A d_B r < 2500: outside the asymptotic regime");
  return notes;
}

/// log M defaults to c_ensemble d_A d_B r.
inline BoundEntry main_lower_bound(std::size_t d_A, std::size_t d_B, std::size_t r, double eps, double c_ensemble,
                                   std::optional<double> log_m = std::nullopt) {
  if (d_A == 0 || d_B == 0 || r == 0) throw DomainError("main_lower_bound: dimensions must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("main_lower_bound: eps must lie in (0, 1)");
  if (!log_m && !(c_ensemble > 0.0)) throw DomainError("main_lower_bound: c_ensemble must be positive");
  const double lm = log_m.value_or(c_ensemble * static_cast<double>(d_A * d_B * r));
  const std::uint64_t dbr = d_B * r;
  BoundEntry e;
  e.log_m = lm;
  e.notes = regime_notes(d_A, d_B, r, eps);
  if (!log_m) e.notes.push_back("log M = " + std::to_string(c_ensemble) + " * d_A d_B r");
  if (d_A == r * d_B) {
    e.name = "main_equal";
    e.eta = 2.0 * eps;
    e.formula = "ceil(((2/3) log M - log 2) / (4 eta log(d_B r / eta))), eta = 2 eps";
    if (!(e.eta < 0.5)) e.notes.push_back("eta >= 1/2: outside the general bound's hypotheses");
    e.n = general_bound_formula(lm, e.eta, static_cast<double>(dbr));
  } else if (2 * d_A <= r * d_B) {
    e.name = "main_tilted";
    e.eta = 2.0 * eps;
    e.formula = "ceil(((2/3) log M - log 2) / (16 eps^2 log(d_B r / eps)))";
    e.n = tilted_bound_formula(lm, eps, dbr);
  } else {
    throw DomainError("main_lower_bound: requires d_A = r d_B or d_A <= r d_B / 2");
  }
  return e;
}

/// General bound with eta = 4 sqrt(eps) and log M = c_pack r d_A d_B.
inline BoundEntry packing_net_bound(std::size_t d_A, std::size_t d_B, std::size_t r, double eps, double c_pack,
                                    std::optional<double> log_m = std::nullopt) {
  if (d_A == 0 || d_B == 0 || r == 0) throw DomainError("packing_net_bound: dimensions must be positive");
  if (!(eps > 0.0 && eps < 0.25)) throw DomainError("packing_net_bound: eps must lie in (0, 1/4)");
  if (!log_m && !(c_pack > 0.0)) throw DomainError("packing_net_bound: c_pack must be positive");
  BoundEntry e;
  e.name = "packing";
  e.log_m = log_m.value_or(c_pack * static_cast<double>(r * d_A * d_B));
  e.eta = 4.0 * std::sqrt(eps);
  e.formula = "ceil(((2/3) log M - log 2) / (4 eta log(d_B r / eta))), eta = 4 sqrt(eps)";
  if (!log_m) e.notes.push_back("log M = " + std::to_string(c_pack) + " * r d_A d_B");
  if (!(e.eta < 0.5)) e.notes.push_back("eta >= 1/2: outside the general bound's hypotheses");
  e.n = general_bound_formula(e.log_m, e.eta, static_cast<double>(d_B * r));
  return e;
}

struct BoundReport {
  std::size_t d_A = 0, d_B = 0, r = 0;
  double eps = 0.0;
  double c_ensemble = 1.0;
  double c_pack = 1.0;
  std::optional<double> log_m;
  std::optional<BoundEntry> general;  // eta = 2 eps, M = e^{log M}
  std::optional<BoundEntry> main;
  std::optional<BoundEntry> packing;
};

/// Every calculator that applies to the inputs; inapplicable ones are absent.
inline BoundReport compute_bounds(std::size_t d_A, std::size_t d_B, std::size_t r, double eps, double c_ensemble,
                                  double c_pack, std::optional<double> log_m) {
  BoundReport rep{d_A, d_B, r, eps, c_ensemble, c_pack, log_m, {}, {}, {}};
  try {
    rep.main = main_lower_bound(d_A, d_B, r, eps, c_ensemble, log_m);
  } catch (const DomainError&) {
  }
  try {
    rep.packing = packing_net_bound(d_A, d_B, r, eps, c_pack, log_m);
  } catch (const DomainError&) {
  }
  const double lm = log_m.value_or(c_ensemble * static_cast<double>(d_A * d_B * r));
  try {
    BoundEntry g;
    g.name = "general";
    g.log_m = lm;
    g.eta = 2.0 * eps;
    g.formula = "ceil(((2/3) log M - log 2) / (4 eta log(d_B r / eta)))";
    g.n = general_lower_bound_log(lm, g.eta, d_B * r);
    rep.general = g;
  } catch (const DomainError&) {
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Protocol simulation

struct ProtocolConfig {
  ChannelEnsemble ensemble;
  std::size_t n_queries = 1;
  std::size_t aux_dim = 1;
  std::uint64_t seed = 0;
};

struct ProtocolTrace {
  std::vector<double> gaps;             // ||pi_k - xi_k||_1, k = 1..N
  double eta = 0.0;                     // max pairwise isometry distance
  std::vector<double> flag_deviation;   // tilted case: max |diag Tr_{EB} - (1 - eps^2, eps^2)| per step
};

inline constexpr std::size_t kMaxSimulationDim = 4096;

inline double max_isometry_distance(const std::vector<Isometry>& members) {
  double eta = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j)
      eta = std::max(eta, isometry_distance(members[i], members[j]));
  return eta;
}

/// Runs the N-query protocol on every member in parallel branches. The
/// register is A (x) M with M the auxiliary system. Query k applies V_x (x) 1_M;
/// between queries the output O (x) M is embedded into A (x) M (x) J, rotated by
/// a Haar unitary and J is traced out. pi_k averages the k-th outputs over
/// members; xi_k applies member 0 in place of V_x at step k.
inline ProtocolTrace simulate_protocol_gap(const ProtocolConfig& cfg) {
  const auto& members = cfg.ensemble.isometries;
  if (members.empty()) throw DomainError("simulate_protocol_gap: empty ensemble");
  if (cfg.n_queries < 1) throw DomainError("simulate_protocol_gap: N_queries must be at least 1");
  if (cfg.aux_dim < 1) throw DomainError("simulate_protocol_gap: aux_dim must be at least 1");
  const std::size_t dA = members[0].d_A(), dOut = members[0].d_E() * members[0].d_B(), m = cfg.aux_dim;
  const std::size_t j_dim = (dOut + dA - 1) / dA;
  const std::size_t big = dA * m * j_dim;
  if (big > kMaxSimulationDim || dOut * m > kMaxSimulationDim)
    throw DimensionError("simulate_protocol_gap: global state dimension exceeds " + std::to_string(kMaxSimulationDim));

  std::vector<Matrix> lifted;
  for (const auto& v : members) lifted.push_back(tensor(v.op(), Operator::identity(m)).matrix());

  const SeededRng root{cfg.seed, 0};
  RandomStream init(derive_substream(root, 0));
  const Eigen::VectorXcd psi = random_pure_state(dA * m, init);
  std::vector<Matrix> states(members.size(), Matrix(psi * psi.adjoint()));

  const bool tilted = cfg.ensemble.params.kind == EnsembleCase::Tilted;
  const double eps = cfg.ensemble.params.eps;
  const std::size_t n = members.size();

  ProtocolTrace trace;
  trace.eta = max_isometry_distance(members);
  for (std::size_t k = 1; k <= cfg.n_queries; ++k) {
    Matrix pi = Matrix::Zero(dOut * m, dOut * m), xi = pi;
    double flag_dev = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      Matrix out = lifted[x] * states[x] * lifted[x].adjoint();
      xi += lifted[0] * states[x] * lifted[0].adjoint();
      if (tilted) {
        const std::size_t dB = members[x].d_B() / 2;
        const Operator f = partial_trace(Operator(out, Dims{members[x].d_E(), 2, dB, m}), {1});
        flag_dev = std::max({flag_dev, std::abs(f(0, 0).real() - (1.0 - eps * eps)),
                             std::abs(f(1, 1).real() - eps * eps)});
      }
      pi += out;
      states[x] = std::move(out);
    }
    pi /= static_cast<double>(n);
    xi /= static_cast<double>(n);
    trace.gaps.push_back(hermitian_eigenvalues_unchecked(Matrix(pi - xi)).cwiseAbs().sum());
    if (tilted) trace.flag_deviation.push_back(flag_dev);
    if (k == cfg.n_queries) break;

    RandomStream rs(derive_substream(root, k));
    const Matrix w = haar_unitary_matrix(big, rs).leftCols(dOut * m);
    for (auto& s : states) {
      const Operator rotated(Matrix(w * s * w.adjoint()), Dims{dA, m, j_dim});
      s = partial_trace(rotated, {0, 1}).matrix();
    }
  }
  return trace;
}

}  // namespace diamondlab
