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

// Reproducible randomness and Haar-distributed unitaries.
//
// Generator: std::mt19937_64, whose output sequence is fixed by the C++
// standard, keyed by a SplitMix64 mix of (seed, stream_id). Substreams are
// derived by hashing the parent stream id with the substream index, so any
// sample can be regenerated from (seed, index) alone, independent of thread
// scheduling. Gaussians use Box-Muller on 53-bit uniforms.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "diamondlab/errors.hpp"
#include "diamondlab/matrix.hpp"

namespace diamondlab {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Immutable (seed, stream) key identifying one random sequence.
struct SeededRng {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const SeededRng&, const SeededRng&) = default;
};

inline SeededRng derive_substream(const SeededRng& rng, std::uint64_t index) {
  return {rng.seed, splitmix64(rng.stream_id ^ splitmix64(index + 0x632be59bd9b4e019ULL))};
}

/// The mutable generator for one SeededRng.
class RandomStream {
 public:
  explicit RandomStream(const SeededRng& key) : engine_(splitmix64(key.seed) ^ splitmix64(~key.stream_id)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard complex Gaussian: real and imaginary parts ~ N(0, 1/2).
  cplx complex_normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  /// Standard real Gaussian.
  double normal() { return std::sqrt(2.0) * complex_normal().real(); }

 private:
  std::mt19937_64 engine_;
};

inline Matrix ginibre(std::size_t rows, std::size_t cols, RandomStream& rs) {
  Matrix g(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) g(i, j) = rs.complex_normal();
  return g;
}

/// Haar-random d x d unitary: QR of a Ginibre matrix with the R-diagonal
/// phases moved into Q.
inline Matrix haar_unitary_matrix(std::size_t d, RandomStream& rs) {
  if (d == 0) throw DimensionError("sample_haar_unitary: d must be positive");
  Matrix g = ginibre(d, d, rs);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (std::size_t j = 0; j < d; ++j) {
    const cplx rjj = r(j, j);
    const double mag = std::abs(rjj);
    q.col(j) *= (mag > 0.0 ? rjj / mag : cplx(1.0));
  }
  return q;
}

inline Operator sample_haar_unitary(std::size_t d, RandomStream& rs) { return Operator(haar_unitary_matrix(d, rs)); }

inline Operator sample_haar_unitary(std::size_t d, const SeededRng& rng) {
  RandomStream rs(rng);
  return sample_haar_unitary(d, rs);
}

/// Random Hermitian matrix with unit Frobenius norm.
inline Matrix random_unit_hermitian(std::size_t d, RandomStream& rs) {
  Matrix g = ginibre(d, d, rs);
  Matrix h = g + g.adjoint();
  return h / h.norm();
}

/// Random density matrix (Ginibre ensemble, full rank by default).
inline Matrix random_density_matrix(std::size_t d, RandomStream& rs, std::size_t rank = 0) {
  Matrix g = ginibre(d, rank ? rank : d, rs);
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

/// Haar-random unit vector.
inline Eigen::VectorXcd random_pure_state(std::size_t d, RandomStream& rs) {
  Eigen::VectorXcd v(d);
  for (std::size_t i = 0; i < d; ++i) v(i) = rs.complex_normal();
  return v / v.norm();
}

}  // namespace diamondlab
