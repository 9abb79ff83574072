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

// First and second Haar moments by Weingarten calculus, and a Monte Carlo
// estimator of the same quantities.
//
// For U ~ Haar(U(d)),
//   E Tr(U B_1 U^dag A_1 ... U B_n U^dag A_n)
//     = sum_{alpha, beta in S_n} Wg(beta alpha^{-1}, d)
//         Tr_{beta^{-1}}(B_1, ..., B_n) Tr_{alpha gamma_n}(A_1, ..., A_n),
// with gamma_n = (1 2 ... n) and Tr_sigma the product over the cycles of
// sigma of the trace of the cycle-ordered product. Only n <= 2 is supported.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "diamondlab/errors.hpp"
#include "diamondlab/haar.hpp"
#include "diamondlab/matrix.hpp"
#include "diamondlab/parallel.hpp"

namespace diamondlab {

/// Permutation of {0, ..., n-1}, stored as its image table.
class Permutation {
 public:
  explicit Permutation(std::vector<std::size_t> image) : image_(std::move(image)) {
    std::vector<bool> seen(image_.size(), false);
    for (auto v : image_) {
      if (v >= image_.size() || seen[v]) throw ContractViolation("Permutation: not a bijection");
      seen[v] = true;
    }
  }

  static Permutation identity(std::size_t n) {
    std::vector<std::size_t> img(n);
    std::iota(img.begin(), img.end(), 0);
    return Permutation(std::move(img));
  }

  /// The full cycle gamma_n: i -> i + 1 (mod n).
  static Permutation full_cycle(std::size_t n) {
    std::vector<std::size_t> img(n);
    for (std::size_t i = 0; i < n; ++i) img[i] = (i + 1) % n;
    return Permutation(std::move(img));
  }

  /// Cycles over {0, ..., n-1}; must partition the set.
  static Permutation from_cycles(std::size_t n, const std::vector<std::vector<std::size_t>>& cycles) {
    std::vector<std::size_t> img(n, n);
    std::size_t covered = 0;
    for (const auto& c : cycles) {
      for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k] >= n || img[c[k]] != n) throw ContractViolation("Permutation: cycles do not partition [n]");
        img[c[k]] = c[(k + 1) % c.size()];
        ++covered;
      }
    }
    if (covered != n) throw ContractViolation("Permutation: cycles do not cover [n]");
    return Permutation(std::move(img));
  }

  /// Parses 1-based cycle notation such as "(1)(2)" or "(12)"; n is the
  /// largest label. Labels are single digits.
  static Permutation parse(const std::string& text) {
    std::vector<std::vector<std::size_t>> cycles;
    std::size_t n = 0;
    std::vector<std::size_t> current;
    bool open = false;
    for (char ch : text) {
      if (ch == '(') {
        if (open) throw ContractViolation("Permutation::parse: nested '('");
        open = true;
        current.clear();
      } else if (ch == ')') {
        if (!open || current.empty()) throw ContractViolation("Permutation::parse: malformed cycle");
        cycles.push_back(current);
        open = false;
      } else if (ch >= '1' && ch <= '9') {
        if (!open) throw ContractViolation("Permutation::parse: label outside a cycle");
        const std::size_t v = static_cast<std::size_t>(ch - '1');
        current.push_back(v);
        n = std::max(n, v + 1);
      } else if (ch != ' ') {
        throw ContractViolation("Permutation::parse: unexpected character");
      }
    }
    if (open || cycles.empty()) throw ContractViolation("Permutation::parse: malformed input");
    return from_cycles(n, cycles);
  }

  std::size_t size() const { return image_.size(); }
  std::size_t operator()(std::size_t i) const { return image_[i]; }
  const std::vector<std::size_t>& image() const { return image_; }

  Permutation inverse() const {
    std::vector<std::size_t> inv(image_.size());
    for (std::size_t i = 0; i < image_.size(); ++i) inv[image_[i]] = i;
    return Permutation(std::move(inv));
  }

  /// Disjoint cycles, each starting at its smallest element, ordered by it.
  std::vector<std::vector<std::size_t>> cycles() const {
    std::vector<std::vector<std::size_t>> out;
    std::vector<bool> seen(image_.size(), false);
    for (std::size_t s = 0; s < image_.size(); ++s) {
      if (seen[s]) continue;
      std::vector<std::size_t> c;
      for (std::size_t i = s; !seen[i]; i = image_[i]) {
        seen[i] = true;
        c.push_back(i);
      }
      out.push_back(std::move(c));
    }
    return out;
  }

  /// Cycle lengths in descending order.
  std::vector<std::size_t> cycle_type() const {
    std::vector<std::size_t> t;
    for (const auto& c : cycles()) t.push_back(c.size());
    std::sort(t.rbegin(), t.rend());
    return t;
  }

  bool is_identity() const {
    for (std::size_t i = 0; i < image_.size(); ++i)
      if (image_[i] != i) return false;
    return true;
  }

  /// 1-based cycle notation, e.g. "(1)(2)".
  std::string to_string() const {
    std::string s;
    for (const auto& c : cycles()) {
      s += "(";
      for (auto v : c) s += std::to_string(v + 1);
      s += ")";
    }
    return s;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

  /// (a * b)(i) = a(b(i)).
  friend Permutation operator*(const Permutation& a, const Permutation& b) {
    if (a.size() != b.size()) throw DimensionError("Permutation: composing different sizes");
    std::vector<std::size_t> img(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) img[i] = a(b(i));
    return Permutation(std::move(img));
  }

  /// All n! permutations in lexicographic order of image tables.
  static std::vector<Permutation> all(std::size_t n) {
    std::vector<std::size_t> img(n);
    std::iota(img.begin(), img.end(), 0);
    std::vector<Permutation> out;
    do out.emplace_back(img);
    while (std::next_permutation(img.begin(), img.end()));
    return out;
  }

 private:
  std::vector<std::size_t> image_;
};

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Exact Wg(pi, d) for |pi| <= 2.
inline Rational wg_rational(const Permutation& pi, std::int64_t d) {
  if (d < 1) throw DomainError("wg: d must be positive");
  switch (pi.size()) {
    case 1:
      return {1, d};
    case 2:
      if (d == 1) throw PoleError("wg: order-2 Weingarten function has a pole at d = 1");
      if (pi.is_identity()) return {1, d * d - 1};
      return {-1, d * (d * d - 1)};
    default:
      throw UnsupportedOrder("wg: only permutations of size 1 or 2 are supported, got " +
                             std::to_string(pi.size()));
  }
}

inline double wg(const Permutation& pi, std::int64_t d) { return wg_rational(pi, d).value(); }

/// Product over the cycles of sigma of Tr(M_{c_0} M_{c_1} ...).
inline cplx permuted_trace(const Permutation& sigma, const std::vector<Operator>& ms) {
  if (ms.size() != sigma.size()) throw DimensionError("permuted_trace: need one operator per element");
  for (const auto& m : ms)
    if (!m.is_square() || m.rows() != ms.front().rows())
      throw DimensionError("permuted_trace: operators must be square and of equal size");
  cplx out = 1.0;
  for (const auto& c : sigma.cycles()) {
    Matrix prod = ms[c.front()].matrix();
    for (std::size_t k = 1; k < c.size(); ++k) prod = prod * ms[c[k]].matrix();
    out *= prod.trace();
  }
  return out;
}

namespace detail {

inline void check_moment_inputs(const std::vector<Operator>& a, const std::vector<Operator>& b, std::size_t d) {
  if (a.size() != b.size()) throw DimensionError("haar moment: A and B lists differ in length");
  if (a.empty() || a.size() > 2)
    throw UnsupportedOrder("haar moment: only n = 1 or 2 is supported, got n = " + std::to_string(a.size()));
  for (const auto* list : {&a, &b})
    for (const auto& m : *list)
      if (!m.is_square() || m.rows() != d) throw DimensionError("haar moment: operators must be d x d");
}

}  // namespace detail

inline cplx haar_moment_closed_form(const std::vector<Operator>& a, const std::vector<Operator>& b, std::size_t d) {
  detail::check_moment_inputs(a, b, d);
  const std::size_t n = a.size();
  const Permutation gamma = Permutation::full_cycle(n);
  cplx total = 0.0;
  for (const auto& alpha : Permutation::all(n))
    for (const auto& beta : Permutation::all(n)) {
      const double w = wg(beta * alpha.inverse(), static_cast<std::int64_t>(d));
      total += w * permuted_trace(beta.inverse(), b) * permuted_trace(alpha * gamma, a);
    }
  return total;
}

/// Tr(U B_1 U^dag A_1 ... U B_n U^dag A_n) for one unitary.
inline cplx haar_moment_integrand(const Matrix& u, const std::vector<Operator>& a, const std::vector<Operator>& b) {
  Matrix prod = Matrix::Identity(u.rows(), u.cols());
  for (std::size_t i = 0; i < a.size(); ++i) prod = prod * u * b[i].matrix() * u.adjoint() * a[i].matrix();
  return prod.trace();
}

struct ComplexEstimate {
  cplx estimate;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Sample mean of the integrand over Haar unitaries; sample i uses substream i.
inline ComplexEstimate mc_haar_moment(const std::vector<Operator>& a, const std::vector<Operator>& b, std::size_t d,
                                      std::size_t samples, const SeededRng& rng) {
  detail::check_moment_inputs(a, b, d);
  if (samples < 100) throw DomainError("mc_haar_moment: at least 100 samples required");
  const auto values = parallel_map(samples, [&](std::size_t i) {
    RandomStream rs(derive_substream(rng, i));
    return haar_moment_integrand(haar_unitary_matrix(d, rs), a, b);
  });
  std::vector<double> re(samples), im(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    re[i] = values[i].real();
    im[i] = values[i].imag();
  }
  const auto sr = sample_stats(re), si = sample_stats(im);
  return {{sr.mean, si.mean}, std::hypot(sr.std_error, si.std_error), samples};
}

}  // namespace diamondlab
