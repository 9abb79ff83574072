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

#include <gtest/gtest.h>

#include <numbers>

#include "diamondlab/ensembles.hpp"
#include "oracles.hpp"

namespace diamondlab {
namespace {

Matrix random_unitary(std::size_t d, RandomStream& rs) { return haar_unitary_matrix(d, rs); }

TEST(EnsembleCase, ParseRoundTrip) {
  EXPECT_EQ(parse_ensemble_case("equal"), EnsembleCase::Equal);
  EXPECT_EQ(parse_ensemble_case(to_string(EnsembleCase::Tilted)), EnsembleCase::Tilted);
  EXPECT_THROW(parse_ensemble_case("other"), DomainError);
}

TEST(EnsembleParams, Validation) {
  EnsembleParams p{4, 2, 2, 0.1, 3, 0, EnsembleCase::Equal};
  EXPECT_NO_THROW(p.validate());
  p.d_A = 3;
  EXPECT_THROW(p.validate(), DomainError);
  p = {4, 4, 2, 0.1, 3, 0, EnsembleCase::Tilted};
  EXPECT_NO_THROW(p.validate());
  EXPECT_EQ(p.output_dim(), 8u);
  EXPECT_EQ(p.unitary_dim(), 8u);
  p.d_A = 5;
  EXPECT_THROW(p.validate(), DomainError);
  p = {4, 2, 2, 1.0, 3, 0, EnsembleCase::Equal};
  EXPECT_THROW(p.validate(), DomainError);
  p.eps = 0.1;
  p.M = 0;
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(BuildO, SpectrumAndTrace) {
  for (std::size_t d : {1u, 2u, 3u, 4u, 7u}) {
    for (double eps : {0.01, 0.3, 0.9}) {
      const Operator o = build_O(d, eps);
      const Matrix one = Matrix::Identity(d, d);
      const Matrix u = one + o.matrix();
      const double expect_tr = -eps * eps * static_cast<double>(d / 2);
      EXPECT_NEAR(o.trace().real(), expect_tr, 1e-14);
      EXPECT_NEAR(o.trace().imag(), 0.0, 1e-14);
      EXPECT_LE(operator_norm(o), eps + 1e-15);
      // 1 + O is unitary.
      EXPECT_LT((u.adjoint() * u - one).norm(), 1e-13);
    }
  }
  EXPECT_THROW(build_O(2, 0.0), DomainError);
  EXPECT_THROW(build_O(0, 0.1), DomainError);
}

TEST(BuildO, TwoDimensionalExample) {
  const Operator o = build_O(2, 0.2);
  EXPECT_NEAR(o(0, 0).real(), -0.02, 1e-15);
  EXPECT_NEAR(o(0, 0).imag(), 0.2 * std::sin(std::acos(-0.1)), 1e-15);
  EXPECT_NEAR(std::abs(o(1, 1)), 0.2, 1e-15);
  EXPECT_NEAR(std::arg(o(0, 0)), o_angle(0.2), 1e-15);
}

TEST(BuildOBar, TracelessAndNormBound) {
  for (std::size_t d : {2u, 3u, 6u}) {
    const Operator ob = build_O_bar(d, 0.4);
    EXPECT_LT(std::abs(ob.trace()), 1e-14);
    EXPECT_LE(operator_norm(ob), 2 * 0.4);
  }
}

TEST(EqualCase, IdentityUnitaryGivesOnePlusO) {
  const Operator o = build_O(4, 0.1);
  const Isometry v = build_isometry_equal_case(Operator::identity(4), o, 2);
  EXPECT_LT((v.matrix() - (Matrix::Identity(4, 4) + o.matrix())).norm(), 1e-15);
  EXPECT_EQ(v.d_E(), 2u);
  EXPECT_EQ(v.d_B(), 2u);
  EXPECT_THROW(build_isometry_equal_case(Operator::identity(4), o, 3), DimensionError);
}

TEST(EqualCase, PairwiseIsometryDistanceBounded) {
  RandomStream rs(SeededRng{11, 0});
  const double eps = 0.15;
  const Operator o = build_O(6, eps);
  for (int t = 0; t < 20; ++t) {
    const Isometry a = build_isometry_equal_case(Operator(random_unitary(6, rs)), o, 3);
    const Isometry b = build_isometry_equal_case(Operator(random_unitary(6, rs)), o, 3);
    EXPECT_LE(isometry_distance(a, b), 2 * eps + 1e-12);
  }
}

TEST(Paulis, TraceOrthogonal) {
  for (std::size_t d : {1u, 2u, 3u}) {
    const auto ps = generalized_paulis(d);
    ASSERT_EQ(ps.size(), d * d);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const Matrix& p = ps[i].matrix();
      EXPECT_LT((p.adjoint() * p - Matrix::Identity(d, d)).norm(), 1e-13);
      for (std::size_t j = 0; j < ps.size(); ++j) {
        const cplx ip = (p.adjoint() * ps[j].matrix()).trace();
        EXPECT_NEAR(std::abs(ip), i == j ? static_cast<double>(d) : 0.0, 1e-12);
      }
    }
  }
}

struct Dims3 {
  std::size_t dA, dB, r;
};

class ReferenceKrausGrid : public ::testing::TestWithParam<Dims3> {};

TEST_P(ReferenceKrausGrid, CompletenessOrthogonalityCount) {
  const auto [dA, dB, r] = GetParam();
  const KrausSet k = build_reference_kraus(dA, dB, r);
  EXPECT_LE(k.size(), r);
  EXPECT_EQ(k.d_A(), dA);
  EXPECT_EQ(k.d_B(), dB);
  Matrix sum = Matrix::Zero(dA, dA);
  for (const auto& op : k.operators()) sum += op.adjoint() * op;
  EXPECT_LT((sum - Matrix::Identity(dA, dA)).norm(), 1e-10);
  const double cap = 2.0 * static_cast<double>(dA) / static_cast<double>(r) + 1e-10;
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = 0; j < k.size(); ++j) {
      const double ip = std::abs((k[i].adjoint() * k[j]).trace());
      if (i == j)
        EXPECT_LE(ip, cap) << i;
      else
        EXPECT_LT(ip, 1e-12) << i << "," << j;
    }
  const Isometry v = padded_stinespring(k, r);
  EXPECT_EQ(v.d_E(), r);
}

INSTANTIATE_TEST_SUITE_P(Cases, ReferenceKrausGrid,
                         ::testing::Values(Dims3{2, 4, 2}, Dims3{2, 4, 3}, Dims3{3, 3, 2}, Dims3{2, 2, 4},
                                           Dims3{4, 2, 4}, Dims3{4, 2, 8}, Dims3{5, 2, 5}, Dims3{5, 2, 8},
                                           Dims3{3, 2, 3}, Dims3{6, 4, 3}, Dims3{1, 1, 2}, Dims3{3, 2, 7}));

TEST(ReferenceKraus, Examples) {
  const KrausSet a = build_reference_kraus(2, 4, 2);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_LT((a[0] - Matrix::Identity(4, 2)).norm(), 1e-15);
  const KrausSet b = build_reference_kraus(4, 2, 4);
  ASSERT_EQ(b.size(), 2u);
  for (const auto& op : b.operators()) EXPECT_NEAR((op.adjoint() * op).trace().real(), 2.0, 1e-13);
  EXPECT_THROW(build_reference_kraus(5, 2, 4), DomainError);
  EXPECT_THROW(padded_stinespring(build_reference_kraus(4, 2, 8), 1), DimensionError);
}

TEST(EmbeddingS, IsIsometry) {
  const Operator s = build_embedding_S(3, 2, 2);
  EXPECT_EQ(s.rows(), 4u);
  EXPECT_LT((s.matrix().adjoint() * s.matrix() - Matrix::Identity(3, 3)).norm(), 1e-15);
  EXPECT_THROW(build_embedding_S(5, 2, 2), DomainError);
}

TEST(Tilted, ZeroEpsReproducesReference) {
  const Isometry v0 = padded_stinespring(build_reference_kraus(4, 4, 2), 2);
  RandomStream rs(SeededRng{12, 0});
  const Operator u(random_unitary(8, rs));
  const Isometry v = build_isometry_tilted(u, v0, build_embedding_S(4, 4, 2), 0.0);
  EXPECT_EQ(v.d_B(), 8u);
  for (std::size_t e = 0; e < 2; ++e) {
    EXPECT_LT((v.kraus(e).topRows(4) - v0.kraus(e)).norm(), 1e-15);
    EXPECT_LT(v.kraus(e).bottomRows(4).norm(), 1e-15);
  }
  EXPECT_THROW(build_isometry_tilted(u, v0, build_embedding_S(4, 4, 2), 1.0), DomainError);
}

TEST(Tilted, FlagBlocksOfOutput) {
  const std::size_t dA = 4, dB = 4, r = 2;
  const double eps = 0.3;
  const Isometry v0 = padded_stinespring(build_reference_kraus(dA, dB, r), r);
  const Operator s = build_embedding_S(dA, dB, r);
  RandomStream rs(SeededRng{13, 0});
  for (int t = 0; t < 10; ++t) {
    const Operator u(random_unitary(r * dB, rs));
    const Isometry v = build_isometry_tilted(u, v0, s, eps);
    EXPECT_LT(v.residual(), 1e-12);
    const Eigen::VectorXcd psi = random_pure_state(dA, rs);
    const Operator phi(Matrix(psi * psi.adjoint()));
    const Operator rho = tilted_output_state(v, phi);
    const Matrix fb = partial_trace(rho, {1, 2}).matrix();
    const Matrix flag = partial_trace(rho, {1}).matrix();
    EXPECT_NEAR(flag(0, 0).real(), 1.0 - eps * eps, 1e-12);
    EXPECT_NEAR(flag(1, 1).real(), eps * eps, 1e-12);
    const Matrix base = apply_channel(v0, phi).matrix();
    EXPECT_LT((fb.topLeftCorner(dB, dB) - (1.0 - eps * eps) * base).norm(), 1e-12);
    const Matrix us = u.matrix() * s.matrix();
    const Matrix twirled = oracle::trace_out_first(us * phi.matrix() * us.adjoint(), r, dB);
    EXPECT_LT((fb.bottomRightCorner(dB, dB) - eps * eps * twirled).norm(), 1e-12);
    // Flag tracing of the joint state reproduces the channel output.
    EXPECT_LT((partial_trace(rho, {1, 2}).matrix() - apply_channel(v, phi).matrix()).norm(), 1e-12);
  }
}

TEST(Generate, DeterministicAndSubstreamed) {
  const EnsembleParams p{4, 2, 2, 0.1, 3, 42, EnsembleCase::Equal};
  const auto a = generate_ensemble(p), b = generate_ensemble(p);
  ASSERT_EQ(a.isometries.size(), 3u);
  for (std::size_t x = 0; x < 3; ++x) EXPECT_EQ(a.isometries[x].matrix(), b.isometries[x].matrix());
  EnsembleParams q = p;
  q.M = 5;
  const auto c = generate_ensemble(q);
  for (std::size_t x = 0; x < 3; ++x) EXPECT_EQ(a.isometries[x].matrix(), c.isometries[x].matrix());
  EXPECT_NEAR(a.theta, std::acos(-0.05), 1e-15);
}

TEST(Certify, SingleMemberHasNoPairs) {
  const auto ens = generate_ensemble({4, 2, 2, 0.1, 1, 0, EnsembleCase::Equal});
  const auto rep = certify_ensemble(ens, 0.01, 0.2);
  EXPECT_TRUE(rep.pairs.empty());
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(std::isinf(rep.min_separation));
  EXPECT_EQ(default_separation_threshold(ens), 0.0);
}

TEST(Certify, DuplicateMemberFailsSeparation) {
  auto ens = generate_ensemble({4, 2, 2, 0.1, 3, 0, EnsembleCase::Equal});
  ens.isometries.push_back(ens.isometries[1]);
  const auto rep = certify_ensemble(ens, 0.01, 0.2);
  EXPECT_FALSE(rep.pass);
  EXPECT_LT(rep.min_separation, 1e-12);
}

TEST(Certify, EqualCaseSeparatedAndClose) {
  const auto ens = generate_ensemble({4, 2, 2, 0.1, 20, 0, EnsembleCase::Equal});
  const auto rep = certify_ensemble(ens, 0.01, 0.2);
  EXPECT_EQ(rep.pairs.size(), 190u);
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.max_closeness, 0.2 + kClosenessSlack);
  for (const auto& pr : rep.pairs) EXPECT_LE(pr.choi_distance, 2 * pr.isometry_distance + 1e-12);
}

TEST(Certify, TiltedCaseCloseAndLowChoiRank) {
  const EnsembleParams p{4, 4, 2, 0.1, 6, 1, EnsembleCase::Tilted};
  const auto ens = generate_ensemble(p);
  const auto rep = certify_ensemble(ens, default_separation_threshold(ens), 2 * p.eps);
  EXPECT_TRUE(rep.pass);
  for (const auto& v : ens.isometries) EXPECT_LE(choi_rank(choi_state(v)), p.r);
  EXPECT_EQ(ens.reference_kraus.size(), build_reference_kraus(4, 4, 2).size());
}

}  // namespace
}  // namespace diamondlab
