#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "twoiso/constructions.hpp"
#include "twoiso/generators.hpp"
#include "twoiso/random.hpp"

namespace {

using namespace twoiso;

std::vector<Vector> std_basis(std::size_t len, std::size_t count) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(Vector::unit(len, i));
  return out;
}

std::vector<Vector> concat(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  std::vector<Vector> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::UsageError;
}

TEST(DiagonalizingBasis, JordanBlock) {
  const DenseOperator t(DenseMatrix{{2.0, 1.0}, {0.0, 2.0}});
  const auto f = std_basis(2, 2);
  const auto x = diagonalizing_basis(t, f);
  ASSERT_EQ(x.size(), 2u);
  EXPECT_LE(identity_deviation(gram_matrix(x)), 1e-14);
  std::vector<Vector> tx;
  for (const auto& v : x) tx.push_back(t.apply(v));
  const auto g = gram_matrix(tx);
  EXPECT_LE(max_offdiagonal(g), 1e-12);
  // eigenvalues of [[4,2],[2,5]]
  EXPECT_NEAR(g(0, 0).real(), (9.0 + std::sqrt(17.0)) / 2.0, 1e-12);
  EXPECT_NEAR(g(1, 1).real(), (9.0 - std::sqrt(17.0)) / 2.0, 1e-12);
}

TEST(DiagonalizingBasis, RandomSubspacesProperty) {
  Rng rng(404);
  for (std::size_t d : {3u, 8u, 16u}) {
    const auto t = expansive_generator(d, family::SvdRandom{d});
    for (std::size_t n = 1; n <= d; n += 3) {
      const auto f = rng.orthonormal_set(d, n);
      const auto x = diagonalizing_basis(t, f);
      std::vector<Vector> tx;
      for (const auto& v : x) tx.push_back(t.apply(v));
      EXPECT_LE(identity_deviation(gram_matrix(x)), 1e-12);
      EXPECT_LE(max_offdiagonal(gram_matrix(tx)), 1e-10 * std::pow(t.operator_norm(), 2));
      // x spans the same subspace as f
      for (const auto& v : x) {
        double in = 0.0;
        for (const auto& q : f) in += std::norm(inner(q, v));
        EXPECT_NEAR(in, 1.0, 1e-12);
      }
    }
  }
}

TEST(SplitPair, CoefficientZeroAndOne) {
  const DenseOperator t(DenseMatrix::identity(2));
  const auto x = std_basis(2, 2);
  const auto p0 = split_pair(x, 0.0, t);
  EXPECT_LE(norm(p0.first[0] - Vector{1.0, 0.0, 0.0, 0.0}), 1e-15);
  EXPECT_LE(norm(p0.second[1] - Vector{0.0, 0.0, 0.0, -1.0}), 1e-15);
  const auto p1 = split_pair(x, 1.0, t);
  EXPECT_LE(norm(p1.first[0] - Vector{0.0, 0.0, 1.0, 0.0}), 1e-15);
  EXPECT_LE(norm(p1.second[1] - Vector{0.0, 1.0, 0.0, 0.0}), 1e-15);
}

TEST(SplitPair, OrthogonalImagesUnderDoubledOperator) {
  const DenseOperator t(DenseMatrix{{2.0, 0.0}, {0.0, 3.0}});
  const auto x = std_basis(2, 2);
  const auto p = split_pair(x, 0.5, t);
  const auto ys = concat(p.first, p.second);
  EXPECT_LE(identity_deviation(gram_matrix(ys)), 1e-15);
  const auto t2 = direct_sum_power(t, 2);
  std::vector<Vector> images;
  for (const auto& y : ys) images.push_back(t2.apply(y));
  const auto g = gram_matrix(images);
  EXPECT_LE(max_offdiagonal(g), 1e-14);
  EXPECT_NEAR(g(0, 0).real(), 4.0, 1e-14);
  EXPECT_NEAR(g(1, 1).real(), 9.0, 1e-14);
  EXPECT_NEAR(g(2, 2).real(), 4.0, 1e-14);
  EXPECT_NEAR(g(3, 3).real(), 9.0, 1e-14);
}

TEST(SplitPair, RandomProperty) {
  Rng rng(3);
  for (std::size_t d : {4u, 9u, 16u}) {
    const auto t = expansive_generator(d, family::IdentityPlusPsd{d});
    const auto x = diagonalizing_basis(t, rng.orthonormal_set(d, d / 2));
    const double c = rng.uniform(0.0, 1.0);
    const auto p = split_pair(x, c, t);
    const auto ys = concat(p.first, p.second);
    EXPECT_LE(identity_deviation(gram_matrix(ys)), 1e-12);
    const auto t2 = direct_sum_power(t, 2);
    std::vector<Vector> images;
    for (const auto& y : ys) images.push_back(t2.apply(y));
    EXPECT_LE(max_offdiagonal(gram_matrix(images)), 1e-10 * std::pow(t.operator_norm(), 2));
  }
}

TEST(SplitPair, RejectsBadInput) {
  const DenseOperator t(DenseMatrix{{2.0, 1.0}, {0.0, 2.0}});
  const auto x = std_basis(2, 2);
  EXPECT_EQ(code_of([&] { (void)split_pair(x, 1.5, t); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { (void)split_pair(x, -0.1, t); }), ErrorCode::InvalidArgument);
  // standard basis does not diagonalize the Jordan block
  EXPECT_EQ(code_of([&] { (void)split_pair(x, 0.5, t); }), ErrorCode::InvalidArgument);
  const std::vector<Vector> bad{Vector{1.0, 0.0}, Vector{1.0, 1.0}};
  EXPECT_EQ(code_of([&] { (void)split_pair(bad, 0.5, DenseOperator(DenseMatrix::identity(2))); }),
            ErrorCode::NotOrthonormal);
}

struct Net {
  std::shared_ptr<AmbientSpace> space;
  Theorem1Result result;
};

Net make_theorem1(std::size_t n, std::size_t dim_h) {
  auto space = std::make_shared<AmbientSpace>(64 * dim_h);
  space->allocate_labeled("H", dim_h);
  auto res = theorem1_construct(std_basis(dim_h, n), space);
  return {space, std::move(res)};
}

TEST(Theorem1, SigmaValues) {
  EXPECT_NEAR(make_theorem1(2, 4).result.trace.sigmas[0], 3.0, 1e-14);
  EXPECT_EQ(make_theorem1(1, 2).result.trace.sigmas[0], 0.0);
}

TEST(Theorem1, ResidualNormIsEpsilonOnF) {
  Rng rng(12);
  for (std::size_t n : {1u, 2u, 5u, 8u}) {
    auto net = make_theorem1(n, 2 * n);
    auto& b = net.result.block;
    const auto& x = net.result.trace.x;
    for (int s = 0; s < 200; ++s) {
      const Vector u = rng.unit_vector_in(x);
      EXPECT_NEAR(norm(b.apply(u) - 2.0 * u), 1.0 / static_cast<double>(n), 1e-9);
    }
  }
}

TEST(Theorem1, BlockInvariants) {
  auto net = make_theorem1(4, 8);
  auto& b = net.result.block;
  const auto& tr = net.result.trace;
  EXPECT_LE(identity_deviation(gram_matrix(concat(tr.y1, tr.y2))), 1e-12);
  EXPECT_LE(identity_deviation(gram_matrix(concat(tr.z1, tr.z2))), 1e-12);
  EXPECT_LE(identity_deviation(gram_matrix(concat(tr.x, tr.x_tilde))), 1e-12);
  EXPECT_LE(b.hypothesis_residual(), 1e-12);
  EXPECT_LE(b.range_residual(), 1e-12);
  // ||B||^2 = 1 + sigma^2 with an isometric V
  EXPECT_NEAR(b.operator_norm(), std::sqrt(1.0 + tr.sigmas[0] * tr.sigmas[0]), 1e-12);
  Rng rng(5);
  for (int s = 0; s < 100; ++s) {
    const Vector x = rng.unit_vector(net.space->next_free(), net.space->id());
    EXPECT_LE(std::abs(defect_form(b, x, 2)), 1e-8 * std::pow(b.operator_norm(), 4));
  }
}

TEST(Theorem1, CertificatePasses) {
  auto net = make_theorem1(8, 16);
  const auto cert = theorem1_certificate(net.result.block, net.result.trace, net.result.trace.x,
                                         ConstructionParams{}, *net.space);
  EXPECT_TRUE(cert.passed());
  EXPECT_NEAR(cert.bound_measured, 0.125, 1e-12);
  EXPECT_LE(cert.residual_identity_max, 1e-14);
}

struct Pipeline {
  std::shared_ptr<AmbientSpace> space;
  Theorem2Result result;
};

Pipeline make_theorem2(const DenseOperator& t, const std::vector<Vector>& f, ConstructionParams p = {}) {
  auto space = std::make_shared<AmbientSpace>(64 * t.rows() * 4);
  auto res = theorem2_construct(t, f, space, p);
  return {space, std::move(res)};
}

TEST(Theorem2, IdentityIsReproducedExactly) {
  const DenseOperator t(DenseMatrix::identity(4));
  auto pl = make_theorem2(t, std_basis(4, 2));
  const auto& tr = pl.result.trace;
  for (double s : tr.sigmas) EXPECT_EQ(s, 0.0);
  for (const auto& x : tr.x) EXPECT_LE(norm(pl.result.block.apply(x) - x), 1e-15);
  EXPECT_LE(pl.result.certificate.bound_measured, 1e-15);
  EXPECT_TRUE(pl.result.certificate.passed());
}

TEST(Theorem2, DiagonalTwoThreeHandCase) {
  const DenseOperator t(DenseMatrix{{2.0, 0.0}, {0.0, 3.0}});
  auto pl = make_theorem2(t, std_basis(2, 2));
  const auto& c = pl.result.certificate;
  EXPECT_NEAR(c.bound_theoretical, 2.0, 1e-14);
  EXPECT_LE(c.bound_measured, 2.0);
  EXPECT_TRUE(c.passed());
  const auto& tr = pl.result.trace;
  ASSERT_EQ(tr.norms_Tx.size(), 2u);
  // sigma_i = sqrt((1 - eps^2)(1 - 1/||T x_i||^2)) / eps with eps = 1/2
  for (std::size_t i = 0; i < 2; ++i) {
    const double nt = tr.norms_Tx[i];
    EXPECT_NEAR(tr.sigmas[i], 2.0 * std::sqrt(0.75 * (1.0 - 1.0 / (nt * nt))), 1e-14);
  }
  // (T^(4) - I_F) x_i = eps (T^(4) - id) yhat_i^(2), checked from scratch
  const auto t4 = direct_sum_power(t, 4);
  for (std::size_t i = 0; i < 2; ++i) {
    const Vector lhs = t4.apply(tr.x[i]) - pl.result.block.apply(tr.x[i]);
    const Vector rhs = 0.5 * (t4.apply(tr.yhat2[i]) - tr.yhat2[i]);
    EXPECT_LE(norm(lhs - rhs), 1e-13);
  }
}

TEST(Theorem2, TraceInvariants) {
  const auto t = expansive_generator(6, family::SvdRandom{11});
  Rng rng(6);
  auto pl = make_theorem2(t, rng.orthonormal_set(6, 4));
  const auto& tr = pl.result.trace;
  const auto t4 = direct_sum_power(t, 4);
  EXPECT_LE(identity_deviation(gram_matrix(concat(tr.y1, tr.y2))), 1e-12);
  EXPECT_LE(identity_deviation(gram_matrix(concat(tr.z1, tr.z2))), 1e-12);
  for (std::size_t i = 0; i < tr.n; ++i) {
    EXPECT_LE(tr.y1[i].support_end(), 12u);
    EXPECT_LE(tr.z1[i].support_end(), 24u);
    EXPECT_NEAR(norm(t4.apply(tr.z1[i])), tr.norms_Tx[i], 1e-12 * tr.norms_Tx[i]);
    EXPECT_NEAR(norm(t4.apply(tr.y1[i])), tr.norms_Tx[i], 1e-12 * tr.norms_Tx[i]);
  }
  std::vector<Vector> tz;
  for (const auto& z : concat(tr.z1, tr.z2)) tz.push_back(t4.apply(z));
  EXPECT_LE(max_offdiagonal(gram_matrix(tz)), 1e-10 * std::pow(t.operator_norm(), 2));
  EXPECT_LE(pl.result.block.isometry().isometry_residual(), 1e-12);
}

TEST(Theorem2, ImagesOrthogonalToK) {
  Rng rng(21);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t = expansive_generator(8, family::SvdRandom{seed});
    auto pl = make_theorem2(t, rng.orthonormal_set(8, 1 + seed));
    const double o = range_orthogonality(direct_sum_power(t, 4), pl.result.trace);
    EXPECT_LE(o, 1e-10 * t.operator_norm());
    EXPECT_EQ(o, pl.result.certificate.orthogonality_max);
  }
}

TEST(Theorem2, NestedSweepStaysBelowBound) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto t = expansive_generator(16, family::SvdRandom{seed});
    const double bound = t.operator_norm() + 1.0;
    for (std::size_t n : {2u, 4u, 8u, 16u}) {
      auto pl = make_theorem2(t, std_basis(16, n));
      const auto& c = pl.result.certificate;
      EXPECT_LE(c.bound_measured * static_cast<double>(n), bound * (1.0 + 1e-9)) << "seed " << seed << " n " << n;
      EXPECT_TRUE(c.passed()) << "seed " << seed << " n " << n;
    }
  }
}

TEST(Theorem2, SingleVectorTestSubspace) {
  const auto t = expansive_generator(5, family::Diagonal{{1.5, 2.0, 3.0}});
  auto pl = make_theorem2(t, std_basis(5, 3));
  const auto& tr = pl.result.trace;
  const std::vector<Vector> g{tr.x[1]};
  const auto c = certificate_evaluate(t, pl.result.block, tr, g, ConstructionParams{}, *pl.space);
  const auto t4 = direct_sum_power(t, 4);
  const double expected = tr.epsilon * norm(t4.apply(tr.yhat2[1]) - tr.yhat2[1]);
  EXPECT_NEAR(c.bound_measured, expected, 1e-12);
  EXPECT_LE(c.bound_measured, c.bound_theoretical);
}

TEST(Theorem2, EpsilonOverride) {
  const auto t = expansive_generator(4, family::SvdRandom{2});
  ConstructionParams p;
  p.epsilon = 0.1;
  auto pl = make_theorem2(t, std_basis(4, 2), p);
  EXPECT_NEAR(pl.result.certificate.bound_theoretical, 0.1 * (t.operator_norm() + 1.0), 1e-14);
  EXPECT_TRUE(pl.result.certificate.passed());
}

TEST(Theorem2, Errors) {
  const DenseOperator contraction(DenseMatrix{{0.5, 0.0}, {0.0, 2.0}});
  EXPECT_EQ(code_of([&] { (void)make_theorem2(contraction, std_basis(2, 1)); }), ErrorCode::NotExpansive);

  const auto t = expansive_generator(4, family::Scalar{2.0});
  auto pl = make_theorem2(t, std_basis(4, 2));
  const std::vector<Vector> outside{Vector::unit(4, 3)};
  EXPECT_EQ(code_of([&] {
              (void)certificate_evaluate(t, pl.result.block, pl.result.trace, outside, ConstructionParams{},
                                 *pl.space);
            }),
            ErrorCode::SubspaceNotContained);

  auto used = std::make_shared<AmbientSpace>(64);
  used->allocate(1);
  EXPECT_EQ(code_of([&] { (void)theorem2_construct(t, std_basis(4, 1), used); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { (void)make_theorem2(t, {}); }), ErrorCode::AllVectorsNegligible);
  ConstructionParams p;
  p.epsilon = 0.0;
  EXPECT_EQ(code_of([&] { (void)make_theorem2(t, std_basis(4, 1), p); }), ErrorCode::InvalidArgument);
}

}  // namespace
