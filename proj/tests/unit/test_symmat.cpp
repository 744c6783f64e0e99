#include "isomat/symmat.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace isomat;

TEST(SymMat, VecLayoutDiagonalFirst) {
  EXPECT_EQ(vec_index(3, 0, 0), 0);
  EXPECT_EQ(vec_index(3, 2, 2), 2);
  EXPECT_EQ(vec_index(3, 0, 1), 3);
  EXPECT_EQ(vec_index(3, 1, 0), 3);
  EXPECT_EQ(vec_index(3, 0, 2), 4);
  EXPECT_EQ(vec_index(3, 1, 2), 5);
  EXPECT_EQ(vec_index(4, 2, 3), 9);
  EXPECT_THROW(vec_index(3, 3, 0), InvalidArgument);
}

TEST(SymMat, DenseRoundTrip) {
  Mat a(3, 3);
  a << 1, 2, 3, 2, 4, 5, 3, 5, 6;
  const SymMat s = SymMat::from_dense(a);
  EXPECT_EQ(s.vec(), (Vec(6) << 1, 4, 6, 2, 3, 5).finished());
  EXPECT_TRUE(s.dense().isApprox(a));
  EXPECT_DOUBLE_EQ(s.trace(), 11.0);
  EXPECT_THROW(SymMat::from_vec(3, Vec::Zero(5)), InvalidArgument);
}

TEST(IsotropicModel, Validation) {
  EXPECT_TRUE((IsotropicModel{3, 0.5, 0.0}.valid()));
  EXPECT_FALSE((IsotropicModel{3, 0.0, 0.0}.valid()));
  // 2 mu + m lambda must stay positive
  EXPECT_TRUE((IsotropicModel{3, 0.5, -0.3}.valid()));
  EXPECT_FALSE((IsotropicModel{3, 0.5, -0.34}.valid()));
  EXPECT_THROW((IsotropicModel{3, -1.0, 0.0}.validate()), InvalidArgument);
}

TEST(IsotropicModel, PrecisionPattern) {
  const Mat p = precision_matrix({3, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(p(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(p(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(p(3, 3), 4.0);
  EXPECT_DOUBLE_EQ(p(3, 4), 0.0);
  EXPECT_TRUE((precision_matrix({3, 0.7, 0.2}) * covariance_matrix({3, 0.7, 0.2})).isApprox(Mat::Identity(6, 6), 1e-12));
}

TEST(IsotropicModel, NormalizerClosedForm) {
  // mu = 1/2, lambda = 0: precision diag(1,1,1,2,2,2), det 8.
  const double expect = 0.5 * std::log(8.0) - 3.0 * std::log(2.0 * std::numbers::pi);
  EXPECT_NEAR(log_normalizer({3, 0.5, 0.0}), expect, 1e-13);
}

TEST(IsotropicModel, DensityAtMean) {
  const SymMat mean = SymMat::diagonal(Vec3(1, 2, 3));
  const IsotropicModel m{3, 2.0, 0.5};
  EXPECT_NEAR(log_density(mean, mean, m), log_normalizer(m), 1e-14);
  SymMat d = mean;
  d.set(0, 1, 0.1);
  // two off-diagonal entries of 0.1 contribute mu * 2 * 0.01
  EXPECT_NEAR(log_density(d, mean, m), log_normalizer(m) - 2.0 * 0.02, 1e-14);
}

TEST(Sampler, EmpiricalCovariance) {
  const IsotropicModel m{3, 0.8, 0.4};
  const IsotropicSampler draw(SymMat::diagonal(Vec3(3, 2, 1)), m);
  Rng rng = make_rng(5, 0);
  const int n = 200000;
  Vec mean = Vec::Zero(6);
  Mat s = Mat::Zero(6, 6);
  for (int i = 0; i < n; ++i) {
    const Vec v = draw(rng).vec();
    mean += v;
    s += v * v.transpose();
  }
  mean /= n;
  const Mat cov = s / n - mean * mean.transpose();
  const Mat expect = covariance_matrix(m);
  EXPECT_NEAR(mean[0], 3.0, 0.01);
  EXPECT_NEAR(mean[3], 0.0, 0.01);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(cov(i, j), expect(i, j), 0.02 * expect(0, 0)) << i << "," << j;
}

TEST(Sampler, DeterministicPerStream) {
  const IsotropicSampler draw(SymMat(3), IsotropicModel{3, 0.5, 0.0});
  Rng a = make_rng(9, 4), b = make_rng(9, 4), c = make_rng(9, 5);
  const Vec x = draw(a).vec();
  EXPECT_EQ(x, draw(b).vec());
  EXPECT_NE(x, draw(c).vec());
}

TEST(Spectral, RoundTripAndCanonicalSigns) {
  Rng rng = make_rng(1, 0);
  for (int k = 0; k < 50; ++k) {
    const SymMat d = sample_goe(4, rng);
    const SpectralDecomp s = spectral_decompose(d);
    for (int i = 0; i + 1 < 4; ++i) EXPECT_GT(s.gamma[i], s.gamma[i + 1]);
    EXPECT_TRUE((s.O.transpose() * s.O).isApprox(Mat::Identity(4, 4), 1e-12));
    EXPECT_TRUE(reconstruct(s).isApprox(d.dense(), 1e-12));
    for (int c = 0; c < 4; ++c) {
      int r = 0;
      while (std::abs(s.O(r, c)) <= 1e-10) ++r;
      EXPECT_GT(s.O(r, c), 0.0);
    }
    const SpectralDecomp again = spectral_decompose(SymMat::from_dense(reconstruct(s)));
    EXPECT_TRUE(again.O.isApprox(s.O, 1e-9));
  }
}

TEST(Spectral, RepeatedEigenvalueFlagged) {
  const SpectralDecomp s = spectral_decompose(SymMat::identity(3, 2.0));
  EXPECT_TRUE(s.degenerate);
  EXPECT_NEAR(s.gamma[0], 2.0, 1e-15);
}

TEST(Haar, OrthogonalWithUniformTrace) {
  Rng rng = make_rng(2, 0);
  double sum = 0.0, sum2 = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const Mat q = haar_orthogonal(3, rng);
    ASSERT_TRUE((q.transpose() * q).isApprox(Mat::Identity(3, 3), 1e-12));
    sum += q(0, 0);
    sum2 += q(0, 0) * q(0, 0);
  }
  // an entry of a Haar orthogonal matrix has mean 0 and variance 1/m
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum2 / n, 1.0 / 3.0, 0.01);
}

TEST(CentralMoments, TraceFormulaMatchesEigenvalues) {
  Rng rng = make_rng(3, 0);
  for (int k = 0; k < 20; ++k) {
    const SymMat d = sample(SymMat::diagonal(Vec3(1, 2, 4)), {3, 2.0, 0.0}, rng);
    const CentralMoments a = central_moments(spectral_decompose(d).gamma, 3);
    const CentralMoments b = central_moments_trace(d, 3);
    for (int r = 1; r <= 3; ++r) EXPECT_NEAR(a(r), b(r), 1e-12 * (1 + std::abs(a(r))));
  }
  const CentralMoments c = central_moments(Vec3(3, 0, 0), 3);
  EXPECT_DOUBLE_EQ(c(1), 1.0);
  EXPECT_DOUBLE_EQ(c(2), 2.0);  // (4 + 1 + 1) / 3
  EXPECT_DOUBLE_EQ(c(3), 2.0);  // (8 - 1 - 1) / 3
}
