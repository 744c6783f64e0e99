#include "isomat/asymptotics.hpp"
#include "isomat/symmat.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace isomat;

TEST(Clusters, GroupsEqualEigenvalues) {
  const ClusterStructure c = cluster(Vec3(15, 3, 3));
  EXPECT_EQ(c.sizes, (std::vector<int>{1, 2}));
  EXPECT_EQ(c.boundaries, (std::vector<int>{0, 1, 3}));
  EXPECT_DOUBLE_EQ(c.representatives[1], 3.0);
  EXPECT_EQ(cluster(Vec3(1, 1, 1)).count(), 1);
  EXPECT_EQ(cluster(Vec3(3, 2, 1)).count(), 3);
  EXPECT_EQ(cluster(Vec3(3, 3 - 1e-12, 1)).count(), 2);  // within the default tolerance
  EXPECT_EQ(cluster(Vec3(3, 2.9, 1), 0.2).count(), 2);
}

TEST(Clusters, RegimeNames) {
  EXPECT_EQ(regime_classify(Vec3(15, 7.5, 3)), Regime3D::asymmetric);
  EXPECT_EQ(regime_classify(Vec3(15, 3, 3)), Regime3D::prolate);
  EXPECT_EQ(regime_classify(Vec3(15, 15, 3)), Regime3D::oblate);
  EXPECT_EQ(regime_classify(Vec3(2, 2, 2)), Regime3D::isotropic);
  EXPECT_EQ(to_string(Regime3D::oblate), "oblate");
}

TEST(Barycenter, CovarianceFromDiagonalBlock) {
  // First-order oracle: cluster barycenters average diagonal entries, so their
  // covariance is B C B^T with C the diagonal block at unit precision.
  for (double lambda : {0.0, 1.0, -0.3}) {
    const Mat c = covariance_matrix({3, 1.0, lambda}).topLeftCorner(3, 3);
    Mat b(2, 3);
    b << 1, 0, 0, 0, 0.5, 0.5;
    EXPECT_TRUE(barycenter_covariance({1, 2}, lambda).isApprox(b * c * b.transpose(), 1e-13)) << lambda;
  }
}

TEST(Barycenter, DensityIsGaussian) {
  const std::vector<int> sizes{1, 2};
  const Mat cov = barycenter_covariance(sizes, 0.5);
  const Vec x = (Vec(2) << 0.3, -0.2).finished();
  const double expect = -std::log(2 * M_PI) - 0.5 * std::log(cov.determinant()) - 0.5 * x.dot(cov.inverse() * x);
  EXPECT_NEAR(barycenter_logdensity(x, sizes, 0.5), expect, 1e-12);
}

TEST(WithinCluster, PairNormalizes) {
  // m_i = 2: one free coordinate zeta_1 > 0 (zeta_2 = -zeta_1)
  double s = 0.0;
  const double h = 1e-3;
  for (double z = h / 2; z < 10; z += h) s += std::exp(within_cluster_logdensity((Vec(1) << z).finished(), 2)) * h;
  EXPECT_NEAR(s, 1.0, 1e-6);
  EXPECT_EQ(within_cluster_logdensity((Vec(1) << -0.5).finished(), 2), -INFINITY);
}

TEST(PairGap, DensityAndCdf) {
  const double mu = 3.0;
  for (double x : {0.05, 0.2, 0.5}) {
    const double e = 1e-6;
    EXPECT_NEAR((pair_gap_cdf(x + e, mu) - pair_gap_cdf(x - e, mu)) / (2 * e), std::exp(pair_gap_logdensity(x, mu)), 1e-6);
  }
  EXPECT_EQ(pair_gap_cdf(-1.0, mu), 0.0);
}

namespace {

// Importance-sampled integral of the regime density over R^3.
double regime_mass(const Vec3& gbar, double mu, double lambda, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  const double s = 1.5 / std::sqrt(mu);
  const int n = 300000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec3 z(std_normal(rng), std_normal(rng), std_normal(rng));
    const Vec3 x = gbar + s * z;
    const double logq = -1.5 * std::log(2 * M_PI * s * s) - 0.5 * z.squaredNorm();
    const double f = regime_logdensity(x, gbar, mu, lambda);
    if (std::isfinite(f)) acc += std::exp(f - logq);
  }
  return acc / n;
}

}  // namespace

TEST(RegimeDensity, AsymmetricMatchesGaussianOfDiagonal) {
  const Vec3 gbar(15, 7.5, 3), g(15.1, 7.4, 3.05);
  const double mu = 2.0, lambda = 0.5;
  const Mat c = covariance_matrix({3, mu, lambda}).topLeftCorner(3, 3);
  const Vec d = g - gbar;
  const double expect = -1.5 * std::log(2 * M_PI) - 0.5 * std::log(c.determinant()) - 0.5 * d.dot(c.inverse() * d);
  EXPECT_NEAR(regime_logdensity(g, gbar, mu, lambda), expect, 1e-11);
}

TEST(RegimeDensity, EveryRegimeNormalizes) {
  EXPECT_NEAR(regime_mass(Vec3(15, 3, 3), 2.0, 0.5, 1), 1.0, 0.02);
  EXPECT_NEAR(regime_mass(Vec3(15, 15, 3), 2.0, 0.5, 2), 1.0, 0.02);
  EXPECT_NEAR(regime_mass(Vec3(4, 4, 4), 2.0, 0.5, 3), 1.0, 0.02);
  EXPECT_NEAR(regime_mass(Vec3(15, 7.5, 3), 2.0, 0.5, 4), 1.0, 0.02);
}

TEST(RegimeDensity, ZeroOutsideOrderedCone) {
  EXPECT_EQ(regime_logdensity(Vec3(3, 15, 3.1), Vec3(15, 3, 3), 1.0, 0.0), -INFINITY);
}

TEST(Eigvec, FluctuationVariance) {
  EXPECT_DOUBLE_EQ(eigvec_fluct_variance(15, 7.5), 1.0 / 225.0);
  EXPECT_THROW(eigvec_fluct_variance(3, 3), InvalidArgument);
}

TEST(Eigvec, SkewCoordinatesOfSmallRotation) {
  const ClusterStructure c = cluster(Vec3(3, 2, 1));
  Mat s = Mat::Zero(3, 3);
  s(0, 1) = 0.01;
  s(1, 0) = -0.01;
  s(1, 2) = -0.02;
  s(2, 1) = 0.02;
  const Mat r = s.exp();
  EXPECT_TRUE(rotation_skew_coordinates(r, c).isApprox(s, 1e-10));
}

TEST(Hciz, AsymptoticAgreesAtLargeN) {
  const Vec3 g(2, 1, 0), gb(1, 0, 0);
  HcizConfig cfg;
  cfg.nodes_per_angle = 256;
  const double lim = hciz_asymptotic(g, gb);
  const double r200 = hciz_rescaled(g, gb, 200.0, cfg);
  EXPECT_NEAR(r200 / lim, 1.0, 0.03);
}
