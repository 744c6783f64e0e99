#include "isomat/eigen_laws.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace isomat;

// Sphere averages E exp(sum_j gamma_j u_j^2) computed with scipy dblquad: for
// a rank-one gbar = e1 the orthogonal-group average reduces to this.
TEST(Hciz, RankOneAgainstSphereQuadrature) {
  const Vec3 e1(1, 0, 0);
  EXPECT_NEAR(hciz(e1, Vec3(2, 1, 0)), 3.0983862159330324, 1e-9);
  EXPECT_NEAR(hciz(e1, Vec3(3, 0.5, -1.5)), 3.7128368764368083, 1e-9);
}

TEST(Hciz, SphericalMeanIsExplicit) {
  const Vec3 g(1.3, -0.2, 0.7);
  for (double c : {0.5, 2.0, 7.0}) {
    const double expect = c * g.sum();
    EXPECT_NEAR(log_hciz(Vec3::Constant(c), g).log_value, expect, 1e-9 * std::abs(expect));
  }
}

TEST(Hciz, SymmetricInArguments) {
  Rng rng = make_rng(4, 0);
  for (int k = 0; k < 10; ++k) {
    Vec3 a, b;
    for (int i = 0; i < 3; ++i) {
      a[i] = 2 * std_normal(rng);
      b[i] = 2 * std_normal(rng);
    }
    const double ab = log_hciz(a, b).log_value;
    EXPECT_NEAR(ab, log_hciz(b, a).log_value, 1e-8 * (1 + std::abs(ab)));
    // simultaneous permutation of both spectra
    EXPECT_NEAR(ab, log_hciz(Vec3(a[2], a[0], a[1]), Vec3(b[2], b[0], b[1])).log_value, 1e-8 * (1 + std::abs(ab)));
  }
}

TEST(Hciz, LargeArgumentsStayFinite) {
  const HcizResult r = log_hciz(Vec3(300, 100, 0), Vec3(2, 1, 0), HcizConfig{HcizMethod::euler_quadrature, 192});
  EXPECT_TRUE(std::isfinite(r.log_value));
  EXPECT_GT(r.log_value, 500.0);  // bounded below by the identity term 600 minus a polynomial correction
  EXPECT_LE(r.log_value, 700.0);
}

TEST(Hciz, MonteCarloAgrees) {
  const Vec3 a(1.2, 0.3, -0.8), b(0.9, 0.0, -0.4);
  HcizConfig mc;
  mc.method = HcizMethod::haar_mc;
  mc.mc_samples = 200000;
  const HcizResult q = log_hciz(a, b);
  const HcizResult m = log_hciz(a, b, mc);
  EXPECT_GT(m.rel_std_error, 0.0);
  EXPECT_NEAR(std::exp(m.log_value - q.log_value), 1.0, 4 * m.rel_std_error);
}

TEST(Hciz, ConfigValidation) {
  HcizConfig bad;
  bad.nodes_per_angle = 0;
  EXPECT_THROW(log_hciz(Vec3(1, 0, 0), Vec3(1, 0, 0), bad), InvalidArgument);
  EXPECT_THROW(log_hciz(Vec3(1, 0, 0), Eigen::Vector2d(1, 0)), InvalidArgument);
}

TEST(Vandermonde, Values) {
  EXPECT_DOUBLE_EQ(vandermonde(Vec3(3, 1, 0)), 6.0);
  EXPECT_NEAR(log_abs_vandermonde(Vec3(3, 1, 0)), std::log(6.0), 1e-15);
  EXPECT_LT(vandermonde(Vec3(0, 1, 3)), 0.0);
}

TEST(EigDensity, ZeroMeanIsSpecialCaseOfGeneral) {
  const IsotropicModel m{3, 0.7, 0.3};
  const Vec3 g(1.1, 0.2, -0.9);
  const OrderedSpectrum spec{g, Vec3::Zero()};
  EXPECT_NEAR(log_eigdensity_general(spec, m, {}), log_eigdensity_zero_mean(g, m), 1e-10);
  EXPECT_NEAR(eigdensity_zero_mean(g, m), std::exp(log_eigdensity_zero_mean(g, m)), 1e-15);
}

TEST(EigDensity, RejectsUnorderedSpectrum) {
  const OrderedSpectrum bad{Vec3(0, 1, 2), Vec3::Zero()};
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(EigDensity, ZeroMeanNormalizesOnOrderedCone) {
  // Importance sampling from N(0, s^2 I) restricted by sorting: each ordered
  // point has 3! preimages.
  const IsotropicModel m{3, 0.5, 1.0};
  Rng rng = make_rng(12, 0);
  const double s = 1.2;
  const int n = 200000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec3 x(s * std_normal(rng), s * std_normal(rng), s * std_normal(rng));
    const double logq = -1.5 * std::log(2 * M_PI * s * s) - 0.5 * x.squaredNorm() / (s * s) + std::log(6.0);
    std::sort(x.data(), x.data() + 3, std::greater<>());
    acc += std::exp(log_eigdensity_zero_mean(x, m) - logq);
  }
  EXPECT_NEAR(acc / n, 1.0, 0.01);
}

// The density lives on sign-canonical frames, a set of Haar mass 2^-m, and is
// unchanged by column sign flips; averaged over all of O(3) it gives 2^3.
TEST(EigvecDensity, AveragesToEightOverHaar) {
  const OrderedSpectrum spec{Vec3(2.0, 1.0, 0.2), Vec3(1.5, 1.0, 0.4)};
  Rng rng = make_rng(13, 0);
  double acc = 0.0;
  const int n = 5000;
  for (int i = 0; i < n; ++i) acc += std::exp(eigvec_conditional_logdensity(haar_orthogonal(3, rng), spec, 1.0, {}));
  EXPECT_NEAR(acc / n, 8.0, 0.3);
  Mat notorth = Mat::Identity(3, 3);
  notorth(0, 1) = 0.1;
  EXPECT_THROW(eigvec_conditional_logdensity(notorth, spec, 1.0, {}), InvalidArgument);
}

TEST(AxialDiffusivity, CdfShape) {
  const double mu = 2.0;
  EXPECT_NEAR(ad_cdf_centered(-1e-9, mu), 0.0, 1e-12);
  EXPECT_NEAR(ad_cdf_centered(10.0, mu), 1.0, 1e-10);
  double prev = 0.0;
  for (double t = 0.05; t < 3.0; t += 0.05) {
    const double c = ad_cdf_centered(t, mu);
    EXPECT_GE(c, prev);
    prev = c;
  }
}

TEST(AxialDiffusivity, QuadraturesAgree) {
  for (double t : {0.8, 1.2, 1.6}) EXPECT_NEAR(ad_cdf(t, 2.0, 1.0, 1.0), ad_cdf_simpson(t, 2.0, 1.0, 1.0), 1e-7) << t;
}

TEST(AxialDiffusivity, JointDensityMarginalizesToCdfDerivative) {
  const double mu = 2.0, lambda = 0.5, gbar = 1.0, t = 1.4;
  // d/dt P(gamma1 <= t) = int f(t, rd) d rd over rd < t
  double integral = 0.0;
  const int n = 4000;
  const double lo = t - 8.0, h = 8.0 / n;
  for (int i = 0; i < n; ++i) integral += ad_rd_joint_density(t, lo + (i + 0.5) * h, mu, lambda, gbar) * h;
  const double e = 1e-4;
  const double deriv = (ad_cdf(t + e, mu, lambda, gbar) - ad_cdf(t - e, mu, lambda, gbar)) / (2 * e);
  EXPECT_NEAR(integral, deriv, 2e-4 * std::max(1.0, deriv));
}
