#include "isomat/sphericity.hpp"
#include "isomat/special.hpp"
#include "isomat/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace isomat;

TEST(Tau, HandComputedExample) {
  // gamma = (3, 2, 1): kappa1 = 2, kappa2 = 2/3, kappa3 = 0
  const TauStats t = tau_statistics(Vec3(1, 3, 2), 4.0, 2.0);
  EXPECT_NEAR(t.tau1, 0.0, 1e-14);
  EXPECT_NEAR(t.tau2, 16.0, 1e-12);
  ASSERT_TRUE(t.tau3.has_value());
  EXPECT_NEAR(*t.tau3, 0.0, 1e-14);
  EXPECT_NEAR(t.fa, std::sqrt(3.0 / 14.0), 1e-14);
  EXPECT_NEAR(t.ra, std::sqrt(2.0 / 3.0) / 2.0, 1e-14);
  EXPECT_NEAR(t.vr, 0.75, 1e-14);
  EXPECT_NEAR(t.tau4, 8.0 * std::sqrt(3.0 / 14.0), 1e-12);
  EXPECT_NEAR(t.tau5, 16.0, 1e-12);
  EXPECT_NEAR(t.tau6, -64.0 * std::log(0.75), 1e-12);
}

TEST(Tau, ProlateExtremeHasUnitSkew) {
  // (4, 1, 1): kappa2 = 2, kappa3 = 2, so tau3 = sqrt(2) * 2 / 2^{3/2} = 1
  const TauStats t = tau_statistics(Vec3(4, 1, 1), 1.0);
  EXPECT_NEAR(*t.tau3, 1.0, 1e-14);
  EXPECT_NEAR(t.vr, 0.5, 1e-14);
  EXPECT_NEAR(*tau_statistics(Vec3(1, 1, -2), 1.0).tau3, -1.0, 1e-14);
}

TEST(Tau, DegenerateCases) {
  const TauStats iso = tau_statistics(Vec3(1, 1, 1), 100.0);
  EXPECT_EQ(iso.tau2, 0.0);
  EXPECT_FALSE(iso.tau3.has_value());
  EXPECT_NEAR(iso.tau1, 10.0, 1e-14);
  const TauStats zero_mean = tau_statistics(Vec3(1, 0, -1), 10.0);
  EXPECT_TRUE(std::isnan(zero_mean.tau5));
  const TauStats vr0 = tau_statistics(Vec3(1, 1, 0), 10.0);
  EXPECT_TRUE(std::isinf(vr0.tau6));
  EXPECT_THROW(tau_statistics(Vec3(1, 2, 3), 0.0), InvalidArgument);
  EXPECT_THROW(tau_statistics(Vec(2), 1.0), InvalidArgument);
}

TEST(Tau, ScaleFreeMeasures) {
  const Vec3 g(3.0, 1.5, 0.2);
  EXPECT_NEAR(fa(g), fa(7.0 * g), 1e-14);
  EXPECT_NEAR(ra(g), ra(7.0 * g), 1e-14);
  EXPECT_NEAR(vr(g), vr(7.0 * g), 1e-14);
  EXPECT_NEAR(vr(g), g.prod() / std::pow(g.mean(), 3), 1e-14);
}

TEST(PValues, Conventions) {
  TauStats t = tau_statistics(Vec3(3, 2, 1), 4.0, 2.0);
  SphericityPValues p = sphericity_pvalues(t, 0.0);
  EXPECT_NEAR(p.p_tau1, 1.0, 1e-14);
  EXPECT_NEAR(p.p_tau2, chi2_sf(16.0, 5.0), 1e-15);
  EXPECT_NEAR(*p.p_tau3, 0.0, 1e-14);  // tau3 = 0 sits at the far end of |tau3| - 1/2
  t.tau3 = 0.5;
  EXPECT_NEAR(*sphericity_pvalues(t, 0.0).p_tau3, 1.0, 1e-14);
  t.tau1 = 1.959963984540054 / std::sqrt(6.0 + 9.0 * 0.5);
  EXPECT_NEAR(sphericity_pvalues(t, 0.5).p_tau1, 0.05, 1e-12);
  EXPECT_TRUE(accept_tau3(0.5, 0.9));
  EXPECT_TRUE(accept_tau3(-0.93, 0.9));
  EXPECT_FALSE(accept_tau3(0.96, 0.9));
  EXPECT_FALSE(accept_tau3(0.04, 0.9));
}

TEST(Regime1, JointLawMatchesExactSampling) {
  // With a zero mean FA, RA and VR are scale free, so their law under exact
  // isotropic sampling equals the limit for every mu.
  const double lambda = 0.7;
  Rng a = make_rng(21, 0), b = make_rng(21, 1);
  const IsotropicSampler draw(SymMat(3), IsotropicModel{3, 1.0, lambda});
  std::vector<double> fa1, fa2, ra1, ra2, v1, v2;
  for (int i = 0; i < 40000; ++i) {
    const auto s = regime1_joint_sample(lambda, a);
    fa1.push_back(s[0]);
    ra1.push_back(s[1]);
    v1.push_back(s[2]);
    const Vec g = spectral_decompose(draw(b)).gamma;
    fa2.push_back(fa(g));
    ra2.push_back(ra(g));
    v2.push_back(1.0 - vr(g));
  }
  EXPECT_GT(ks_two_sample(fa1, fa2).p, 0.001);
  EXPECT_GT(ks_two_sample(ra1, ra2).p, 0.001);
  EXPECT_GT(ks_two_sample(v1, v2).p, 0.001);
}

TEST(VrLimit, ConcentratesAtOneForLargeT) {
  Rng rng = make_rng(3, 3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) worst = std::max(worst, std::abs(vr_conditional_limit_sample(1e6, rng) - 1.0));
  EXPECT_LT(worst, 1e-4);
  EXPECT_THROW(vr_conditional_limit_sample(0.0, rng), InvalidArgument);
}

TEST(VrCalibration, RoundTripAndInversion) {
  const auto cal = VrCalibration::build({1.0, 10.0}, {0.05, 0.25, 0.5, 0.75, 0.95}, 20000, 5);
  for (double t : {1.0, 10.0}) {
    double prev = -INFINITY;
    for (double l : cal.levels()) {
      const double q = cal.quantile(t, l);
      EXPECT_GT(q, prev);
      prev = q;
      EXPECT_NEAR(cal.cdf(t, q), l, 1e-12);
    }
  }
  // the empirical fraction below the tabulated median is about one half
  Rng rng = make_rng(99, 0);
  int below = 0;
  const double med = cal.quantile(10.0, 0.5);
  for (int i = 0; i < 20000; ++i) below += vr_conditional_limit_sample(10.0, rng) <= med;
  EXPECT_NEAR(below / 20000.0, 0.5, 0.015);

  const std::string path = (std::filesystem::temp_directory_path() / "isomat_vr_test.csv").string();
  cal.save(path);
  const auto back = VrCalibration::load(path);
  EXPECT_EQ(back.ts(), cal.ts());
  EXPECT_EQ(back.quantile(1.0, 0.25), cal.quantile(1.0, 0.25));
  std::remove(path.c_str());
  EXPECT_THROW(cal.quantile(3.0, 0.5), InvalidArgument);
  EXPECT_THROW(VrCalibration::load("/nonexistent/vr.csv"), DataError);
}

TEST(VrCalibration, BundledTableLoads) {
  const auto cal = VrCalibration::load(std::string(ISOMAT_DEFAULT_DATA_DIR) + "/calibration/vr_quantiles.csv");
  EXPECT_FALSE(cal.ts().empty());
  EXPECT_LT(cal.quantile(cal.ts().front(), 0.05), cal.quantile(cal.ts().front(), 0.95));
}

TEST(Classifier, DefaultThresholds) {
  const ClassifierThresholds th = default_thresholds(100.0);
  EXPECT_NEAR(th.p_n, 0.9, 1e-15);
  EXPECT_NEAR(th.c_n, 9.236356899781123, 1e-9);
  EXPECT_THROW(default_thresholds(1.0), InvalidArgument);
}

TEST(Classifier, RecognisesEachRegime) {
  const double a = 1e6;
  const auto th = default_thresholds(a);
  auto cls = [&](const Vec3& g) { return symmetry_classify(g, a, th.c_n, th.p_n); };
  EXPECT_EQ(cls(Vec3(15, 7.5, 3)).regime, Regime3D::asymmetric);
  EXPECT_EQ(cls(Vec3(15, 3.0005, 2.9995)).regime, Regime3D::prolate);
  EXPECT_EQ(cls(Vec3(3, 15.0004, 14.9996)).regime, Regime3D::oblate);
  const SymmetryVerdict iso = cls(Vec3(2.0001, 2.0, 1.9999));
  EXPECT_EQ(iso.regime, Regime3D::isotropic);
  EXPECT_NEAR(iso.estimate[1], 2.0, 1e-12);
  const SymmetryVerdict pro = cls(Vec3(15, 3.0005, 2.9995));
  EXPECT_NEAR(pro.estimate[2], 3.0, 1e-12);
}

TEST(Classifier, ConsistentUnderExactSampling) {
  const double mu = 1e4;
  const auto th = default_thresholds(mu);
  const IsotropicSampler draw(SymMat::diagonal(Vec3(15, 3, 3)), IsotropicModel{3, mu, 0.0});
  Rng rng = make_rng(31, 0);
  int prolate = 0;
  for (int i = 0; i < 2000; ++i)
    prolate += symmetry_classify(spectral_decompose(draw(rng)).gamma, mu, th.c_n, th.p_n).regime == Regime3D::prolate;
  // the pair gap test keeps the truth with probability about p_n = 0.99
  EXPECT_GT(prolate / 2000.0, 0.97);
}

TEST(TwoSample, CovarianceAddition) {
  const CombinedModel c = two_sample_combine(2.0, 0.5, 3.0, -0.4, 3);
  const Mat sum = covariance_matrix({3, 2.0, 0.5}) + covariance_matrix({3, 3.0, -0.4});
  EXPECT_LT((covariance_matrix({3, c.mu, c.lambda}) - sum).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(two_sample_combine(-1.0, 0.0, 1.0, 0.0, 3), InvalidArgument);
}

TEST(TwoSample, StatisticIsQuadraticForm) {
  const double mu = 1.7, lambda = 0.3;
  SymMat d = SymMat::diagonal(Vec3(0.2, -0.1, 0.4));
  d.set(0, 2, 0.3);
  const Vec v = d.vec();
  EXPECT_NEAR(two_sample_stat(d, mu, lambda, 3), v.dot(precision_matrix({3, mu, lambda}) * v), 1e-12);
}
