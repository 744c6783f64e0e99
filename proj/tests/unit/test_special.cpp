#include "isomat/quadrature.hpp"
#include "isomat/special.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace isomat;

// Reference values computed with scipy.special (i0e, i1e) and scipy.stats.
struct BesselPin {
  double x, log_i0, ratio;
};

TEST(Bessel, PinnedValues) {
  const BesselPin pins[] = {{0.5, 0.06154971918548119, 0.24249961258080202},
                            {5.0, 3.3046817758225333, 0.8933831370440852},
                            {19.9, 17.49214981862135, 0.9745414658579311},
                            {20.1, 17.687083876788982, 0.9747982475982467},
                            {100.0, 96.77973268994258, 0.9949873730051687},
                            {1000.0, 995.6273088898695, 0.9994998748748043}};
  for (const auto& p : pins) {
    EXPECT_NEAR(log_bessel_i0(p.x), p.log_i0, 1e-12 * std::max(1.0, p.log_i0)) << p.x;
    EXPECT_NEAR(bessel_i1_i0_ratio(p.x), p.ratio, 1e-12) << p.x;
  }
  EXPECT_DOUBLE_EQ(log_bessel_i0(0.0), 0.0);
  EXPECT_DOUBLE_EQ(bessel_i1_i0_ratio(0.0), 0.0);
}

TEST(Bessel, ContinuousAcrossBranchPoints) {
  for (double x : {20.0, 500.0}) {
    EXPECT_NEAR(log_bessel_i0(x - 1e-9), log_bessel_i0(x + 1e-9), 1e-8);
    EXPECT_NEAR(bessel_i1_i0_ratio(x - 1e-9), bessel_i1_i0_ratio(x + 1e-9), 1e-10);
  }
}

TEST(Bessel, ScaledFunctionsAgree) {
  for (double x : {0.1, 3.0, 30.0}) {
    EXPECT_NEAR(std::log(bessel_i0e(x)) + x, log_bessel_i0(x), 1e-12 * (1 + x));
    EXPECT_NEAR(bessel_i1e(x) / bessel_i0e(x), bessel_i1_i0_ratio(x), 1e-12);
  }
}

TEST(Distributions, PinnedValues) {
  EXPECT_NEAR(chi2_cdf(3.0, 5.0), 0.3000141641213724, 1e-13);
  EXPECT_NEAR(chi2_sf(11.07, 5.0), 0.050009618622405425, 1e-13);
  EXPECT_NEAR(chi2_quantile(0.95, 5.0), 11.070497693516351, 1e-9);
  EXPECT_NEAR(chi2_quantile(0.9, 5.0), 9.236356899781123, 1e-9);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_cdf(-1.5), 0.06680720126885807, 1e-14);
  EXPECT_NEAR(normal_sf(1.5), 0.06680720126885807, 1e-14);
}

TEST(Quadrature, GaussLegendreExactForPolynomials) {
  const auto r = gauss_legendre(10);
  double s = 0.0;
  for (std::size_t i = 0; i < r->x.size(); ++i) s += r->w[i] * std::pow(r->x[i], 18);
  EXPECT_NEAR(s, 2.0 / 19.0, 1e-14);
  EXPECT_EQ(gauss_legendre(10).get(), r.get());  // cached
}

TEST(Quadrature, GaussHermiteMoments) {
  const auto r = gauss_hermite(40);
  double s0 = 0.0, s4 = 0.0;
  for (std::size_t i = 0; i < r->x.size(); ++i) {
    s0 += r->w[i];
    s4 += r->w[i] * std::pow(r->x[i], 4);
  }
  EXPECT_NEAR(s0, std::sqrt(std::numbers::pi), 1e-13);
  EXPECT_NEAR(s4, 0.75 * std::sqrt(std::numbers::pi), 1e-12);
}

TEST(Quadrature, AdaptiveRules) {
  auto f = [](double x) { return std::exp(-x) * std::sin(3 * x) * std::sin(3 * x); };
  // int_0^inf e^{-x} sin^2(3x) dx = 18 / 37
  EXPECT_NEAR(integrate(f, 0.0, INFINITY), 18.0 / 37.0, 1e-11);
  EXPECT_NEAR(adaptive_simpson(f, 0.0, 40.0, 1e-11), 18.0 / 37.0, 1e-9);
}
