#include "isomat/special.hpp"

#include "isomat/common.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace isomat {

namespace {

constexpr double kSeriesSwitch = 20.0;

// sum_k (x^2/4)^k / (k!)^2 and sum_k (x^2/4)^k / (k! (k+1)!)
void bessel_series(double x, double& s0, double& s1) {
  const double q = 0.25 * x * x;
  double t0 = 1.0, t1 = 1.0;
  s0 = 1.0;
  s1 = 1.0;
  for (int k = 1; k < 200; ++k) {
    t0 *= q / (static_cast<double>(k) * k);
    t1 *= q / (static_cast<double>(k) * (k + 1));
    s0 += t0;
    s1 += t1;
    if (t0 < 1e-17 * s0 && t1 < 1e-17 * s1) break;
  }
}

// Hankel expansion factor: I0(x) ~ e^x / sqrt(2 pi x) * sum_k c_k / x^k.
double hankel_i0_sum(double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
    if (next > term) break;  // past the smallest term of the divergent tail
    term = next;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// Perron continued fraction
//   I1/I0 = x / (2 + x - 3x / (3 + 2x - 5x / (4 + 2x - ...)))
// evaluated with the modified Lentz method.  Converges in a few dozen terms
// for x >= 20 and faster as x grows.
double ratio_perron(double x) {
  constexpr double tiny = 1e-300;
  double f = 2.0 + x;
  double c = f;
  double d = 0.0;
  for (int k = 1; k < 10000; ++k) {
    const double a = -(2.0 * k + 1.0) * x;
    const double b = 2.0 + k + 2.0 * x;
    d = b + a * d;
    if (d == 0.0) d = tiny;
    d = 1.0 / d;
    c = b + a / c;
    if (c == 0.0) c = tiny;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) return x / f;
  }
  throw NumericError("Bessel ratio continued fraction did not converge");
}

}  // namespace

double log_bessel_i0(double x) {
  x = std::abs(x);
  if (x < kSeriesSwitch) {
    double s0, s1;
    bessel_series(x, s0, s1);
    return std::log(s0);
  }
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(hankel_i0_sum(x));
}

double bessel_i1_i0_ratio(double x) {
  if (x < 0.0) return -bessel_i1_i0_ratio(-x);
  if (x == 0.0) return 0.0;
  if (x < kSeriesSwitch) {
    double s0, s1;
    bessel_series(x, s0, s1);
    return 0.5 * x * s1 / s0;
  }
  return ratio_perron(x);
}

double bessel_i0e(double x) { return std::exp(log_bessel_i0(x) - std::abs(x)); }

double bessel_i1e(double x) { return bessel_i1_i0_ratio(x) * bessel_i0e(x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal_quantile: p must be in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double chi2_cdf(double x, double dof) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

double chi2_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("chi2_quantile: p must be in (0,1)");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
}

}  // namespace isomat
