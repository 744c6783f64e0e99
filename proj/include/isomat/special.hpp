#pragma once

namespace isomat {

// log I0(x) for x >= 0 without overflow: power series below 20, the
// Hankel asymptotic expansion above.
double log_bessel_i0(double x);

// I1(x) / I0(x) for x >= 0.  Power series below 20, continued fraction up to
// 500, asymptotic ratio of the Hankel expansions beyond that.
double bessel_i1_i0_ratio(double x);

// exp(-x) I0(x) and exp(-x) I1(x).
double bessel_i0e(double x);
double bessel_i1e(double x);

double normal_cdf(double x);
double normal_sf(double x);
double normal_quantile(double p);

double chi2_cdf(double x, double dof);
double chi2_sf(double x, double dof);
double chi2_quantile(double p, double dof);

}  // namespace isomat
