#pragma once

#include "isomat/common.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace isomat {

struct GammaFit {
  double shape = 0.0;
  double scale = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;  // non-positive or non-finite samples dropped
};

// Maximum likelihood gamma fit (Newton on log k - digamma(k) = log mean - mean log).
GammaFit gamma_fit(const std::vector<double>& samples);
// Same from sufficient statistics n, sum x, sum log x.
GammaFit gamma_fit_sufficient(std::size_t n, double sum_x, double sum_log_x);

// P(sup |B| > x) for a Brownian bridge.
double kolmogorov_sf(double x);

struct KsResult {
  double d = 0.0;
  double p = 1.0;
};

KsResult ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Counts of probability-integral-transformed values on [0, 1]; the KS
// distance is recovered to within one bin width.
class PitHistogram {
 public:
  explicit PitHistogram(std::size_t bins = 10000);
  void add(double u);
  void merge(const PitHistogram& o);
  std::uint64_t count() const { return n_; }
  KsResult ks() const;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

// Welford mean and covariance with a parallel merge rule.
class RunningCov {
 public:
  explicit RunningCov(int dim = 1);
  void add(const Vec& x);
  void merge(const RunningCov& o);
  std::uint64_t count() const { return n_; }
  const Vec& mean() const { return mean_; }
  Mat cov() const;  // unbiased

 private:
  std::uint64_t n_ = 0;
  Vec mean_;
  Mat m2_;
};

double pearson(const std::vector<double>& a, const std::vector<double>& b);

struct Chi2Gof {
  double stat = 0.0;
  int dof = 0;
  double p = 1.0;
  int pooled_bins = 0;
};

// Pearson chi-square; bins with expected count below min_expected are pooled
// into one.  dof = used bins - 1 - fitted_params.
Chi2Gof chi2_gof(const std::vector<double>& observed, const std::vector<double>& expected, double min_expected = 5.0,
                 int fitted_params = 0);

double sample_mean(const std::vector<double>& x);
double sample_variance(const std::vector<double>& x);

}  // namespace isomat
