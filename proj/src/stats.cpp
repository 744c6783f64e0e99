#include "isomat/stats.hpp"

#include "isomat/special.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace isomat {

GammaFit gamma_fit_sufficient(std::size_t n, double sum_x, double sum_log_x) {
  if (n < 100) throw InvalidArgument("gamma_fit: needs at least 100 positive samples");
  const double mean = sum_x / static_cast<double>(n);
  const double s = std::log(mean) - sum_log_x / static_cast<double>(n);
  if (!(s > 1e-14)) throw InvalidArgument("gamma_fit: degenerate (constant) sample");
  double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int it = 0; it < 100; ++it) {
    const double f = std::log(k) - boost::math::digamma(k) - s;
    const double fp = 1.0 / k - boost::math::trigamma(k);
    double next = k - f / fp;
    if (next <= 0.0) next = 0.5 * k;
    const bool done = std::abs(next - k) <= 1e-10 * k;
    k = next;
    if (done) break;
  }
  return GammaFit{k, mean / k, n, 0};
}

GammaFit gamma_fit(const std::vector<double>& samples) {
  std::size_t n = 0, bad = 0;
  double sx = 0.0, slx = 0.0;
  for (double x : samples) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      ++bad;
      continue;
    }
    ++n;
    sx += x;
    slx += std::log(x);
  }
  GammaFit g = gamma_fit_sufficient(n, sx, slx);
  g.excluded = bad;
  return g;
}

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double t = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 2.0 : -2.0) * t;
    if (t < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

namespace {

double ks_p(double d, double n_eff) {
  const double sn = std::sqrt(n_eff);
  return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace

KsResult ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InvalidArgument("ks_statistic: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, ks_p(d, n)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, ks_p(d, na * nb / (na + nb))};
}

PitHistogram::PitHistogram(std::size_t bins) : counts_(bins, 0) {
  if (bins == 0) throw InvalidArgument("PitHistogram: needs at least one bin");
}

void PitHistogram::add(double u) {
  const double c = std::clamp(u, 0.0, 1.0);
  auto b = static_cast<std::size_t>(c * static_cast<double>(counts_.size()));
  if (b >= counts_.size()) b = counts_.size() - 1;
  ++counts_[b];
  ++n_;
}

void PitHistogram::merge(const PitHistogram& o) {
  if (o.counts_.size() != counts_.size()) throw InvalidArgument("PitHistogram: bin count mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
  n_ += o.n_;
}

KsResult PitHistogram::ks() const {
  if (n_ == 0) throw InvalidArgument("PitHistogram: empty");
  const double n = static_cast<double>(n_);
  const double w = 1.0 / static_cast<double>(counts_.size());
  // Distance at the bin edges; the exact statistic is within one bin width.
  double cum = 0.0, d = 0.0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    cum += static_cast<double>(counts_[i]);
    d = std::max(d, std::abs(cum / n - static_cast<double>(i + 1) * w));
  }
  return {d, ks_p(d, n)};
}

RunningCov::RunningCov(int dim) : mean_(Vec::Zero(dim)), m2_(Mat::Zero(dim, dim)) {}

void RunningCov::add(const Vec& x) {
  if (x.size() != mean_.size()) throw InvalidArgument("RunningCov: dimension mismatch");
  ++n_;
  const Vec delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_.noalias() += delta * (x - mean_).transpose();
}

void RunningCov::merge(const RunningCov& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
  const Vec delta = o.mean_ - mean_;
  m2_ += o.m2_ + delta * delta.transpose() * (na * nb / (na + nb));
  mean_ += delta * (nb / (na + nb));
  n_ += o.n_;
}

Mat RunningCov::cov() const {
  if (n_ < 2) throw InvalidArgument("RunningCov: need at least two observations");
  return m2_ / static_cast<double>(n_ - 1);
}

double sample_mean(const std::vector<double>& x) {
  if (x.empty()) throw InvalidArgument("sample_mean: empty");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) throw InvalidArgument("sample_variance: need two values");
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("pearson: need equal lengths >= 2");
  const double ma = sample_mean(a), mb = sample_mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Chi2Gof chi2_gof(const std::vector<double>& observed, const std::vector<double>& expected, double min_expected,
                 int fitted_params) {
  if (observed.size() != expected.size()) throw InvalidArgument("chi2_gof: size mismatch");
  Chi2Gof r;
  double pool_o = 0.0, pool_e = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < min_expected) {
      pool_o += observed[i];
      pool_e += expected[i];
      ++r.pooled_bins;
      continue;
    }
    r.stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    ++used;
  }
  if (pool_e > 0.0) {
    r.stat += (pool_o - pool_e) * (pool_o - pool_e) / pool_e;
    ++used;
  }
  r.dof = used - 1 - fitted_params;
  if (r.dof < 1) throw InvalidArgument("chi2_gof: not enough bins");
  r.p = chi2_sf(r.stat, r.dof);
  return r;
}

}  // namespace isomat
