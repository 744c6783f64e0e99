#include "isomat/eigen_laws.hpp"

#include "isomat/kernels.hpp"
#include "isomat/quadrature.hpp"
#include "isomat/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace isomat {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Squared entries of the z-x-z Euler rotation Rz(phi) Rx(theta) Rz(psi),
// stored column-wise (one array per matrix entry, row-major entry order) and
// grouped in theta slices of n_phi * n_psi nodes.  The Haar measure on SO(3)
// is sin(theta) dtheta dphi dpsi / (8 pi^2); squared entries of -R equal
// those of R, so averaging over SO(3) equals averaging over O(3).
struct EulerTable {
  int n_theta = 0;
  int n_angle = 0;
  std::size_t slice = 0;
  std::vector<double> log_slice_weight;  // log of (GL weight / 2) / n_angle^2
  std::array<std::vector<double>, 9> sq;
};

void fill_slice(double cos_t, int n_angle, double* const* out, std::size_t offset) {
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  std::size_t k = offset;
  for (int a = 0; a < n_angle; ++a) {
    const double phi = 2.0 * std::numbers::pi * a / n_angle;
    const double cf = std::cos(phi), sf = std::sin(phi);
    for (int b = 0; b < n_angle; ++b, ++k) {
      const double psi = 2.0 * std::numbers::pi * b / n_angle;
      const double cp = std::cos(psi), sp = std::sin(psi);
      const double r[9] = {cf * cp - sf * cos_t * sp, -cf * sp - sf * cos_t * cp, sf * sin_t,
                           sf * cp + cf * cos_t * sp, -sf * sp + cf * cos_t * cp, -cf * sin_t,
                           sin_t * sp,                sin_t * cp,                 cos_t};
      for (int e = 0; e < 9; ++e) out[e][k] = r[e] * r[e];
    }
  }
}

std::shared_ptr<const EulerTable> build_euler_table(int n_theta, int n_angle) {
  auto table = std::make_shared<EulerTable>();
  table->n_theta = n_theta;
  table->n_angle = n_angle;
  table->slice = static_cast<std::size_t>(n_angle) * static_cast<std::size_t>(n_angle);
  const auto gl = gauss_legendre(n_theta);
  for (auto& col : table->sq) col.resize(table->slice * static_cast<std::size_t>(n_theta));
  double* cols[9];
  for (int e = 0; e < 9; ++e) cols[e] = table->sq[static_cast<std::size_t>(e)].data();
  for (int i = 0; i < n_theta; ++i) {
    fill_slice(gl->x[static_cast<std::size_t>(i)], n_angle, cols,
               table->slice * static_cast<std::size_t>(i));
    table->log_slice_weight.push_back(std::log(0.5 * gl->w[static_cast<std::size_t>(i)]) -
                                      2.0 * std::log(static_cast<double>(n_angle)));
  }
  return table;
}

// Tables up to this many nodes are cached (72 bytes per node).
constexpr std::size_t kMaxCachedNodes = std::size_t{1} << 20;

std::shared_ptr<const EulerTable> euler_table(int n_theta, int n_angle) {
  static std::map<std::pair<int, int>, std::shared_ptr<const EulerTable>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_pair(n_theta, n_angle);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto t = build_euler_table(n_theta, n_angle);
  cache.emplace(key, t);
  return t;
}

double log_hciz_quadrature(const Vec& gbar, const Vec& gamma, const HcizConfig& cfg) {
  const int n_angle = cfg.nodes_per_angle;
  const int n_theta = cfg.theta_nodes > 0 ? cfg.theta_nodes : cfg.nodes_per_angle;
  double coef[9];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) coef[3 * i + j] = gbar[i] * gamma[j];
  const auto& kt = kernels::active();
  const std::size_t slice = static_cast<std::size_t>(n_angle) * static_cast<std::size_t>(n_angle);
  std::vector<double> e(slice);
  double total = kNegInf;

  const bool use_cache = slice * static_cast<std::size_t>(n_theta) <= kMaxCachedNodes;
  if (use_cache) {
    const auto table = euler_table(n_theta, n_angle);
    for (int i = 0; i < n_theta; ++i) {
      const double* cols[9];
      for (int c = 0; c < 9; ++c)
        cols[c] = table->sq[static_cast<std::size_t>(c)].data() + slice * static_cast<std::size_t>(i);
      kt.combine_columns(cols, 9, slice, coef, e.data());
      const double mx = kt.max_value(e.data(), slice);
      const double s = kt.sum_exp_shifted(e.data(), nullptr, slice, mx);
      total = log_add(total, table->log_slice_weight[static_cast<std::size_t>(i)] + mx + std::log(s));
    }
    return total;
  }

  // Large grids: regenerate each theta slice instead of caching the table.
  const auto gl = gauss_legendre(n_theta);
  std::array<std::vector<double>, 9> buf;
  for (auto& b : buf) b.resize(slice);
  double* wcols[9];
  const double* rcols[9];
  for (int c = 0; c < 9; ++c) {
    wcols[c] = buf[static_cast<std::size_t>(c)].data();
    rcols[c] = wcols[c];
  }
  for (int i = 0; i < n_theta; ++i) {
    fill_slice(gl->x[static_cast<std::size_t>(i)], n_angle, wcols, 0);
    kt.combine_columns(rcols, 9, slice, coef, e.data());
    const double mx = kt.max_value(e.data(), slice);
    const double s = kt.sum_exp_shifted(e.data(), nullptr, slice, mx);
    const double lw =
        std::log(0.5 * gl->w[static_cast<std::size_t>(i)]) - 2.0 * std::log(static_cast<double>(n_angle));
    total = log_add(total, lw + mx + std::log(s));
  }
  return total;
}

HcizResult log_hciz_mc(const Vec& gbar, const Vec& gamma, const HcizConfig& cfg) {
  const int m = static_cast<int>(gbar.size());
  const int nc = m * m;
  std::vector<double> coef(static_cast<std::size_t>(nc));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) coef[static_cast<std::size_t>(m * i + j)] = gbar[i] * gamma[j];

  Rng rng = make_rng(cfg.seed, cfg.stream);
  const auto& kt = kernels::active();
  constexpr std::size_t kChunk = 4096;
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(nc), std::vector<double>(kChunk));
  std::vector<const double*> cptr(static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c) cptr[static_cast<std::size_t>(c)] = cols[static_cast<std::size_t>(c)].data();
  std::vector<double> e(kChunk), e2(kChunk);

  // Running sums of exp(e - shift) and exp(2 (e - shift)), rescaled whenever
  // a larger exponent shows up.
  double shift = kNegInf, s1 = 0.0, s2 = 0.0;
  std::size_t done = 0;
  while (done < cfg.mc_samples) {
    const std::size_t n = std::min(kChunk, cfg.mc_samples - done);
    for (std::size_t k = 0; k < n; ++k) {
      const Mat o = haar_orthogonal(m, rng);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) cols[static_cast<std::size_t>(m * i + j)][k] = o(i, j) * o(i, j);
    }
    kt.combine_columns(cptr.data(), nc, n, coef.data(), e.data());
    const double mx = kt.max_value(e.data(), n);
    if (mx > shift) {
      if (shift != kNegInf) {
        const double r = std::exp(shift - mx);
        s1 *= r;
        s2 *= r * r;
      }
      shift = mx;
    }
    s1 += kt.sum_exp_shifted(e.data(), nullptr, n, shift);
    for (std::size_t k = 0; k < n; ++k) e2[k] = 2.0 * e[k];
    s2 += kt.sum_exp_shifted(e2.data(), nullptr, n, 2.0 * shift);
    done += n;
  }
  const double nn = static_cast<double>(cfg.mc_samples);
  const double mean = s1 / nn;
  const double var = std::max(0.0, s2 / nn - mean * mean) * nn / (nn - 1.0);
  HcizResult out;
  out.log_value = shift + std::log(mean);
  out.rel_std_error = std::sqrt(var / nn) / mean;
  return out;
}

void require_descending(const Vec& g, bool strict, const char* what) {
  for (Eigen::Index i = 0; i + 1 < g.size(); ++i) {
    if (strict ? !(g[i] > g[i + 1]) : !(g[i] >= g[i + 1]))
      throw InvalidArgument(std::string(what) + (strict ? " must be strictly descending" : " must be descending"));
  }
}

}  // namespace

void HcizConfig::validate(int m) const {
  if (method == HcizMethod::euler_quadrature) {
    if (m != 3) throw InvalidArgument("euler_quadrature HCIZ is only available for m = 3");
    if (nodes_per_angle < 8 || (theta_nodes != 0 && theta_nodes < 8))
      throw InvalidArgument("HCIZ quadrature needs at least 8 nodes per angle");
  } else {
    if (mc_samples < 1000) throw InvalidArgument("HCIZ Monte Carlo needs at least 1000 samples");
  }
}

HcizConfig HcizConfig::defaults_for(int m) {
  HcizConfig cfg;
  if (m != 3) cfg.method = HcizMethod::haar_mc;
  return cfg;
}

HcizResult log_hciz(const Vec& gbar, const Vec& gamma, const HcizConfig& cfg) {
  if (gbar.size() != gamma.size() || gbar.size() < 2)
    throw InvalidArgument("hciz: spectra must have equal length >= 2");
  const int m = static_cast<int>(gbar.size());
  cfg.validate(m);
  if (cfg.method == HcizMethod::euler_quadrature) return {log_hciz_quadrature(gbar, gamma, cfg), 0.0};
  return log_hciz_mc(gbar, gamma, cfg);
}

double hciz(const Vec& gbar, const Vec& gamma, const HcizConfig& cfg) {
  return std::exp(log_hciz(gbar, gamma, cfg).log_value);
}

void OrderedSpectrum::validate() const {
  if (gamma.size() != gbar.size() || gamma.size() < 2)
    throw InvalidArgument("spectrum: gamma and gbar must have equal length >= 2");
  require_descending(gamma, true, "gamma");
  require_descending(gbar, false, "gbar");
}

double vandermonde(const Vec& gamma) {
  double v = 1.0;
  for (Eigen::Index i = 0; i < gamma.size(); ++i)
    for (Eigen::Index j = i + 1; j < gamma.size(); ++j) v *= gamma[i] - gamma[j];
  return v;
}

double log_abs_vandermonde(const Vec& gamma) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < gamma.size(); ++i)
    for (Eigen::Index j = i + 1; j < gamma.size(); ++j) v += std::log(std::abs(gamma[i] - gamma[j]));
  return v;
}

double log_normalizing_Z(int m, double mu, double lambda) {
  IsotropicModel{m, mu, lambda}.validate();
  double z = m * (m - 1) / 4.0 * std::log(2.0);
  for (int l = 1; l <= m; ++l) z -= std::lgamma(0.5 * l);
  return z + m * (m + 1) / 4.0 * std::log(mu) + 0.5 * std::log1p(lambda * m / (2.0 * mu));
}

double normalizing_Z(int m, double mu, double lambda) { return std::exp(log_normalizing_Z(m, mu, lambda)); }

double log_eigdensity_zero_mean(const Vec& gamma, const IsotropicModel& model) {
  if (gamma.size() != model.m) throw InvalidArgument("eigdensity: length does not match model");
  require_descending(gamma, false, "gamma");
  for (Eigen::Index i = 0; i + 1 < gamma.size(); ++i)
    if (gamma[i] == gamma[i + 1]) return kNegInf;
  const double s = gamma.sum();
  return log_normalizing_Z(model.m, model.mu, model.lambda) + log_abs_vandermonde(gamma) -
         model.mu * gamma.squaredNorm() - 0.5 * model.lambda * s * s;
}

double eigdensity_zero_mean(const Vec& gamma, const IsotropicModel& model) {
  return std::exp(log_eigdensity_zero_mean(gamma, model));
}

double log_eigdensity_general(const OrderedSpectrum& spec, const IsotropicModel& model,
                              const HcizConfig& cfg) {
  spec.validate();
  if (spec.gamma.size() != model.m) throw InvalidArgument("eigdensity: length does not match model");
  const Vec d = spec.gamma - spec.gbar;
  const double s = d.sum();
  const HcizResult h = log_hciz(2.0 * model.mu * spec.gbar, spec.gamma, cfg);
  return log_normalizing_Z(model.m, model.mu, model.lambda) + log_abs_vandermonde(spec.gamma) -
         model.mu * d.squaredNorm() - 0.5 * model.lambda * s * s -
         2.0 * model.mu * spec.gamma.dot(spec.gbar) + h.log_value;
}

double eigdensity_general(const OrderedSpectrum& spec, const IsotropicModel& model,
                          const HcizConfig& cfg) {
  return std::exp(log_eigdensity_general(spec, model, cfg));
}

double eigvec_conditional_logdensity(const Mat& r, const OrderedSpectrum& spec, double mu,
                                     const HcizConfig& cfg) {
  spec.validate();
  const Eigen::Index m = spec.gamma.size();
  if (r.rows() != m || r.cols() != m) throw InvalidArgument("eigvec density: R has wrong shape");
  if ((r.transpose() * r - Mat::Identity(m, m)).norm() > 1e-8)
    throw InvalidArgument("eigvec density: R is not orthogonal");
  if (!(mu > 0.0)) throw InvalidArgument("eigvec density: mu must be positive");
  double expo = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) expo += spec.gbar[i] * spec.gamma[j] * r(i, j) * r(i, j);
  const HcizResult h = log_hciz(2.0 * mu * spec.gbar, spec.gamma, cfg);
  return static_cast<double>(m) * std::log(2.0) - h.log_value + 2.0 * mu * expo;
}

double ad_cdf_centered(double t, double mu) {
  if (!(mu > 0.0)) throw InvalidArgument("ad_cdf_centered: mu must be positive");
  if (t <= 0.0) return 0.0;
  const double a = t * std::sqrt(3.0 * mu);
  const double v = normal_cdf(a) + normal_cdf(t * std::sqrt(12.0 * mu)) - 1.0 -
                   3.0 * t * std::sqrt(3.0 * mu / (2.0 * std::numbers::pi)) * std::exp(-1.5 * mu * t * t);
  return std::clamp(v, 0.0, 1.0);
}

double ad_cdf(double t, double mu, double lambda, double gbar) {
  IsotropicModel{3, mu, lambda}.validate();
  const double sd = 1.0 / std::sqrt(6.0 * mu + 9.0 * lambda);
  const auto gh = gauss_hermite(200);
  double acc = 0.0;
  for (std::size_t i = 0; i < gh->x.size(); ++i)
    acc += gh->w[i] * ad_cdf_centered(t - gbar - std::numbers::sqrt2 * sd * gh->x[i], mu);
  return std::clamp(acc / std::sqrt(std::numbers::pi), 0.0, 1.0);
}

double ad_cdf_simpson(double t, double mu, double lambda, double gbar) {
  IsotropicModel{3, mu, lambda}.validate();
  const double sd = 1.0 / std::sqrt(6.0 * mu + 9.0 * lambda);
  auto f = [&](double x) {
    const double z = x / sd;
    return ad_cdf_centered(t - gbar - x, mu) * std::exp(-0.5 * z * z) /
           (sd * std::sqrt(2.0 * std::numbers::pi));
  };
  return adaptive_simpson(f, -12.0 * sd, 12.0 * sd, 1e-10);
}

double ad_rd_joint_density(double gamma1, double rd, double mu, double lambda, double gbar) {
  IsotropicModel{3, mu, lambda}.validate();
  if (gamma1 <= rd) return 0.0;
  const double d = gamma1 - rd;
  const double x = gamma1 - gbar, y = rd - gbar;
  const double pre = 4.0 * std::pow(mu, 1.5) * std::sqrt(2.0 * mu + 3.0 * lambda) / std::numbers::pi;
  const double shape = d * d + std::expm1(-2.0 * mu * d * d) / (2.0 * mu);
  return pre * shape *
         std::exp(-(mu + 0.5 * lambda) * x * x - 2.0 * (mu + lambda) * y * y - 2.0 * lambda * x * y);
}

}  // namespace isomat
