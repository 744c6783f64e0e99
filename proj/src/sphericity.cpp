#include "isomat/sphericity.hpp"

#include "isomat/special.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace isomat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require3(const Vec& gamma) {
  if (gamma.size() != 3) throw InvalidArgument("sphericity statistics are defined for 3x3 tensors");
}

double fa_from(double k1, double k2) {
  const double den = k1 * k1 + k2;
  if (!(den > 0.0)) return kNaN;
  return std::sqrt(1.5 * k2 / den);
}

double vr_from(double k1, double k2, double k3) {
  if (k1 == 0.0) return kNaN;
  return (k3 + k1 * k1 * k1 - 1.5 * k1 * k2) / (k1 * k1 * k1);
}

}  // namespace

double fa(const Vec& gamma) {
  require3(gamma);
  const CentralMoments k = central_moments(gamma, 2);
  return fa_from(k(1), k(2));
}

double ra(const Vec& gamma) {
  require3(gamma);
  const CentralMoments k = central_moments(gamma, 2);
  if (k(1) == 0.0) return kNaN;
  return std::sqrt(k(2)) / std::abs(k(1));
}

double vr(const Vec& gamma) {
  require3(gamma);
  const CentralMoments k = central_moments(gamma, 3);
  return vr_from(k(1), k(2), k(3));
}

TauStats tau_statistics(const Vec& gamma, double a, double kappa1_ref) {
  require3(gamma);
  if (!(a > 0.0)) throw InvalidArgument("tau_statistics: a must be positive");
  TauStats t;
  t.a = a;
  t.kappa = central_moments(gamma, 3);
  const double k1 = t.kappa(1), k2 = t.kappa(2), k3 = t.kappa(3);
  t.tau1 = std::sqrt(a) * (k1 - kappa1_ref);
  t.tau2 = 6.0 * a * k2;
  // Relative to the spread, kappa2 below roundoff means a spherical spectrum.
  const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
  if (k2 > 1e-28 * scale * scale) {
    double t3 = std::sqrt(2.0) * k3 / std::pow(k2, 1.5);
    if (std::abs(t3) > 1.0 + 1e-8) throw NumericError("tau3 outside its support [-1, 1]");
    t.tau3 = std::clamp(t3, -1.0, 1.0);
  }
  t.fa = fa_from(k1, k2);
  t.ra = k1 == 0.0 ? kNaN : std::sqrt(k2) / std::abs(k1);
  t.vr = vr_from(k1, k2, k3);
  t.tau4 = 2.0 * std::sqrt(a) * std::abs(k1) * (std::isnan(t.fa) ? 0.0 : t.fa);
  t.tau5 = k1 == 0.0 ? kNaN : 4.0 * a * k1 * k1 * (1.0 - t.vr);
  if (k1 == 0.0)
    t.tau6 = kNaN;
  else if (t.vr == 0.0)
    t.tau6 = std::numeric_limits<double>::infinity();
  else
    t.tau6 = -4.0 * a * k1 * k1 * std::log(std::abs(t.vr));
  return t;
}

SphericityPValues sphericity_pvalues(const TauStats& tau, double lambda) {
  if (!(6.0 + 9.0 * lambda > 0.0)) throw InvalidArgument("sphericity_pvalues: lambda must exceed -2/3");
  SphericityPValues p;
  p.p_tau1 = std::min(1.0, 2.0 * normal_sf(std::abs(tau.tau1) * std::sqrt(6.0 + 9.0 * lambda)));
  p.p_tau2 = chi2_sf(tau.tau2, 5.0);
  p.p_tau5 = std::isnan(tau.tau5) ? kNaN : chi2_sf(tau.tau5, 5.0);
  if (tau.tau3) p.p_tau3 = std::clamp(1.0 - 2.0 * std::abs(std::abs(*tau.tau3) - 0.5), 0.0, 1.0);
  return p;
}

bool accept_tau3(double tau3, double alpha) {
  const double x = std::abs(tau3);
  return x > 0.5 * (1.0 - alpha) && x < 0.5 * (1.0 + alpha);
}

double vr_conditional_limit_sample(double t, Rng& rng) {
  if (!(t > 0.0)) throw InvalidArgument("vr_conditional_limit_sample: t must be positive");
  const double c = chi2_draw(rng, 5.0);
  const double u = 2.0 * uniform01(rng) - 1.0;
  return 1.0 + std::pow(c / (3.0 * t), 1.5) * u / 4.0 - c / (4.0 * t);
}

VrCalibration VrCalibration::build(const std::vector<double>& ts, const std::vector<double>& levels,
                                   std::size_t draws, std::uint64_t seed) {
  VrCalibration cal;
  cal.ts_ = ts;
  cal.levels_ = levels;
  std::sort(cal.ts_.begin(), cal.ts_.end());
  std::sort(cal.levels_.begin(), cal.levels_.end());
  std::vector<double> buf(draws);
  for (std::size_t i = 0; i < cal.ts_.size(); ++i) {
    Rng rng = make_rng(seed, i);
    for (double& v : buf) v = vr_conditional_limit_sample(cal.ts_[i], rng);
    std::sort(buf.begin(), buf.end());
    std::vector<double> row;
    for (double level : cal.levels_) {
      // type-7 empirical quantile
      const double h = (static_cast<double>(draws) - 1.0) * level;
      const auto lo = static_cast<std::size_t>(std::floor(h));
      const std::size_t hi = std::min(lo + 1, draws - 1);
      row.push_back(buf[lo] + (h - static_cast<double>(lo)) * (buf[hi] - buf[lo]));
    }
    cal.values_.push_back(std::move(row));
  }
  return cal;
}

VrCalibration VrCalibration::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open VR calibration table " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("t,quantile_level,value", 0) != 0) throw DataError("VR calibration table has an unexpected header");
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    Row r{};
    char c1 = 0, c2 = 0;
    if (!(ss >> r.t >> c1 >> r.level >> c2 >> r.value) || c1 != ',' || c2 != ',')
      throw DataError("malformed row in VR calibration table: " + line);
    rows.push_back(r);
  }
  VrCalibration cal;
  for (const Row& r : rows) {
    if (std::find(cal.ts_.begin(), cal.ts_.end(), r.t) == cal.ts_.end()) cal.ts_.push_back(r.t);
    if (std::find(cal.levels_.begin(), cal.levels_.end(), r.level) == cal.levels_.end()) cal.levels_.push_back(r.level);
  }
  std::sort(cal.ts_.begin(), cal.ts_.end());
  std::sort(cal.levels_.begin(), cal.levels_.end());
  cal.values_.assign(cal.ts_.size(), std::vector<double>(cal.levels_.size(), kNaN));
  for (const Row& r : rows) {
    const auto ti = static_cast<std::size_t>(std::find(cal.ts_.begin(), cal.ts_.end(), r.t) - cal.ts_.begin());
    const auto li = static_cast<std::size_t>(std::find(cal.levels_.begin(), cal.levels_.end(), r.level) - cal.levels_.begin());
    cal.values_[ti][li] = r.value;
  }
  for (const auto& row : cal.values_)
    for (double v : row)
      if (std::isnan(v)) throw DataError("VR calibration table is incomplete");
  return cal;
}

void VrCalibration::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "t,quantile_level,value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < ts_.size(); ++i)
    for (std::size_t j = 0; j < levels_.size(); ++j)
      out << ts_[i] << ',' << levels_[j] << ',' << values_[i][j] << '\n';
}

std::size_t VrCalibration::t_index(double t) const {
  for (std::size_t i = 0; i < ts_.size(); ++i)
    if (std::abs(ts_[i] - t) <= 1e-12 * std::max(1.0, t)) return i;
  throw InvalidArgument("VR calibration has no table for t = " + std::to_string(t));
}

double VrCalibration::quantile(double t, double level) const {
  const auto& row = values_[t_index(t)];
  if (level <= levels_.front()) return row.front();
  if (level >= levels_.back()) return row.back();
  const auto it = std::upper_bound(levels_.begin(), levels_.end(), level);
  const auto j = static_cast<std::size_t>(it - levels_.begin());
  const double f = (level - levels_[j - 1]) / (levels_[j] - levels_[j - 1]);
  return row[j - 1] + f * (row[j] - row[j - 1]);
}

double VrCalibration::cdf(double t, double v) const {
  const auto& row = values_[t_index(t)];
  if (v <= row.front()) return levels_.front();
  if (v >= row.back()) return levels_.back();
  const auto it = std::upper_bound(row.begin(), row.end(), v);
  const auto j = static_cast<std::size_t>(it - row.begin());
  const double f = (v - row[j - 1]) / (row[j] - row[j - 1]);
  return levels_[j - 1] + f * (levels_[j] - levels_[j - 1]);
}

std::array<double, 6> regime1_joint_sample(double lambda, Rng& rng) {
  if (!(lambda > -2.0 / 3.0)) throw InvalidArgument("regime1_joint_sample: lambda must exceed -2/3");
  const double c1 = chi2_draw(rng, 1.0);
  const double c5 = chi2_draw(rng, 5.0);
  const double u = 2.0 * uniform01(rng) - 1.0;
  const double k = 9.0 * lambda + 6.0;
  const double fa_v = std::sqrt(3.0 * c5 / (2.0 * c5 + c1 * 12.0 / k));
  const double ra_v = std::sqrt((3.0 * lambda + 2.0) / 2.0 * c5 / c1);
  const double one_minus_vr = k / 4.0 * c5 / c1 - std::pow((3.0 * lambda + 2.0) * c5 / c1, 1.5) * u / 4.0;
  return {fa_v, ra_v, one_minus_vr, c1 / k, c5, u};
}

ClassifierThresholds default_thresholds(double a) {
  if (!(a > 1.0)) throw InvalidArgument("default classifier thresholds need a > 1");
  const double p = 1.0 - 1.0 / std::sqrt(a);
  return {chi2_quantile(p, 5.0), p};
}

SymmetryVerdict symmetry_classify(const Vec& gamma, double a, double c_n, double p_n) {
  require3(gamma);
  if (!(a > 0.0) || !(c_n > 0.0) || !(p_n > 0.0 && p_n < 1.0))
    throw InvalidArgument("symmetry_classify: need a, c_n > 0 and p_n in (0, 1)");
  Vec g = gamma;
  std::sort(g.data(), g.data() + 3, std::greater<double>());
  SymmetryVerdict v;
  v.c_n = c_n;
  v.p_n = p_n;
  const CentralMoments k = central_moments(g, 2);
  const double gap_cut = -2.0 * std::log(1.0 - p_n);
  if (k(2) < c_n / (6.0 * a)) {
    v.regime = Regime3D::isotropic;
    v.estimate = Vec::Constant(3, k(1));
  } else if ((g[0] - g[1]) * (g[0] - g[1]) * a < gap_cut) {
    v.regime = Regime3D::oblate;
    v.estimate = g;
    v.estimate[0] = v.estimate[1] = 0.5 * (g[0] + g[1]);
  } else if ((g[1] - g[2]) * (g[1] - g[2]) * a < gap_cut) {
    v.regime = Regime3D::prolate;
    v.estimate = g;
    v.estimate[1] = v.estimate[2] = 0.5 * (g[1] + g[2]);
  } else {
    v.regime = Regime3D::asymmetric;
    v.estimate = g;
  }
  return v;
}

CombinedModel two_sample_combine(double mu1, double lambda1, double mu2, double lambda2, int m) {
  IsotropicModel{m, mu1, lambda1}.validate();
  IsotropicModel{m, mu2, lambda2}.validate();
  const double mu = mu1 * mu2 / (mu1 + mu2);
  const double alpha = lambda1 * mu2 / (2.0 * mu1 + m * lambda1) + lambda2 * mu1 / (2.0 * mu2 + m * lambda2);
  const double den = mu1 + mu2 - m * alpha;
  if (!(den > 0.0)) throw InvalidArgument("two_sample_combine: invalid combination (non-positive denominator)");
  const CombinedModel out{mu, 2.0 * alpha * mu / den};
  if (!IsotropicModel{m, out.mu, out.lambda}.valid())
    throw InvalidArgument("two_sample_combine: combined parameters leave the valid region");
  return out;
}

double two_sample_stat(const SymMat& d_diff, double mu, double lambda, int m) {
  IsotropicModel{m, mu, lambda}.validate();
  if (d_diff.dim() != m) throw InvalidArgument("two_sample_stat: dimension mismatch");
  const CentralMoments k = central_moments_trace(d_diff, 2);
  return 2.0 * m * mu * k(2) + (2.0 * m * mu + lambda * m * m) * k(1) * k(1);
}

}  // namespace isomat
