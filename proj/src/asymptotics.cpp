#include "isomat/asymptotics.hpp"

#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <numbers>

namespace isomat {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_gauss_normalizer_2d(const Mat& p) { return 0.5 * std::log(p.determinant()) - std::log(2.0 * std::numbers::pi); }

double log_z_unit(int m) {
  double z = m * (m - 1) / 4.0 * std::log(2.0);
  for (int l = 1; l <= m; ++l) z -= std::lgamma(0.5 * l);
  return z;
}

}  // namespace

double default_cluster_tol(const Vec& gbar) {
  return 1e-9 * std::max(1.0, gbar.size() ? gbar.cwiseAbs().maxCoeff() : 0.0);
}

ClusterStructure cluster(const Vec& gbar, double cluster_tol) {
  if (gbar.size() == 0) throw InvalidArgument("cluster: empty spectrum");
  if (cluster_tol < 0.0) cluster_tol = default_cluster_tol(gbar);
  for (Eigen::Index i = 0; i + 1 < gbar.size(); ++i)
    if (gbar[i] < gbar[i + 1] - cluster_tol) throw InvalidArgument("cluster: gbar must be descending");
  ClusterStructure c;
  c.boundaries.push_back(0);
  int start = 0;
  const int m = static_cast<int>(gbar.size());
  for (int i = 1; i <= m; ++i) {
    if (i == m || gbar[i - 1] - gbar[i] > cluster_tol) {
      c.boundaries.push_back(i);
      c.sizes.push_back(i - start);
      c.representatives.push_back(gbar.segment(start, i - start).mean());
      start = i;
    }
  }
  return c;
}

Mat barycenter_covariance(const std::vector<int>& sizes, double lambda) {
  int m = 0;
  for (int s : sizes) m += s;
  if (!(lambda * m > -2.0)) throw InvalidArgument("barycenter law requires lambda*m > -2");
  const int k = static_cast<int>(sizes.size());
  const double c = lambda / (2.0 + lambda * m);
  Mat cov(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) cov(i, j) = 0.5 * ((i == j ? 1.0 / sizes[static_cast<std::size_t>(i)] : 0.0) - c);
  return cov;
}

double barycenter_logdensity(const Vec& xi_tilde, const std::vector<int>& sizes, double lambda) {
  if (xi_tilde.size() != static_cast<Eigen::Index>(sizes.size()))
    throw InvalidArgument("barycenter_logdensity: one coordinate per cluster expected");
  int m = 0;
  for (int s : sizes) m += s;
  if (!(lambda * m > -2.0)) throw InvalidArgument("barycenter law requires lambda*m > -2");
  double lp = 0.5 * std::log1p(0.5 * lambda * m);
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double mi = sizes[i];
    const double x = xi_tilde[static_cast<Eigen::Index>(i)];
    lp += 0.5 * std::log(mi / std::numbers::pi);
    quad += mi * x * x;
    lin += mi * x;
  }
  return lp - quad - 0.5 * lambda * lin * lin;
}

double within_cluster_logdensity(const Vec& zeta, int m_i) {
  if (m_i < 2) throw InvalidArgument("within_cluster_logdensity: cluster size must be >= 2");
  if (zeta.size() != m_i - 1) throw InvalidArgument("within_cluster_logdensity: expected m_i - 1 coordinates");
  Vec full(m_i);
  full.head(m_i - 1) = zeta;
  full[m_i - 1] = -zeta.sum();
  double logv = 0.0;
  for (int j = 0; j < m_i; ++j) {
    for (int h = j + 1; h < m_i; ++h) {
      const double d = full[j] - full[h];
      if (!(d > 0.0)) return kNegInf;
      logv += std::log(d);
    }
  }
  return log_z_unit(m_i) + 0.5 * std::log(std::numbers::pi * m_i) - full.squaredNorm() + logv;
}

std::string_view to_string(Regime3D r) {
  switch (r) {
    case Regime3D::asymmetric: return "asymmetric";
    case Regime3D::prolate: return "prolate";
    case Regime3D::oblate: return "oblate";
    case Regime3D::isotropic: return "isotropic";
  }
  return "unknown";
}

Regime3D regime_classify(const Vec& gbar, double cluster_tol) {
  if (gbar.size() != 3) throw InvalidArgument("regime_classify: only defined for m = 3");
  const ClusterStructure c = cluster(gbar, cluster_tol);
  if (c.count() == 3) return Regime3D::asymmetric;
  if (c.count() == 1) return Regime3D::isotropic;
  return c.sizes[0] == 1 ? Regime3D::prolate : Regime3D::oblate;
}

Mat pair_regime_precision(double mu, double lambda) {
  IsotropicModel{3, mu, lambda}.validate();
  Mat p(2, 2);
  p << 2.0 * mu + lambda, 2.0 * lambda, 2.0 * lambda, 4.0 * (mu + lambda);
  return p;
}

double pair_gap_logdensity(double x, double mu) {
  if (!(x > 0.0)) return kNegInf;
  return std::log(4.0 * mu * x) - 2.0 * mu * x * x;
}

double pair_gap_cdf(double x, double mu) { return x <= 0.0 ? 0.0 : -std::expm1(-2.0 * mu * x * x); }

double regime_logdensity(const Vec& gamma, const Vec& gbar, double mu, double lambda) {
  if (gamma.size() != 3 || gbar.size() != 3) throw InvalidArgument("regime_logdensity: m must be 3");
  IsotropicModel{3, mu, lambda}.validate();
  if (!(gamma[0] > gamma[1] && gamma[1] > gamma[2])) return kNegInf;
  const Regime3D regime = regime_classify(gbar);
  switch (regime) {
    case Regime3D::asymmetric: {
      const Vec d = gamma - gbar;
      const double s = d.sum();
      const double logdet = 2.0 * std::log(2.0 * mu) + std::log(2.0 * mu + 3.0 * lambda);
      return 0.5 * logdet - 1.5 * std::log(2.0 * std::numbers::pi) - mu * d.squaredNorm() -
             0.5 * lambda * s * s;
    }
    case Regime3D::prolate:
    case Regime3D::oblate: {
      // (gamma_i, gamma_j) -> (pair barycenter, half gap) has Jacobian 2.
      const bool prolate = regime == Regime3D::prolate;
      const double single = prolate ? gamma[0] - gbar[0] : gamma[2] - gbar[2];
      const double pair_mean = prolate ? 0.5 * (gamma[1] + gamma[2]) - gbar[1]
                                       : 0.5 * (gamma[0] + gamma[1]) - gbar[0];
      const double half_gap = prolate ? 0.5 * (gamma[1] - gamma[2]) : 0.5 * (gamma[0] - gamma[1]);
      const Mat p = pair_regime_precision(mu, lambda);
      Eigen::Vector2d z(single, pair_mean);
      return log_gauss_normalizer_2d(p) - 0.5 * z.dot(p * z) + pair_gap_logdensity(half_gap, mu) -
             std::log(2.0);
    }
    case Regime3D::isotropic: {
      const double center = gamma.mean();
      const double var = 1.0 / (6.0 * mu + 9.0 * lambda);
      const double dz = center - gbar.mean();
      const double log_center = -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * dz * dz / var;
      // Scaled within-cluster coordinates sqrt(mu) (gamma - center); the
      // two-coordinate chart picks up a factor mu, and (center, gamma1,
      // gamma3) -> gamma has Jacobian 3.
      const Vec zeta = std::sqrt(mu) * (gamma.head(2).array() - center).matrix();
      return log_center + within_cluster_logdensity(zeta, 3) + std::log(mu) - std::log(3.0);
    }
  }
  return kNegInf;
}

double eigvec_fluct_variance(double gbar_i, double gbar_j) {
  if (!(gbar_i > gbar_j))
    throw InvalidArgument("eigvec_fluct_variance: needs gbar_i > gbar_j (equal values have no Gaussian limit)");
  const double d = gbar_i - gbar_j;
  return 1.0 / (4.0 * d * d);
}

Mat rotation_skew_coordinates(const Mat& r, const ClusterStructure& clusters) {
  const Eigen::Index m = r.rows();
  if (r.cols() != m || clusters.dim() != m) throw InvalidArgument("rotation_skew_coordinates: shape mismatch");
  Mat rcheck = Mat::Zero(m, m);
  for (int i = 0; i < clusters.count(); ++i) {
    const int a = clusters.boundaries[static_cast<std::size_t>(i)];
    const int s = clusters.sizes[static_cast<std::size_t>(i)];
    Eigen::JacobiSVD<Mat> svd(r.block(a, a, s, s), Eigen::ComputeFullU | Eigen::ComputeFullV);
    rcheck.block(a, a, s, s) = svd.matrixU() * svd.matrixV().transpose();
  }
  const Mat rhat = rcheck.transpose() * r;
  Mat s = rhat.log();
  return 0.5 * (s - s.transpose());
}

double hciz_asymptotic(const Vec& gamma, const Vec& gbar) {
  if (gamma.size() != gbar.size()) throw InvalidArgument("hciz_asymptotic: length mismatch");
  const int m = static_cast<int>(gamma.size());
  for (int i = 0; i + 1 < m; ++i)
    if (!(gamma[i] > gamma[i + 1])) throw InvalidArgument("hciz_asymptotic: gamma must be strictly descending");
  const ClusterStructure c = cluster(gbar);
  double lv = 0.0;
  for (int l = 1; l <= m; ++l) lv += std::lgamma(0.5 * l);
  for (int s : c.sizes)
    for (int l = 1; l <= s; ++l) lv -= std::lgamma(0.5 * l);
  for (int i = 0; i + 1 < c.count(); ++i) {
    for (int j = c.boundaries[static_cast<std::size_t>(i)]; j < c.boundaries[static_cast<std::size_t>(i + 1)]; ++j)
      for (int h = c.boundaries[static_cast<std::size_t>(i + 1)]; h < m; ++h)
        lv -= 0.5 * std::log((gamma[j] - gamma[h]) * (gbar[j] - gbar[h]));
  }
  return std::exp(lv);
}

double hciz_rescaled(const Vec& gamma, const Vec& gbar, double n, const HcizConfig& cfg) {
  const ClusterStructure c = cluster(gbar);
  const int m = static_cast<int>(gamma.size());
  double p = m * m;
  for (int s : c.sizes) p -= s * s;
  const HcizResult h = log_hciz(n * gamma, gbar, cfg);
  return std::exp(h.log_value - n * gamma.dot(gbar) + 0.25 * p * std::log(n));
}

}  // namespace isomat
