#pragma once

#include "isomat/common.hpp"
#include "isomat/eigen_laws.hpp"

#include <string_view>
#include <vector>

namespace isomat {

// Groups of equal eigenvalues of the mean matrix.
struct ClusterStructure {
  std::vector<int> boundaries;          // l_0 = 0 < l_1 < ... < l_k = m
  std::vector<int> sizes;               // m_i = l_i - l_{i-1}
  std::vector<double> representatives;  // common eigenvalue of each group

  int count() const { return static_cast<int>(sizes.size()); }
  int dim() const { return boundaries.empty() ? 0 : boundaries.back(); }
};

// 1e-9 * max(1, max|gbar|)
double default_cluster_tol(const Vec& gbar);

// Consecutive entries with gap <= tol share a cluster.  tol < 0 selects the default.
ClusterStructure cluster(const Vec& gbar, double cluster_tol = -1.0);

// Limit law of the scaled cluster barycenters (unit precision parameter).
Mat barycenter_covariance(const std::vector<int>& sizes, double lambda);
double barycenter_logdensity(const Vec& xi_tilde, const std::vector<int>& sizes, double lambda);

// Limit law inside one cluster of size m_i on the zero-sum hyperplane, in the
// chart that drops the last coordinate.  Returns -inf outside the ordered region.
double within_cluster_logdensity(const Vec& zeta, int m_i);

enum class Regime3D { asymmetric, prolate, oblate, isotropic };
std::string_view to_string(Regime3D r);

Regime3D regime_classify(const Vec& gbar, double cluster_tol = -1.0);

// 2x2 precision of (extreme eigenvalue, barycenter of the equal pair) in the
// prolate and oblate regimes.
Mat pair_regime_precision(double mu, double lambda);

// Limit density of the ordered eigenvalues (gamma1, gamma2, gamma3), with
// respect to Lebesgue measure on R^3, for the regime of gbar.
double regime_logdensity(const Vec& gamma, const Vec& gbar, double mu, double lambda);

// Density of the half-gap x = (gamma_i - gamma_j) / 2 of an equal pair:
// x^2 ~ Exp(rate 2 mu), density 4 mu x exp(-2 mu x^2).
double pair_gap_logdensity(double x, double mu);
double pair_gap_cdf(double x, double mu);

// Variance of the limit law of sqrt(a) S_ij for a skew coordinate between
// eigenvectors with distinct mean eigenvalues gbar_i > gbar_j.
double eigvec_fluct_variance(double gbar_i, double gbar_j);

// Skew matrix S with R = Rcheck exp(S): Rcheck is the block-diagonal polar
// factor of R over the clusters, S the fluctuation coordinates.
Mat rotation_skew_coordinates(const Mat& r, const ClusterStructure& clusters);

// Predicted limit of I_m(n gamma, gbar) exp(-n gamma.gbar) n^((m^2 - sum m_i^2)/4).
double hciz_asymptotic(const Vec& gamma, const Vec& gbar);
// The rescaled left-hand side at finite n, from log_hciz.
double hciz_rescaled(const Vec& gamma, const Vec& gbar, double n, const HcizConfig& cfg);

}  // namespace isomat
