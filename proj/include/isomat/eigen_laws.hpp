#pragma once

#include "isomat/common.hpp"
#include "isomat/symmat.hpp"

#include <cstdint>

namespace isomat {

enum class HcizMethod { euler_quadrature, haar_mc };

struct HcizConfig {
  HcizMethod method = HcizMethod::euler_quadrature;
  int nodes_per_angle = 48;  // trapezoid nodes in phi and psi
  int theta_nodes = 0;       // Gauss-Legendre nodes in theta; 0 means nodes_per_angle
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 20240601;
  std::uint64_t stream = 0;

  void validate(int m) const;
  // Quadrature for m = 3, Haar Monte Carlo otherwise.
  static HcizConfig defaults_for(int m);
};

struct HcizResult {
  double log_value = 0.0;
  double rel_std_error = 0.0;  // zero for the quadrature
};

// log of the orthogonal-group average of exp(sum_ij gbar_i gamma_j O_ij^2).
HcizResult log_hciz(const Vec& gbar, const Vec& gamma, const HcizConfig& cfg = {});
double hciz(const Vec& gbar, const Vec& gamma, const HcizConfig& cfg = {});

struct OrderedSpectrum {
  Vec gamma;  // strictly descending
  Vec gbar;   // weakly descending
  void validate() const;
};

double vandermonde(const Vec& gamma);
double log_abs_vandermonde(const Vec& gamma);

double log_normalizing_Z(int m, double mu, double lambda);
double normalizing_Z(int m, double mu, double lambda);

// Joint density of the ordered eigenvalues of a zero-mean isotropic matrix.
double log_eigdensity_zero_mean(const Vec& gamma, const IsotropicModel& model);
double eigdensity_zero_mean(const Vec& gamma, const IsotropicModel& model);

// Same for a general mean with eigenvalues gbar.
double log_eigdensity_general(const OrderedSpectrum& spec, const IsotropicModel& model,
                              const HcizConfig& cfg);
double eigdensity_general(const OrderedSpectrum& spec, const IsotropicModel& model,
                          const HcizConfig& cfg);

// Density of R = Obar^T O with respect to Haar measure on O(m), given the eigenvalues.
double eigvec_conditional_logdensity(const Mat& r, const OrderedSpectrum& spec, double mu,
                                     const HcizConfig& cfg);

// Axial diffusivity laws for a spherical mean gbar * I, m = 3.  gamma1 is the
// largest eigenvalue and rd the average of the other two.

// P(gamma1 - mean(gamma) <= t)
double ad_cdf_centered(double t, double mu);
// P(gamma1 <= t): the centered law convolved with the barycenter Gaussian,
// integrated by 200-node Gauss-Hermite.
double ad_cdf(double t, double mu, double lambda, double gbar);
// Same quantity by adaptive Simpson; slower, used to cross-check.
double ad_cdf_simpson(double t, double mu, double lambda, double gbar);
double ad_rd_joint_density(double gamma1, double rd, double mu, double lambda, double gbar);

}  // namespace isomat
