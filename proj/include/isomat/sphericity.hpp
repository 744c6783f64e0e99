#pragma once

#include "isomat/asymptotics.hpp"
#include "isomat/common.hpp"
#include "isomat/symmat.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace isomat {

struct TauStats {
  double tau1 = 0.0;
  double tau2 = 0.0;
  std::optional<double> tau3;  // undefined when kappa2 = 0
  double tau4 = 0.0;
  double tau5 = 0.0;           // NaN when kappa1 = 0
  double tau6 = 0.0;           // +inf when VR = 0
  double a = 1.0;
  CentralMoments kappa;
  double fa = 0.0, ra = 0.0, vr = 1.0;
};

// gamma holds the three eigenvalues of a 3x3 tensor (any order).
TauStats tau_statistics(const Vec& gamma, double a, double kappa1_ref = 0.0);

double fa(const Vec& gamma);
double ra(const Vec& gamma);
double vr(const Vec& gamma);

struct SphericityPValues {
  double p_tau1 = 1.0;  // two-sided normal
  double p_tau2 = 1.0;  // upper-tail chi2(5)
  double p_tau5 = 1.0;  // upper-tail chi2(5), NaN when tau5 is
  std::optional<double> p_tau3;  // 1 - 2 ||tau3| - 1/2|
};

// lambda is the interaction parameter of the limit law Sigma(1, lambda), i.e.
// relative to the scaling a (for exact sampling with a = mu it is lambda/mu).
SphericityPValues sphericity_pvalues(const TauStats& tau, double lambda);

// Sphericity is accepted at confidence alpha when |tau3| lies in ((1-alpha)/2, (1+alpha)/2).
bool accept_tau3(double tau3, double alpha);

// One draw of 1 + (chi2_5 / (3t))^{3/2} U / 4 - chi2_5 / (4t), U ~ Uniform[-1, 1].
double vr_conditional_limit_sample(double t, Rng& rng);

// Monte Carlo quantiles of the conditional VR limit, indexed by t and level.
class VrCalibration {
 public:
  struct Row {
    double t, level, value;
  };

  static VrCalibration build(const std::vector<double>& ts, const std::vector<double>& levels,
                             std::size_t draws, std::uint64_t seed);
  static VrCalibration load(const std::string& path);
  void save(const std::string& path) const;

  const std::vector<double>& ts() const { return ts_; }
  const std::vector<double>& levels() const { return levels_; }
  // Quantile at one of the tabulated t values, linear in the level.
  double quantile(double t, double level) const;
  // Approximate lower-tail probability P(VR <= v | t) by inverting the table.
  double cdf(double t, double v) const;

 private:
  std::size_t t_index(double t) const;
  std::vector<double> ts_, levels_;
  std::vector<std::vector<double>> values_;  // [t][level]
};

// Joint limit of (FA, RA, 1 - VR, tau1^2, tau2, tau3) when the mean is zero.
std::array<double, 6> regime1_joint_sample(double lambda, Rng& rng);

struct SymmetryVerdict {
  Regime3D regime = Regime3D::asymmetric;
  Vec estimate;
  double c_n = 0.0;
  double p_n = 0.0;
};

struct ClassifierThresholds {
  double c_n;
  double p_n;
};

// p_n = 1 - 1/sqrt(a), c_n = chi2_5 quantile at p_n.  Requires a > 1.
ClassifierThresholds default_thresholds(double a);

SymmetryVerdict symmetry_classify(const Vec& gamma, double a, double c_n, double p_n);

struct CombinedModel {
  double mu;
  double lambda;
};

// Parameters of the difference of two independent isotropic matrices.
CombinedModel two_sample_combine(double mu1, double lambda1, double mu2, double lambda2, int m);

// 2 m mu kappa2 + (2 m mu + lambda m^2) kappa1^2, chi2 with m(m+1)/2 degrees
// of freedom when the two means agree.
double two_sample_stat(const SymMat& d_diff, double mu, double lambda, int m);

}  // namespace isomat
