#pragma once

#include "isomat/common.hpp"
#include "isomat/symmat.hpp"

#include <optional>
#include <string>
#include <vector>

namespace isomat {

struct SphericalDesign {
  std::string name;
  std::vector<Vec3> points;
  int order = 0;
  bool antipodal = false;
  bool even_only = false;  // exactness holds for even degrees only (halved designs)
};

// Mean of u1^a u2^b u3^c over the uniform distribution on the unit sphere.
double sphere_moment(int a, int b, int c);

// Average of u1^a u2^b u3^c over a point set.
double design_moment(const std::vector<Vec3>& points, int a, int b, int c);

struct DesignReport {
  bool pass = false;
  double max_violation = 0.0;
  int worst_a = 0, worst_b = 0, worst_c = 0;  // monomial with the largest violation
};

// Checks every monomial of total degree 1..t (even degrees only if asked).
DesignReport verify_t_design(const SphericalDesign& design, int t, double tol, bool even_only = false);

// True when every point has its antipode in the set (within pair_tol).
bool is_antipodal(const std::vector<Vec3>& points, double pair_tol = 1e-8);

// One representative per antipodal pair: z > 0, ties broken by y > 0, then x > 0.
SphericalDesign halve_antipodal(const SphericalDesign& design, double pair_tol = 1e-8);

// R = Rz(phi) Rx(theta) Rz(psi)
Mat3 rotation_zxz(double phi, double theta, double psi);

// min over pairs from different shells of arccos |<u, v>|, in radians.
double shell_separation(const std::vector<SphericalDesign>& designs, const std::vector<Mat3>& rotations);

struct RotationSearch {
  std::vector<Mat3> rotations;
  std::vector<Vec3> euler;          // (phi, theta, psi) per shell
  double initial_objective = 0.0;
  double objective = 0.0;
  std::vector<double> history;      // objective after each sweep
  int sweeps = 0;
};

// Coordinate ascent over per-shell ZXZ angles.  Each shell step scans a 12^3
// grid around the current angles and halves the grid four times; a candidate
// replaces the current angles only if it strictly improves the objective.
RotationSearch optimize_shell_rotations(const std::vector<SphericalDesign>& designs, int max_iters, Rng& rng,
                                        std::vector<Vec3> start = {});

struct WeightQuadConfig {
  double rel_tol = 1e-12;
};

// w(z) = (e^{-z^2/2} / z^2) int_0^inf x^3 e^{-x^2/(2 z^2)} I1(x)^2 / I0(x) dx - z^4,
// the Fisher weight of one Rician observation at signal-to-noise ratio z.
double weight_w(double z, const WeightQuadConfig& cfg = {});

// Same value from a log-spaced table on [1e-3, 50] with monotone cubic
// interpolation; falls back to quadrature outside the table.
double weight_w_cached(double z);

struct Shell {
  double b = 0.0;  // s/mm^2
  SphericalDesign design;
};

struct Acquisition {
  double b;
  Vec3 u;
};

struct GradientScheme {
  std::string name;
  std::vector<Shell> shells;
  int n_b0 = 0;

  int total() const;
  std::vector<Acquisition> acquisitions() const;  // b0 rows first
  void validate() const;
};

// A(1, 1): the isotropic precision pattern (3 on the diagonal block diagonal,
// 1 off it, 4 on the shear block).
Mat iso_pattern(int m = 3);

struct FisherInfo {
  Mat J;        // scaled by 1/M
  Mat J_total;  // M * J
  int M = 0;
  std::optional<double> mu_bar;  // of J_total, when isotropic
  double rel_residual = 0.0;
};

// Information about vec(D) for fixed rho and eta.  b0 rows add nothing.
FisherInfo fisher_information(const GradientScheme& scheme, const SymMat& d, double rho, double eta,
                              double iso_rel_tol = 1e-3, bool cached_w = false);

struct IsotropyResult {
  bool isotropic = false;
  double mu_bar = 0.0;        // least-squares coefficient of A(1, 1)
  double rel_residual = 0.0;  // |J - mu_bar A| / |J|
};

IsotropyResult isotropy_check(const Mat& j, double rel_tol = 1e-3);

// (1/15) sum_l w(rho e^{-gbar b_l} / eta) b_l^2 #shell_l, the total
// information coefficient for a spherical tensor on order >= 4 shells.
double mu_bar_spherical(const GradientScheme& scheme, double gbar, double rho, double eta);

// Designs 1-5.  Reads the bundled tables (checksummed) from the data directory.
std::vector<GradientScheme> builtin_schemes();
GradientScheme builtin_scheme(const std::string& name);  // "design1" .. "design5"

// Claimed orders of the bundled tables, for verification.
struct BundledDesign {
  std::string file;
  int order;
  bool halve;
  double tol;  // the womersley table is printed to four decimals
};
std::vector<BundledDesign> bundled_designs();

}  // namespace isomat
