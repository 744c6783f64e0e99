#pragma once

#include "isomat/common.hpp"
#include "isomat/design.hpp"
#include "isomat/symmat.hpp"

#include <optional>
#include <string>
#include <vector>

namespace isomat {

// rho exp(-g^T D g)
double signal(const Vec3& g, const SymMat& d, double rho);

// Rician log-density of a magnitude y given the noiseless signal s.
double rician_logpdf(double y, double s, double eta2);

// sqrt((s + eta Z1)^2 + (eta Z2)^2)
double sample_rician(double s, double eta, Rng& rng);

// Row of the tensor design: (g1^2, g2^2, g3^2, 2 g1 g2, 2 g1 g3, 2 g2 g3), so
// that g^T D g = q . vec(D).
Vec quartic_row(const Vec3& g);

struct DatasetTruth {
  double rho = 0.0;
  SymMat d;
  std::uint64_t seed = 0;
};

struct RicianDataset {
  std::vector<Acquisition> acq;  // g = sqrt(b) u
  Vec y;
  double eta2 = 1.0;
  std::optional<DatasetTruth> truth;

  std::size_t size() const { return acq.size(); }
  Mat q_matrix() const;  // M x 6, rows quartic_row(g_k)
  void validate() const;
};

RicianDataset simulate_dataset(const GradientScheme& scheme, const SymMat& d, double rho, double eta2, Rng& rng);

// Sum of rician_logpdf over acquisitions.
double loglik(const RicianDataset& ds, const SymMat& d, double rho);

// Gradient of loglik with respect to (vec D, rho): 7 entries.
Vec score(const RicianDataset& ds, const SymMat& d, double rho);

// Negative Hessian of loglik in vec D at fixed rho (6 x 6).
Mat observed_information(const RicianDataset& ds, const SymMat& d, double rho);

struct TensorInit {
  SymMat d;
  double rho = 0.0;
};

// Least squares of log Y on (1, -q) over rows with Y above 3 eta.
TensorInit loglin_init(const RicianDataset& ds);

struct FitOptions {
  bool estimate_rho = true;
  std::optional<double> fixed_rho;  // used when estimate_rho is false (default: the init value)
  bool estimate_eta2 = false;
  bool psd_projection = false;
  double rel_tol = 1e-10;
  int max_outer = 500;
  int max_inner = 20;
  double lm_init = 1e-3;
  double lm_factor = 10.0;
  bool keep_trace = false;
};

struct TensorFit {
  SymMat d_hat;
  double rho_hat = 0.0;
  double eta2_hat = 0.0;
  double loglik = 0.0;
  double loglik_init = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // loglik after each outer iteration
};

TensorFit mle_fit(const RicianDataset& ds, const FitOptions& opts = {});

// CSV "b,ux,uy,uz,Y" plus a JSON sidecar <csv>.json with eta2 and, when
// known, the ground truth.
void save_dataset(const std::string& csv_path, const RicianDataset& ds);
RicianDataset load_dataset(const std::string& csv_path);

}  // namespace isomat
