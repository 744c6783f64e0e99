#pragma once

#include "isomat/common.hpp"

#include <vector>

namespace isomat {

inline int vec_size(int m) { return m * (m + 1) / 2; }

// Position of entry (i, j) in the vec layout: the m diagonal entries first,
// then the strict upper triangle row by row.  For m = 3 this is
// (D11, D22, D33, D12, D13, D23).
int vec_index(int m, int i, int j);

class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(int m);

  static SymMat from_dense(const Mat& a);  // reads the upper triangle
  static SymMat from_vec(int m, const Vec& v);
  static SymMat identity(int m, double scale = 1.0);
  static SymMat diagonal(const Vec& d);

  int dim() const { return m_; }
  double operator()(int i, int j) const { return v_[vec_index(m_, i, j)]; }
  void set(int i, int j, double value) { v_[vec_index(m_, i, j)] = value; }

  const Vec& vec() const { return v_; }
  Mat dense() const;
  double trace() const;

  SymMat operator+(const SymMat& o) const;
  SymMat operator-(const SymMat& o) const;
  SymMat operator*(double s) const;

 private:
  int m_ = 0;
  Vec v_;
};

inline Vec vec(const SymMat& d) { return d.vec(); }

struct IsotropicModel {
  int m = 3;
  double mu = 0.5;
  double lambda = 0.0;

  bool valid() const;
  void validate() const;  // throws InvalidArgument
};

// log C_m(mu, lambda), the normalizing constant of the matrix density.
double log_normalizer(const IsotropicModel& model);

Mat precision_matrix(const IsotropicModel& model);
Mat covariance_matrix(const IsotropicModel& model);

double log_density(const SymMat& d, const SymMat& mean, const IsotropicModel& model);

// Draws from the isotropic law with a fixed mean.  Keeps the Cholesky factor
// of the diagonal block, which is all the per-draw setup there is.
class IsotropicSampler {
 public:
  IsotropicSampler(const SymMat& mean, const IsotropicModel& model);
  SymMat operator()(Rng& rng) const;

 private:
  SymMat mean_;
  IsotropicModel model_;
  Mat diag_factor_;
  double off_sd_;
};

SymMat sample(const SymMat& mean, const IsotropicModel& model, Rng& rng);
SymMat sample_goe(int m, Rng& rng);

struct SpectralDecomp {
  Vec gamma;               // descending
  Mat O;                   // columns are eigenvectors, canonical sign
  bool degenerate = false; // some gap below 1e-12 (scaled), O not unique
};

SpectralDecomp spectral_decompose(const SymMat& d, double sign_tol = 1e-10);
Mat reconstruct(const SpectralDecomp& s);

// Flip columns so the first entry with |x| > sign_tol is positive.
void canonicalize_signs(Mat& o, double sign_tol = 1e-10);

Mat haar_orthogonal(int m, Rng& rng);

struct CentralMoments {
  std::vector<double> kappa;  // kappa[0] is the mean, kappa[r-1] the r-th central moment
  double operator()(int r) const { return kappa.at(static_cast<std::size_t>(r - 1)); }
};

CentralMoments central_moments(const Vec& gamma, int r_max);
// Same quantities from traces of powers of D, without an eigensolver.
CentralMoments central_moments_trace(const SymMat& d, int r_max);

}  // namespace isomat
