#include "isomat/symmat.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace isomat {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void require_dim(int m) {
  if (m < 1) throw InvalidArgument("matrix dimension must be positive");
}

}  // namespace

Rng make_rng(std::uint64_t master_seed, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(master_seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

int vec_index(int m, int i, int j) {
  if (i < 0 || j < 0 || i >= m || j >= m) throw InvalidArgument("vec_index: index outside the matrix");
  if (i > j) std::swap(i, j);
  if (i == j) return i;
  // rows 0..i-1 contribute (m-1) + (m-2) + ... strict-upper entries
  return m + i * (2 * m - i - 1) / 2 + (j - i - 1);
}

SymMat::SymMat(int m) : m_(m), v_(Vec::Zero(vec_size(m))) { require_dim(m); }

SymMat SymMat::from_dense(const Mat& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("from_dense: matrix is not square");
  SymMat s(static_cast<int>(a.rows()));
  for (int i = 0; i < s.m_; ++i)
    for (int j = i; j < s.m_; ++j) s.set(i, j, a(i, j));
  return s;
}

SymMat SymMat::from_vec(int m, const Vec& v) {
  if (v.size() != vec_size(m)) throw InvalidArgument("from_vec: length does not match dimension");
  SymMat s(m);
  s.v_ = v;
  return s;
}

SymMat SymMat::identity(int m, double scale) {
  SymMat s(m);
  s.v_.head(m).setConstant(scale);
  return s;
}

SymMat SymMat::diagonal(const Vec& d) {
  SymMat s(static_cast<int>(d.size()));
  s.v_.head(d.size()) = d;
  return s;
}

Mat SymMat::dense() const {
  Mat a(m_, m_);
  for (int i = 0; i < m_; ++i)
    for (int j = i; j < m_; ++j) a(i, j) = a(j, i) = (*this)(i, j);
  return a;
}

double SymMat::trace() const { return v_.head(m_).sum(); }

SymMat SymMat::operator+(const SymMat& o) const {
  if (o.m_ != m_) throw InvalidArgument("dimension mismatch");
  return from_vec(m_, v_ + o.v_);
}

SymMat SymMat::operator-(const SymMat& o) const {
  if (o.m_ != m_) throw InvalidArgument("dimension mismatch");
  return from_vec(m_, v_ - o.v_);
}

SymMat SymMat::operator*(double s) const { return from_vec(m_, v_ * s); }

bool IsotropicModel::valid() const {
  return m >= 1 && mu > 0.0 && std::isfinite(mu) && std::isfinite(lambda) && lambda * m > -2.0 * mu;
}

void IsotropicModel::validate() const {
  if (!valid())
    throw InvalidArgument("isotropic model requires m >= 1, mu > 0 and lambda*m > -2*mu");
}

double log_normalizer(const IsotropicModel& model) {
  model.validate();
  const double m = model.m;
  const double pi = std::numbers::pi;
  return (m - 1.0) * m / 4.0 * std::log(2.0) - (m + 1.0) * m / 4.0 * std::log(pi) +
         (m + 1.0) * m / 4.0 * std::log(model.mu) +
         0.5 * std::log1p(model.lambda * m / (2.0 * model.mu));
}

Mat precision_matrix(const IsotropicModel& model) {
  model.validate();
  const int m = model.m;
  const int n = vec_size(m);
  Mat a = Mat::Zero(n, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = model.lambda + (i == j ? 2.0 * model.mu : 0.0);
  for (int k = m; k < n; ++k) a(k, k) = 4.0 * model.mu;
  return a;
}

Mat covariance_matrix(const IsotropicModel& model) {
  model.validate();
  const int m = model.m;
  const int n = vec_size(m);
  const double c = model.lambda / (2.0 * model.mu + model.lambda * m);
  Mat s = Mat::Zero(n, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) s(i, j) = ((i == j ? 1.0 : 0.0) - c) / (2.0 * model.mu);
  for (int k = m; k < n; ++k) s(k, k) = 1.0 / (4.0 * model.mu);
  return s;
}

double log_density(const SymMat& d, const SymMat& mean, const IsotropicModel& model) {
  if (d.dim() != model.m || mean.dim() != model.m)
    throw InvalidArgument("log_density: dimension mismatch");
  const SymMat e = d - mean;
  const Mat de = e.dense();
  const double tr = de.trace();
  return log_normalizer(model) - model.mu * de.squaredNorm() - 0.5 * model.lambda * tr * tr;
}

IsotropicSampler::IsotropicSampler(const SymMat& mean, const IsotropicModel& model)
    : mean_(mean), model_(model) {
  model.validate();
  if (mean.dim() != model.m) throw InvalidArgument("sample: dimension mismatch");
  const int m = model.m;
  const Mat cov = covariance_matrix(model).topLeftCorner(m, m);
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() == Eigen::Success) {
    diag_factor_ = llt.matrixL();
  } else {
    // Close to lambda*m = -2*mu the block is nearly singular; a symmetric
    // square root still gives the right covariance.
    Eigen::SelfAdjointEigenSolver<Mat> es(cov);
    const Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    diag_factor_ = es.eigenvectors() * ev.asDiagonal();
  }
  off_sd_ = 1.0 / std::sqrt(4.0 * model.mu);
}

SymMat IsotropicSampler::operator()(Rng& rng) const {
  const int m = model_.m;
  const int n = vec_size(m);
  Vec z(m);
  for (int i = 0; i < m; ++i) z[i] = std_normal(rng);
  Vec v(n);
  v.head(m) = diag_factor_ * z;
  for (int k = m; k < n; ++k) v[k] = off_sd_ * std_normal(rng);
  return SymMat::from_vec(m, mean_.vec() + v);
}

SymMat sample(const SymMat& mean, const IsotropicModel& model, Rng& rng) {
  return IsotropicSampler(mean, model)(rng);
}

SymMat sample_goe(int m, Rng& rng) {
  if (m < 2) throw InvalidArgument("sample_goe: m must be at least 2");
  return sample(SymMat(m), IsotropicModel{m, 0.5, 0.0}, rng);
}

void canonicalize_signs(Mat& o, double sign_tol) {
  for (Eigen::Index c = 0; c < o.cols(); ++c) {
    for (Eigen::Index r = 0; r < o.rows(); ++r) {
      if (std::abs(o(r, c)) > sign_tol) {
        if (o(r, c) < 0.0) o.col(c) *= -1.0;
        break;
      }
    }
  }
}

SpectralDecomp spectral_decompose(const SymMat& d, double sign_tol) {
  const int m = d.dim();
  Eigen::SelfAdjointEigenSolver<Mat> es(d.dense());
  if (es.info() != Eigen::Success) throw NumericError("symmetric eigensolver failed");
  SpectralDecomp out;
  out.gamma = es.eigenvalues().reverse();
  out.O = es.eigenvectors().rowwise().reverse();
  canonicalize_signs(out.O, sign_tol);
  const double scale = std::max(1.0, out.gamma.cwiseAbs().maxCoeff());
  for (int i = 0; i + 1 < m; ++i)
    if (out.gamma[i] - out.gamma[i + 1] < 1e-12 * scale) out.degenerate = true;
  return out;
}

Mat reconstruct(const SpectralDecomp& s) { return s.O * s.gamma.asDiagonal() * s.O.transpose(); }

Mat haar_orthogonal(int m, Rng& rng) {
  if (m < 2) throw InvalidArgument("haar_orthogonal: m must be at least 2");
  Mat g(m, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) g(i, j) = std_normal(rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat& r = qr.matrixQR();
  // Making diag(R) positive removes the dependence of Q on the Householder
  // sign choices, which is what turns the QR output into an exact Haar draw.
  for (int j = 0; j < m; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

CentralMoments central_moments(const Vec& gamma, int r_max) {
  if (r_max < 1) throw InvalidArgument("central_moments: r_max must be >= 1");
  if (gamma.size() == 0) throw InvalidArgument("central_moments: empty spectrum");
  CentralMoments out;
  const double mean = gamma.mean();
  out.kappa.push_back(mean);
  const Vec c = gamma.array() - mean;
  for (int r = 2; r <= r_max; ++r) out.kappa.push_back(c.array().pow(r).mean());
  return out;
}

CentralMoments central_moments_trace(const SymMat& d, int r_max) {
  if (r_max < 1) throw InvalidArgument("central_moments_trace: r_max must be >= 1");
  const int m = d.dim();
  const Mat a = d.dense();
  std::vector<double> tr_pow(static_cast<std::size_t>(r_max + 1));
  Mat p = Mat::Identity(m, m);
  for (int k = 0; k <= r_max; ++k) {
    tr_pow[static_cast<std::size_t>(k)] = p.trace();
    p = p * a;
  }
  const double t1 = tr_pow[1];
  CentralMoments out;
  out.kappa.push_back(t1 / m);
  for (int r = 2; r <= r_max; ++r) {
    double acc = 0.0;
    double binom = 1.0;
    for (int q = 0; q <= r; ++q) {
      const double sign = (q % 2 == 0) ? 1.0 : -1.0;
      acc += binom * sign * std::pow(static_cast<double>(m), -q - 1) *
             tr_pow[static_cast<std::size_t>(r - q)] * std::pow(t1, q);
      binom = binom * (r - q) / (q + 1);
    }
    out.kappa.push_back(acc);
  }
  return out;
}

}  // namespace isomat
