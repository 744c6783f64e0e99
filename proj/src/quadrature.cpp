#include "isomat/quadrature.hpp"

#include "isomat/common.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace isomat {

namespace {

QuadRule build_gauss_legendre(int n) {
  QuadRule q;
  q.x.resize(static_cast<std::size_t>(n));
  q.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? z : p1;
      const double pm = n == 1 ? 1.0 : p0;
      dp = n * (z * pn - pm) / (z * z - 1.0);
      const double dz = pn / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    q.x[static_cast<std::size_t>(i)] = -z;
    q.x[static_cast<std::size_t>(n - 1 - i)] = z;
    q.w[static_cast<std::size_t>(i)] = w;
    q.w[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return q;
}

// Golub-Welsch on the Hermite Jacobi matrix.
QuadRule build_gauss_hermite(int n) {
  Vec diag = Vec::Zero(n);
  Vec sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Mat> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericError("Gauss-Hermite eigen solve failed");
  QuadRule q;
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    q.x.push_back(es.eigenvalues()[i]);
    q.w.push_back(std::sqrt(std::numbers::pi) * v0 * v0);
  }
  return q;
}

template <class Builder>
std::shared_ptr<const QuadRule> cached(std::map<int, std::shared_ptr<const QuadRule>>& cache,
                                       std::mutex& mu, int n, Builder build) {
  if (n < 1) throw InvalidArgument("quadrature order must be positive");
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto rule = std::make_shared<const QuadRule>(build(n));
  cache.emplace(n, rule);
  return rule;
}

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

std::shared_ptr<const QuadRule> gauss_legendre(int n) {
  static std::map<int, std::shared_ptr<const QuadRule>> cache;
  static std::mutex mu;
  return cached(cache, mu, n, build_gauss_legendre);
}

std::shared_ptr<const QuadRule> gauss_hermite(int n) {
  static std::map<int, std::shared_ptr<const QuadRule>> cache;
  static std::mutex mu;
  return cached(cache, mu, n, build_gauss_hermite);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double* error_estimate) {
  double err = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 20, rel_tol, &err);
  if (error_estimate != nullptr) *error_estimate = err;
  return v;
}

}  // namespace isomat
