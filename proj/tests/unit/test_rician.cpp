#include "isomat/rician.hpp"

#include "isomat/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace isomat;

namespace {

const double kRho = 110.046, kEta2 = 64.056, kG = 6.622e-4;

SymMat truth() {
  SymMat d = SymMat::diagonal(Vec3(9e-4, 6e-4, 4e-4));
  d.set(0, 1, 1e-4);
  d.set(1, 2, -5e-5);
  return d;
}

}  // namespace

// scipy.stats.rice.logpdf(y / eta, S / eta) - log(eta), S = 50, eta = 8
TEST(RicianPdf, PinnedValues) {
  EXPECT_NEAR(rician_logpdf(10.0, 50.0, 64.0), -16.28589973104679, 1e-11);
  EXPECT_NEAR(rician_logpdf(45.0, 50.0, 64.0), -3.242765140249621, 1e-12);
  EXPECT_NEAR(rician_logpdf(60.0, 50.0, 64.0), -3.685773531261245, 1e-12);
  EXPECT_EQ(rician_logpdf(0.0, 50.0, 64.0), -INFINITY);
}

TEST(RicianPdf, NormalizedWithKnownSecondMoment) {
  const double s = 50.0, eta2 = 64.0;
  const double mass = integrate([&](double y) { return std::exp(rician_logpdf(y, s, eta2)); }, 0.0, INFINITY);
  const double m2 = integrate([&](double y) { return y * y * std::exp(rician_logpdf(y, s, eta2)); }, 0.0, INFINITY);
  EXPECT_NEAR(mass, 1.0, 1e-8);
  EXPECT_NEAR(m2, s * s + 2 * eta2, 1e-6 * m2);
  // S = 0 is the Rayleigh law
  EXPECT_NEAR(rician_logpdf(3.0, 0.0, 4.0), std::log(3.0 / 4.0) - 9.0 / 8.0, 1e-14);
}

TEST(RicianSampling, MomentsAndNoiseless) {
  Rng rng = make_rng(1, 0);
  double m2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double y = sample_rician(20.0, 5.0, rng);
    m2 += y * y;
  }
  EXPECT_NEAR(m2 / n, 400.0 + 50.0, 0.01 * 450.0);
  EXPECT_NEAR(sample_rician(20.0, 1e-9, rng), 20.0, 1e-6 * 20.0);
}

TEST(Design, QuarticRow) {
  const Vec3 g(1.0, 2.0, 3.0);
  const Vec q = quartic_row(g);
  EXPECT_EQ(q, (Vec(6) << 1, 4, 9, 4, 6, 12).finished());
  EXPECT_NEAR(q.dot(truth().vec()), g.dot(truth().dense() * g), 1e-18);
  EXPECT_NEAR(signal(g, truth(), 2.0), 2.0 * std::exp(-g.dot(truth().dense() * g)), 1e-15);
}

TEST(Score, MatchesFiniteDifferences) {
  const GradientScheme s = builtin_scheme("design2");
  Rng rng = make_rng(2, 0);
  for (int k = 0; k < 20; ++k) {
    const RicianDataset ds = simulate_dataset(s, truth(), kRho, kEta2, rng);
    SymMat d = truth();
    Vec v = d.vec();
    for (int i = 0; i < 6; ++i) v[i] += 5e-5 * std_normal(rng);
    d = SymMat::from_vec(3, v);
    const double rho = kRho * (1 + 0.05 * std_normal(rng));
    const Vec sc = score(ds, d, rho);
    for (int i = 0; i < 7; ++i) {
      const double h = i < 6 ? 1e-6 : 1e-3;
      auto eval = [&](double e) {
        Vec w = d.vec();
        double r = rho;
        if (i < 6) w[i] += e;
        else r += e;
        return loglik(ds, SymMat::from_vec(3, w), r);
      };
      // fourth-order central stencil
      const double fd = (8 * (eval(h) - eval(-h)) - (eval(2 * h) - eval(-2 * h))) / (12 * h);
      EXPECT_NEAR(sc[i], fd, 1e-6 * std::max(std::abs(fd), 1.0)) << k << "," << i;
    }
  }
}

TEST(ObservedInformation, IsNegativeHessian) {
  const GradientScheme s = builtin_scheme("design1");
  Rng rng = make_rng(3, 0);
  const RicianDataset ds = simulate_dataset(s, truth(), kRho, kEta2, rng);
  const Mat info = observed_information(ds, truth(), kRho);
  const double h = 1e-7;
  for (int i = 0; i < 6; ++i) {
    Vec p = truth().vec(), m = p;
    p[i] += h;
    m[i] -= h;
    const Vec col = -(score(ds, SymMat::from_vec(3, p), kRho) - score(ds, SymMat::from_vec(3, m), kRho)) / (2 * h);
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(info(j, i), col[j], 1e-5 * info.cwiseAbs().maxCoeff());
  }
}

TEST(ObservedInformation, AveragesToFisher) {
  const GradientScheme s = builtin_scheme("design1");
  const SymMat d = SymMat::identity(3, kG);
  Rng rng = make_rng(4, 0);
  Mat avg = Mat::Zero(6, 6);
  const int n = 4000;
  for (int i = 0; i < n; ++i) avg += observed_information(simulate_dataset(s, d, kRho, kEta2, rng), d, kRho);
  avg /= n;
  const Mat j = fisher_information(s, d, kRho, std::sqrt(kEta2)).J_total;
  EXPECT_LT((avg - j).norm() / j.norm(), 0.02);
}

TEST(Fit, LogLinearInitExactWithoutNoise) {
  const GradientScheme s = builtin_scheme("design4");
  Rng rng = make_rng(5, 0);
  RicianDataset ds = simulate_dataset(s, truth(), kRho, 1e-20, rng);
  ds.eta2 = 1e-8;
  const TensorInit init = loglin_init(ds);
  EXPECT_NEAR(init.rho, kRho, 1e-6 * kRho);
  EXPECT_TRUE(init.d.vec().isApprox(truth().vec(), 1e-6));
}

// Vanishing-noise limit: the data sit exactly on the model (every noise draw
// zero) while the likelihood keeps eta = 1e-4 rho.  What remains is the
// O(eta^2 / S^2) pull of the Rician likelihood toward larger S.
TEST(Fit, NearNoiselessConsistency) {
  const GradientScheme s = builtin_scheme("design3");
  Rng rng = make_rng(6, 0);
  const double eta = 1e-4 * kRho;
  RicianDataset ds = simulate_dataset(s, truth(), kRho, eta * eta, rng);
  for (std::size_t k = 0; k < ds.size(); ++k) ds.y[k] = signal(std::sqrt(ds.acq[k].b) * ds.acq[k].u, truth(), kRho);
  const TensorFit f = mle_fit(ds);
  EXPECT_TRUE(f.converged);
  EXPECT_LT((f.d_hat.vec() - truth().vec()).norm() / truth().vec().norm(), 1e-6);
  EXPECT_NEAR(f.rho_hat, kRho, 1e-6 * kRho);
}

// With actual noise at the same level the error is governed by the Fisher
// covariance, about 1e-4 relative for this design; check it lands there.
TEST(Fit, LowNoiseErrorMatchesInformation) {
  const GradientScheme s = builtin_scheme("design3");
  const double eta = 1e-4 * kRho;
  double se = 0.0;
  const int reps = 40;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_rng(16, static_cast<std::uint64_t>(r));
    const TensorFit f = mle_fit(simulate_dataset(s, truth(), kRho, eta * eta, rng));
    ASSERT_TRUE(f.converged);
    se += (f.d_hat.vec() - truth().vec()).squaredNorm();
  }
  const double rel = std::sqrt(se / reps) / truth().vec().norm();
  EXPECT_GT(rel, 2e-5);
  EXPECT_LT(rel, 5e-4);
}

TEST(Fit, LikelihoodNeverDecreases) {
  const GradientScheme s = builtin_scheme("design1");
  Rng rng = make_rng(7, 0);
  FitOptions o;
  o.keep_trace = true;
  for (int k = 0; k < 100; ++k) {
    const TensorFit f = mle_fit(simulate_dataset(s, SymMat::identity(3, kG), kRho, kEta2, rng), o);
    ASSERT_FALSE(f.trace.empty());
    EXPECT_GE(f.trace.front(), f.loglik_init - 1e-9);
    for (std::size_t i = 1; i < f.trace.size(); ++i) EXPECT_GE(f.trace[i], f.trace[i - 1] - 1e-9 * std::abs(f.trace[i]));
    EXPECT_TRUE(f.converged);
  }
}

TEST(Fit, FixedRhoIsRespected) {
  const GradientScheme s = builtin_scheme("design1");
  Rng rng = make_rng(8, 0);
  FitOptions o;
  o.estimate_rho = false;
  o.fixed_rho = kRho;
  const TensorFit f = mle_fit(simulate_dataset(s, SymMat::identity(3, kG), kRho, kEta2, rng), o);
  EXPECT_DOUBLE_EQ(f.rho_hat, kRho);
}

TEST(Fit, RotationEquivariance) {
  const GradientScheme s = builtin_scheme("design2");
  Rng rng = make_rng(9, 0);
  const RicianDataset ds = simulate_dataset(s, truth(), kRho, kEta2, rng);
  const Mat3 o = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  RicianDataset rot = ds;
  for (Acquisition& a : rot.acq) a.u = o * a.u;
  const TensorFit f1 = mle_fit(ds);
  const TensorFit f2 = mle_fit(rot);
  const Mat expect = o * f1.d_hat.dense() * o.transpose();
  EXPECT_LT((f2.d_hat.dense() - expect).norm() / expect.norm(), 1e-6);
  EXPECT_NEAR(f1.loglik, f2.loglik, 1e-8 * std::abs(f1.loglik));
}

TEST(Fit, PsdProjection) {
  const GradientScheme s = builtin_scheme("design1");
  Rng rng = make_rng(10, 0);
  FitOptions o;
  o.psd_projection = true;
  const SymMat flat = SymMat::diagonal(Vec3(1e-3, 1e-5, 0.0));
  for (int k = 0; k < 20; ++k) {
    const TensorFit f = mle_fit(simulate_dataset(s, flat, kRho, kEta2, rng), o);
    EXPECT_GE(spectral_decompose(f.d_hat).gamma[2], -1e-15);
  }
}

TEST(Dataset, SaveLoadRoundTrip) {
  const GradientScheme s = builtin_scheme("design1");
  Rng rng = make_rng(11, 0);
  const RicianDataset ds = simulate_dataset(s, truth(), kRho, kEta2, rng);
  const std::string path = (std::filesystem::temp_directory_path() / "isomat_ds.csv").string();
  save_dataset(path, ds);
  const RicianDataset back = load_dataset(path);
  ASSERT_EQ(back.size(), ds.size());
  EXPECT_TRUE(back.y.isApprox(ds.y, 1e-15));
  EXPECT_EQ(back.eta2, ds.eta2);
  ASSERT_TRUE(back.truth.has_value());
  EXPECT_TRUE(back.truth->d.vec().isApprox(truth().vec(), 1e-15));
  std::remove(path.c_str());
  std::remove((path + ".json").c_str());
  EXPECT_THROW(load_dataset(path), DataError);
}

TEST(Dataset, Validation) {
  RicianDataset ds;
  ds.acq = {{1000.0, Vec3(1, 0, 0)}};
  ds.y = Vec::Ones(2);
  EXPECT_THROW(ds.validate(), InvalidArgument);
  ds.y = Vec::Ones(1);
  ds.eta2 = -1.0;
  EXPECT_THROW(ds.validate(), InvalidArgument);
}
