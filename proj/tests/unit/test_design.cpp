#include "isomat/data_files.hpp"
#include "isomat/design.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace isomat;

TEST(SphereMoments, KnownValues) {
  EXPECT_DOUBLE_EQ(sphere_moment(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(sphere_moment(1, 0, 0), 0.0);
  EXPECT_NEAR(sphere_moment(2, 0, 0), 1.0 / 3.0, 1e-16);
  EXPECT_NEAR(sphere_moment(4, 0, 0), 1.0 / 5.0, 1e-16);
  EXPECT_NEAR(sphere_moment(2, 2, 0), 1.0 / 15.0, 1e-16);
  EXPECT_NEAR(sphere_moment(2, 2, 2), 1.0 / 105.0, 1e-16);
}

TEST(Designs, BundledTablesPass) {
  for (const BundledDesign& b : bundled_designs()) {
    const SphericalDesign d = load_design(data_path(b.file), b.order, b.file);
    EXPECT_TRUE(verify_t_design(d, b.order, b.tol).pass) << b.file;
    if (b.halve) {
      const SphericalDesign h = halve_antipodal(d);
      EXPECT_EQ(h.points.size(), d.points.size() / 2);
      EXPECT_TRUE(verify_t_design(h, b.order, 1e-6, true).pass) << b.file;
    }
  }
}

TEST(Designs, PerturbationFails) {
  SphericalDesign d = load_design(data_path("designs/antipodal_t7_32.csv"), 7);
  Rng rng = make_rng(3, 0);
  for (Vec3& u : d.points) {
    Vec3 t(std_normal(rng), std_normal(rng), std_normal(rng));
    t -= t.dot(u) * u;
    u = (u + 0.05 * t.normalized()).normalized();
  }
  const DesignReport r = verify_t_design(d, 7, 1e-6);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.max_violation, 1e-4);
}

TEST(Designs, AntipodalDetection) {
  std::vector<Vec3> p = {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};
  EXPECT_TRUE(is_antipodal(p));
  p.push_back(Vec3(0, 1, 0));
  EXPECT_FALSE(is_antipodal(p));
  SphericalDesign d{"x", p, 1, false, false};
  EXPECT_THROW(halve_antipodal(d), InvalidArgument);
}

TEST(Rotations, ZxzIsProperRotation) {
  const Mat3 r = rotation_zxz(0.3, 1.1, -2.0);
  EXPECT_TRUE((r.transpose() * r).isApprox(Mat3::Identity(), 1e-14));
  EXPECT_NEAR(r.determinant(), 1.0, 1e-14);
  EXPECT_TRUE(rotation_zxz(0.4, 0, 0.6).isApprox(rotation_zxz(1.0, 0, 0), 1e-14));
}

TEST(Rotations, OptimizerImprovesSeparation) {
  std::vector<SphericalDesign> ds;
  for (const char* f : {"designs/icosahedron12.csv", "designs/dodecahedron20.csv"})
    ds.push_back(load_design(data_path(f), 5, f));
  Rng rng = make_rng(4, 0);
  const RotationSearch r = optimize_shell_rotations(ds, 10, rng);
  EXPECT_GE(r.objective, r.initial_objective);
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_GE(r.history[i], r.history[i - 1]);
  EXPECT_NEAR(shell_separation(ds, r.rotations), r.objective, 1e-12);
}

TEST(Rotations, BundledDesign4IsSeparated) {
  const GradientScheme s = builtin_scheme("design4");
  std::vector<SphericalDesign> ds;
  for (const Shell& sh : s.shells) ds.push_back(sh.design);
  const std::vector<Mat3> id(ds.size(), Mat3::Identity());
  EXPECT_GT(shell_separation(ds, id), 5.0 * M_PI / 180.0);
}

// Values from an independent quadrature in the original variable x (scipy quad).
TEST(Weight, PinnedValues) {
  EXPECT_NEAR(weight_w(1.0), 0.521446920734381, 1e-10);
  EXPECT_NEAR(weight_w(3.0), 8.461361136514611, 1e-10 * 8.5);
  EXPECT_NEAR(weight_w(10.0), 99.49744808263313, 1e-10 * 100);
  EXPECT_EQ(weight_w(0.0), 0.0);
}

TEST(Weight, LimitsAndCache) {
  // high SNR: the Rician tends to a Gaussian, w(z) -> z^2
  EXPECT_NEAR(weight_w(40.0) / 1600.0, 1.0, 2e-3);
  // low SNR: w(z) ~ z^4 / 2... only its order matters: w / z^2 -> 0
  EXPECT_LT(weight_w(0.05) / 0.0025, 0.01);
  for (double z = 1.1e-3; z < 50.0; z *= 1.37) EXPECT_NEAR(weight_w_cached(z), weight_w(z), 1e-6 * weight_w(z)) << z;
  EXPECT_NEAR(weight_w_cached(60.0), weight_w(60.0), 1e-9 * weight_w(60.0));
}

TEST(Schemes, SizesAndValidation) {
  const int totals[] = {15, 43, 71, 163, 1443};
  for (int i = 1; i <= 5; ++i) {
    const GradientScheme s = builtin_scheme("design" + std::to_string(i));
    EXPECT_EQ(s.total(), totals[i - 1]);
    EXPECT_EQ(static_cast<int>(s.acquisitions().size()), s.total());
    EXPECT_EQ(s.acquisitions().front().b, 0.0);
    EXPECT_NO_THROW(s.validate());
  }
  EXPECT_THROW(builtin_scheme("design6"), InvalidArgument);
}

TEST(Fisher, IsotropyAndClosedForm) {
  const double rho = 110.046, eta = std::sqrt(64.056), g = 6.622e-4;
  for (int i = 1; i <= 5; ++i) {
    const GradientScheme s = builtin_scheme("design" + std::to_string(i));
    const FisherInfo fi = fisher_information(s, SymMat::identity(3, g), rho, eta);
    EXPECT_TRUE(fi.J_total.isApprox(fi.J_total.transpose()));
    EXPECT_TRUE(fi.J.isApprox(fi.J_total / fi.M, 1e-14));
    const IsotropyResult iso = isotropy_check(fi.J_total);
    if (i < 5) {
      EXPECT_TRUE(iso.isotropic) << i;
      EXPECT_NEAR(iso.mu_bar / mu_bar_spherical(s, g, rho, eta), 1.0, 1e-4) << i;
    } else {
      EXPECT_FALSE(iso.isotropic);
    }
  }
  EXPECT_TRUE(iso_pattern().isApprox(isotropy_check(iso_pattern() * 7.0).mu_bar / 7.0 * iso_pattern()));
}

TEST(Fisher, CachedWeightsAgree) {
  const GradientScheme s = builtin_scheme("design2");
  const SymMat d = SymMat::identity(3, 7e-4);
  const FisherInfo a = fisher_information(s, d, 100.0, 8.0, 1e-3, false);
  const FisherInfo b = fisher_information(s, d, 100.0, 8.0, 1e-3, true);
  EXPECT_TRUE(a.J_total.isApprox(b.J_total, 1e-6));
}

TEST(DataFiles, ManifestGuardsBundledFiles) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "isomat_manifest_test";
  fs::remove_all(dir);
  fs::create_directories(dir / "designs");
  fs::copy_file(data_path("designs/womersley14.csv"), dir / "designs/womersley14.csv");
  fs::copy_file(data_path("MANIFEST"), dir / "MANIFEST");
  setenv("ISOMAT_DATA_DIR", dir.c_str(), 1);
  EXPECT_NO_THROW(verify_bundled("designs/womersley14.csv"));
  {
    std::ofstream out(dir / "designs/womersley14.csv", std::ios::app);
    out << "0.0,0.0,1.0\n";
  }
  EXPECT_THROW(verify_bundled("designs/womersley14.csv"), DataError);
  EXPECT_THROW(verify_bundled("designs/missing.csv"), DataError);
  unsetenv("ISOMAT_DATA_DIR");
  fs::remove_all(dir);
}

TEST(DataFiles, GradientTableRoundTrip) {
  const std::string path = (std::filesystem::temp_directory_path() / "isomat_grad.csv").string();
  const std::vector<Acquisition> rows = {{0.0, Vec3(0, 0, 0)}, {1000.0, Vec3(0, 0, 1)}, {1000.0, Vec3(0.6, 0.8, 0)}};
  write_gradient_table(path, rows);
  const auto back = read_gradient_table(path);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].b, 0.0);
  EXPECT_TRUE(back[2].u.isApprox(Vec3(0.6, 0.8, 0)));
  {
    std::ofstream out(path);
    out << "b,ux,uy,uz\n1000,0.5,0.5,0\n";
  }
  EXPECT_THROW(read_gradient_table(path), DataError);
  std::remove(path.c_str());
}
