#include "isomat/design.hpp"

#include "isomat/data_files.hpp"
#include "isomat/quadrature.hpp"
#include "isomat/rician.hpp"
#include "isomat/special.hpp"

// pchip.hpp calls isnan unqualified and relies on it being in scope.
#include <cmath>
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace isomat {

namespace {

double double_factorial(int n) {
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

// Largest |<u, v>| between the rotated shell i and every other shell; stops
// early once `stop_at` is reached, since the caller only needs to know the
// candidate is no better.
double max_cross_cosine(const std::vector<Vec3>& shell_i, const std::vector<std::vector<Vec3>>& rotated, std::size_t i,
                        double stop_at) {
  double worst = 0.0;
  for (std::size_t j = 0; j < rotated.size(); ++j) {
    if (j == i) continue;
    for (const Vec3& u : shell_i) {
      for (const Vec3& v : rotated[j]) {
        const double c = std::abs(u.dot(v));
        if (c > worst) {
          worst = c;
          if (worst >= stop_at) return worst;
        }
      }
    }
  }
  return worst;
}

double cos_to_angle(double c) { return std::acos(std::min(1.0, c)); }

std::vector<Vec3> rotate_all(const Mat3& r, const std::vector<Vec3>& pts) {
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const Vec3& p : pts) out.push_back(r * p);
  return out;
}

}  // namespace

double sphere_moment(int a, int b, int c) {
  if (a < 0 || b < 0 || c < 0) throw InvalidArgument("sphere_moment: exponents must be non-negative");
  if (a % 2 || b % 2 || c % 2) return 0.0;
  return double_factorial(a - 1) * double_factorial(b - 1) * double_factorial(c - 1) / double_factorial(a + b + c + 1);
}

double design_moment(const std::vector<Vec3>& points, int a, int b, int c) {
  if (points.empty()) throw InvalidArgument("design_moment: empty point set");
  double s = 0.0;
  for (const Vec3& u : points) s += ipow(u[0], a) * ipow(u[1], b) * ipow(u[2], c);
  return s / static_cast<double>(points.size());
}

DesignReport verify_t_design(const SphericalDesign& design, int t, double tol, bool even_only) {
  if (t < 1) throw InvalidArgument("verify_t_design: t must be >= 1");
  for (const Vec3& u : design.points)
    if (std::abs(u.norm() - 1.0) > 1e-10) throw InvalidArgument("verify_t_design: points must be unit vectors");
  DesignReport rep;
  for (int deg = 1; deg <= t; ++deg) {
    if ((even_only || design.even_only) && deg % 2) continue;
    for (int a = 0; a <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) {
        const int c = deg - a - b;
        const double v = std::abs(design_moment(design.points, a, b, c) - sphere_moment(a, b, c));
        if (v > rep.max_violation) {
          rep.max_violation = v;
          rep.worst_a = a;
          rep.worst_b = b;
          rep.worst_c = c;
        }
      }
    }
  }
  rep.pass = rep.max_violation <= tol;
  return rep;
}

bool is_antipodal(const std::vector<Vec3>& points, double pair_tol) {
  for (const Vec3& u : points) {
    const bool found = std::any_of(points.begin(), points.end(), [&](const Vec3& v) { return (u + v).norm() <= pair_tol; });
    if (!found) return false;
  }
  return !points.empty();
}

SphericalDesign halve_antipodal(const SphericalDesign& design, double pair_tol) {
  const std::size_t n = design.points.size();
  std::vector<int> partner(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && (design.points[i] + design.points[j]).norm() <= pair_tol) {
        partner[i] = static_cast<int>(j);
        break;
      }
    }
    if (partner[i] < 0) throw InvalidArgument("halve_antipodal: point " + std::to_string(i) + " has no antipode");
  }
  auto upper = [](const Vec3& u) {
    constexpr double eps = 1e-12;
    if (std::abs(u[2]) > eps) return u[2] > 0.0;
    if (std::abs(u[1]) > eps) return u[1] > 0.0;
    return u[0] > 0.0;
  };
  SphericalDesign out;
  out.name = design.name + "/half";
  out.order = design.order;
  out.antipodal = false;
  out.even_only = true;
  for (std::size_t i = 0; i < n; ++i)
    if (upper(design.points[i])) out.points.push_back(design.points[i]);
  if (out.points.size() * 2 != n) throw InvalidArgument("halve_antipodal: inconsistent antipodal pairing");
  return out;
}

Mat3 rotation_zxz(double phi, double theta, double psi) {
  return (Eigen::AngleAxisd(phi, Vec3::UnitZ()) * Eigen::AngleAxisd(theta, Vec3::UnitX()) *
          Eigen::AngleAxisd(psi, Vec3::UnitZ()))
      .toRotationMatrix();
}

double shell_separation(const std::vector<SphericalDesign>& designs, const std::vector<Mat3>& rotations) {
  if (designs.size() < 2) throw InvalidArgument("shell_separation: need at least two shells");
  if (rotations.size() != designs.size()) throw InvalidArgument("shell_separation: one rotation per shell");
  std::vector<std::vector<Vec3>> rotated;
  for (std::size_t i = 0; i < designs.size(); ++i) rotated.push_back(rotate_all(rotations[i], designs[i].points));
  double worst = 0.0;
  for (std::size_t i = 0; i < rotated.size(); ++i) worst = std::max(worst, max_cross_cosine(rotated[i], rotated, i, 2.0));
  return cos_to_angle(worst);
}

RotationSearch optimize_shell_rotations(const std::vector<SphericalDesign>& designs, int max_iters, Rng& rng,
                                        std::vector<Vec3> start) {
  const std::size_t k = designs.size();
  if (k < 2) throw InvalidArgument("optimize_shell_rotations: need at least two shells");
  if (max_iters < 0) throw InvalidArgument("optimize_shell_rotations: max_iters must be >= 0");
  if (start.empty()) start.assign(k, Vec3::Zero());
  if (start.size() != k) throw InvalidArgument("optimize_shell_rotations: one start triple per shell");

  RotationSearch res;
  res.euler = start;
  std::vector<std::vector<Vec3>> rotated(k);
  for (std::size_t i = 0; i < k; ++i)
    rotated[i] = rotate_all(rotation_zxz(start[i][0], start[i][1], start[i][2]), designs[i].points);

  auto global_max_cos = [&]() {
    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i) worst = std::max(worst, max_cross_cosine(rotated[i], rotated, i, 2.0));
    return worst;
  };
  double best_cos = global_max_cos();
  res.initial_objective = cos_to_angle(best_cos);

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  constexpr int kGrid = 12;
  constexpr int kHalvings = 4;
  for (int sweep = 0; sweep < max_iters; ++sweep) {
    std::shuffle(order.begin(), order.end(), rng);
    bool improved_any = false;
    for (std::size_t i : order) {
      Vec3 center = res.euler[i];
      // Pairs not involving shell i are fixed during this step; a candidate
      // has to beat the current global worst, those pairs included.
      double others = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        if (p == i) continue;
        for (std::size_t q = p + 1; q < k; ++q) {
          if (q == i) continue;
          for (const Vec3& u : rotated[p])
            for (const Vec3& v : rotated[q]) others = std::max(others, std::abs(u.dot(v)));
        }
      }
      if (others >= best_cos) continue;
      double h = 2.0 * std::numbers::pi / kGrid;
      for (int level = 0; level <= kHalvings; ++level, h *= 0.5) {
        Vec3 best_angles = center;
        bool moved = false;
        for (int a = 0; a < kGrid; ++a) {
          for (int b = 0; b < kGrid; ++b) {
            for (int c = 0; c < kGrid; ++c) {
              const Vec3 cand = center + h * Vec3(a - 5.5, b - 5.5, c - 5.5);
              const auto pts = rotate_all(rotation_zxz(cand[0], cand[1], cand[2]), designs[i].points);
              const double mine = max_cross_cosine(pts, rotated, i, best_cos);
              const double total = std::max(mine, others);
              if (total < best_cos) {
                best_cos = total;
                best_angles = cand;
                moved = true;
              }
            }
          }
        }
        if (moved) {
          center = best_angles;
          rotated[i] = rotate_all(rotation_zxz(center[0], center[1], center[2]), designs[i].points);
          improved_any = true;
        }
      }
      res.euler[i] = center;
    }
    ++res.sweeps;
    res.history.push_back(cos_to_angle(best_cos));
    if (!improved_any) break;
  }
  res.objective = cos_to_angle(best_cos);
  for (const Vec3& e : res.euler) res.rotations.push_back(rotation_zxz(e[0], e[1], e[2]));
  return res;
}

double weight_w(double z, const WeightQuadConfig& cfg) {
  if (!(z >= 0.0)) throw InvalidArgument("weight_w: z must be >= 0");
  if (z == 0.0) return 0.0;
  if (z > 40.0) {
    // High-SNR expansion; matched to quadrature for z in [10, 40], next term ~ -2/z^6.
    const double iz2 = 1.0 / (z * z);
    return z * z - 0.5 - 0.25 * iz2 - 0.5 * iz2 * iz2;
  }
  // Written as z^2 (2 - E[Y^2 (1 - r(zY)^2)]) with Y Rician(z, 1) and
  // r = I1/I0, using E[Y^2] = z^2 + 2.  The direct form z^6 int - z^4 cancels
  // to nothing at high SNR; this one keeps full precision there.  Scaled
  // Bessel functions absorb e^{zy}, leaving the Gaussian factor e^{-(y-z)^2/2}.
  auto f = [z](double y) {
    if (y <= 0.0) return 0.0;
    const double x = z * y;
    const double i0 = bessel_i0e(x), i1 = bessel_i1e(x);
    return y * y * y * std::exp(-0.5 * (y - z) * (y - z)) * (i0 - i1) * (i0 + i1) / i0;
  };
  const double lo = std::max(0.0, z - 40.0), hi = z + 40.0;  // e^{-800}: nothing left beyond
  double e = 0.0;
  if (lo < z) e += integrate(f, lo, z, cfg.rel_tol);
  e += integrate(f, z, hi, cfg.rel_tol);
  return z * z * (2.0 - e);
}

namespace {

struct WeightTable {
  static constexpr double z_lo = 1e-3;
  static constexpr double z_hi = 50.0;
  static constexpr int n = 801;
  boost::math::interpolators::pchip<std::vector<double>> interp;

  static WeightTable build() {
    std::vector<double> lx(n), ly(n);
    for (int i = 0; i < n; ++i) {
      const double lz = std::log(z_lo) + (std::log(z_hi) - std::log(z_lo)) * i / (n - 1);
      lx[static_cast<std::size_t>(i)] = lz;
      ly[static_cast<std::size_t>(i)] = std::log(weight_w(std::exp(lz)));
    }
    return WeightTable{boost::math::interpolators::pchip<std::vector<double>>(std::move(lx), std::move(ly))};
  }
};

const WeightTable& weight_table() {
  static const WeightTable t = WeightTable::build();
  return t;
}

}  // namespace

double weight_w_cached(double z) {
  if (!(z >= WeightTable::z_lo && z <= WeightTable::z_hi)) return weight_w(z);
  return std::exp(weight_table().interp(std::log(z)));
}

int GradientScheme::total() const {
  int t = n_b0;
  for (const Shell& s : shells) t += static_cast<int>(s.design.points.size());
  return t;
}

std::vector<Acquisition> GradientScheme::acquisitions() const {
  std::vector<Acquisition> out;
  for (int i = 0; i < n_b0; ++i) out.push_back({0.0, Vec3::Zero()});
  for (const Shell& s : shells)
    for (const Vec3& u : s.design.points) out.push_back({s.b, u});
  return out;
}

void GradientScheme::validate() const {
  if (n_b0 < 0) throw InvalidArgument("scheme " + name + ": negative b0 count");
  for (const Shell& s : shells) {
    if (!(s.b >= 0.0) || !std::isfinite(s.b)) throw InvalidArgument("scheme " + name + ": b values must be finite and >= 0");
    for (const Vec3& u : s.design.points)
      if (std::abs(u.norm() - 1.0) > 1e-10) throw InvalidArgument("scheme " + name + ": non-unit gradient");
  }
}

Mat iso_pattern(int m) {
  IsotropicModel model{m, 1.0, 1.0};
  return precision_matrix(model);
}

IsotropyResult isotropy_check(const Mat& j, double rel_tol) {
  if (j.rows() != 6 || j.cols() != 6) throw InvalidArgument("isotropy_check: expects a 6x6 matrix");
  const Mat a = iso_pattern(3);
  IsotropyResult r;
  r.mu_bar = (j.array() * a.array()).sum() / a.squaredNorm();
  const double jn = j.norm();
  r.rel_residual = jn > 0.0 ? (j - r.mu_bar * a).norm() / jn : 0.0;
  r.isotropic = jn > 0.0 && r.rel_residual <= rel_tol;
  return r;
}

FisherInfo fisher_information(const GradientScheme& scheme, const SymMat& d, double rho, double eta,
                              double iso_rel_tol, bool cached_w) {
  if (d.dim() != 3) throw InvalidArgument("fisher_information: tensor must be 3x3");
  if (!(rho > 0.0) || !(eta > 0.0)) throw InvalidArgument("fisher_information: rho and eta must be positive");
  scheme.validate();
  const Mat dd = d.dense();
  FisherInfo fi;
  fi.M = scheme.total();
  if (fi.M == 0) throw InvalidArgument("fisher_information: empty scheme");
  fi.J_total = Mat::Zero(6, 6);
  for (const Shell& s : scheme.shells) {
    for (const Vec3& u : s.design.points) {
      const Vec3 g = std::sqrt(s.b) * u;
      const double signal = rho * std::exp(-g.dot(dd * g));
      const double z = signal / eta;
      const double w = cached_w ? weight_w_cached(z) : weight_w(z);
      const Vec q = quartic_row(g);
      fi.J_total.noalias() += w * q * q.transpose();
    }
  }
  fi.J = fi.J_total / static_cast<double>(fi.M);
  const IsotropyResult iso = isotropy_check(fi.J_total, iso_rel_tol);
  fi.rel_residual = iso.rel_residual;
  if (iso.isotropic) fi.mu_bar = iso.mu_bar;
  return fi;
}

double mu_bar_spherical(const GradientScheme& scheme, double gbar, double rho, double eta) {
  double s = 0.0;
  for (const Shell& sh : scheme.shells)
    s += weight_w(rho * std::exp(-gbar * sh.b) / eta) * sh.b * sh.b * static_cast<double>(sh.design.points.size());
  return s / 15.0;
}

std::vector<BundledDesign> bundled_designs() {
  return {{"designs/womersley14.csv", 4, false, 1e-4},
          {"designs/icosahedron12.csv", 5, true, 1e-6},
          {"designs/dodecahedron20.csv", 5, true, 1e-6},
          {"designs/antipodal_t7_32.csv", 7, false, 1e-10},
          {"designs/antipodal_t9_48.csv", 9, false, 1e-10},
          {"designs/antipodal_t11_70.csv", 11, false, 1e-10}};
}

namespace {

SphericalDesign bundled(const std::string& rel, int order, const std::string& name) {
  verify_bundled(rel);
  return load_design(data_path(rel), order, name);
}

std::vector<Vec3> read_rotations(const std::string& rel) {
  verify_bundled(rel);
  std::ifstream in(data_path(rel));
  std::string line;
  std::getline(in, line);
  if (line != "phi,theta,psi") throw DataError(rel + ": expected header phi,theta,psi");
  std::vector<Vec3> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    Vec3 e;
    char c1 = 0, c2 = 0;
    if (!(ss >> e[0] >> c1 >> e[1] >> c2 >> e[2])) throw DataError(rel + ": malformed row");
    out.push_back(e);
  }
  return out;
}

const std::vector<double> kMultiShellB = {560, 778, 996, 1276, 1556, 1898, 2240};

}  // namespace

GradientScheme builtin_scheme(const std::string& name) {
  GradientScheme s;
  s.name = name;
  if (name == "design1") {
    s.shells.push_back({996.0, bundled("designs/womersley14.csv", 4, "womersley14")});
    s.n_b0 = 1;
  } else if (name == "design2" || name == "design3") {
    const bool ico = name == "design2";
    const SphericalDesign half = halve_antipodal(
        bundled(ico ? "designs/icosahedron12.csv" : "designs/dodecahedron20.csv", 5, ico ? "icosahedron" : "dodecahedron"));
    for (double b : kMultiShellB) s.shells.push_back({b, half});
    s.n_b0 = 1;
  } else if (name == "design4") {
    const std::vector<Vec3> euler = read_rotations("designs/design4_rotations.csv");
    const std::vector<std::pair<std::string, int>> files = {{"designs/icosahedron12.csv", 5},
                                                            {"designs/antipodal_t7_32.csv", 7},
                                                            {"designs/antipodal_t9_48.csv", 9},
                                                            {"designs/antipodal_t11_70.csv", 11}};
    const double bs[] = {560, 996, 1556, 2240};
    if (euler.size() != files.size()) throw DataError("design4 rotations: expected one row per shell");
    for (std::size_t i = 0; i < files.size(); ++i) {
      SphericalDesign dsg = bundled(files[i].first, files[i].second, files[i].first);
      const Mat3 r = rotation_zxz(euler[i][0], euler[i][1], euler[i][2]);
      for (Vec3& u : dsg.points) u = r * u;
      s.shells.push_back({bs[i], dsg});
    }
    s.n_b0 = 1;
  } else if (name == "design5") {
    SphericalDesign table = bundled("designs/scanner32.csv", 0, "scanner32");
    // The printed scanner table lists (x, y, z) in the slice frame; the
    // tensor frame is (x, -z, y).
    SphericalDesign rep;
    rep.name = "scanner32x3";
    for (int r = 0; r < 3; ++r)
      for (const Vec3& u : table.points) rep.points.push_back(Vec3(u[0], -u[2], u[1]));
    for (double b : {62, 249, 560, 996, 1556, 2240, 3049, 3982, 5040, 6222, 7529, 8960, 10516, 12196, 14000})
      s.shells.push_back({b, rep});
    s.n_b0 = 3;
  } else {
    throw InvalidArgument("unknown scheme '" + name + "' (expected design1 .. design5)");
  }
  return s;
}

std::vector<GradientScheme> builtin_schemes() {
  std::vector<GradientScheme> out;
  for (int i = 1; i <= 5; ++i) out.push_back(builtin_scheme("design" + std::to_string(i)));
  return out;
}

}  // namespace isomat
