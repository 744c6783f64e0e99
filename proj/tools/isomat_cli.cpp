// Command-line front end for the isomat library.
//
// Exit status: 0 on success, 2 for malformed arguments, 1 when a computation
// or a data file fails.

#include "isomat/asymptotics.hpp"
#include "isomat/data_files.hpp"
#include "isomat/design.hpp"
#include "isomat/eigen_laws.hpp"
#include "isomat/harness.hpp"
#include "isomat/rician.hpp"
#include "isomat/special.hpp"
#include "isomat/sphericity.hpp"
#include "isomat/symmat.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

using namespace isomat;
using nlohmann::json;

namespace {

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec sorted_desc(Vec v) {
  std::sort(v.data(), v.data() + v.size(), std::greater<>());
  return v;
}

SymMat vec6(const std::vector<double>& v, const char* what) {
  if (v.size() != 6) throw InvalidArgument(std::string(what) + " needs six entries d11,d22,d33,d12,d13,d23");
  return SymMat::from_vec(3, to_vec(v));
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------------------

struct SampleArgs {
  std::vector<double> mean{1.0, 1.0, 1.0};
  double mu = 0.5, lambda = 0.0;
  std::size_t n = 10;
  std::uint64_t seed = 1;
  std::string out;
};

void run_sample(const SampleArgs& a) {
  const int m = static_cast<int>(a.mean.size());
  const IsotropicSampler draw(SymMat::diagonal(to_vec(a.mean)), IsotropicModel{m, a.mu, a.lambda});
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw DataError("cannot write " + a.out);
  }
  std::ostream& os = a.out.empty() ? std::cout : file;
  for (int k = 0; k < vec_size(m); ++k) os << (k ? "," : "") << "v" << k + 1;
  for (int k = 0; k < m; ++k) os << ",gamma" << k + 1;
  os << '\n';
  char buf[32];
  for (std::size_t i = 0; i < a.n; ++i) {
    Rng rng = make_rng(a.seed, i);
    const SymMat d = draw(rng);
    const Vec g = spectral_decompose(d).gamma;
    for (int k = 0; k < d.vec().size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.12g", d.vec()[k]);
      os << (k ? "," : "") << buf;
    }
    for (int k = 0; k < m; ++k) {
      std::snprintf(buf, sizeof buf, "%.12g", g[k]);
      os << ',' << buf;
    }
    os << '\n';
  }
}

struct DensityArgs {
  std::vector<double> gamma, gbar;
  double mu = 0.5, lambda = 0.0;
  int nodes = 128;
};

void run_density(const DensityArgs& a) {
  const int m = static_cast<int>(a.gamma.size());
  if (a.gbar.size() != a.gamma.size()) throw InvalidArgument("--gamma and --gbar differ in length");
  const IsotropicModel model{m, a.mu, a.lambda};
  model.validate();
  OrderedSpectrum spec{sorted_desc(to_vec(a.gamma)), sorted_desc(to_vec(a.gbar))};
  HcizConfig cfg = HcizConfig::defaults_for(m);
  cfg.nodes_per_angle = a.nodes;
  json j;
  j["log_density"] = log_eigdensity_general(spec, model, cfg);
  if (m == 3) {
    j["regime"] = std::string(to_string(regime_classify(spec.gbar)));
    j["limit_log_density"] = regime_logdensity(spec.gamma, spec.gbar, a.mu, a.lambda);
  }
  print(j);
}

struct TauArgs {
  std::vector<double> gamma;
  double a = 100.0, lambda = 0.0, kappa1_ref = 0.0, alpha = 0.95;
};

void run_tau(const TauArgs& a) {
  if (a.gamma.size() != 3) throw InvalidArgument("--gamma needs three eigenvalues");
  const TauStats t = tau_statistics(to_vec(a.gamma), a.a, a.kappa1_ref);
  const SphericityPValues p = sphericity_pvalues(t, a.lambda);
  json j = {{"tau1", t.tau1}, {"tau2", t.tau2}, {"tau3", opt(t.tau3)}, {"tau4", t.tau4}, {"tau5", t.tau5},
            {"tau6", t.tau6}, {"fa", t.fa},     {"ra", t.ra},          {"vr", t.vr}};
  j["p"] = {{"tau1", p.p_tau1}, {"tau2", p.p_tau2}, {"tau3", opt(p.p_tau3)}, {"tau5", p.p_tau5}};
  if (t.tau3) j["tau3_accepts_sphericity"] = accept_tau3(*t.tau3, a.alpha);
  print(j);
}

struct ClassifyArgs {
  std::vector<double> gamma;
  double a = 100.0;
  std::optional<double> c_n, p_n;
};

void run_classify(const ClassifyArgs& a) {
  if (a.gamma.size() != 3) throw InvalidArgument("--gamma needs three eigenvalues");
  double c = 0, p = 0;
  if (a.c_n && a.p_n) {
    c = *a.c_n;
    p = *a.p_n;
  } else {
    const ClassifierThresholds th = default_thresholds(a.a);
    c = a.c_n.value_or(th.c_n);
    p = a.p_n.value_or(th.p_n);
  }
  const SymmetryVerdict v = symmetry_classify(to_vec(a.gamma), a.a, c, p);
  print({{"regime", std::string(to_string(v.regime))}, {"estimate", to_std(v.estimate)}, {"c_n", v.c_n}, {"p_n", v.p_n}});
}

struct TwoSampleArgs {
  std::vector<double> d1, d2;
  double mu1 = 1, lambda1 = 0, mu2 = 1, lambda2 = 0;
};

void run_two_sample(const TwoSampleArgs& a) {
  const CombinedModel c = two_sample_combine(a.mu1, a.lambda1, a.mu2, a.lambda2, 3);
  const double s = two_sample_stat(vec6(a.d1, "--d1") - vec6(a.d2, "--d2"), c.mu, c.lambda, 3);
  print({{"mu", c.mu}, {"lambda", c.lambda}, {"statistic", s}, {"dof", 6}, {"p", chi2_sf(s, 6.0)}});
}

struct CalibArgs {
  std::vector<double> ts{0.5, 1, 2, 5, 10, 20, 50, 100};
  std::vector<double> levels;
  std::size_t draws = 1000000;
  std::uint64_t seed = 7;
  std::string out = "vr_calibration.csv";
};

void run_calibrate(CalibArgs a) {
  if (a.levels.empty())
    a.levels = {0.001, 0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.975, 0.99, 0.995, 0.999};
  VrCalibration::build(a.ts, a.levels, a.draws, a.seed).save(a.out);
  std::cout << "wrote " << a.out << '\n';
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string file;
  int order = 0;
  std::optional<double> tol;
  bool even_only = false;
};

int run_verify(const VerifyArgs& a) {
  json rows = json::array();
  bool all = true;
  auto check = [&](const SphericalDesign& d, bool even, double tol) {
    const DesignReport r = verify_t_design(d, d.order, a.tol.value_or(tol), even);
    all = all && r.pass;
    rows.push_back({{"design", d.name},
                    {"points", d.points.size()},
                    {"order", d.order},
                    {"antipodal", d.antipodal},
                    {"tol", a.tol.value_or(tol)},
                    {"pass", r.pass},
                    {"max_violation", r.max_violation},
                    {"worst_monomial", {r.worst_a, r.worst_b, r.worst_c}}});
  };
  if (!a.file.empty()) {
    if (a.order < 1) throw InvalidArgument("--order is required with --file");
    check(load_design(a.file, a.order, a.file), a.even_only, 1e-4);
  } else {
    for (const BundledDesign& b : bundled_designs()) {
      verify_bundled(b.file);
      SphericalDesign d = load_design(data_path(b.file), b.order, b.file);
      check(d, false, b.tol);
      if (b.halve) {
        SphericalDesign h = halve_antipodal(d);
        h.name = b.file + " (halved)";
        check(h, true, b.tol);
      }
    }
  }
  print(rows);
  return all ? 0 : 1;
}

struct OptimizeArgs {
  int iters = 50;
  std::uint64_t seed = 11;
  std::string out;
};

void run_optimize(const OptimizeArgs& a) {
  const std::vector<std::pair<std::string, int>> files = {{"designs/icosahedron12.csv", 5},
                                                          {"designs/antipodal_t7_32.csv", 7},
                                                          {"designs/antipodal_t9_48.csv", 9},
                                                          {"designs/antipodal_t11_70.csv", 11}};
  std::vector<SphericalDesign> designs;
  for (const auto& [f, o] : files) {
    verify_bundled(f);
    designs.push_back(load_design(data_path(f), o, f));
  }
  Rng rng = make_rng(a.seed, 0);
  const RotationSearch r = optimize_shell_rotations(designs, a.iters, rng);
  const double deg = 180.0 / 3.14159265358979323846;
  std::cerr << "min angular separation: " << r.initial_objective * deg << " -> " << r.objective * deg << " degrees after "
            << r.sweeps << " sweeps\n";
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw DataError("cannot write " + a.out);
  }
  std::ostream& os = a.out.empty() ? std::cout : file;
  os << "phi,theta,psi\n";
  char buf[96];
  for (const Vec3& e : r.euler) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", e[0], e[1], e[2]);
    os << buf << '\n';
  }
}

struct FisherArgs {
  std::string scheme = "design1";
  double rho = 110.046, eta2 = 64.056, gbar = 6.622e-4;
};

void run_fisher(const FisherArgs& a) {
  const GradientScheme s = builtin_scheme(a.scheme);
  const double eta = std::sqrt(a.eta2);
  const FisherInfo fi = fisher_information(s, SymMat::identity(3, a.gbar), a.rho, eta);
  const IsotropyResult iso = isotropy_check(fi.J_total);
  json cov = json::array();
  const Mat c = fi.J_total.inverse();
  for (int i = 0; i < 6; ++i) cov.push_back(to_std(c.row(i).transpose()));
  print({{"scheme", s.name},
         {"acquisitions", s.total()},
         {"isotropic", iso.isotropic},
         {"rel_residual", iso.rel_residual},
         {"mu_bar", iso.mu_bar},
         {"mu_bar_formula", mu_bar_spherical(s, a.gbar, a.rho, eta)},
         {"covariance", cov}});
}

void run_list() {
  json rows = json::array();
  for (const GradientScheme& s : builtin_schemes()) {
    json shells = json::array();
    for (const Shell& sh : s.shells) shells.push_back({{"b", sh.b}, {"points", sh.design.points.size()}});
    rows.push_back({{"name", s.name}, {"acquisitions", s.total()}, {"b0", s.n_b0}, {"shells", shells}});
  }
  print(rows);
}

void run_manifest() {
  namespace fs = std::filesystem;
  std::vector<std::string> rel;
  for (const char* sub : {"designs", "calibration"}) {
    const fs::path dir = fs::path(data_dir()) / sub;
    if (!fs::exists(dir)) continue;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file()) rel.push_back(std::string(sub) + "/" + e.path().filename().string());
  }
  std::sort(rel.begin(), rel.end());
  write_manifest(rel);
  std::cout << "listed " << rel.size() << " files in " << data_path("MANIFEST") << '\n';
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string scheme = "design1", scheme_file;
  std::vector<double> d{6.622e-4, 6.622e-4, 6.622e-4, 0, 0, 0};
  double rho = 110.046, eta2 = 64.056;
  std::uint64_t seed = 1;
  std::string out = "dataset.csv";
};

void run_simulate(const SimulateArgs& a) {
  GradientScheme s;
  if (!a.scheme_file.empty()) {
    s.name = a.scheme_file;
    std::map<double, SphericalDesign> shells;
    for (const Acquisition& q : read_gradient_table(a.scheme_file)) {
      if (q.b == 0.0) ++s.n_b0;
      else shells[q.b].points.push_back(q.u);
    }
    for (auto& [b, d] : shells) s.shells.push_back({b, d});
  } else {
    s = builtin_scheme(a.scheme);
  }
  Rng rng = make_rng(a.seed, 0);
  RicianDataset ds = simulate_dataset(s, vec6(a.d, "--d"), a.rho, a.eta2, rng);
  ds.truth->seed = a.seed;
  save_dataset(a.out, ds);
  std::cout << "wrote " << ds.size() << " acquisitions to " << a.out << '\n';
}

struct FitArgs {
  std::string data;
  std::optional<double> fixed_rho;
  bool psd = false;
  bool trace = false;
};

int run_fit(const FitArgs& a) {
  const RicianDataset ds = load_dataset(a.data);
  FitOptions o;
  if (a.fixed_rho) {
    o.estimate_rho = false;
    o.fixed_rho = a.fixed_rho;
  }
  o.psd_projection = a.psd;
  o.keep_trace = a.trace;
  const TensorFit f = mle_fit(ds, o);
  const SpectralDecomp sd = spectral_decompose(f.d_hat);
  json j = {{"d_hat", to_std(f.d_hat.vec())},
            {"rho_hat", f.rho_hat},
            {"eigenvalues", to_std(sd.gamma)},
            {"loglik", f.loglik},
            {"loglik_init", f.loglik_init},
            {"iterations", f.iterations},
            {"converged", f.converged}};
  if (a.trace) j["trace"] = f.trace;
  print(j);
  return f.converged ? 0 : 1;
}

struct McArgs {
  std::string config;
  std::optional<int> workers;
  std::optional<std::size_t> n;
  std::optional<std::string> output;
};

void run_mc_cmd(const McArgs& a) {
  McConfig cfg = McConfig::load(a.config);
  if (a.workers) cfg.workers = *a.workers;
  if (a.n) cfg.n = *a.n;
  if (a.output) cfg.output = *a.output;
  const McReport r = run_mc(cfg);
  for (const auto& f : r.files) std::cout << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isotropic random symmetric matrices: sampling, eigenvalue laws, sphericity tests, diffusion designs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "draw isotropic Gaussian symmetric matrices (CSV of vec and eigenvalues)");
  sample->add_option("--mean", sa.mean, "eigenvalues of the (diagonal) mean")->delimiter(',');
  sample->add_option("--mu", sa.mu)->check(CLI::PositiveNumber);
  sample->add_option("--lambda", sa.lambda);
  sample->add_option("-n,--count", sa.n);
  sample->add_option("--seed", sa.seed);
  sample->add_option("-o,--out", sa.out, "output file (stdout if omitted)");

  DensityArgs da;
  auto* density = app.add_subcommand("density", "eigenvalue density at a point");
  density->add_option("--gamma", da.gamma)->delimiter(',')->required();
  density->add_option("--gbar", da.gbar)->delimiter(',')->required();
  density->add_option("--mu", da.mu)->check(CLI::PositiveNumber);
  density->add_option("--lambda", da.lambda);
  density->add_option("--nodes", da.nodes, "quadrature nodes per angle")->check(CLI::PositiveNumber);

  auto* test = app.add_subcommand("test", "sphericity and symmetry tests");
  test->require_subcommand(1);
  TauArgs ta;
  auto* tau = test->add_subcommand("tau", "tau statistics and p-values for three eigenvalues");
  tau->add_option("--gamma", ta.gamma)->delimiter(',')->required();
  tau->add_option("-a,--a,--scale", ta.a, "precision scaling a")->check(CLI::PositiveNumber);
  tau->add_option("--lambda", ta.lambda, "interaction parameter relative to a");
  tau->add_option("--kappa1-ref", ta.kappa1_ref, "reference mean eigenvalue for tau1");
  tau->add_option("--alpha", ta.alpha, "confidence for the tau3 acceptance band");
  ClassifyArgs ca;
  auto* classify = test->add_subcommand("classify", "asymmetric / prolate / oblate / isotropic");
  classify->add_option("--gamma", ca.gamma)->delimiter(',')->required();
  classify->add_option("-a,--a,--scale", ca.a)->check(CLI::PositiveNumber);
  classify->add_option("--cn", ca.c_n);
  classify->add_option("--pn", ca.p_n);
  TwoSampleArgs tsa;
  auto* two = test->add_subcommand("two-sample", "equality of two isotropic means");
  two->add_option("--d1", tsa.d1)->delimiter(',')->required();
  two->add_option("--d2", tsa.d2)->delimiter(',')->required();
  two->add_option("--mu1", tsa.mu1);
  two->add_option("--lambda1", tsa.lambda1);
  two->add_option("--mu2", tsa.mu2);
  two->add_option("--lambda2", tsa.lambda2);
  CalibArgs cla;
  auto* calib = test->add_subcommand("vr-calibrate", "tabulate conditional VR quantiles by Monte Carlo");
  calib->add_option("--t", cla.ts)->delimiter(',');
  calib->add_option("--levels", cla.levels)->delimiter(',');
  calib->add_option("--draws", cla.draws)->check(CLI::PositiveNumber);
  calib->add_option("--seed", cla.seed);
  calib->add_option("-o,--out", cla.out);

  auto* design = app.add_subcommand("design", "spherical designs and gradient schemes");
  design->require_subcommand(1);
  VerifyArgs va;
  auto* verify = design->add_subcommand("verify", "check the moment conditions of a design");
  verify->add_option("--file", va.file, "gradient table (default: all bundled designs)")->check(CLI::ExistingFile);
  verify->add_option("--order,--t", va.order, "design order t");
  verify->add_option("--tol", va.tol, "moment tolerance (default: per design, 1e-4 for --file)");
  verify->add_flag("--even-only", va.even_only);
  OptimizeArgs oa;
  auto* optimize = design->add_subcommand("optimize", "rotate the four multi-shell designs apart");
  optimize->add_option("--iters", oa.iters)->check(CLI::PositiveNumber);
  optimize->add_option("--seed", oa.seed);
  optimize->add_option("-o,--out", oa.out);
  FisherArgs fa;
  auto* fisher = design->add_subcommand("fisher", "Fisher information of a scheme at a spherical tensor");
  fisher->add_option("--scheme", fa.scheme);
  fisher->add_option("--rho", fa.rho)->check(CLI::PositiveNumber);
  fisher->add_option("--eta2", fa.eta2)->check(CLI::PositiveNumber);
  fisher->add_option("--gbar,--spherical", fa.gbar, "spherical tensor gbar * I")->check(CLI::PositiveNumber);
  auto* list = design->add_subcommand("list", "list the built-in schemes");
  auto* manifest = design->add_subcommand("manifest", "rewrite the checksum manifest of the data directory");

  SimulateArgs sia;
  auto* simulate = app.add_subcommand("simulate", "simulate a Rician diffusion dataset");
  simulate->add_option("--scheme", sia.scheme);
  simulate->add_option("--scheme-file", sia.scheme_file)->check(CLI::ExistingFile);
  simulate->add_option("--d", sia.d, "true tensor d11,d22,d33,d12,d13,d23")->delimiter(',');
  simulate->add_option("--rho", sia.rho)->check(CLI::PositiveNumber);
  simulate->add_option("--eta2", sia.eta2)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sia.seed);
  simulate->add_option("-o,--out", sia.out);

  FitArgs fia;
  auto* fit = app.add_subcommand("fit", "maximum likelihood tensor fit of a dataset");
  fit->add_option("--data", fia.data)->required()->check(CLI::ExistingFile);
  fit->add_option("--fixed-rho", fia.fixed_rho);
  fit->add_flag("--psd", fia.psd, "project the estimate onto the PSD cone");
  fit->add_flag("--trace", fia.trace, "print the log-likelihood after each iteration");

  McArgs ma;
  auto* mc = app.add_subcommand("mc", "run a Monte Carlo study from a config file");
  mc->add_option("config", ma.config)->required()->check(CLI::ExistingFile);
  mc->add_option("--workers", ma.workers);
  mc->add_option("-n,--count", ma.n);
  mc->add_option("-o,--output", ma.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sample) run_sample(sa);
    else if (*density) run_density(da);
    else if (*tau) run_tau(ta);
    else if (*classify) run_classify(ca);
    else if (*two) run_two_sample(tsa);
    else if (*calib) run_calibrate(cla);
    else if (*verify) return run_verify(va);
    else if (*optimize) run_optimize(oa);
    else if (*fisher) run_fisher(fa);
    else if (*list) run_list();
    else if (*manifest) run_manifest();
    else if (*simulate) run_simulate(sia);
    else if (*fit) return run_fit(fia);
    else if (*mc) run_mc_cmd(ma);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
