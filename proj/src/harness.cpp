#include "isomat/harness.hpp"

#include "isomat/asymptotics.hpp"
#include "isomat/data_files.hpp"
#include "isomat/design.hpp"
#include "isomat/rician.hpp"
#include "isomat/special.hpp"
#include "isomat/sphericity.hpp"
#include "isomat/stats.hpp"
#include "isomat/svg.hpp"
#include "isomat/symmat.hpp"

#include <nlohmann/json.hpp>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

namespace isomat {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// configuration

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw InvalidArgument("config: " + key + " expects a number, got '" + v + "'");
  }
  if (trim(v.substr(pos)) != "") throw InvalidArgument("config: " + key + " expects a number, got '" + v + "'");
  return d;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d < 0 || d != std::floor(d) || d > 1.8e19) throw InvalidArgument("config: " + key + " expects a non-negative integer");
  return std::stoull(v);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw InvalidArgument("config: " + key + " expects true or false");
}

std::vector<double> to_array(const std::string& key, const std::string& v) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') throw InvalidArgument("config: " + key + " expects [a, b, ...]");
  std::vector<double> out;
  std::stringstream ss(v.substr(1, v.size() - 2));
  std::string cell;
  while (std::getline(ss, cell, ','))
    if (!trim(cell).empty()) out.push_back(to_double(key, trim(cell)));
  return out;
}

}  // namespace

void McConfig::validate() const {
  if (experiment != "gaussian" && experiment != "rician" && experiment != "power")
    throw InvalidArgument("config: experiment must be gaussian, rician or power");
  if (n < 100) throw InvalidArgument("config: n must be at least 100");
  if (workers < 1) throw InvalidArgument("config: workers must be >= 1");
  if (chunk < 1) throw InvalidArgument("config: chunk must be >= 1");
  if (output.empty()) throw InvalidArgument("config: output directory is empty");
  if (experiment == "gaussian" || experiment == "power") IsotropicModel{3, mu, lambda}.validate();
  if (experiment == "gaussian" && gbar.size() != 3) throw InvalidArgument("config: gbar needs three eigenvalues");
  if (experiment == "rician") {
    if (!(rho > 0.0) || !(eta2 > 0.0)) throw InvalidArgument("config: rho and eta2 must be positive");
  }
  if (experiment == "power") {
    if (fa_grid.empty()) throw InvalidArgument("config: fa_grid is empty");
    for (double f : fa_grid)
      if (!(f >= 0.0 && f < 1.0)) throw InvalidArgument("config: FA values must lie in [0, 1)");
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("config: level must lie in (0, 1)");
  }
}

McConfig McConfig::parse(const std::string& text) {
  McConfig c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = unquote(trim(line.substr(eq + 1)));
    if (key == "experiment") c.experiment = val;
    else if (key == "n") c.n = to_u64(key, val);
    else if (key == "seed") c.seed = to_u64(key, val);
    else if (key == "workers") c.workers = static_cast<int>(to_u64(key, val));
    else if (key == "output") c.output = val;
    else if (key == "chunk") c.chunk = to_u64(key, val);
    else if (key == "mu") c.mu = to_double(key, val);
    else if (key == "lambda") c.lambda = to_double(key, val);
    else if (key == "gbar") c.gbar = to_array(key, val);
    else if (key == "design") c.design = val;
    else if (key == "design_file") c.design_file = val;
    else if (key == "rho") c.rho = to_double(key, val);
    else if (key == "eta2") c.eta2 = to_double(key, val);
    else if (key == "gbar_scalar") c.gbar_scalar = to_double(key, val);
    else if (key == "estimate_rho") c.estimate_rho = to_bool(key, val);
    else if (key == "fa_grid") c.fa_grid = to_array(key, val);
    else if (key == "power_center") c.power_center = to_double(key, val);
    else if (key == "level") c.level = to_double(key, val);
    else if (key == "figure_points") c.figure_points = to_u64(key, val);
    else if (key == "eigvec_points") c.eigvec_points = to_u64(key, val);
    else throw InvalidArgument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return c;
}

McConfig McConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

// ---------------------------------------------------------------------------
// study

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Row {
  std::string line;
  std::array<double, 3> gamma{};
  std::array<double, 6> pairs{};  // (x, y) for pairs 12, 13, 23 in random order
  TauStats tau;
  Mat3 vectors = Mat3::Zero();
  Vec dhat;
  bool converged = true;
  int alt = 0;
  bool reject = false;
};

struct Setup {
  std::string kind;
  double a = 1.0;
  double lambda_rel = 0.0;
  double kappa1_ref = 0.0;
  std::optional<IsotropicSampler> sampler;
  std::vector<IsotropicSampler> alternatives;
  std::vector<double> fa_true;
  GradientScheme scheme;
  SymMat d_true;
  FitOptions fit;
  double iso_residual = 0.0;
  bool fisher_isotropic = true;
};

Setup make_setup(const McConfig& cfg) {
  Setup s;
  s.kind = cfg.experiment;
  if (cfg.experiment == "gaussian") {
    Vec g = Eigen::Map<const Vec>(cfg.gbar.data(), 3);
    s.sampler.emplace(SymMat::diagonal(g), IsotropicModel{3, cfg.mu, cfg.lambda});
    s.a = cfg.mu;
    s.lambda_rel = cfg.lambda / cfg.mu;
    s.kappa1_ref = g.mean();
  } else if (cfg.experiment == "power") {
    for (double f : cfg.fa_grid) {
      const double delta = f * cfg.power_center / std::sqrt(3.0 - 2.0 * f * f);
      const Vec g = Vec3(cfg.power_center + 2.0 * delta, cfg.power_center - delta, cfg.power_center - delta);
      s.alternatives.emplace_back(SymMat::diagonal(g), IsotropicModel{3, cfg.mu, cfg.lambda});
      s.fa_true.push_back(f);
    }
    s.a = cfg.mu;
    s.lambda_rel = cfg.lambda / cfg.mu;
    s.kappa1_ref = cfg.power_center;
  } else {
    if (!cfg.design_file.empty()) {
      s.scheme.name = cfg.design_file;
      std::map<double, SphericalDesign> shells;
      for (const auto& a : read_gradient_table(cfg.design_file)) {
        if (a.b == 0.0) {
          ++s.scheme.n_b0;
        } else {
          shells[a.b].points.push_back(a.u);
        }
      }
      for (auto& [b, d] : shells) s.scheme.shells.push_back({b, d});
    } else {
      s.scheme = builtin_scheme(cfg.design);
    }
    s.d_true = SymMat::identity(3, cfg.gbar_scalar);
    const FisherInfo fi = fisher_information(s.scheme, s.d_true, cfg.rho, std::sqrt(cfg.eta2));
    const IsotropyResult iso = isotropy_check(fi.J_total);
    s.a = iso.mu_bar;
    s.iso_residual = iso.rel_residual;
    s.fisher_isotropic = iso.isotropic;
    s.lambda_rel = 1.0;
    s.kappa1_ref = cfg.gbar_scalar;
    s.fit.estimate_rho = cfg.estimate_rho;
    s.fit.fixed_rho = cfg.rho;
  }
  return s;
}

void randomize_pairs(Row& r, Rng& rng) {
  const int idx[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int p = 0; p < 3; ++p) {
    double x = r.gamma[static_cast<std::size_t>(idx[p][0])], y = r.gamma[static_cast<std::size_t>(idx[p][1])];
    if (uniform01(rng) < 0.5) std::swap(x, y);
    r.pairs[static_cast<std::size_t>(2 * p)] = x;
    r.pairs[static_cast<std::size_t>(2 * p + 1)] = y;
  }
}

std::string tau_fields(const TauStats& t) {
  return num(t.tau1) + ',' + num(t.tau2) + ',' + (t.tau3 ? num(*t.tau3) : std::string("nan")) + ',' + num(t.tau4) +
         ',' + num(t.tau5) + ',' + num(t.tau6) + ',' + num(t.fa) + ',' + num(t.ra) + ',' + num(t.vr);
}

Row compute_row(const McConfig& cfg, const Setup& s, std::size_t index) {
  Rng rng = make_rng(cfg.seed, index);
  Row r;
  if (s.kind == "power") {
    const std::size_t alt = index / cfg.n;
    r.alt = static_cast<int>(alt);
    const SymMat d = s.alternatives[alt](rng);
    const SpectralDecomp sd = spectral_decompose(d);
    r.tau = tau_statistics(sd.gamma, s.a, s.kappa1_ref);
    r.reject = chi2_sf(r.tau.tau2, 5.0) < cfg.level;
    r.line = std::to_string(index) + ',' + num(s.fa_true[alt]) + ',' + num(r.tau.tau2) + ',' + (r.reject ? "1" : "0");
    return r;
  }
  Vec gamma;
  if (s.kind == "gaussian") {
    const SpectralDecomp sd = spectral_decompose((*s.sampler)(rng));
    gamma = sd.gamma;
    r.vectors = sd.O;
  } else {
    const RicianDataset ds = simulate_dataset(s.scheme, s.d_true, cfg.rho, cfg.eta2, rng);
    const TensorFit fit = mle_fit(ds, s.fit);
    r.dhat = fit.d_hat.vec();
    r.converged = fit.converged;
    const SpectralDecomp sd = spectral_decompose(fit.d_hat);
    gamma = sd.gamma;
    r.vectors = sd.O;
  }
  for (int i = 0; i < 3; ++i) r.gamma[static_cast<std::size_t>(i)] = gamma[i];
  r.tau = tau_statistics(gamma, s.a, s.kappa1_ref);
  randomize_pairs(r, rng);
  std::string line = std::to_string(index) + ',' + num(gamma[0]) + ',' + num(gamma[1]) + ',' + num(gamma[2]) + ',' +
                     tau_fields(r.tau);
  if (s.kind == "rician") {
    for (int k = 0; k < 6; ++k) line += ',' + num(r.dhat[k]);
    line += std::string(",") + (r.converged ? "1" : "0");
  }
  r.line = std::move(line);
  return r;
}

struct GammaAcc {
  std::size_t n = 0;
  double sx = 0.0, slx = 0.0;
  void add(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) return;
    ++n;
    sx += x;
    slx += std::log(x);
  }
  nlohmann::json fit() const {
    try {
      const GammaFit g = gamma_fit_sufficient(n, sx, slx);
      return {{"shape", g.shape}, {"scale", g.scale}, {"n", n}};
    } catch (const InvalidArgument& e) {
      return {{"error", e.what()}, {"n", n}};
    }
  }
};

struct Accumulators {
  explicit Accumulators(const Setup& s) : dhat_cov(6) {
    lambda_scale = std::sqrt(6.0 + 9.0 * s.lambda_rel);
  }
  double lambda_scale;
  GammaAcc g2, g5, g6;
  PitHistogram pit2, pit5, pit3, pit3abs, pit1;
  RunningCov tau23{2};
  std::array<std::uint64_t, 20> tau3_hist{};
  std::uint64_t small_gap = 0, rows = 0, nonconverged = 0;
  RunningCov dhat_cov;
  std::vector<std::uint64_t> rejects, alt_rows;

  // plot data (first rows only)
  std::vector<double> pair_x[3], pair_y[3], bary, tau2, tau3, tau5;
  std::vector<std::array<double, 9>> eigvecs;

  void add(const McConfig& cfg, const Row& r, std::size_t index) {
    ++rows;
    if (cfg.experiment == "power") {
      const auto alt = static_cast<std::size_t>(r.alt);
      if (rejects.size() <= alt) {
        rejects.resize(alt + 1, 0);
        alt_rows.resize(alt + 1, 0);
      }
      ++alt_rows[alt];
      if (r.reject) ++rejects[alt];
      return;
    }
    const TauStats& t = r.tau;
    g2.add(t.tau2);
    g5.add(t.tau5);
    g6.add(t.tau6);
    pit2.add(chi2_cdf(t.tau2, 5.0));
    if (std::isfinite(t.tau5)) pit5.add(chi2_cdf(t.tau5, 5.0));
    pit1.add(normal_cdf(t.tau1 * lambda_scale));
    if (t.tau3) {
      const double u = *t.tau3;
      pit3.add(0.5 * (u + 1.0));
      pit3abs.add(std::abs(u));
      tau23.add(Eigen::Vector2d(t.tau2, u));
      const auto b = std::min<std::size_t>(19, static_cast<std::size_t>((u + 1.0) * 10.0));
      ++tau3_hist[b];
    }
    if (std::abs(r.gamma[0] - r.gamma[1]) < 0.05 || std::abs(r.gamma[1] - r.gamma[2]) < 0.05) ++small_gap;
    if (cfg.experiment == "rician") {
      dhat_cov.add(r.dhat);
      if (!r.converged) ++nonconverged;
    }
    if (index < cfg.figure_points) {
      for (int p = 0; p < 3; ++p) {
        pair_x[p].push_back(r.pairs[static_cast<std::size_t>(2 * p)]);
        pair_y[p].push_back(r.pairs[static_cast<std::size_t>(2 * p + 1)]);
      }
      bary.push_back((r.gamma[0] + r.gamma[1] + r.gamma[2]) / 3.0);
      tau2.push_back(t.tau2);
      tau3.push_back(t.tau3 ? *t.tau3 : std::nan(""));
      tau5.push_back(t.tau5);
    }
    if (cfg.experiment == "gaussian" && index < cfg.eigvec_points) {
      std::array<double, 9> v{};
      for (int c = 0; c < 3; ++c)
        for (int k = 0; k < 3; ++k) v[static_cast<std::size_t>(3 * c + k)] = r.vectors(k, c);
      eigvecs.push_back(v);
    }
  }
};

nlohmann::json ks_json(const PitHistogram& h) {
  if (h.count() == 0) return nullptr;
  const KsResult k = h.ks();
  return {{"D", k.d}, {"p", k.p}, {"n", h.count()}};
}

// Least-squares slope of the tau3 histogram density against bin centres.
double tau3_trend(const std::array<std::uint64_t, 20>& hist) {
  double total = 0.0;
  for (auto c : hist) total += static_cast<double>(c);
  if (total == 0.0) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const double x = -1.0 + 0.1 * (static_cast<double>(i) + 0.5);
    const double y = static_cast<double>(hist[i]) / (total * 0.1);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(hist.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return g;
}

void tau_histogram_plot(const std::string& path, const std::string& title, const std::vector<double>& values,
                        const GammaAcc& acc) {
  SvgPlot p(title, "value", "density");
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  if (v.empty()) {
    p.save(path);
    return;
  }
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const double hi = std::max(20.0, sorted[static_cast<std::size_t>(0.995 * static_cast<double>(sorted.size() - 1))]);
  p.set_xrange(0.0, hi);
  p.histogram(v);
  const auto xs = grid(1e-3, hi, 300);
  std::vector<double> chi(xs.size()), gam(xs.size());
  const boost::math::chi_squared_distribution<double> c5(5.0);
  for (std::size_t i = 0; i < xs.size(); ++i) chi[i] = boost::math::pdf(c5, xs[i]);
  p.line(xs, chi, "#c44e52", "chi2(5)");
  if (acc.n >= 100) {
    try {
      const GammaFit g = gamma_fit_sufficient(acc.n, acc.sx, acc.slx);
      const boost::math::gamma_distribution<double> gd(g.shape, g.scale);
      for (std::size_t i = 0; i < xs.size(); ++i) gam[i] = boost::math::pdf(gd, xs[i]);
      p.line(xs, gam, "#55a868", "gamma fit");
    } catch (const InvalidArgument&) {
    }
  }
  p.save(path);
}

}  // namespace

McReport run_mc(const McConfig& cfg) {
  cfg.validate();
  McReport rep;
  rep.output_dir = cfg.output;
  const bool created_dir = !fs::exists(cfg.output);
  fs::create_directories(cfg.output);
  auto out_path = [&](const std::string& name) {
    const std::string p = (fs::path(cfg.output) / name).string();
    rep.files.push_back(p);
    return p;
  };

  try {
    const Setup setup = make_setup(cfg);
    const std::size_t total = cfg.experiment == "power" ? cfg.n * cfg.fa_grid.size() : cfg.n;
    Accumulators acc(setup);

    std::ofstream csv(out_path("replications.csv"));
    if (!csv) throw DataError("cannot write replications.csv in " + cfg.output);
    if (cfg.experiment == "power") {
      csv << "index,fa,tau2,reject\n";
    } else {
      csv << "index,gamma1,gamma2,gamma3,tau1,tau2,tau3,tau4,tau5,tau6,fa,ra,vr";
      if (cfg.experiment == "rician") csv << ",d11,d22,d33,d12,d13,d23,converged";
      csv << '\n';
    }

    const auto workers = static_cast<std::size_t>(cfg.workers);
    std::vector<Row> buffer;
    for (std::size_t start = 0; start < total; start += cfg.chunk) {
      const std::size_t len = std::min(cfg.chunk, total - start);
      buffer.assign(len, Row{});
      std::vector<std::exception_ptr> errors(workers);
      auto work = [&](std::size_t w) {
        try {
          for (std::size_t i = w; i < len; i += workers) buffer[i] = compute_row(cfg, setup, start + i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      };
      if (workers == 1) {
        work(0);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
      }
      for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
      for (std::size_t i = 0; i < len; ++i) {
        csv << buffer[i].line << '\n';
        acc.add(cfg, buffer[i], start + i);
      }
    }
    csv.close();

    nlohmann::json summary;
    summary["experiment"] = cfg.experiment;
    summary["n"] = cfg.n;
    summary["seed"] = cfg.seed;
    summary["rows"] = acc.rows;
    if (cfg.experiment == "power") {
      nlohmann::json alts = nlohmann::json::array();
      bool monotone = true;
      double prev = -1.0;
      for (std::size_t a = 0; a < acc.rejects.size(); ++a) {
        const double rate = static_cast<double>(acc.rejects[a]) / static_cast<double>(acc.alt_rows[a]);
        // allow for Monte Carlo noise of two standard errors
        const double se = std::sqrt(std::max(rate * (1 - rate), 1e-12) / static_cast<double>(acc.alt_rows[a]));
        if (rate + 2.0 * se < prev) monotone = false;
        prev = std::max(prev, rate);
        alts.push_back({{"fa", setup.fa_true[a]}, {"rejection_rate", rate}, {"n", acc.alt_rows[a]}});
      }
      summary["alternatives"] = alts;
      summary["level"] = cfg.level;
      summary["nondecreasing_within_2se"] = monotone;
      SvgPlot p("tau2 rejection rate, prolate alternatives", "FA", "rejection rate");
      std::vector<double> xs, ys;
      for (const auto& a : alts) {
        xs.push_back(a["fa"].get<double>());
        ys.push_back(a["rejection_rate"].get<double>());
      }
      p.set_yrange(0.0, 1.0);
      p.line(xs, ys, "#4c72b0", "tau2");
      p.scatter(xs, ys, "#4c72b0", 3.0);
      p.save(out_path("fig_power.svg"));
    } else {
      summary["a"] = setup.a;
      summary["lambda_relative"] = setup.lambda_rel;
      summary["gamma_fit"] = {{"tau2", acc.g2.fit()}, {"tau5", acc.g5.fit()}, {"tau6", acc.g6.fit()}};
      summary["ks"] = {{"tau2_vs_chi2_5", ks_json(acc.pit2)},
                       {"tau5_vs_chi2_5", ks_json(acc.pit5)},
                       {"tau3_vs_uniform_pm1", ks_json(acc.pit3)},
                       {"abs_tau3_vs_uniform01", ks_json(acc.pit3abs)},
                       {"tau1_vs_normal", ks_json(acc.pit1)}};
      if (acc.tau23.count() >= 2) {
        const Mat c = acc.tau23.cov();
        summary["corr_tau2_tau3"] = c(0, 1) / std::sqrt(c(0, 0) * c(1, 1));
      }
      summary["tau3_trend_slope"] = tau3_trend(acc.tau3_hist);
      summary["small_gap_fraction"] = static_cast<double>(acc.small_gap) / static_cast<double>(acc.rows);
      if (cfg.experiment == "rician") {
        summary["scheme"] = setup.scheme.name;
        summary["acquisitions"] = setup.scheme.total();
        summary["fisher_isotropic"] = setup.fisher_isotropic;
        summary["fisher_rel_residual"] = setup.iso_residual;
        summary["nonconverged"] = acc.nonconverged;
        summary["estimate_rho"] = cfg.estimate_rho;
        const Mat c = acc.dhat_cov.cov();
        nlohmann::json cov = nlohmann::json::array();
        for (int i = 0; i < 6; ++i) {
          std::vector<double> row(6);
          for (int j = 0; j < 6; ++j) row[static_cast<std::size_t>(j)] = c(i, j);
          cov.push_back(row);
        }
        summary["dhat_covariance"] = cov;
        const Vec m = acc.dhat_cov.mean();
        summary["dhat_mean"] = std::vector<double>(m.data(), m.data() + 6);
      }

      tau_histogram_plot(out_path("fig_tau2.svg"), "tau2", acc.tau2, acc.g2);
      tau_histogram_plot(out_path("fig_tau5.svg"), "tau5", acc.tau5, acc.g5);
      {
        SvgPlot p("|tau3|", "|tau3|", "density");
        std::vector<double> a;
        for (double x : acc.tau3)
          if (std::isfinite(x)) a.push_back(std::abs(x));
        p.set_xrange(0.0, 1.0);
        p.histogram(a, 20);
        p.line({0.0, 1.0}, {1.0, 1.0}, "#c44e52", "uniform");
        p.save(out_path("fig_tau3.svg"));
      }
      {
        SvgPlot p("tau3 against tau2", "tau2", "tau3");
        p.scatter(acc.tau2, acc.tau3, "#4c72b0", 1.2);
        p.save(out_path("fig_tau_scatter.svg"));
      }
      if (cfg.experiment == "gaussian") {
        SvgPlot sc("eigenvalue pairs, random order within each pair", "eigenvalue", "eigenvalue");
        const char* colors[3] = {"#4c72b0", "#55a868", "#c44e52"};
        for (int p = 0; p < 3; ++p) sc.scatter(acc.pair_x[p], acc.pair_y[p], colors[p], 1.0);
        sc.save(out_path("fig_eigs_scatter.svg"));

        SvgPlot b("eigenvalue barycenter", "mean eigenvalue", "density");
        b.histogram(acc.bary);
        const double centre = (cfg.gbar[0] + cfg.gbar[1] + cfg.gbar[2]) / 3.0;
        const double sd = 1.0 / std::sqrt(6.0 * cfg.mu + 9.0 * cfg.lambda);
        const auto xs = grid(centre - 4.5 * sd, centre + 4.5 * sd, 200);
        std::vector<double> ys;
        for (double x : xs) ys.push_back(std::exp(-0.5 * (x - centre) * (x - centre) / (sd * sd)) / (sd * std::sqrt(2 * std::numbers::pi)));
        b.line(xs, ys, "#c44e52", "Gaussian limit");
        b.save(out_path("fig_barycenter.svg"));

        std::ofstream ev(out_path("eigvecs.csv"));
        ev << "index,vector,x,y,z\n";
        SvgPlot sp("eigenvectors, orthographic view from +z", "x", "y", 480, 480);
        sp.set_xrange(-1.0, 1.0);
        sp.set_yrange(-1.0, 1.0);
        std::vector<double> px[3], py[3];
        for (std::size_t i = 0; i < acc.eigvecs.size(); ++i) {
          for (int c = 0; c < 3; ++c) {
            Vec3 v(acc.eigvecs[i][static_cast<std::size_t>(3 * c)], acc.eigvecs[i][static_cast<std::size_t>(3 * c + 1)],
                   acc.eigvecs[i][static_cast<std::size_t>(3 * c + 2)]);
            ev << i << ',' << c + 1 << ',' << num(v[0]) << ',' << num(v[1]) << ',' << num(v[2]) << '\n';
            if (v[2] < 0) v = -v;  // axes, not directions
            px[c].push_back(v[0]);
            py[c].push_back(v[1]);
          }
        }
        for (int c = 0; c < 3; ++c) sp.scatter(px[c], py[c], colors[c], 2.0);
        std::vector<double> cx, cy;
        for (int k = 0; k <= 180; ++k) {
          cx.push_back(std::cos(2 * std::numbers::pi * k / 180));
          cy.push_back(std::sin(2 * std::numbers::pi * k / 180));
        }
        sp.line(cx, cy, "#333333");
        sp.save(out_path("fig_eigvec.svg"));
      }
    }
    const std::string text = summary.dump(2);
    std::ofstream js(out_path("summary.json"));
    js << text << '\n';
    rep.summary_json = text;
  } catch (...) {
    std::error_code ec;
    for (const auto& f : rep.files) fs::remove(f, ec);
    if (created_dir) fs::remove(cfg.output, ec);
    throw;
  }
  return rep;
}

}  // namespace isomat
