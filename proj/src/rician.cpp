#include "isomat/rician.hpp"

#include "isomat/kernels.hpp"
#include "isomat/special.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace isomat {

Vec quartic_row(const Vec3& g) {
  Vec q(6);
  q << g[0] * g[0], g[1] * g[1], g[2] * g[2], 2.0 * g[0] * g[1], 2.0 * g[0] * g[2], 2.0 * g[1] * g[2];
  return q;
}

double signal(const Vec3& g, const SymMat& d, double rho) {
  if (d.dim() != 3) throw InvalidArgument("signal: tensor must be 3x3");
  return rho * std::exp(-quartic_row(g).dot(d.vec()));
}

double rician_logpdf(double y, double s, double eta2) {
  if (!(eta2 > 0.0)) throw InvalidArgument("rician_logpdf: eta2 must be positive");
  if (y < 0.0) throw InvalidArgument("rician_logpdf: magnitudes are non-negative");
  if (y == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(y / eta2) - (y * y + s * s) / (2.0 * eta2) + log_bessel_i0(y * std::abs(s) / eta2);
}

double sample_rician(double s, double eta, Rng& rng) {
  const double a = s + eta * std_normal(rng);
  const double b = eta * std_normal(rng);
  return std::hypot(a, b);
}

Mat RicianDataset::q_matrix() const {
  Mat q(static_cast<Eigen::Index>(acq.size()), 6);
  for (std::size_t k = 0; k < acq.size(); ++k)
    q.row(static_cast<Eigen::Index>(k)) = quartic_row(std::sqrt(acq[k].b) * acq[k].u).transpose();
  return q;
}

void RicianDataset::validate() const {
  if (!(eta2 > 0.0)) throw InvalidArgument("dataset: eta2 must be positive");
  if (static_cast<std::size_t>(y.size()) != acq.size()) throw InvalidArgument("dataset: one observation per acquisition");
  for (Eigen::Index k = 0; k < y.size(); ++k)
    if (!(y[k] >= 0.0)) throw InvalidArgument("dataset: observations must be non-negative");
}

RicianDataset simulate_dataset(const GradientScheme& scheme, const SymMat& d, double rho, double eta2, Rng& rng) {
  if (!(rho > 0.0) || !(eta2 > 0.0)) throw InvalidArgument("simulate_dataset: rho and eta2 must be positive");
  RicianDataset ds;
  ds.acq = scheme.acquisitions();
  ds.eta2 = eta2;
  ds.y.resize(static_cast<Eigen::Index>(ds.acq.size()));
  const double eta = std::sqrt(eta2);
  for (std::size_t k = 0; k < ds.acq.size(); ++k) {
    const double s = signal(std::sqrt(ds.acq[k].b) * ds.acq[k].u, d, rho);
    ds.y[static_cast<Eigen::Index>(k)] = sample_rician(s, eta, rng);
  }
  ds.truth = DatasetTruth{rho, d, 0};
  return ds;
}

namespace {

// Signal model S = exp(X theta), theta = (log rho, vec D), X = [1, -Q].
struct Model {
  Mat x;  // M x 7, column major
  Vec y;
  double eta2;

  explicit Model(const RicianDataset& ds) : y(ds.y), eta2(ds.eta2) {
    const Mat q = ds.q_matrix();
    x.resize(q.rows(), 7);
    x.col(0).setOnes();
    x.rightCols(6) = -q;
  }

  Eigen::Index rows() const { return x.rows(); }

  Vec signals(const Vec& theta) const {
    const auto& k = kernels::active();
    const double* cols[7];
    for (int j = 0; j < 7; ++j) cols[j] = x.col(j).data();
    Vec s(rows());
    k.combine_columns(cols, 7, static_cast<std::size_t>(rows()), theta.data(), s.data());
    k.exp_inplace(s.data(), static_cast<std::size_t>(rows()));
    return s;
  }

  double loglik(const Vec& s, double e2) const {
    double ll = 0.0;
    for (Eigen::Index k = 0; k < rows(); ++k) ll += rician_logpdf(y[k], s[k], e2);
    return ll;
  }
};

Vec theta_of(const SymMat& d, double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("rho must be positive");
  if (d.dim() != 3) throw InvalidArgument("tensor must be 3x3");
  Vec t(7);
  t[0] = std::log(rho);
  t.tail(6) = d.vec();
  return t;
}

// dl/dS for every acquisition.
Vec dl_ds(const Model& m, const Vec& s) {
  Vec g(m.rows());
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    const double u = m.y[k] * s[k] / m.eta2;
    g[k] = (-s[k] + m.y[k] * bessel_i1_i0_ratio(u)) / m.eta2;
  }
  return g;
}

}  // namespace

double loglik(const RicianDataset& ds, const SymMat& d, double rho) {
  ds.validate();
  const Model m(ds);
  return m.loglik(m.signals(theta_of(d, rho)), ds.eta2);
}

Vec score(const RicianDataset& ds, const SymMat& d, double rho) {
  ds.validate();
  const Model m(ds);
  const Vec s = m.signals(theta_of(d, rho));
  const Vec g = dl_ds(m, s).cwiseProduct(s);  // dl/dtheta_k contributions
  Vec out(7);
  out.head(6) = m.x.rightCols(6).transpose() * g;
  out[6] = g.sum() / rho;
  return out;
}

Mat observed_information(const RicianDataset& ds, const SymMat& d, double rho) {
  ds.validate();
  const Model m(ds);
  const Vec s = m.signals(theta_of(d, rho));
  Mat j = Mat::Zero(6, 6);
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    const double y2 = m.y[k] * m.y[k] / m.eta2;
    const double r = bessel_i1_i0_ratio(m.y[k] * s[k] / m.eta2);
    const double c = s[k] * s[k] / m.eta2 * (2.0 + y2 * r * r - y2);
    const Vec q = m.x.row(k).tail(6).transpose();
    j.noalias() += c * q * q.transpose();
  }
  return j;
}

TensorInit loglin_init(const RicianDataset& ds) {
  ds.validate();
  const Model m(ds);
  const double floor = 3.0 * std::sqrt(ds.eta2);
  auto solve_rows = [&](double min_y) -> std::optional<Vec> {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < m.rows(); ++k)
      if (m.y[k] > min_y) keep.push_back(k);
    if (keep.size() < 7) return std::nullopt;
    Mat a(static_cast<Eigen::Index>(keep.size()), 7);
    Vec rhs(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
      a.row(static_cast<Eigen::Index>(i)) = m.x.row(keep[i]);
      rhs[static_cast<Eigen::Index>(i)] = std::log(m.y[keep[i]]);
    }
    Eigen::ColPivHouseholderQR<Mat> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < 7) return std::nullopt;
    return Vec(qr.solve(rhs));
  };
  std::optional<Vec> theta = solve_rows(floor);
  if (!theta) theta = solve_rows(0.0);
  if (!theta) throw InvalidArgument("loglin_init: design does not identify the tensor (rank < 7)");
  return TensorInit{SymMat::from_vec(3, theta->tail(6)), std::exp((*theta)[0])};
}

TensorFit mle_fit(const RicianDataset& ds, const FitOptions& opts) {
  ds.validate();
  if (opts.max_outer < 1 || opts.max_inner < 1) throw InvalidArgument("mle_fit: iteration limits must be positive");
  Model m(ds);
  const TensorInit init = loglin_init(ds);
  Vec theta = theta_of(init.d, init.rho);
  if (!opts.estimate_rho) theta[0] = std::log(opts.fixed_rho.value_or(init.rho));
  const int first = opts.estimate_rho ? 0 : 1;
  const int nfree = 7 - first;

  TensorFit fit;
  Vec s = m.signals(theta);
  double ll = m.loglik(s, m.eta2);
  fit.loglik_init = ll;
  if (opts.keep_trace) fit.trace.push_back(ll);
  double lm = opts.lm_init;

  for (int outer = 1; outer <= opts.max_outer; ++outer) {
    // E-step: expected cosine of the latent phase.
    Vec target(m.rows());
    for (Eigen::Index k = 0; k < m.rows(); ++k) target[k] = bessel_i1_i0_ratio(m.y[k] * s[k] / m.eta2) * m.y[k];

    // M-step: sum (S - target)^2 by Levenberg-Marquardt on the exponential model.
    double f = 0.5 * (s - target).squaredNorm();
    for (int inner = 0; inner < opts.max_inner; ++inner) {
      const Mat jac = (m.x.rightCols(nfree).array().colwise() * s.array()).matrix();
      const Mat a = jac.transpose() * jac;
      const Vec g = jac.transpose() * (s - target);
      bool accepted = false;
      double f_new = f;
      for (int tries = 0; tries < 40 && !accepted; ++tries) {
        Mat damped = a;
        damped.diagonal() += lm * a.diagonal();
        const Vec step = damped.ldlt().solve(-g);
        if (!step.allFinite()) {
          lm *= opts.lm_factor;
          continue;
        }
        Vec cand = theta;
        cand.tail(nfree) += step;
        const Vec s_new = m.signals(cand);
        f_new = 0.5 * (s_new - target).squaredNorm();
        if (std::isfinite(f_new) && f_new < f) {
          theta = cand;
          s = s_new;
          accepted = true;
          lm = std::max(lm / opts.lm_factor, 1e-12);
        } else {
          lm *= opts.lm_factor;
        }
      }
      if (!accepted) break;
      const double drop = f - f_new;
      f = f_new;
      if (drop <= 1e-15 * std::max(f, 1e-300)) break;
    }

    if (opts.estimate_eta2) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < m.rows(); ++k)
        acc += m.y[k] * m.y[k] + s[k] * s[k] - 2.0 * target[k] * s[k];
      m.eta2 = acc / (2.0 * static_cast<double>(m.rows()));
    }

    const double ll_new = m.loglik(s, m.eta2);
    if (opts.keep_trace) fit.trace.push_back(ll_new);
    fit.iterations = outer;
    const double change = std::abs(ll_new - ll);
    ll = ll_new;
    if (change <= opts.rel_tol * std::max(1.0, std::abs(ll))) {
      fit.converged = true;
      break;
    }
  }

  // EM creeps once the latent phases settle, so a small likelihood gain does
  // not mean the score vanished.  Finish with Newton steps on the likelihood
  // itself, accepted only when they increase it, and declare convergence on
  // the Newton decrement.
  RicianDataset current = ds;
  current.eta2 = m.eta2;
  auto grad = [&](const Vec& th) {
    const double rho = std::exp(th[0]);
    const Vec sc = score(current, SymMat::from_vec(3, th.tail(6)), rho);
    Vec g(7);
    g[0] = sc[6] * rho;
    g.tail(6) = sc.head(6);
    return Vec(g.tail(nfree));
  };
  fit.converged = false;
  for (int it = 0; it < 50; ++it) {
    const Vec g = grad(theta);
    Mat h(nfree, nfree);
    for (int j = 0; j < nfree; ++j) {
      const double step = 1e-6 * std::max(std::abs(theta[first + j]), j + first == 0 ? 1.0 : 1e-3);
      Vec tp = theta, tm = theta;
      tp[first + j] += step;
      tm[first + j] -= step;
      h.col(j) = -(grad(tp) - grad(tm)) / (2.0 * step);
    }
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::LDLT<Mat> ldlt(h);
    Vec dir = ldlt.solve(g);
    if (ldlt.info() != Eigen::Success || !dir.allFinite() || g.dot(dir) <= 0.0) {
      Mat damped = h;
      damped.diagonal() += 1e-3 * h.diagonal().cwiseAbs();
      dir = damped.ldlt().solve(g);
      if (!dir.allFinite() || g.dot(dir) <= 0.0) break;
    }
    const double decrement = g.dot(dir);
    if (decrement <= 1e-12 * std::max(1.0, std::abs(ll))) {
      fit.converged = true;
      break;
    }
    double t = 1.0;
    bool moved = false;
    for (int half = 0; half < 40; ++half, t *= 0.5) {
      Vec cand = theta;
      cand.tail(nfree) += t * dir;
      const Vec s_new = m.signals(cand);
      const double ll_new = m.loglik(s_new, m.eta2);
      if (std::isfinite(ll_new) && ll_new >= ll) {
        theta = cand;
        s = s_new;
        ll = ll_new;
        moved = true;
        break;
      }
    }
    if (opts.keep_trace) fit.trace.push_back(ll);
    ++fit.iterations;
    if (!moved) {
      // no representable increase along the Newton direction: at the optimum
      fit.converged = decrement <= 1e-8 * std::max(1.0, std::abs(ll));
      break;
    }
  }

  fit.rho_hat = opts.estimate_rho ? std::exp(theta[0]) : opts.fixed_rho.value_or(init.rho);
  fit.d_hat = SymMat::from_vec(3, theta.tail(6));
  fit.eta2_hat = m.eta2;
  if (opts.psd_projection) {
    Eigen::SelfAdjointEigenSolver<Mat> es(fit.d_hat.dense());
    const Mat proj = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
    fit.d_hat = SymMat::from_dense(proj);
    theta.tail(6) = fit.d_hat.vec();
    s = m.signals(theta);
    ll = m.loglik(s, m.eta2);
  }
  fit.loglik = ll;
  return fit;
}

void save_dataset(const std::string& csv_path, const RicianDataset& ds) {
  ds.validate();
  {
    std::ofstream out(csv_path);
    if (!out) throw DataError("cannot write " + csv_path);
    out << "b,ux,uy,uz,Y\n" << std::setprecision(17);
    for (std::size_t k = 0; k < ds.acq.size(); ++k) {
      const auto& a = ds.acq[k];
      out << a.b << ',' << a.u[0] << ',' << a.u[1] << ',' << a.u[2] << ',' << ds.y[static_cast<Eigen::Index>(k)] << '\n';
    }
  }
  nlohmann::json j;
  j["eta2"] = ds.eta2;
  if (ds.truth) {
    j["rho"] = ds.truth->rho;
    const Vec& v = ds.truth->d.vec();
    j["D"] = std::vector<double>(v.data(), v.data() + v.size());
    j["seed"] = ds.truth->seed;
  }
  std::ofstream side(csv_path + ".json");
  if (!side) throw DataError("cannot write " + csv_path + ".json");
  side << std::setw(2) << j << '\n';
}

RicianDataset load_dataset(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw DataError("cannot open dataset " + csv_path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("b,ux,uy,uz,Y", 0) != 0) throw DataError(csv_path + ": expected header b,ux,uy,uz,Y");
  RicianDataset ds;
  std::vector<double> ys;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    double v[5];
    for (double& x : v) {
      if (!std::getline(ss, cell, ',')) throw DataError(csv_path + ": short row");
      try {
        x = std::stod(cell);
      } catch (const std::exception&) {
        throw DataError(csv_path + ": bad number '" + cell + "'");
      }
    }
    ds.acq.push_back({v[0], Vec3(v[1], v[2], v[3])});
    ys.push_back(v[4]);
  }
  ds.y = Eigen::Map<Vec>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  std::ifstream side(csv_path + ".json");
  if (!side) throw DataError("missing sidecar " + csv_path + ".json");
  nlohmann::json j;
  try {
    side >> j;
    ds.eta2 = j.at("eta2").get<double>();
    if (j.contains("rho")) {
      const auto dv = j.at("D").get<std::vector<double>>();
      if (dv.size() != 6) throw DataError("sidecar D must have 6 entries");
      ds.truth = DatasetTruth{j.at("rho").get<double>(), SymMat::from_vec(3, Eigen::Map<const Vec>(dv.data(), 6)),
                              j.value("seed", std::uint64_t{0})};
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(csv_path + ".json: " + e.what());
  }
  ds.validate();
  return ds;
}

}  // namespace isomat
