#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace isomat {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Bad caller input: malformed dimensions, parameters outside their domain.
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A computation that could not produce a trustworthy number.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Missing or corrupted bundled data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

// Independent generator for (master seed, stream index).  Streams are mixed
// through splitmix64 before seeding so neighbouring indices do not produce
// correlated mt19937 states.
Rng make_rng(std::uint64_t master_seed, std::uint64_t stream);

inline double std_normal(Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  return n01(rng);
}

inline double uniform01(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng);
}

inline double chi2_draw(Rng& rng, double dof) {
  std::chi_squared_distribution<double> c(dof);
  return c(rng);
}

}  // namespace isomat
