#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace isomat {

struct McConfig {
  std::string experiment = "gaussian";  // gaussian | rician | power
  std::size_t n = 10000;                // replications (per alternative for power)
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output = "mc_out";
  std::size_t chunk = 512;              // rows computed between ordered merges

  // gaussian and power
  double mu = 0.5;
  double lambda = 0.0;
  std::vector<double> gbar = {15.0, 7.5, 3.0};

  // rician
  std::string design = "design1";  // builtin scheme, or
  std::string design_file;         // gradient table (b,ux,uy,uz)
  double rho = 110.046;
  double eta2 = 64.056;
  double gbar_scalar = 6.622e-4;   // true tensor gbar_scalar * I
  bool estimate_rho = true;

  // power: prolate alternatives with these FA values, mean eigenvalue power_center
  std::vector<double> fa_grid = {0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15};
  double power_center = 1.0;
  double level = 0.05;

  std::size_t figure_points = 20000;  // rows kept for plots
  std::size_t eigvec_points = 200;    // rows whose eigenvectors are exported

  void validate() const;
  // "key = value" lines; '#' starts a comment; strings may be quoted; arrays as [a, b, c].
  static McConfig parse(const std::string& text);
  static McConfig load(const std::string& path);
};

struct McReport {
  std::string output_dir;
  std::vector<std::string> files;
  std::string summary_json;
};

// Runs the study and writes replications.csv, summary.json and fig_*.svg
// (plus eigvecs.csv for the Gaussian study) into cfg.output.  Rows depend only
// on (seed, replication index), so the output does not depend on the worker count.
McReport run_mc(const McConfig& cfg);

}  // namespace isomat
