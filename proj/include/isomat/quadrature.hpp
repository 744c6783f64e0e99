#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace isomat {

struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss-Legendre on [-1, 1].  Tables are built once per order and shared.
std::shared_ptr<const QuadRule> gauss_legendre(int n);

// Gauss-Hermite for weight exp(-x^2) on the real line.
std::shared_ptr<const QuadRule> gauss_hermite(int n);

// Adaptive Simpson with Richardson correction.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth = 50);

// Adaptive Gauss-Kronrod (15-point) on [a, b]; b may be +inf.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, double* error_estimate = nullptr);

}  // namespace isomat
