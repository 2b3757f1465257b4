#pragma once

// Quadrature rules. Cumulative and composite trapezoid for sampled data,
// adaptive Simpson for callables (used by the spectral module and by oracle
// code in the test suites).

#include <functional>
#include <span>
#include <vector>

namespace qhydro {

double trapezoid(std::span<const double> f, double h);

// Trapezoid on possibly non-uniform abscissae.
double trapezoid(std::span<const double> x, std::span<const double> f);

// Running trapezoid integral; out[0] = 0, out[k] = integral up to sample k.
std::vector<double> cumulative_trapezoid(std::span<const double> f, double h);

// Error-controlled recursive Simpson. `tol` is an absolute tolerance on the
// whole interval; depth is capped to keep pathological integrands finite.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 48);

}  // namespace qhydro
