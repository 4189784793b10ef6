#pragma once

#include <functional>

namespace lpoco {

double normal_pdf(double x);
double normal_cdf(double x);

/// Inverse of the standard normal CDF on (0, 1).
///
/// Acklam's rational approximation (relative error ~1e-9) followed by one Halley step
/// against the erfc-based CDF, which brings the absolute error to the level of the CDF itself.
/// Returns -inf / +inf at 0 / 1.
double normal_quantile(double p);

/// Adaptive Simpson quadrature of f over [a, b] to the given absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-13, int max_depth = 48);

}  // namespace lpoco
