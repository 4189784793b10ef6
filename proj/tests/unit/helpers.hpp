#pragma once

#include <cmath>
#include <limits>
#include <memory>

#include "lpoco/problem.hpp"

namespace lpoco::testing {

/// f_t(a, b) = 1/2 (a^2 + b^2) for t in [1, T], d = 1, h = 2.
inline ProblemInstance half_square_instance(long horizon, double x_bar0,
                                            FeasibleSet set = FeasibleSet::unconstrained(1)) {
  auto costs = std::make_shared<FunctionCost>(
      1, 2, horizon, [](long, const Vector& w) { return 0.5 * w.squaredNorm(); },
      [](long, const Vector& w) { return Vector(w); });
  ProblemConstants c{1.0, 1.0, std::numeric_limits<double>::infinity(), set.diameter()};
  return ProblemInstance(costs, Vector::Constant(1, x_bar0), std::move(set), NoiseModel{}, c);
}

inline ProblemInstance quadratic_instance(std::uint64_t seed, long horizon, int memory, int dim,
                                          double mu = 1.0, double beta = 10.0,
                                          SetSpec set = SetSpec{}) {
  QuadraticSpec q;
  q.seed = seed;
  q.horizon = horizon;
  q.memory = memory;
  q.dim = dim;
  q.mu = mu;
  q.beta = beta;
  q.set = set;
  return q.build();
}

/// Naive dense evaluation of 1/2 z^T A z + b^T z.
inline double naive_quadratic(const Matrix& a, const Vector& b, const Vector& z) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    for (Eigen::Index j = 0; j < z.size(); ++j) v += 0.5 * z(i) * a(i, j) * z(j);
    v += b(i) * z(i);
  }
  return v;
}

/// Independent standard normal CDF.
inline double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace lpoco::testing
