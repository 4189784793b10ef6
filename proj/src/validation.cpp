#include "lpoco/validation.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "lpoco/estimators.hpp"
#include "lpoco/normal.hpp"
#include "lpoco/offline.hpp"
#include "lpoco/problem.hpp"
#include "lpoco/rng.hpp"
#include "lpoco/smoothing.hpp"
#include "lpoco/zeroth_order.hpp"

namespace lpoco {

namespace {

constexpr long kDraws = 200000;

PropertyResult sampler_bounds(std::uint64_t seed) {
  const SmoothingSpec spec = SmoothingSpec::truncated_paper(1, 2);
  const double bound = truncation_bound(1, 2);
  Rng rng = Rng::derive(seed, {1});
  long outside = 0;
  for (long i = 0; i < kDraws; ++i)
    if (std::abs(spec.sample(rng)(0)) > bound) ++outside;
  return {"sampler_bounds", outside == 0,
          fmt::format("{} of {} truncated-paper draws outside [-{:.6f}, {:.6f}]", outside, kDraws, bound, bound)};
}

PropertyResult sampler_moment(std::uint64_t seed, const std::optional<double>& kappa_override) {
  SmoothingSpec spec = SmoothingSpec::truncated_paper(1, 2);
  const double b = spec.upper();
  const double true_kappa = spec.kappa();
  const double quadrature =
      integrate([](double x) { return x * x * normal_pdf(x); }, -b, b) / true_kappa;
  if (kappa_override) spec = spec.with_kappa_override(*kappa_override);

  Rng rng = Rng::derive(seed, {2});
  double s = 0.0, s2 = 0.0;
  for (long i = 0; i < kDraws; ++i) {
    const double u = spec.sample(rng)(0);
    s += u * u;
    s2 += u * u * u * u;
  }
  const double n = static_cast<double>(kDraws);
  const double m = s / n;
  const double se = std::sqrt((s2 / n - m * m) / n);
  const double predicted = spec.second_moment();
  const double z = std::abs(m - predicted) / se;
  return {"sampler_moment", z <= 4.0,
          fmt::format("empirical sigma2 {:.8f}, model sigma2 {:.8f}, quadrature sigma2 {:.8f}, |z| = {:.2f}",
                      m, predicted, quadrature, z)};
}

PropertyResult estimator_exactness(std::uint64_t seed) {
  Rng rng = Rng::derive(seed, {3});
  const SmoothingSpec spec = SmoothingSpec::truncated_interval(3, -2.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Matrix g(3, 3);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform(-1.0, 1.0);
    const Matrix a = g.transpose() * g + Matrix::Identity(3, 3);
    Vector b(3), x(3);
    for (int i = 0; i < 3; ++i) {
      b(i) = rng.uniform(-1.0, 1.0);
      x(i) = rng.uniform(-2.0, 2.0);
    }
    const auto f = [&](const Vector& y) { return 0.5 * y.dot(a * y) + b.dot(y); };
    const Vector u = spec.sample(rng);
    const double delta = 0.2;
    const Vector est = two_point(f(x + delta * u), f(x - delta * u), delta, u);
    const Vector exact = u * u.dot(a * x + b);
    worst = std::max(worst, (est - exact).norm() / std::max(1.0, exact.norm()));
  }
  return {"estimator_exactness", worst <= 1e-10,
          fmt::format("max relative error {:.3e} over 50 quadratics", worst)};
}

PropertyResult projection_pythagorean(std::uint64_t seed) {
  Rng rng = Rng::derive(seed, {4});
  const int d = 3;
  const FeasibleSet sets[] = {FeasibleSet::box(d, -1.0, 1.0), FeasibleSet::ball(Vector::Zero(d), 1.0)};
  long violations = 0;
  long checks = 0;
  for (const auto& set : sets) {
    for (int i = 0; i < 5000; ++i) {
      Vector a(d), bp(d);
      for (int k = 0; k < d; ++k) {
        a(k) = rng.uniform(-3.0, 3.0);
        bp(k) = rng.uniform(-3.0, 3.0);
      }
      a = set.project(a);
      if ((set.project(bp) - a).norm() > (bp - a).norm() + 1e-12) ++violations;
      ++checks;
    }
  }
  return {"projection_pythagorean", violations == 0,
          fmt::format("{} violations in {} box/ball pairs", violations, checks)};
}

PropertyResult offline_certificate(std::uint64_t seed) {
  QuadraticSpec q;
  q.seed = seed;
  q.horizon = 50;
  q.memory = 3;
  q.dim = 2;
  const ProblemInstance p = q.build();
  const OfflineSolution sol = solve_offline(p);
  const QuadraticAssembly qa = assemble_quadratic(p);
  const Vector x = stack(sol.x);
  const double residual = (qa.p.multiply(x) + qa.q).norm();
  const double limit = 1e-8 * (1.0 + qa.q.norm());
  const double self_regret = dynamic_regret(sol.x, p, sol.x);
  return {"offline_certificate", residual <= limit && std::abs(self_regret) <= 1e-8,
          fmt::format("||Px* + q|| = {:.3e} (limit {:.3e}), regret(x*) = {:.1e}", residual, limit, self_regret)};
}

PropertyResult zo_fixed_point(std::uint64_t seed) {
  QuadraticSpec q;
  q.seed = seed + 1;
  q.horizon = 10;
  q.memory = 2;
  q.beta = 4.0;
  const ProblemInstance p = q.build();
  const OfflineSolution sol = solve_offline(p);
  const Vector x = stack(sol.x);
  ZOConfig cfg;
  cfg.delta_prime = 1e-4;
  PredictionOracle oracle(p, seed);
  const Vector next = zo_step(x, p, cfg, 0, seed, oracle);
  const double moved = (next - x).norm();
  return {"zo_fixed_point", moved <= 1e-6, fmt::format("||step(x*) - x*|| = {:.3e}", moved)};
}

}  // namespace

std::vector<PropertyResult> run_validation(const ValidationOptions& options) {
  return {sampler_bounds(options.seed),     sampler_moment(options.seed, options.kappa_override),
          estimator_exactness(options.seed), projection_pythagorean(options.seed),
          offline_certificate(options.seed), zo_fixed_point(options.seed)};
}

bool print_validation(std::ostream& out, const std::vector<PropertyResult>& results) {
  bool all = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    all = all && r.passed;
  }
  return all;
}

}  // namespace lpoco
