// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <fmt/core.h>

#include "lpoco/bandit.hpp"
#include "lpoco/estimators.hpp"
#include "lpoco/experiment.hpp"
#include "lpoco/offline.hpp"
#include "lpoco/predictive.hpp"
#include "lpoco/problem.hpp"
#include "lpoco/smoothing.hpp"
#include "lpoco/zeroth_order.hpp"

using namespace lpoco;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double density(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

template <typename F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Moments of N(0,1) restricted to [-b, b], by quadrature.
double truncated_moment(double b, int power) {
  const double mass = simpson(density, -b, b);
  return simpson([power](double x) { return std::pow(x, power) * density(x); }, -b, b) / mass;
}

// ---------------------------------------------------------------------------------------------

Outcome figure2() {
  const auto start = Clock::now();
  ExperimentConfig c = ExperimentConfig::defaults_for("fig2");
  c.horizons = {20};
  c.windows = parse_sweep("2:12");
  c.trials = 50;
  c.dists = {DistChoice::parse("truncated-interval:-2:2")};
  c.feedbacks = {Feedback::TwoPoint};
  c.workers = workers();
  const auto rows = run_fig2(c);
  const auto fits = fit_fig2(c, rows);
  const double secs = seconds_since(start);
  if (fits.size() != 1) return {false, "expected one fitted series"};
  const LinearFit f = fits.front().fit;
  const bool ok = f.slope < 0.0 && f.r2 >= 0.8 && secs <= 120.0;
  return {ok, fmt::format("slope {:.4f}, R2 {:.4f}, {} trials x {} windows, {:.1f} s (limit 120 s)", f.slope, f.r2,
                          *c.trials, c.windows.size(), secs)};
}

Outcome figure1() {
  const auto start = Clock::now();
  ExperimentConfig c = ExperimentConfig::defaults_for("fig1");
  c.horizons = parse_sweep("5:20");
  c.trials = 50;
  c.dists = {DistChoice::parse("truncated-interval:-2:2")};
  c.feedbacks = {Feedback::TwoPoint};
  c.workers = workers();
  const auto rows = run_fig1(c);
  const double secs = seconds_since(start);
  int inversions = 0;
  std::string series;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double per_step = rows[i].mean_reg / static_cast<double>(rows[i].horizon);
    if (i > 0 && per_step > rows[i - 1].mean_reg / static_cast<double>(rows[i - 1].horizon)) ++inversions;
    if (i % 5 == 0) series += fmt::format(" T={}:{:.4f}", rows[i].horizon, per_step);
  }
  const bool ok = rows.size() == 16 && inversions <= 1 && secs <= 60.0;
  return {ok, fmt::format("{} inversion(s) in Reg/T over T=5..20;{}; {:.1f} s (limit 60 s)", inversions, series, secs)};
}

Outcome orderings() {
  ExperimentConfig c = ExperimentConfig::defaults_for("fig1");
  c.workers = workers();
  const long horizon = 20, trials = 200;
  const DistChoice truncated = DistChoice::parse("truncated-interval:-2:2");
  const DistChoice gaussian = DistChoice::parse("gaussian");
  double m[2][2];  // [dist][feedback]
  const DistChoice dists[2] = {truncated, gaussian};
  const Feedback fbs[2] = {Feedback::TwoPoint, Feedback::SinglePoint};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const auto r = initialization_regrets(c, horizon, dists[i], fbs[j], trials);
      m[i][j] = mean(r);
    }
  const bool two_better = m[0][0] <= m[0][1] && m[1][0] <= m[1][1];
  const bool truncated_better = m[0][0] <= m[1][0] && m[0][1] <= m[1][1];
  return {two_better && truncated_better,
          fmt::format("T=20, {} paired trials: truncated two {:.4f} one {:.4f}; gaussian two {:.4f} one {:.4f}",
                      trials, m[0][0], m[0][1], m[1][0], m[1][1])};
}

struct RandomQuadratic {
  Matrix a;
  Vector b;
  double operator()(const Vector& x) const { return 0.5 * x.dot(a * x) + b.dot(x); }
  Vector grad(const Vector& x) const { return a * x + b; }
};

RandomQuadratic random_quadratic(Rng& rng, int n) {
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform(-1.0, 1.0);
  RandomQuadratic q{0.5 * (g + g.transpose()), Vector(n)};
  for (int i = 0; i < n; ++i) q.b(i) = rng.uniform(-1.0, 1.0);
  return q;
}

Outcome estimator() {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 6;
    const RandomQuadratic q = random_quadratic(rng, n);
    Vector x(n), u(n);
    for (int i = 0; i < n; ++i) {
      x(i) = rng.uniform(-2.0, 2.0);
      u(i) = rng.uniform(-1.0, 1.0);
    }
    const double delta = rng.uniform(1e-3, 1.0);
    const Vector est = two_point(q(x + delta * u), q(x - delta * u), delta, u);
    const Vector exact = u * u.dot(q.grad(x));
    worst = std::max(worst, (est - exact).norm() / std::max(exact.norm(), 1e-300));
  }

  const int dim = 3;
  const SmoothingSpec s = SmoothingSpec::truncated_paper(dim, 2);
  const double sigma2 = truncated_moment(s.upper(), 2);
  const RandomQuadratic q = random_quadratic(rng, dim);
  Vector x(dim);
  x << 0.3, -0.8, 1.2;
  const Vector target = sigma2 * q.grad(x);
  const int n = 1000000;
  Vector sum = Vector::Zero(dim), sq = Vector::Zero(dim);
  Rng draws(77);
  for (int i = 0; i < n; ++i) {
    const Vector u = s.sample(draws);
    const Vector g = two_point(q(x + 0.2 * u), q(x - 0.2 * u), 0.2, u);
    sum += g;
    sq += g.cwiseProduct(g);
  }
  double worst_z = 0.0;
  for (int c = 0; c < dim; ++c) {
    const double m = sum(c) / n;
    const double se = std::sqrt((sq(c) / n - m * m) / n);
    worst_z = std::max(worst_z, std::abs(m - target(c)) / se);
  }
  return {worst <= 1e-10 && worst_z <= 4.0,
          fmt::format("max relative error {:.2e} over 100 quadratics; Monte Carlo max |z| = {:.2f} over 1e6 draws",
                      worst, worst_z)};
}

Outcome smoothing_gap() {
  // f^c(x) = f(x, ..., x) = 1/2 x^T (E^T A E) x + (E^T b)^T x with E the stacked identity, so for
  // zero-mean v with iid coordinates of variance s2, E f^c(x + delta v) - f^c(x) = delta^2/2 s2 tr(E^T A E).
  Rng rng(55);
  long violations = 0, checks = 0;
  double worst_ratio = 0.0, worst_mc_z = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    const int h = 2 + inst % 2, d = 1 + inst % 3;
    const double beta = 10.0;
    const QuadraticMemoryProblem p = generate_quadratic(100 + inst, 5, h, d, 1.0, beta);
    const SmoothingSpec spec = SmoothingSpec::truncated_paper(d, h);
    const double s2 = truncated_moment(spec.upper(), 2);
    for (long t = 1; t <= 5; ++t) {
      Matrix e = Matrix::Zero(d * h, d);
      for (int k = 0; k < h; ++k) e.block(k * d, 0, d, d) = Matrix::Identity(d, d);
      const Matrix ac = e.transpose() * p.hessian(t) * e;
      const auto fc = [&](const Vector& x) { return p.value(t, e * x); };
      for (int i = 0; i < 20; ++i) {
        Vector x(d);
        for (int c = 0; c < d; ++c) x(c) = rng.uniform(-2.0, 2.0);
        const double delta = rng.uniform(1e-3, 1.0);
        const double smoothed = fc(x) + 0.5 * delta * delta * s2 * ac.trace();
        const double gap = std::abs(fc(x) - smoothed);
        const double bound = 0.5 * delta * delta * beta * d;
        ++checks;
        if (gap > bound) ++violations;
        worst_ratio = std::max(worst_ratio, gap / bound);
        if (i == 0 && t == 1) {
          // Monte Carlo check of the closed form itself.
          Rng draws(static_cast<std::uint64_t>(inst));
          const int n = 200000;
          double sum = 0.0, sqs = 0.0;
          for (int k = 0; k < n; ++k) {
            const double v = fc(x + delta * spec.sample(draws));
            sum += v;
            sqs += v * v;
          }
          const double m = sum / n;
          const double se = std::sqrt(std::max(sqs / n - m * m, 0.0) / n);
          worst_mc_z = std::max(worst_mc_z, std::abs(m - smoothed) / std::max(se, 1e-300));
        }
      }
    }
  }
  return {violations == 0 && checks == 1000 && worst_mc_z <= 4.0,
          fmt::format("{} violations in {} (x, delta) pairs, max gap/bound {:.3f}; closed form vs Monte Carlo max |z| "
                      "{:.2f}",
                      violations, checks, worst_ratio, worst_mc_z)};
}

Outcome contraction() {
  const auto start = Clock::now();
  ExperimentConfig c = ExperimentConfig::defaults_for("zo-compare");
  c.workers = workers();
  const ZoCompareSummary s = run_zo_compare(c);
  const double secs = seconds_since(start);
  const double gamma = 1.0 / 7.0;
  const double limit = 1.0 / (1.0 + gamma) + 0.05;
  const bool ok = std::abs(s.gamma - gamma) <= 1e-12 && s.paper_mean <= limit && s.nesterov_mean > s.paper_mean &&
                  secs <= 30.0;
  return {ok, fmt::format("truncated mean ratio {:.4f} (limit {:.4f}), Nesterov-Gaussian {:.4f}, {} trials, K={}, "
                          "{:.1f} s (limit 30 s)",
                          s.paper_mean, limit, s.nesterov_mean, *c.trials, c.levels, secs)};
}

Outcome offline_oracle() {
  double worst_cert = 0.0, worst_self = 0.0;
  for (int i = 0; i < 20; ++i) {
    QuadraticSpec q;
    q.seed = 40 + i;
    q.horizon = 30;
    q.memory = 1 + i % 3;
    q.dim = 1 + i % 2;
    const ProblemInstance p = q.build();
    const OfflineSolution s = solve_offline(p);
    const QuadraticAssembly a = assemble_quadratic(p);
    const Vector x = stack(s.x);
    worst_cert = std::max(worst_cert, (a.p.multiply(x) + a.q).norm() / (1e-8 * (1 + a.q.norm())));
    worst_self = std::max(worst_self, std::abs(dynamic_regret(s.x, p, s.x)));
  }

  // Grid search on [-2, 2]^4: step 0.1 everywhere, then steps 0.01 and 1e-3 around the best cell.
  QuadraticSpec q;
  q.seed = 5;
  q.horizon = 4;
  q.memory = 2;
  const ProblemInstance p = q.build();
  const OfflineSolution s = solve_offline(p);
  const Vector xs = stack(s.x);
  Vector best = Vector::Zero(4), center = Vector::Zero(4), y(4);
  double best_cost = std::numeric_limits<double>::infinity(), half = 2.0;
  for (double step : {0.1, 0.01, 1e-3}) {
    const int n = static_cast<int>(std::lround(2 * half / step));
    const Vector lo = center.array() - half;
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b)
        for (int c = 0; c <= n; ++c)
          for (int d = 0; d <= n; ++d) {
            y << lo(0) + a * step, lo(1) + b * step, lo(2) + c * step, lo(3) + d * step;
            const double v = p.total_cost(unstack(y, 1));
            if (v < best_cost) {
              best_cost = v;
              best = y;
            }
          }
    center = best;
    half = step;
  }
  const double grid_error = (best - xs).cwiseAbs().maxCoeff();
  const bool inside = xs.cwiseAbs().maxCoeff() < 2.0;
  const bool ok = worst_cert <= 1.0 && worst_self <= 1e-8 && inside && grid_error <= 1e-3 &&
                  s.c_star <= best_cost + 1e-12;
  return {ok, fmt::format("certificate residual/limit max {:.2e} on 20 instances, |regret(x*)| max {:.1e}; "
                          "grid (res 1e-3) vs banded max coordinate gap {:.1e}, C* {:.9f} vs grid {:.9f}",
                          worst_cert, worst_self, grid_error, s.c_star, best_cost)};
}

Outcome samplers() {
  const SmoothingSpec s = SmoothingSpec::truncated_paper(1, 2);
  const double bound = std::pow(2.0 * (2 * 2 - 1), -0.25);  // (2(2h - 1))^{-1/4} with h = 2, d = 1
  const int n = 1000000;
  Rng rng(31);
  long outside = 0;
  double sum2 = 0.0, sum4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.sample(rng)(0);
    if (std::abs(u) > bound) ++outside;
    sum2 += u * u;
    sum4 += u * u * u * u;
  }
  const double m2 = truncated_moment(bound, 2), m4 = truncated_moment(bound, 4);
  const double se = std::sqrt((m4 - m2 * m2) / n);
  const double z = std::abs(sum2 / n - m2) / se;

  Rng prng(12);
  long violations = 0;
  for (int d : {1, 3}) {
    const FeasibleSet sets[] = {FeasibleSet::box(d, -1.0, 0.5), FeasibleSet::ball(Vector::Constant(d, 0.2), 1.3)};
    for (const FeasibleSet& set : sets)
      for (int i = 0; i < 2500; ++i) {
        Vector a(d), bp(d);
        for (int c = 0; c < d; ++c) {
          a(c) = prng.uniform(-4.0, 4.0);
          bp(c) = prng.uniform(-4.0, 4.0);
        }
        a = set.project(a);
        const Vector b = set.project(bp);
        // For a in X and b = Pi(b'): ||a - b||^2 + ||b - b'||^2 <= ||a - b'||^2.
        if ((a - b).squaredNorm() + (b - bp).squaredNorm() > (a - bp).squaredNorm() + 1e-10) ++violations;
      }
  }
  const bool ok = outside == 0 && z <= 4.0 && violations == 0;
  return {ok, fmt::format("{} of 1e6 draws outside {:.6f}; sigma2 {:.6f} vs quadrature {:.6f} (|z| = {:.2f}); "
                          "{} Pythagorean violations in 1e4 box/ball pairs",
                          outside, bound, sum2 / n, m2, z, violations)};
}

std::uint64_t replay_events(long horizon, long window, int h) {
  const long levels = window / (h - 1);
  std::uint64_t init = 0;
  std::set<std::pair<long, long>> needed;
  const auto in = [horizon](long k) { return k >= 1 && k <= horizon; };
  for (long t = 2 - window; t <= horizon; ++t) {
    if (in(t + window - 1)) ++init;
    for (long j = 0; j < levels; ++j) {
      const long s = t + window - (j + 1) * (h - 1) - (window - (h - 1) * levels);
      for (long k = s; k <= s + h - 1; ++k)
        if (in(k)) needed.insert({j, k});
      if (in(s)) needed.insert({j + 1, s});
    }
  }
  return init + needed.size();
}

Outcome determinism_and_budget() {
  bool identical = true;
  for (const char* cmd : {"fig1", "fig2", "zo-compare"}) {
    ExperimentConfig c = ExperimentConfig::defaults_for(cmd);
    c.trials = 8;
    if (std::string(cmd) == "fig1") c.horizons = {5, 9};
    if (std::string(cmd) == "fig2") {
      c.horizons = {10};
      c.windows = {2, 4, 6};
      c.feedbacks = {Feedback::TwoPoint, Feedback::SinglePoint};
    }
    std::string reference;
    for (int w : {1, 2, 5}) {
      c.workers = w;
      std::ostringstream os;
      run_to_csv(c, os);
      if (reference.empty()) reference = os.str();
      identical = identical && os.str() == reference && !reference.empty();
    }
  }

  long cells = 0, mismatches = 0;
  for (long horizon : {1L, 2L, 5L, 9L, 16L})
    for (int h : {2, 3, 4})
      for (long w = h - 1; w <= 10; ++w)
        for (Feedback fb : {Feedback::TwoPoint, Feedback::SinglePoint}) {
          QuadraticSpec q;
          q.seed = 3;
          q.horizon = horizon;
          q.memory = h;
          q.set.kind = FeasibleSet::Kind::Box;
          q.set.lower = -2.0;
          q.set.upper = 2.0;
          const ProblemInstance p = q.build();
          WindowConfig wc = WindowConfig::experiment_preset(w, 1);
          wc.init.feedback = fb;
          wc.level_feedback = fb;
          const Algorithm1Result r = run_algorithm1(p, wc, 9);
          const std::uint64_t per_event = fb == Feedback::TwoPoint ? 2 : 1;
          ++cells;
          if (r.oracle_queries != per_event * replay_events(horizon, w, h)) ++mismatches;
        }
  return {identical && mismatches == 0,
          fmt::format("CSV bytes identical across workers 1/2/5: {}; query count mismatches {} of {} (T, W, h, "
                      "feedback) cells",
                      identical ? "yes" : "no", mismatches, cells)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"figure 2 log-regret decays linearly in W", figure2},
      {"figure 1 averaged regret declines in T", figure1},
      {"two-point and truncated orderings", orderings},
      {"two-point estimator oracle", estimator},
      {"smoothing gap bound", smoothing_gap},
      {"zeroth-order contraction", contraction},
      {"offline oracle certificate", offline_oracle},
      {"samplers and projection", samplers},
      {"determinism and query budget", determinism_and_budget},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.passed;
    std::cout << fmt::format("{} criterion {}: {} ({})", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first,
                             o.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failures, criteria.size()) << std::endl;
  return failures == 0 ? 0 : 1;
}
