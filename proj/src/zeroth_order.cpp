#include "lpoco/zeroth_order.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "lpoco/errors.hpp"
#include "lpoco/estimators.hpp"
#include "lpoco/offline.hpp"

namespace lpoco {

std::string to_string(ZoMode mode) { return mode == ZoMode::Paper ? "paper" : "nesterov_gaussian"; }

double ZOConfig::step_size(const ProblemInstance& problem) const {
  const double beta_prime = problem.constants().beta * problem.memory();
  if (mode == ZoMode::NesterovGaussian) {
    const double n = static_cast<double>(problem.horizon()) * problem.dim();
    return 1.0 / (4.0 * (n + 4.0) * beta_prime);
  }
  return alpha.value_or(1.0 / beta_prime);
}

SmoothingSpec ZOConfig::effective_smoothing(int dim) const {
  if (mode == ZoMode::NesterovGaussian) return SmoothingSpec::standard_gaussian(dim);
  return smoothing;
}

void ZOConfig::validate() const {
  if (alpha && !(*alpha > 0.0)) throw ParameterError("zeroth-order step size must be > 0");
  if (!(delta_prime > 0.0)) throw ParameterError("delta' must be > 0");
  if (iterations < 0) throw ParameterError("iteration count must be >= 0");
}

void to_json(nlohmann::json& j, const ZOConfig& c) {
  j = nlohmann::json{{"alpha", c.alpha ? nlohmann::json(*c.alpha) : nlohmann::json("1/(beta*h)")},
                     {"delta_prime", c.delta_prime},
                     {"K", c.iterations},
                     {"smoothing", c.smoothing},
                     {"mode", to_string(c.mode)}};
}

namespace {

// Window (x_{k-h+1}, ..., x_k) of a stacked decision vector; x_k = x_bar0 for k <= 0.
Vector stacked_window(const Vector& x, const ProblemInstance& problem, long k) {
  const int d = problem.dim();
  const int h = problem.memory();
  Vector w(static_cast<Eigen::Index>(d) * h);
  for (int i = 0; i < h; ++i) {
    const long idx = k - h + 1 + i;
    w.segment(static_cast<Eigen::Index>(i) * d, d) =
        idx <= 0 ? problem.x_bar0() : Vector(x.segment((idx - 1) * d, d));
  }
  return w;
}

}  // namespace

Vector zo_step(const Vector& x, const ProblemInstance& problem, const ZOConfig& config, long j,
               std::uint64_t seed, PredictionOracle& oracle) {
  const int d = problem.dim();
  const int h = problem.memory();
  const long horizon = problem.horizon();
  if (x.size() != static_cast<Eigen::Index>(d) * horizon)
    throw ContractViolation("zo_step: stacked vector has the wrong length");

  const double alpha = config.step_size(problem);
  const SmoothingSpec smoothing = config.effective_smoothing(d);
  Vector g = Vector::Zero(x.size());
  for (long s = 1; s <= horizon; ++s) {
    Rng rng = Rng::derive(seed, {stream::kZoDirection, static_cast<std::uint64_t>(j),
                                 static_cast<std::uint64_t>(s)});
    const Vector u = smoothing.sample(rng);
    Vector block = Vector::Zero(d);
    for (long k = s; k <= std::min(s + h - 1, horizon); ++k) {
      const Eigen::Index slot = static_cast<Eigen::Index>(s - (k - h + 1)) * d;
      Vector plus = stacked_window(x, problem, k);
      Vector minus = plus;
      plus.segment(slot, d) += config.delta_prime * u;
      minus.segment(slot, d) -= config.delta_prime * u;
      block += two_point(oracle.query(k, plus), oracle.query(k, minus), config.delta_prime, u);
    }
    g.segment((s - 1) * d, d) = block;
  }
  return problem.feasible_set().project_blocks(x - alpha * g);
}

double ZODiagnostics::mean_contraction() const {
  if (contraction.empty()) return 0.0;
  double s = 0.0;
  for (double c : contraction) s += c;
  return s / static_cast<double>(contraction.size());
}

std::optional<double> epsilon_floor(const ProblemInstance& problem, double delta_prime) {
  const auto& c = problem.constants();
  if (!std::isfinite(c.diameter) || !std::isfinite(c.lipschitz)) return std::nullopt;
  const double dd = c.diameter;
  const double beta = c.beta;
  const double g = c.lipschitz;
  const double h = problem.memory();
  const double t = static_cast<double>(problem.horizon());
  const double d = problem.dim();
  const double two_h_m1 = 2.0 * h - 1.0;
  const double first = dd * delta_prime * beta * h * std::sqrt(t) /
                       (2.0 * std::sqrt(2.0) * std::pow(2.0 * two_h_m1, 0.75));
  const double second = std::sqrt(h * beta * g * t * delta_prime) * dd * std::pow(t * d + 3.0, 0.75);
  const double third = dd * h * problem.phi_sum() / (delta_prime * std::pow(2.0 * two_h_m1, 0.25));
  return first + second + third;
}

ZOResult zo_minimize(const Vector& x0, const ProblemInstance& problem, const ZOConfig& config,
                     std::uint64_t seed, std::optional<double> c_star) {
  config.validate();
  const double gamma = contraction_gamma(problem.constants().mu, problem.constants().beta,
                                         problem.memory());
  const int d = problem.dim();
  if (config.mode == ZoMode::Paper && config.smoothing.dim() != d)
    throw ParameterError("smoothing dimension does not match the problem");

  ZOResult out;
  ZODiagnostics& diag = out.diagnostics;
  diag.gamma = gamma;
  diag.c_star = c_star ? *c_star : solve_offline(problem).c_star;
  diag.epsilon = epsilon_floor(problem, config.delta_prime);

  PredictionOracle oracle(problem, Rng::derive_seed(seed, {stream::kNoise}));
  Vector x = x0;
  auto record = [&](const Vector& v) {
    const double c = problem.total_cost(unstack(v, d));
    diag.objective.push_back(c);
    diag.gap.push_back(c - diag.c_star);
  };
  record(x);
  for (long j = 0; j < config.iterations; ++j) {
    x = zo_step(x, problem, config, j, seed, oracle);
    record(x);
    const auto n = diag.gap.size();
    diag.contraction.push_back(diag.gap[n - 1] / diag.gap[n - 2]);
  }
  if (diag.epsilon) {
    std::vector<double> curve;
    for (long j = 0; j <= config.iterations; ++j)
      curve.push_back(theorem2_bound(problem.constants().mu, problem.constants().beta,
                                     problem.memory(), j, diag.gap.front(), *diag.epsilon));
    diag.bound_curve = std::move(curve);
  }
  diag.queries = oracle.queries();
  out.x = std::move(x);
  return out;
}

void write_zo_csv(std::ostream& out, const ZODiagnostics& diag) {
  out << "j,objective_gap,contraction_ratio,bound_value\n";
  for (std::size_t j = 0; j < diag.gap.size(); ++j) {
    const std::string ratio = j == 0 ? "" : fmt::format("{:.17g}", diag.contraction[j - 1]);
    const std::string bound = diag.bound_curve ? fmt::format("{:.17g}", (*diag.bound_curve)[j]) : "n/a";
    out << fmt::format("{},{:.17g},{},{}\n", j, diag.gap[j], ratio, bound);
  }
}

}  // namespace lpoco
