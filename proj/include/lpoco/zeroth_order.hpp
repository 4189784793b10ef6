#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "lpoco/problem.hpp"
#include "lpoco/smoothing.hpp"

namespace lpoco {

enum class ZoMode {
  /// alpha = 1/(beta h) (or the configured alpha) with the configured smoothing.
  Paper,
  /// Gaussian directions with alpha = 1/(4 (n + 4) beta h), n = T d.
  NesterovGaussian,
};

std::string to_string(ZoMode mode);

struct ZOConfig {
  std::optional<double> alpha;  // defaults to 1/(beta h)
  double delta_prime = 1e-4;
  long iterations = 0;  // K
  SmoothingSpec smoothing = SmoothingSpec::truncated_interval(1, -2.0, 2.0);
  ZoMode mode = ZoMode::Paper;

  double step_size(const ProblemInstance& problem) const;
  SmoothingSpec effective_smoothing(int dim) const;
  void validate() const;
};

void to_json(nlohmann::json& j, const ZOConfig& c);

/// One update x^{j+1} = Pi(x^j - alpha g^j) over the stacked vector (x_1..x_T).
///
/// Block s draws u_s from the substream (seed, j, s) and queries l_k, k = s..s+h-1, at windows
/// where only block s is moved to x_s +- delta' u_s. On a quadratic the block estimate is
/// therefore exactly u_s u_s^T dC/dx_s.
Vector zo_step(const Vector& x, const ProblemInstance& problem, const ZOConfig& config, long j,
               std::uint64_t seed, PredictionOracle& oracle);

struct ZODiagnostics {
  std::vector<double> objective;  // C_T(x^j), j = 0..K
  std::vector<double> gap;        // C_T(x^j) - C*
  std::vector<double> contraction;  // gap[j+1] / gap[j]
  double c_star = 0.0;
  double gamma = 0.0;
  std::optional<double> epsilon;
  std::optional<std::vector<double>> bound_curve;
  std::uint64_t queries = 0;

  double mean_contraction() const;
};

struct ZOResult {
  Vector x;
  ZODiagnostics diagnostics;
};

/// K iterations of zo_step from x0, with diagnostics against the offline optimum.
/// `c_star` skips the internal offline solve when the optimum value is already known.
ZOResult zo_minimize(const Vector& x0, const ProblemInstance& problem, const ZOConfig& config,
                     std::uint64_t seed, std::optional<double> c_star = std::nullopt);

/// Additive floor of the linear-rate bound; nullopt when D or G is not finite.
std::optional<double> epsilon_floor(const ProblemInstance& problem, double delta_prime);

/// j, objective_gap, contraction_ratio, bound_value
void write_zo_csv(std::ostream& out, const ZODiagnostics& diag);

}  // namespace lpoco
