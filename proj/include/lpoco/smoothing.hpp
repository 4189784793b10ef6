#pragma once

#include <span>
#include <string>

#include <json.hpp>

#include "lpoco/problem.hpp"
#include "lpoco/rng.hpp"

namespace lpoco {

enum class SmoothingFamily {
  /// Standard normal per coordinate restricted to [-b, b], b = (2 d^2 (2h-1))^(-1/4).
  TruncatedGaussianPaper,
  /// Standard normal per coordinate restricted to [a, b].
  TruncatedGaussianInterval,
  StandardGaussian,
  /// Uniform on the unit sphere; for d = 1 a fair +-1 coin.
  SphereBernoulli,
};

std::string to_string(SmoothingFamily family);

/// (2 d^2 (2h - 1))^(-1/4), the per-coordinate half-width that keeps ||u|| <= (2(2h-1))^(-1/4).
double truncation_bound(int dim, int memory);

/// Distribution of the perturbation directions. Immutable; sampling takes the caller's stream.
class SmoothingSpec {
 public:
  static SmoothingSpec truncated_paper(int dim, int memory);
  static SmoothingSpec truncated_interval(int dim, double lower, double upper);
  static SmoothingSpec standard_gaussian(int dim);
  static SmoothingSpec sphere(int dim);

  SmoothingFamily family() const { return family_; }
  int dim() const { return dim_; }
  /// Memory length the norm-bounded truncation was built for (0 for other families).
  int memory() const { return memory_; }
  bool truncated() const;
  double lower() const { return lower_; }
  double upper() const { return upper_; }

  /// Probability mass of the standard normal on [lower, upper] (by quadrature).
  double kappa() const;
  /// E[u_i^2].
  double second_moment() const;

  /// Number of uniforms consumed per sample.
  int uniforms_per_sample() const { return dim_; }
  /// Deterministic map from dim() uniforms in (0, 1) to a direction.
  Vector sample_from(std::span<const double> uniforms) const;
  Vector sample(Rng& rng) const;

  std::string describe() const;

  /// Test hook: overrides the normalisation constant used by second_moment().
  SmoothingSpec with_kappa_override(double kappa) const;

 private:
  SmoothingSpec() = default;
  void finalize();

  SmoothingFamily family_ = SmoothingFamily::StandardGaussian;
  int dim_ = 1;
  int memory_ = 0;
  double lower_ = 0.0;
  double upper_ = 0.0;
  double cdf_lower_ = 0.0;
  double cdf_upper_ = 1.0;
  double kappa_ = 1.0;
  double sigma2_ = 1.0;
};

/// Free-function forms of the accessors above.
double normalization_kappa(const SmoothingSpec& spec);
double second_moment(const SmoothingSpec& spec);

void to_json(nlohmann::json& j, const SmoothingSpec& s);
SmoothingSpec smoothing_from_json(const nlohmann::json& j);

}  // namespace lpoco
