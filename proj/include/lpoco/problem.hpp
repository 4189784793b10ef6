#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lpoco/rng.hpp"

namespace lpoco {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Actions x_1, ..., x_n, each of dimension d. Index 0 of the container is x_1.
using ActionSequence = std::vector<Vector>;

// ---------------------------------------------------------------------------------------------
// Feasible sets
// ---------------------------------------------------------------------------------------------

/// Convex feasible set with Euclidean projection.
class FeasibleSet {
 public:
  enum class Kind { Unconstrained, Box, Ball, Custom };
  using Projection = std::function<Vector(const Vector&)>;
  using Membership = std::function<bool(const Vector&)>;

  /// Identity projection; diameter() is +inf.
  static FeasibleSet unconstrained(int dim);
  static FeasibleSet box(Vector lower, Vector upper);
  static FeasibleSet box(int dim, double lower, double upper);
  static FeasibleSet ball(Vector center, double radius);
  /// A user projection. When `contains` is provided, every projected point is checked against it.
  static FeasibleSet custom(int dim, Projection project, double diameter, double max_norm,
                            Membership contains = {});

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double diameter() const { return diameter_; }
  /// max ||x|| over the set (+inf when unbounded).
  double max_norm() const { return max_norm_; }
  bool bounded() const;

  Vector project(const Vector& x) const;
  /// Projects every length-d block of a stacked vector.
  Vector project_blocks(const Vector& stacked) const;
  bool contains(const Vector& x, double tol = 1e-12) const;

  std::string describe() const;

 private:
  FeasibleSet() = default;

  Kind kind_ = Kind::Unconstrained;
  int dim_ = 0;
  Vector lower_, upper_, center_;
  double radius_ = 0.0;
  double diameter_ = 0.0;
  double max_norm_ = 0.0;
  Projection custom_project_;
  Membership custom_contains_;
};

// ---------------------------------------------------------------------------------------------
// Costs with memory
// ---------------------------------------------------------------------------------------------

/// Indexed family f_t : R^{dh} -> R, t = 1..horizon(). Windows are stacked oldest first:
/// (x_{t-h+1}, ..., x_t).
class CostModel {
 public:
  virtual ~CostModel() = default;

  virtual int dim() const = 0;
  virtual int memory() const = 0;
  virtual long horizon() const = 0;
  virtual double value(long t, const Vector& window) const = 0;
  virtual Vector gradient(long t, const Vector& window) const = 0;
};

/// f_t(z) = 1/2 z^T A_t z + B_t^T z with A_t symmetric, eigenvalues in [mu, beta].
class QuadraticMemoryProblem final : public CostModel {
 public:
  QuadraticMemoryProblem(int dim, int memory, std::vector<Matrix> a, std::vector<Vector> b,
                         double mu, double beta, std::uint64_t seed = 0);

  int dim() const override { return dim_; }
  int memory() const override { return memory_; }
  long horizon() const override { return static_cast<long>(a_.size()); }
  double value(long t, const Vector& window) const override;
  Vector gradient(long t, const Vector& window) const override;

  const Matrix& hessian(long t) const { return a_.at(static_cast<std::size_t>(t - 1)); }
  const Vector& linear(long t) const { return b_.at(static_cast<std::size_t>(t - 1)); }
  double mu() const { return mu_; }
  double beta() const { return beta_; }
  std::uint64_t seed() const { return seed_; }

 private:
  int dim_;
  int memory_;
  std::vector<Matrix> a_;
  std::vector<Vector> b_;
  double mu_;
  double beta_;
  std::uint64_t seed_;
};

/// Costs given as callables. The gradient callable may be empty; offline solves that need it
/// then fail with a ContractViolation.
class FunctionCost final : public CostModel {
 public:
  using ValueFn = std::function<double(long, const Vector&)>;
  using GradientFn = std::function<Vector(long, const Vector&)>;

  FunctionCost(int dim, int memory, long horizon, ValueFn value, GradientFn gradient = {});

  int dim() const override { return dim_; }
  int memory() const override { return memory_; }
  long horizon() const override { return horizon_; }
  double value(long t, const Vector& window) const override { return value_(t, window); }
  Vector gradient(long t, const Vector& window) const override;

 private:
  int dim_;
  int memory_;
  long horizon_;
  ValueFn value_;
  GradientFn gradient_;
};

/// A random orthogonal eigenbasis with eigenvalues uniform in [mu, beta]; B_t uniform in [-1, 1].
/// Each step t draws from its own substream of `seed`, so instances with different horizons
/// share their common prefix.
QuadraticMemoryProblem generate_quadratic(std::uint64_t seed, long horizon, int memory, int dim,
                                          double mu, double beta);

// ---------------------------------------------------------------------------------------------
// Problem instance and oracle
// ---------------------------------------------------------------------------------------------

enum class NoiseKind { Zero, Offset, Uniform };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

/// l_t = f_t + noise with |noise| <= phi_t.
struct NoiseModel {
  NoiseKind kind = NoiseKind::Zero;
  /// phi_1..phi_T; empty means all zero.
  std::vector<double> phi;
};

struct ProblemConstants {
  double mu = 0.0;
  double beta = 0.0;
  double lipschitz = 0.0;  // G, +inf when unknown or unbounded
  double diameter = 0.0;   // D, +inf for the unconstrained proxy
};

/// Immutable description of one online problem.
class ProblemInstance {
 public:
  ProblemInstance(std::shared_ptr<const CostModel> costs, Vector x_bar0, FeasibleSet set,
                  NoiseModel noise, ProblemConstants constants);

  long horizon() const { return costs_->horizon(); }
  int memory() const { return costs_->memory(); }
  int dim() const { return costs_->dim(); }
  const Vector& x_bar0() const { return x_bar0_; }
  const FeasibleSet& feasible_set() const { return set_; }
  const NoiseModel& noise() const { return noise_; }
  const ProblemConstants& constants() const { return constants_; }
  const CostModel& costs() const { return *costs_; }
  std::shared_ptr<const CostModel> shared_costs() const { return costs_; }

  bool in_horizon(long t) const { return t >= 1 && t <= horizon(); }
  /// phi_t; 0 outside [1, T].
  double phi(long t) const;
  double phi_sum() const;
  double phi_square_sum() const;

  /// f_t at a stacked window; exactly 0 outside [1, T].
  double eval_cost(long t, const Vector& window) const;
  Vector cost_gradient(long t, const Vector& window) const;

  /// Stacked window (x_{t-h+1}, ..., x_t) of an action sequence, x_k = x_bar0 for k <= 0.
  Vector window(std::span<const Vector> actions, long t) const;
  /// C_T over actions x_1..x_T with the fixed pre-horizon history.
  double total_cost(std::span<const Vector> actions) const;
  /// Stacked gradient of C_T (length d*T).
  Vector total_gradient(std::span<const Vector> actions) const;

 private:
  void check_window(const Vector& window) const;

  std::shared_ptr<const CostModel> costs_;
  Vector x_bar0_;
  FeasibleSet set_;
  NoiseModel noise_;
  ProblemConstants constants_;
};

/// Constants for a quadratic family on a set: mu and beta from the generator, D from the set,
/// and G bounded by beta*sqrt(h)*max_norm + max_t ||B_t|| (+inf when the set is unbounded).
ProblemConstants quadratic_constants(const QuadraticMemoryProblem& problem, const FeasibleSet& set);

/// Noisy prediction oracle. One per run: owns the query counter and the noise stream.
class PredictionOracle {
 public:
  PredictionOracle(const ProblemInstance& problem, std::uint64_t noise_seed);

  /// l_t(window). Out-of-horizon queries return 0 and are not counted.
  double query(long t, const Vector& window);
  std::uint64_t queries() const { return queries_; }
  const ProblemInstance& problem() const { return *problem_; }

 private:
  const ProblemInstance* problem_;
  Rng noise_rng_;
  std::uint64_t queries_ = 0;
};

// ---------------------------------------------------------------------------------------------
// Serialisable description of a generated quadratic run
// ---------------------------------------------------------------------------------------------

struct SetSpec {
  FeasibleSet::Kind kind = FeasibleSet::Kind::Unconstrained;
  double lower = -1.0;  // box, per coordinate
  double upper = 1.0;
  double radius = 1.0;  // ball centred at the origin

  FeasibleSet build(int dim) const;
};

/// Everything needed to rebuild a generated quadratic instance.
struct QuadraticSpec {
  std::uint64_t seed = 1;
  long horizon = 20;
  int memory = 2;
  int dim = 1;
  double mu = 1.0;
  double beta = 10.0;
  double x_bar0 = 0.5;  // broadcast to every coordinate
  SetSpec set;
  NoiseKind noise = NoiseKind::Zero;
  double phi = 0.0;  // constant phi_t schedule

  ProblemInstance build() const;
};

void to_json(nlohmann::json& j, const SetSpec& s);
void from_json(const nlohmann::json& j, SetSpec& s);
void to_json(nlohmann::json& j, const QuadraticSpec& s);
void from_json(const nlohmann::json& j, QuadraticSpec& s);

}  // namespace lpoco
