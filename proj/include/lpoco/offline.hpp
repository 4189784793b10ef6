#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "lpoco/problem.hpp"

namespace lpoco {

/// Symmetric positive-definite band matrix (lower band stored) with an in-place Cholesky solve.
class BandedSpdMatrix {
 public:
  BandedSpdMatrix(Eigen::Index n, Eigen::Index half_bandwidth);

  Eigen::Index size() const { return n_; }
  Eigen::Index half_bandwidth() const { return bw_; }

  /// Entry (i, j) with |i - j| <= half_bandwidth; symmetric access.
  double& at(Eigen::Index i, Eigen::Index j);
  double at(Eigen::Index i, Eigen::Index j) const;

  Vector multiply(const Vector& x) const;
  Matrix dense() const;

  /// Cholesky factorisation; throws NumericalError when a pivot is not positive.
  void factorize();
  bool factorized() const { return factorized_; }
  Vector solve(const Vector& rhs) const;

 private:
  Eigen::Index n_;
  Eigen::Index bw_;
  Matrix band_;  // band_(i - j, j) = A(i, j), i >= j
  Matrix factor_;
  bool factorized_ = false;
};

/// C_T(x) = 1/2 x^T P x + q^T x + constant over the stacked decision vector (x_1..x_T).
struct QuadraticAssembly {
  BandedSpdMatrix p;
  Vector q;
  double constant = 0.0;

  double value(const Vector& x) const { return 0.5 * x.dot(p.multiply(x)) + q.dot(x) + constant; }
};

/// Scatters the A_t / B_t blocks of a quadratic instance into P, q and the constant. The fixed
/// history x_k = x_bar0 (k <= 0) is folded into q and the constant.
QuadraticAssembly assemble_quadratic(const ProblemInstance& problem);

struct OfflineSolution {
  ActionSequence x;
  double c_star = 0.0;
  std::string method;  // "banded" or "projected-gradient"
  long iterations = 0;
};

/// argmin of C_T over X^T. Unconstrained quadratic instances use the banded direct solve;
/// everything else runs projected gradient descent with step 1/(beta h).
OfflineSolution solve_offline(const ProblemInstance& problem);

/// The projected-gradient route regardless of the instance type.
OfflineSolution solve_offline_projected_gradient(const ProblemInstance& problem,
                                                 double step_tolerance = 1e-10,
                                                 long max_iterations = 1000000);

Vector stack(std::span<const Vector> actions);
ActionSequence unstack(const Vector& stacked, int dim);

/// sum_{t=1}^{T-1} ||x_t - x_{t+1}||.
double path_variation(std::span<const Vector> x);

/// C_T(played) - C_T(comparator), both with the x_bar0 history.
double dynamic_regret(std::span<const Vector> played, const ProblemInstance& problem,
                      std::span<const Vector> comparator);

struct Theorem1Params {
  double mu = 1.0;
  double beta = 1.0;
  double lipschitz = 1.0;  // G
  double diameter = 1.0;   // D
  int memory = 2;
  int dim = 1;
  long horizon = 1;
  double delta = 1.0;
  double path_variation = 0.0;  // V_T
  double phi_sum = 0.0;
  double phi_square_sum = 0.0;
};

/// Right-hand side of the initialisation regret bound; nullopt when G or D is not finite.
std::optional<double> theorem1_bound(const Theorem1Params& p);

/// gamma = mu / (beta h - mu); throws ParameterError when beta h <= mu.
double contraction_gamma(double mu, double beta, int memory);

/// (1/(1+gamma))^K * init_gap + epsilon / gamma.
double theorem2_bound(double mu, double beta, int memory, long levels, double init_gap, double epsilon);

struct RegretReport {
  double regret = 0.0;
  double c_star = 0.0;
  double played_cost = 0.0;
  double path_variation = 0.0;
  std::uint64_t query_count = 0;
  std::optional<double> theorem1_bound;
  std::optional<double> theorem2_bound;
};

void to_json(nlohmann::json& j, const RegretReport& r);

/// t, x*_t components
void write_comparator_csv(std::ostream& out, std::span<const Vector> x);

}  // namespace lpoco
