#include "lpoco/offline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "lpoco/errors.hpp"

namespace lpoco {

// ---------------------------------------------------------------------------------------------
// Band matrix

BandedSpdMatrix::BandedSpdMatrix(Eigen::Index n, Eigen::Index half_bandwidth)
    : n_(n), bw_(std::min(half_bandwidth, std::max<Eigen::Index>(n - 1, 0))),
      band_(Matrix::Zero(bw_ + 1, n)) {}

double& BandedSpdMatrix::at(Eigen::Index i, Eigen::Index j) {
  if (i < j) std::swap(i, j);
  if (i - j > bw_ || i >= n_ || j < 0) throw ContractViolation("band matrix index outside the band");
  factorized_ = false;
  return band_(i - j, j);
}

double BandedSpdMatrix::at(Eigen::Index i, Eigen::Index j) const {
  if (i < j) std::swap(i, j);
  if (i >= n_ || j < 0) throw ContractViolation("band matrix index out of range");
  if (i - j > bw_) return 0.0;
  return band_(i - j, j);
}

Vector BandedSpdMatrix::multiply(const Vector& x) const {
  if (x.size() != n_) throw ContractViolation("band multiply: size mismatch");
  Vector y = Vector::Zero(n_);
  for (Eigen::Index j = 0; j < n_; ++j) {
    y(j) += band_(0, j) * x(j);
    const Eigen::Index last = std::min(n_ - 1, j + bw_);
    for (Eigen::Index i = j + 1; i <= last; ++i) {
      const double a = band_(i - j, j);
      y(i) += a * x(j);
      y(j) += a * x(i);
    }
  }
  return y;
}

Matrix BandedSpdMatrix::dense() const {
  Matrix m = Matrix::Zero(n_, n_);
  for (Eigen::Index j = 0; j < n_; ++j)
    for (Eigen::Index i = j; i <= std::min(n_ - 1, j + bw_); ++i) m(i, j) = m(j, i) = band_(i - j, j);
  return m;
}

void BandedSpdMatrix::factorize() {
  // Column-oriented band Cholesky: factor_(i - j, j) = L(i, j).
  factor_ = band_;
  for (Eigen::Index j = 0; j < n_; ++j) {
    double diag = factor_(0, j);
    const Eigen::Index k0 = std::max<Eigen::Index>(0, j - bw_);
    for (Eigen::Index k = k0; k < j; ++k) diag -= factor_(j - k, k) * factor_(j - k, k);
    if (!(diag > 0.0) || !std::isfinite(diag))
      throw NumericalError(fmt::format("band Cholesky: non-positive pivot {} at column {}", diag, j));
    const double ljj = std::sqrt(diag);
    factor_(0, j) = ljj;
    const Eigen::Index last = std::min(n_ - 1, j + bw_);
    for (Eigen::Index i = j + 1; i <= last; ++i) {
      double s = factor_(i - j, j);
      const Eigen::Index kk0 = std::max<Eigen::Index>(0, i - bw_);
      for (Eigen::Index k = std::max(k0, kk0); k < j; ++k) s -= factor_(i - k, k) * factor_(j - k, k);
      factor_(i - j, j) = s / ljj;
    }
  }
  factorized_ = true;
}

Vector BandedSpdMatrix::solve(const Vector& rhs) const {
  if (!factorized_) throw ContractViolation("band solve before factorize()");
  if (rhs.size() != n_) throw ContractViolation("band solve: size mismatch");
  Vector y = rhs;
  for (Eigen::Index i = 0; i < n_; ++i) {
    double s = y(i);
    for (Eigen::Index k = std::max<Eigen::Index>(0, i - bw_); k < i; ++k) s -= factor_(i - k, k) * y(k);
    y(i) = s / factor_(0, i);
  }
  for (Eigen::Index i = n_ - 1; i >= 0; --i) {
    double s = y(i);
    for (Eigen::Index k = i + 1; k <= std::min(n_ - 1, i + bw_); ++k) s -= factor_(k - i, i) * y(k);
    y(i) = s / factor_(0, i);
  }
  return y;
}

// ---------------------------------------------------------------------------------------------
// Assembly and solves

QuadraticAssembly assemble_quadratic(const ProblemInstance& problem) {
  const auto* quad = dynamic_cast<const QuadraticMemoryProblem*>(&problem.costs());
  if (quad == nullptr) throw ContractViolation("assemble_quadratic: instance is not quadratic");
  const int d = problem.dim();
  const int h = problem.memory();
  const long horizon = problem.horizon();
  const Eigen::Index n = static_cast<Eigen::Index>(d) * horizon;

  QuadraticAssembly qa{BandedSpdMatrix(n, static_cast<Eigen::Index>(d) * h - 1), Vector::Zero(n), 0.0};
  const Vector& x0 = problem.x_bar0();
  for (long t = 1; t <= horizon; ++t) {
    const Matrix& a = quad->hessian(t);
    const Vector& b = quad->linear(t);
    for (int i = 0; i < h; ++i) {
      const long ki = t - h + 1 + i;
      const Eigen::Index ri = static_cast<Eigen::Index>(i) * d;
      if (ki >= 1) {
        const Eigen::Index gi = (ki - 1) * d;
        qa.q.segment(gi, d) += b.segment(ri, d);
        for (int k = 0; k < h; ++k) {
          const long kk = t - h + 1 + k;
          const Eigen::Index rk = static_cast<Eigen::Index>(k) * d;
          if (kk >= 1) {
            const Eigen::Index gk = (kk - 1) * d;
            if (gk > gi) continue;  // lower triangle only
            for (int r = 0; r < d; ++r)
              for (int c = 0; c < d; ++c) {
                if (gi + r < gk + c) continue;
                qa.p.at(gi + r, gk + c) += a(ri + r, rk + c);
              }
          } else {
            qa.q.segment(gi, d) += a.block(ri, rk, d, d) * x0;
          }
        }
      } else {
        qa.constant += b.segment(ri, d).dot(x0);
        for (int k = 0; k < h; ++k) {
          const long kk = t - h + 1 + k;
          if (kk <= 0) qa.constant += 0.5 * x0.dot(a.block(ri, static_cast<Eigen::Index>(k) * d, d, d) * x0);
        }
      }
    }
  }
  return qa;
}

Vector stack(std::span<const Vector> actions) {
  if (actions.empty()) return Vector();
  const Eigen::Index d = actions.front().size();
  Vector out(d * static_cast<Eigen::Index>(actions.size()));
  for (std::size_t k = 0; k < actions.size(); ++k) out.segment(static_cast<Eigen::Index>(k) * d, d) = actions[k];
  return out;
}

ActionSequence unstack(const Vector& stacked, int dim) {
  if (dim < 1 || stacked.size() % dim != 0) throw ContractViolation("unstack: bad dimension");
  ActionSequence out;
  for (Eigen::Index i = 0; i < stacked.size(); i += dim) out.emplace_back(stacked.segment(i, dim));
  return out;
}

OfflineSolution solve_offline_projected_gradient(const ProblemInstance& problem, double step_tolerance,
                                                 long max_iterations) {
  const long horizon = problem.horizon();
  const auto& c = problem.constants();
  const double step = 1.0 / (c.beta * problem.memory());
  ActionSequence x(static_cast<std::size_t>(horizon), problem.feasible_set().project(problem.x_bar0()));
  OfflineSolution sol;
  sol.method = "projected-gradient";
  for (long m = 0; m < max_iterations; ++m) {
    const Vector g = problem.total_gradient(x);
    double change2 = 0.0;
    for (long t = 0; t < horizon; ++t) {
      const auto k = static_cast<std::size_t>(t);
      Vector next = problem.feasible_set().project(x[k] - step * g.segment(t * problem.dim(), problem.dim()));
      change2 += (next - x[k]).squaredNorm();
      x[k] = std::move(next);
    }
    sol.iterations = m + 1;
    if (!std::isfinite(change2)) throw NumericalError("projected gradient diverged");
    if (std::sqrt(change2) <= step_tolerance) break;
  }
  sol.c_star = horizon > 0 ? problem.total_cost(x) : 0.0;
  sol.x = std::move(x);
  return sol;
}

OfflineSolution solve_offline(const ProblemInstance& problem) {
  const bool quadratic = dynamic_cast<const QuadraticMemoryProblem*>(&problem.costs()) != nullptr;
  if (!quadratic || problem.feasible_set().kind() != FeasibleSet::Kind::Unconstrained)
    return solve_offline_projected_gradient(problem);
  if (problem.horizon() == 0) return OfflineSolution{{}, 0.0, "banded", 0};

  QuadraticAssembly qa = assemble_quadratic(problem);
  qa.p.factorize();
  const Vector xs = qa.p.solve(-qa.q);
  if (!xs.allFinite()) {
    std::ostringstream dump;
    dump << "banded offline solve produced non-finite values; T=" << problem.horizon()
         << " h=" << problem.memory() << " d=" << problem.dim() << " q=" << qa.q.transpose();
    throw NumericalError(dump.str());
  }
  OfflineSolution sol;
  sol.method = "banded";
  sol.x = unstack(xs, problem.dim());
  sol.c_star = problem.total_cost(sol.x);
  return sol;
}

double path_variation(std::span<const Vector> x) {
  double v = 0.0;
  for (std::size_t t = 0; t + 1 < x.size(); ++t) v += (x[t] - x[t + 1]).norm();
  return v;
}

double dynamic_regret(std::span<const Vector> played, const ProblemInstance& problem,
                      std::span<const Vector> comparator) {
  if (static_cast<long>(played.size()) != problem.horizon() ||
      static_cast<long>(comparator.size()) != problem.horizon())
    throw ContractViolation(fmt::format("dynamic_regret: need {} actions, got {} and {}",
                                        problem.horizon(), played.size(), comparator.size()));
  return problem.total_cost(played) - problem.total_cost(comparator);
}

// ---------------------------------------------------------------------------------------------
// Bounds

std::optional<double> theorem1_bound(const Theorem1Params& p) {
  if (!std::isfinite(p.lipschitz) || !std::isfinite(p.diameter)) return std::nullopt;
  const double mu = p.mu;
  const double g = p.lipschitz;
  const double dd = p.diameter;
  const double h = p.memory;
  const double t = static_cast<double>(p.horizon);
  const double delta = p.delta;
  const double two_h_m1 = 2.0 * h - 1.0;
  const double root2 = std::sqrt(2.0);

  const double variation = (root2 * dd / mu + g * h * h) * p.path_variation;
  const double smoothing = t * delta * delta * p.beta * p.dim;
  const double log_group = ((8.0 * g * g * h * h + h * g * g) / (2.0 * mu * two_h_m1) +
                            h * h * h * g * g * dd / (delta * std::sqrt(2.0 * two_h_m1)) +
                            3.0 * g * g * h * h * h / (mu * std::sqrt(2.0 * two_h_m1))) *
                           (1.0 + std::log(t));
  const double noise_sq = 2.0 / (delta * delta * mu * std::sqrt(two_h_m1)) * p.phi_square_sum;
  const double noise_lin = (root2 * h * h * g * dd / (2.0 * delta * std::sqrt(2.0 * two_h_m1)) +
                            (root2 * g * h * h + dd * mu) /
                                (delta * mu * std::pow(2.0 * two_h_m1, 0.25))) *
                           p.phi_sum;
  return variation + smoothing + log_group + noise_sq + noise_lin;
}

double contraction_gamma(double mu, double beta, int memory) {
  const double beta_prime = beta * memory;
  if (!(mu > 0.0) || !(beta_prime > mu))
    throw ParameterError(fmt::format("need beta*h > mu > 0 (beta*h = {}, mu = {})", beta_prime, mu));
  return mu / (beta_prime - mu);
}

double theorem2_bound(double mu, double beta, int memory, long levels, double init_gap, double epsilon) {
  const double gamma = contraction_gamma(mu, beta, memory);
  return std::pow(1.0 / (1.0 + gamma), static_cast<double>(levels)) * init_gap + epsilon / gamma;
}

void to_json(nlohmann::json& j, const RegretReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json("n/a");
  };
  j = nlohmann::json{{"regret", r.regret},
                     {"C_star", r.c_star},
                     {"played_cost", r.played_cost},
                     {"V_T", r.path_variation},
                     {"query_count", r.query_count},
                     {"theorem1_bound", opt(r.theorem1_bound)},
                     {"theorem2_bound", opt(r.theorem2_bound)}};
}

void write_comparator_csv(std::ostream& out, std::span<const Vector> x) {
  const Eigen::Index d = x.empty() ? 1 : x.front().size();
  out << "t";
  for (Eigen::Index i = 0; i < d; ++i) out << ",x_star" << i;
  out << "\n";
  for (std::size_t t = 0; t < x.size(); ++t) {
    out << (t + 1);
    for (Eigen::Index i = 0; i < d; ++i) out << fmt::format(",{:.17g}", x[t](i));
    out << "\n";
  }
}

}  // namespace lpoco
