#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "lpoco/estimators.hpp"
#include "lpoco/problem.hpp"
#include "lpoco/smoothing.hpp"

namespace lpoco {

/// Step size eta_t.
struct StepSchedule {
  enum class Kind {
    InverseTimeMu,  // 1 / (t mu)
    ScaledInverseTime,  // scale / t
  };
  Kind kind = Kind::InverseTimeMu;
  double scale = 1.0;

  double at(long t, double mu) const;
  std::string describe() const;
};

enum class DirectionMode { PerStep, FixedOnce };

struct BanditConfig {
  StepSchedule eta;
  double delta = 0.2;
  Feedback feedback = Feedback::TwoPoint;
  SmoothingSpec smoothing = SmoothingSpec::truncated_interval(1, -2.0, 2.0);
  DirectionMode directions = DirectionMode::PerStep;

  /// eta_t = 1/(t mu), delta = 1/sqrt(T).
  static BanditConfig theorem1(const ProblemInstance& problem, SmoothingSpec smoothing);
  /// eta_t = 0.2/t, delta = 0.2, truncated Gaussian on [-2, 2].
  static BanditConfig experiment_preset(int dim);

  void validate() const;
};

void to_json(nlohmann::json& j, const BanditConfig& c);

struct QueryRecord {
  long t = 0;
  Vector window;
  double value = 0.0;
};

struct BanditStepResult {
  Vector next;
  Vector gradient;
  int queries = 0;
  std::vector<QueryRecord> records;
};

/// One initialisation update for step t.
///
/// `recent` holds (x_{t-h+1}, ..., x_t). Only x_t is perturbed in the queried windows, by +delta u
/// and -delta u. Steps outside [1, T] have l_t = 0, so nothing is queried and x_t is kept.
BanditStepResult bandit_step(const ProblemInstance& problem, const BanditConfig& config, long t,
                             std::span<const Vector> recent, const Vector& u,
                             PredictionOracle& oracle);

/// Direction used for the initialisation update at step r under the given seed.
Vector initialization_direction(const BanditConfig& config, std::uint64_t seed, long r);

struct BanditTrace {
  ActionSequence iterates;  // x_1..x_T
  ActionSequence gradients;  // g_1..g_T
  std::vector<QueryRecord> query_log;
  std::vector<double> costs;  // f_t(x_{t-h+1:t})
  std::vector<std::uint64_t> queries_so_far;
  std::uint64_t total_queries = 0;
};

BanditTrace run_bandit(const ProblemInstance& problem, const BanditConfig& config, std::uint64_t seed);

/// t, x0..x{d-1}, cost, cumulative_cost, queries_so_far
void write_bandit_csv(std::ostream& out, const BanditTrace& trace);

}  // namespace lpoco
