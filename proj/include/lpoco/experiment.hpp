#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpoco/estimators.hpp"
#include "lpoco/problem.hpp"
#include "lpoco/smoothing.hpp"

namespace lpoco {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// A direction distribution as named on the command line:
/// "gaussian", "bernoulli", "truncated-paper" or "truncated-interval:a:b".
struct DistChoice {
  SmoothingFamily family = SmoothingFamily::TruncatedGaussianInterval;
  double lower = -2.0;
  double upper = 2.0;

  static DistChoice parse(const std::string& text);
  std::string name() const;
  SmoothingSpec build(int dim, int memory) const;
  /// Trial count used when none is given: 50 for the truncated families, 200 otherwise.
  long default_trials() const;
};

/// Parses "a:b" (inclusive, step 1) or a comma list "a,b,c" into an increasing list.
std::vector<long> parse_sweep(const std::string& text);
std::string format_sweep(std::span<const long> values);

struct ExperimentConfig {
  std::string command = "fig2";
  std::vector<long> horizons{20};
  std::vector<long> windows{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  int memory = 2;
  int dim = 1;
  std::optional<long> trials;  // per-distribution default when absent
  std::uint64_t base_seed = 7;
  std::vector<DistChoice> dists{DistChoice{}};
  std::vector<Feedback> feedbacks{Feedback::TwoPoint};
  // Instance family
  double mu = 1.0;
  double beta = 10.0;
  double x_bar0 = 0.5;
  SetSpec set{FeasibleSet::Kind::Box, -2.0, 2.0, 1.0};
  NoiseKind noise = NoiseKind::Zero;
  double phi = 0.0;
  // Algorithm parameters
  double eta_scale = 0.2;  // eta_t = eta_scale / t
  double alpha = 0.05;
  double delta = 0.2;
  double delta_prime = 1e-4;
  long levels = 50;  // zo-compare iterations K
  // Execution
  int workers = 1;
  std::string out;

  /// Defaults of a command: fig1 sweeps T = 5..20, fig2 sweeps W = 2..12 at T = 20, zo-compare
  /// uses T = 10, beta = 4, delta' = 1e-8, K = 50, 20 trials on the unconstrained set.
  static ExperimentConfig defaults_for(const std::string& command);

  long trials_for(const DistChoice& dist) const { return trials.value_or(dist.default_trials()); }
  void validate() const;
  /// Instance of trial `trial` with horizon T; instances of one trial share their prefix across T.
  ProblemInstance instance(long trial, long horizon) const;
  std::uint64_t algorithm_seed(long trial) const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

// ---------------------------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------------------------

double mean(std::span<const double> values);
/// Quantile with linear interpolation between order statistics (position p (n - 1)).
double quantile_linear(std::vector<double> values, double p);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least-squares line through (x_i, y_i); needs at least two distinct x values.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Evaluates fn(0..n-1) on `workers` threads; results are stored by index, so the output does
/// not depend on the worker count or on scheduling.
std::vector<double> parallel_trials(long n, int workers, const std::function<double(long)>& fn);

// ---------------------------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------------------------

struct Fig1Row {
  long horizon = 0;
  std::string dist;
  Feedback feedback = Feedback::TwoPoint;
  double mean_reg = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  long trials = 0;
};

struct Fig2Row {
  long window = 0;
  std::string dist;
  Feedback feedback = Feedback::TwoPoint;
  double mean_log_reg = 0.0;
  double mean_reg = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  long trials = 0;
  long clamped = 0;
};

struct SeriesFit {
  std::string dist;
  Feedback feedback = Feedback::TwoPoint;
  LinearFit fit;
};

/// Regret values at or below this are clamped before taking the log.
inline constexpr double kRegretFloor = 1e-8;

/// Initialisation-phase regret per (T, dist, feedback).
std::vector<Fig1Row> run_fig1(const ExperimentConfig& config);
/// Full-algorithm log regret per (W, dist, feedback).
std::vector<Fig2Row> run_fig2(const ExperimentConfig& config);
std::vector<SeriesFit> fit_fig2(const ExperimentConfig& config, std::span<const Fig2Row> rows);

/// Per-trial regrets of one configuration cell; used by the ordering checks.
std::vector<double> initialization_regrets(const ExperimentConfig& config, long horizon,
                                           const DistChoice& dist, Feedback feedback, long trials);
std::vector<double> algorithm_regrets(const ExperimentConfig& config, long horizon, long window,
                                      const DistChoice& dist, Feedback feedback, long trials);

void write_fig1_csv(std::ostream& out, std::span<const Fig1Row> rows);
void write_fig2_csv(std::ostream& out, std::span<const Fig2Row> rows, std::span<const SeriesFit> fits);

struct ZoCompareRow {
  long trial = 0;
  std::string mode;
  double mean_contraction = 0.0;
  double initial_gap = 0.0;
  double final_gap = 0.0;
};

struct ZoCompareSummary {
  std::vector<ZoCompareRow> rows;
  double gamma = 0.0;
  double paper_mean = 0.0;
  double nesterov_mean = 0.0;
};

/// Truncated-block mode and Nesterov-mode zeroth-order minimisation from x_bar0 on unconstrained
/// instances with the config's (T, h, d, mu, beta), K = config.levels, delta' = config.delta_prime.
ZoCompareSummary run_zo_compare(const ExperimentConfig& config);
void write_zo_compare_csv(std::ostream& out, const ZoCompareSummary& summary);

/// Full config, library version and the estimator conventions used by the CSV.
nlohmann::json sidecar(const ExperimentConfig& config);

/// Runs `config.command` and writes the CSV to `csv`. Supported: fig1, fig2, zo-compare.
void run_to_csv(const ExperimentConfig& config, std::ostream& csv);

}  // namespace lpoco
