#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "lpoco/bandit.hpp"
#include "lpoco/offline.hpp"
#include "lpoco/problem.hpp"
#include "lpoco/zeroth_order.hpp"

namespace lpoco {

/// Configuration of the windowed algorithm: initialisation (bandit) phase, zeroth-order levels,
/// and the prediction window W. The number of levels is K = floor(W / (h - 1)).
struct WindowConfig {
  long window = 1;  // W
  BanditConfig init;
  /// alpha, delta' and smoothing of the correction levels (iterations and mode are ignored).
  ZOConfig zo;
  /// Feedback mode of the correction levels.
  Feedback level_feedback = Feedback::TwoPoint;

  long levels(int memory) const;
  void validate(int memory) const;

  /// x_bar0 handled by the instance; eta_t = 0.2/t, delta = 0.2, alpha = 0.05, delta' = 1e-4,
  /// truncated Gaussian on [-2, 2] in both phases, two-point feedback.
  static WindowConfig experiment_preset(long window, int dim);
};

void to_json(nlohmann::json& j, const WindowConfig& c);

/// s = t + (K - j - 1)(h - 1): the block refined to level j + 1 at outer step t.
long schedule_index(long t, long j, long window, int memory);

enum class Side { Plus, Minus };

struct CacheKey {
  long level = 0;
  long k = 0;
  Side side = Side::Plus;

  auto operator<=>(const CacheKey&) const = default;
};

/// Oracle values l_k at the perturbed level-j trajectories that are still needed.
class PredictionCache {
 public:
  void insert(const CacheKey& key, double value);
  /// Throws std::logic_error on a miss: every consumed value must have been received earlier.
  double consume(const CacheKey& key);
  bool contains(const CacheKey& key) const { return values_.count(key) != 0; }
  /// Drops every entry of `level` with time index below `k`.
  void evict_below(long level, long k);
  void evict_level(long level);

  std::size_t size() const { return values_.size(); }
  /// Sorted distinct time indices held for a level.
  std::vector<long> times_at(long level) const;

  std::uint64_t inserted() const { return inserted_; }
  std::uint64_t consumed() const { return consumed_; }
  std::size_t peak_size() const { return peak_; }

 private:
  std::map<CacheKey, double> values_;
  std::uint64_t inserted_ = 0;
  std::uint64_t consumed_ = 0;
  std::size_t peak_ = 0;
};

/// Decision iterates x_k^j for levels j = 0..K and the per-(level, index) directions that
/// define the perturbed trajectories x_k^j +- delta' u_k^j.
class TrajectoryBook {
 public:
  TrajectoryBook() = default;
  TrajectoryBook(int dim, int memory, long levels, long first_index, long last_index,
                 const Vector& x_bar0);

  long levels() const { return levels_; }
  long first_index() const { return first_; }
  long last_index() const { return last_; }

  Vector& iterate(long level, long k);
  const Vector& iterate(long level, long k) const;

  bool has_direction(long level, long k) const;
  void set_direction(long level, long k, Vector u);
  const Vector& direction(long level, long k) const;

  /// Stacked window (x^j_{k-h+1}, ..., x^j_k) with every decision entry (index >= 1) moved by
  /// +-delta u^j_index; history entries stay at x_bar0.
  Vector perturbed_window(long level, long k, Side side, double delta) const;

 private:
  std::size_t slot(long level, long k) const;

  int dim_ = 1;
  int memory_ = 1;
  long levels_ = 0;
  long first_ = 0;
  long last_ = 0;
  std::vector<Vector> x_;
  std::vector<Vector> u_;
  std::vector<char> has_u_;
};

struct QueryBudget {
  std::uint64_t initialization = 0;
  /// per_level[j]: queries on the level-j trajectory, j = 0..K.
  std::vector<std::uint64_t> per_level;
  std::uint64_t total = 0;
};

struct Algorithm1Result {
  long levels = 0;  // K
  ActionSequence played;          // x_1^K..x_T^K
  ActionSequence initialization;  // x_1^0..x_T^0
  std::vector<double> costs;      // f_t at the played windows
  double initialization_regret = 0.0;
  RegretReport report;
  QueryBudget budget;
  std::uint64_t oracle_queries = 0;
  TrajectoryBook book;
  std::uint64_t cache_consumed = 0;
  std::size_t cache_peak = 0;
};

struct Algorithm1Hooks {
  /// Called at every outer step t once the fresh level-0 prediction is cached and before the
  /// correction levels run.
  std::function<void(long t, const PredictionCache&)> before_levels;
};

/// Runs the windowed algorithm for t = 2-W..T and plays x_t^K for t in [1, T].
/// `comparator` avoids re-solving the offline problem when the caller already has it.
Algorithm1Result run_algorithm1(const ProblemInstance& problem, const WindowConfig& config,
                                std::uint64_t seed, const OfflineSolution* comparator = nullptr,
                                const Algorithm1Hooks& hooks = {});

/// Per-phase query counts of a completed run.
QueryBudget query_budget(const Algorithm1Result& result);

/// t, x0..x{d-1}, cost, cumulative_cost
void write_run_csv(std::ostream& out, const Algorithm1Result& result);

}  // namespace lpoco
