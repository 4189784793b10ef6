#include "lpoco/predictive.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "lpoco/errors.hpp"
#include "lpoco/estimators.hpp"

namespace lpoco {

long WindowConfig::levels(int memory) const {
  if (memory < 2) throw ParameterError("the windowed algorithm needs memory h >= 2");
  if (window < 1) throw ParameterError("prediction window W must be >= 1");
  return window / (memory - 1);
}

void WindowConfig::validate(int memory) const {
  if (levels(memory) < 1)
    throw ParameterError(fmt::format("W = {} gives no correction level for h = {}; need W >= h - 1",
                                     window, memory));
  init.validate();
  zo.validate();
  if (zo.mode != ZoMode::Paper) throw ParameterError("correction levels only support the truncated-block zeroth-order mode");
}

WindowConfig WindowConfig::experiment_preset(long window, int dim) {
  WindowConfig c;
  c.window = window;
  c.init = BanditConfig::experiment_preset(dim);
  c.zo.alpha = 0.05;
  c.zo.delta_prime = 1e-4;
  c.zo.smoothing = SmoothingSpec::truncated_interval(dim, -2.0, 2.0);
  c.level_feedback = Feedback::TwoPoint;
  return c;
}

void to_json(nlohmann::json& j, const WindowConfig& c) {
  j = nlohmann::json{{"W", c.window},
                     {"init", c.init},
                     {"zo", c.zo},
                     {"level_feedback", to_string(c.level_feedback)}};
}

long schedule_index(long t, long j, long window, int memory) {
  if (memory < 2) throw ContractViolation("schedule_index: memory must be >= 2");
  const long k_levels = window / (memory - 1);
  if (j < 0 || j >= k_levels)
    throw ContractViolation(fmt::format("schedule_index: level {} outside [0, {}]", j, k_levels - 1));
  return t + (k_levels - j - 1) * (memory - 1);
}

// ---------------------------------------------------------------------------------------------

void PredictionCache::insert(const CacheKey& key, double value) {
  if (!values_.emplace(key, value).second)
    throw std::logic_error(fmt::format("prediction cache: duplicate key (level {}, k {})", key.level, key.k));
  ++inserted_;
  peak_ = std::max(peak_, values_.size());
}

double PredictionCache::consume(const CacheKey& key) {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw std::logic_error(fmt::format("prediction cache miss at level {}, k {}", key.level, key.k));
  ++consumed_;
  return it->second;
}

void PredictionCache::evict_below(long level, long k) {
  auto it = values_.lower_bound(CacheKey{level, std::numeric_limits<long>::min(), Side::Plus});
  const auto end = values_.lower_bound(CacheKey{level, k, Side::Plus});
  values_.erase(it, end);
}

void PredictionCache::evict_level(long level) {
  values_.erase(values_.lower_bound(CacheKey{level, std::numeric_limits<long>::min(), Side::Plus}),
                values_.lower_bound(CacheKey{level + 1, std::numeric_limits<long>::min(), Side::Plus}));
}

std::vector<long> PredictionCache::times_at(long level) const {
  std::vector<long> out;
  for (auto it = values_.lower_bound(CacheKey{level, std::numeric_limits<long>::min(), Side::Plus});
       it != values_.end() && it->first.level == level; ++it)
    if (out.empty() || out.back() != it->first.k) out.push_back(it->first.k);
  return out;
}

// ---------------------------------------------------------------------------------------------

TrajectoryBook::TrajectoryBook(int dim, int memory, long levels, long first_index, long last_index,
                               const Vector& x_bar0)
    : dim_(dim), memory_(memory), levels_(levels), first_(first_index), last_(last_index) {
  if (last_ < first_) throw ContractViolation("TrajectoryBook: empty index range");
  const auto n = static_cast<std::size_t>((levels_ + 1) * (last_ - first_ + 1));
  x_.assign(n, x_bar0);
  u_.assign(n, Vector());
  has_u_.assign(n, 0);
}

std::size_t TrajectoryBook::slot(long level, long k) const {
  if (level < 0 || level > levels_ || k < first_ || k > last_)
    throw ContractViolation(fmt::format("TrajectoryBook: (level {}, k {}) out of range", level, k));
  return static_cast<std::size_t>(level * (last_ - first_ + 1) + (k - first_));
}

Vector& TrajectoryBook::iterate(long level, long k) { return x_[slot(level, k)]; }
const Vector& TrajectoryBook::iterate(long level, long k) const { return x_[slot(level, k)]; }

bool TrajectoryBook::has_direction(long level, long k) const { return has_u_[slot(level, k)] != 0; }

void TrajectoryBook::set_direction(long level, long k, Vector u) {
  const std::size_t i = slot(level, k);
  u_[i] = std::move(u);
  has_u_[i] = 1;
}

const Vector& TrajectoryBook::direction(long level, long k) const {
  const std::size_t i = slot(level, k);
  if (!has_u_[i]) throw std::logic_error(fmt::format("no direction drawn for (level {}, k {})", level, k));
  return u_[i];
}

Vector TrajectoryBook::perturbed_window(long level, long k, Side side, double delta) const {
  const double sign = side == Side::Plus ? 1.0 : -1.0;
  Vector w(static_cast<Eigen::Index>(dim_) * memory_);
  for (int i = 0; i < memory_; ++i) {
    const long idx = k - memory_ + 1 + i;
    Vector entry = iterate(level, idx);
    if (idx >= 1) entry += sign * delta * direction(level, idx);
    w.segment(static_cast<Eigen::Index>(i) * dim_, dim_) = entry;
  }
  return w;
}

// ---------------------------------------------------------------------------------------------

namespace {

class Runner {
 public:
  Runner(const ProblemInstance& problem, const WindowConfig& config, std::uint64_t seed)
      : problem_(problem),
        config_(config),
        seed_(seed),
        h_(problem.memory()),
        d_(problem.dim()),
        horizon_(problem.horizon()),
        levels_(config.levels(problem.memory())),
        alpha_(config.zo.step_size(problem)),
        oracle_(problem, seed),
        book_(problem.dim(), problem.memory(), levels_, 2 - problem.memory(),
              problem.horizon() + config.window, problem.x_bar0()) {
    budget_.per_level.assign(static_cast<std::size_t>(levels_ + 1), 0);
  }

  void run(const Algorithm1Hooks& hooks) {
    const long w = config_.window;
    for (long t = 2 - w; t <= horizon_; ++t) {
      initialization_update(t + w - 1);

      const long newest = t + levels_ * (h_ - 1);
      if (t == 2 - w) {
        // Values the first level-0 block needs that no earlier outer step could have received.
        for (long k = std::max(1L, schedule_index(t, 0, w, h_)); k < newest; ++k) query_level(0, k);
      }
      query_level(0, newest);
      if (hooks.before_levels) hooks.before_levels(t, cache_);

      for (long j = 0; j < levels_; ++j) {
        const long s = schedule_index(t, j, w, h_);
        refine_block(j, s);
        query_level(j + 1, s);
      }

      for (long j = 0; j < levels_; ++j) cache_.evict_below(j, schedule_index(t, j, w, h_) + 1);
      cache_.evict_level(levels_);
    }
  }

  Algorithm1Result finish(const OfflineSolution& comparator) {
    Algorithm1Result out;
    out.levels = levels_;
    for (long t = 1; t <= horizon_; ++t) {
      out.played.push_back(book_.iterate(levels_, t));
      out.initialization.push_back(book_.iterate(0, t));
    }
    for (long t = 1; t <= horizon_; ++t)
      out.costs.push_back(problem_.eval_cost(t, problem_.window(out.played, t)));

    const double init_cost = problem_.total_cost(out.initialization);
    out.initialization_regret = init_cost - comparator.c_star;

    RegretReport& r = out.report;
    r.c_star = comparator.c_star;
    r.played_cost = problem_.total_cost(out.played);
    r.regret = r.played_cost - r.c_star;
    r.path_variation = path_variation(comparator.x);
    r.query_count = oracle_.queries();

    const auto& c = problem_.constants();
    Theorem1Params p;
    p.mu = c.mu;
    p.beta = c.beta;
    p.lipschitz = c.lipschitz;
    p.diameter = c.diameter;
    p.memory = h_;
    p.dim = d_;
    p.horizon = horizon_;
    p.delta = config_.init.delta;
    p.path_variation = r.path_variation;
    p.phi_sum = problem_.phi_sum();
    p.phi_square_sum = problem_.phi_square_sum();
    r.theorem1_bound = theorem1_bound(p);
    if (const auto eps = epsilon_floor(problem_, config_.zo.delta_prime); eps && c.beta * h_ > c.mu)
      r.theorem2_bound = theorem2_bound(c.mu, c.beta, h_, levels_, init_cost - comparator.c_star, *eps);

    budget_.total = budget_.initialization;
    for (auto q : budget_.per_level) budget_.total += q;
    out.budget = budget_;
    out.oracle_queries = oracle_.queries();
    if (out.budget.total != out.oracle_queries)
      throw std::logic_error("query budget does not match the oracle count");
    out.cache_consumed = cache_.consumed();
    out.cache_peak = cache_.peak_size();
    out.book = std::move(book_);
    return out;
  }

 private:
  // Lines 3-7: one initialisation update producing x^0_{r+1}; only the newest entry is moved.
  void initialization_update(long r) {
    if (r + 1 > book_.last_index()) return;
    if (!problem_.in_horizon(r)) {
      book_.iterate(0, r + 1) = problem_.feasible_set().project(book_.iterate(0, r));
      return;
    }
    ActionSequence recent;
    recent.reserve(static_cast<std::size_t>(h_));
    for (long k = r - h_ + 1; k <= r; ++k) recent.push_back(book_.iterate(0, k));
    const Vector u = initialization_direction(config_.init, seed_, r);
    BanditStepResult step = bandit_step(problem_, config_.init, r, recent, u, oracle_);
    budget_.initialization += static_cast<std::uint64_t>(step.queries);
    book_.iterate(0, r + 1) = std::move(step.next);
  }

  const Vector& level_direction(long level, long k) {
    if (!book_.has_direction(level, k)) {
      Rng rng = Rng::derive(seed_, {stream::kLevelDirection, static_cast<std::uint64_t>(level),
                                    static_cast<std::uint64_t>(k)});
      book_.set_direction(level, k, config_.zo.smoothing.sample(rng));
    }
    return book_.direction(level, k);
  }

  // Receives l_k at the perturbed level-j trajectory. Out-of-horizon values are identically 0
  // and never queried.
  void query_level(long level, long k) {
    if (!problem_.in_horizon(k)) return;
    for (long i = std::max(1L, k - h_ + 1); i <= k; ++i) level_direction(level, i);
    const double dp = config_.zo.delta_prime;
    cache_.insert({level, k, Side::Plus}, oracle_.query(k, book_.perturbed_window(level, k, Side::Plus, dp)));
    std::uint64_t n = 1;
    if (config_.level_feedback == Feedback::TwoPoint) {
      cache_.insert({level, k, Side::Minus},
                    oracle_.query(k, book_.perturbed_window(level, k, Side::Minus, dp)));
      ++n;
    }
    budget_.per_level[static_cast<std::size_t>(level)] += n;
  }

  // x^{j+1}_s = Pi(x^j_s - alpha sum_{k=s}^{s+h-1} g_k).
  void refine_block(long j, long s) {
    if (s < 1) return;
    if (s > horizon_) {
      book_.iterate(j + 1, s) = book_.iterate(j, s);
      return;
    }
    const Vector& u = book_.direction(j, s);
    const double dp = config_.zo.delta_prime;
    Vector g = Vector::Zero(d_);
    for (long k = s; k <= std::min<long>(s + h_ - 1, horizon_); ++k) {
      const double plus = cache_.consume({j, k, Side::Plus});
      if (config_.level_feedback == Feedback::TwoPoint)
        g += two_point(plus, cache_.consume({j, k, Side::Minus}), dp, u);
      else
        g += single_point(plus, dp, u);
    }
    book_.iterate(j + 1, s) = problem_.feasible_set().project(book_.iterate(j, s) - alpha_ * g);
  }

  const ProblemInstance& problem_;
  const WindowConfig& config_;
  std::uint64_t seed_;
  int h_;
  int d_;
  long horizon_;
  long levels_;
  double alpha_;
  PredictionOracle oracle_;
  TrajectoryBook book_;
  PredictionCache cache_;
  QueryBudget budget_;
};

}  // namespace

Algorithm1Result run_algorithm1(const ProblemInstance& problem, const WindowConfig& config,
                                std::uint64_t seed, const OfflineSolution* comparator,
                                const Algorithm1Hooks& hooks) {
  config.validate(problem.memory());
  if (config.init.smoothing.dim() != problem.dim() || config.zo.smoothing.dim() != problem.dim())
    throw ParameterError("smoothing dimension does not match the problem");

  Runner runner(problem, config, seed);
  runner.run(hooks);
  if (comparator) return runner.finish(*comparator);
  const OfflineSolution solved = solve_offline(problem);
  return runner.finish(solved);
}

QueryBudget query_budget(const Algorithm1Result& result) { return result.budget; }

void write_run_csv(std::ostream& out, const Algorithm1Result& result) {
  const int d = result.played.empty() ? 1 : static_cast<int>(result.played.front().size());
  out << "t";
  for (int i = 0; i < d; ++i) out << ",x" << i;
  out << ",cost,cumulative_cost\n";
  double cumulative = 0.0;
  for (std::size_t k = 0; k < result.played.size(); ++k) {
    cumulative += result.costs[k];
    out << (k + 1);
    for (int i = 0; i < d; ++i) out << fmt::format(",{:.17g}", result.played[k](i));
    out << fmt::format(",{:.17g},{:.17g}\n", result.costs[k], cumulative);
  }
}

}  // namespace lpoco
