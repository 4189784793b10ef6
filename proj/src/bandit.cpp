#include "lpoco/bandit.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "lpoco/errors.hpp"

namespace lpoco {

double StepSchedule::at(long t, double mu) const {
  const double tt = static_cast<double>(t);
  switch (kind) {
    case Kind::InverseTimeMu:
      return 1.0 / (tt * mu);
    case Kind::ScaledInverseTime:
      return scale / tt;
  }
  return 0.0;
}

std::string StepSchedule::describe() const {
  return kind == Kind::InverseTimeMu ? "1/(t*mu)" : fmt::format("{}/t", scale);
}

BanditConfig BanditConfig::theorem1(const ProblemInstance& problem, SmoothingSpec smoothing) {
  BanditConfig c;
  c.eta.kind = StepSchedule::Kind::InverseTimeMu;
  c.delta = 1.0 / std::sqrt(static_cast<double>(std::max<long>(problem.horizon(), 1)));
  c.smoothing = std::move(smoothing);
  return c;
}

BanditConfig BanditConfig::experiment_preset(int dim) {
  BanditConfig c;
  c.eta.kind = StepSchedule::Kind::ScaledInverseTime;
  c.eta.scale = 0.2;
  c.delta = 0.2;
  c.smoothing = SmoothingSpec::truncated_interval(dim, -2.0, 2.0);
  return c;
}

void BanditConfig::validate() const {
  if (!(delta > 0.0)) throw ParameterError("bandit delta must be > 0");
  if (eta.kind == StepSchedule::Kind::ScaledInverseTime && !(eta.scale > 0.0))
    throw ParameterError("step-size scale must be > 0");
}

void to_json(nlohmann::json& j, const BanditConfig& c) {
  j = nlohmann::json{{"eta", c.eta.describe()},
                     {"delta", c.delta},
                     {"feedback", to_string(c.feedback)},
                     {"smoothing", c.smoothing},
                     {"directions", c.directions == DirectionMode::PerStep ? "per_step" : "fixed_once"}};
}

BanditStepResult bandit_step(const ProblemInstance& problem, const BanditConfig& config, long t,
                             std::span<const Vector> recent, const Vector& u,
                             PredictionOracle& oracle) {
  const int h = problem.memory();
  const int d = problem.dim();
  if (static_cast<int>(recent.size()) != h)
    throw ContractViolation(fmt::format("bandit_step: need the last {} actions", h));
  const Vector& x_t = recent.back();

  BanditStepResult out;
  if (!problem.in_horizon(t)) {
    out.gradient = Vector::Zero(d);
    out.next = problem.feasible_set().project(x_t);
    return out;
  }

  Vector window(static_cast<Eigen::Index>(d) * h);
  for (int i = 0; i < h; ++i) window.segment(static_cast<Eigen::Index>(i) * d, d) = recent[static_cast<std::size_t>(i)];
  const Eigen::Index last = static_cast<Eigen::Index>(h - 1) * d;

  Vector plus = window;
  plus.segment(last, d) += config.delta * u;
  const double y_plus = oracle.query(t, plus);
  out.records.push_back({t, plus, y_plus});
  ++out.queries;

  if (config.feedback == Feedback::TwoPoint) {
    Vector minus = window;
    minus.segment(last, d) -= config.delta * u;
    const double y_minus = oracle.query(t, minus);
    out.records.push_back({t, std::move(minus), y_minus});
    ++out.queries;
    out.gradient = two_point(y_plus, y_minus, config.delta, u);
  } else {
    out.gradient = single_point(y_plus, config.delta, u);
  }

  const double eta = config.eta.at(t, problem.constants().mu);
  out.next = problem.feasible_set().project(x_t - eta * out.gradient);
  return out;
}

Vector initialization_direction(const BanditConfig& config, std::uint64_t seed, long r) {
  const long key = config.directions == DirectionMode::PerStep ? r : 0;
  Rng rng = Rng::derive(seed, {stream::kInitDirection, static_cast<std::uint64_t>(key)});
  return config.smoothing.sample(rng);
}

BanditTrace run_bandit(const ProblemInstance& problem, const BanditConfig& config, std::uint64_t seed) {
  config.validate();
  if (config.smoothing.dim() != problem.dim())
    throw ParameterError("smoothing dimension does not match the problem");
  const long horizon = problem.horizon();
  const int h = problem.memory();

  PredictionOracle oracle(problem, seed);
  BanditTrace trace;
  trace.iterates.reserve(static_cast<std::size_t>(horizon));

  // history[k + h - 1] holds x_k for k = 2-h, ..., T+1.
  ActionSequence history(static_cast<std::size_t>(h - 1), problem.x_bar0());
  Vector x = problem.x_bar0();
  double cumulative = 0.0;
  for (long t = 1; t <= horizon; ++t) {
    history.push_back(x);
    trace.iterates.push_back(x);
    const std::span<const Vector> recent(history.data() + (history.size() - static_cast<std::size_t>(h)),
                                         static_cast<std::size_t>(h));

    const Vector u = initialization_direction(config, seed, t);
    BanditStepResult step = bandit_step(problem, config, t, recent, u, oracle);

    const double cost = problem.eval_cost(t, problem.window(trace.iterates, t));
    cumulative += cost;
    trace.costs.push_back(cost);
    trace.gradients.push_back(step.gradient);
    for (QueryRecord& r : step.records) trace.query_log.push_back(std::move(r));
    trace.queries_so_far.push_back(oracle.queries());
    x = std::move(step.next);
  }
  trace.total_queries = oracle.queries();
  return trace;
}

void write_bandit_csv(std::ostream& out, const BanditTrace& trace) {
  const int d = trace.iterates.empty() ? 1 : static_cast<int>(trace.iterates.front().size());
  out << "t";
  for (int i = 0; i < d; ++i) out << ",x" << i;
  out << ",cost,cumulative_cost,queries_so_far\n";
  double cumulative = 0.0;
  for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
    cumulative += trace.costs[k];
    out << (k + 1);
    for (int i = 0; i < d; ++i) out << fmt::format(",{:.17g}", trace.iterates[k](i));
    out << fmt::format(",{:.17g},{:.17g},{}\n", trace.costs[k], cumulative, trace.queries_so_far[k]);
  }
}

}  // namespace lpoco
