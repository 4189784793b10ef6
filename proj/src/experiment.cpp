#include "lpoco/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "lpoco/bandit.hpp"
#include "lpoco/errors.hpp"
#include "lpoco/offline.hpp"
#include "lpoco/predictive.hpp"
#include "lpoco/zeroth_order.hpp"

namespace lpoco {

namespace {

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParameterError(fmt::format("cannot parse {} from '{}'", what, text));
  }
}

long parse_long(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParameterError(fmt::format("cannot parse {} from '{}'", what, text));
  }
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

// ---------------------------------------------------------------------------------------------

DistChoice DistChoice::parse(const std::string& text) {
  DistChoice d;
  if (text == "gaussian") {
    d.family = SmoothingFamily::StandardGaussian;
  } else if (text == "bernoulli") {
    d.family = SmoothingFamily::SphereBernoulli;
  } else if (text == "truncated-paper") {
    d.family = SmoothingFamily::TruncatedGaussianPaper;
  } else if (text == "truncated-interval") {
    d.family = SmoothingFamily::TruncatedGaussianInterval;
  } else if (text.rfind("truncated-interval:", 0) == 0) {
    // The bounds may themselves be negative, so split at the last colon.
    const std::string rest = text.substr(std::string("truncated-interval:").size());
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0)
      throw ParameterError(fmt::format("expected truncated-interval:a:b, got '{}'", text));
    d.family = SmoothingFamily::TruncatedGaussianInterval;
    d.lower = parse_double(rest.substr(0, colon), "interval lower bound");
    d.upper = parse_double(rest.substr(colon + 1), "interval upper bound");
    if (!(d.lower < d.upper)) throw ParameterError("truncation interval needs lower < upper");
  } else {
    throw ParameterError(fmt::format("unknown distribution '{}'", text));
  }
  return d;
}

std::string DistChoice::name() const {
  if (family == SmoothingFamily::TruncatedGaussianInterval)
    return fmt::format("truncated-interval:{}:{}", lower, upper);
  return to_string(family);
}

SmoothingSpec DistChoice::build(int dim, int memory) const {
  switch (family) {
    case SmoothingFamily::TruncatedGaussianPaper:
      return SmoothingSpec::truncated_paper(dim, memory);
    case SmoothingFamily::TruncatedGaussianInterval:
      return SmoothingSpec::truncated_interval(dim, lower, upper);
    case SmoothingFamily::StandardGaussian:
      return SmoothingSpec::standard_gaussian(dim);
    case SmoothingFamily::SphereBernoulli:
      return SmoothingSpec::sphere(dim);
  }
  throw ParameterError("unknown smoothing family");
}

long DistChoice::default_trials() const {
  const bool truncated = family == SmoothingFamily::TruncatedGaussianPaper ||
                         family == SmoothingFamily::TruncatedGaussianInterval;
  return truncated ? 50 : 200;
}

std::vector<long> parse_sweep(const std::string& text) {
  std::vector<long> out;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const long a = parse_long(text.substr(0, colon), "sweep start");
    const long b = parse_long(text.substr(colon + 1), "sweep end");
    if (b < a) throw ParameterError(fmt::format("sweep '{}' is decreasing", text));
    for (long v = a; v <= b; ++v) out.push_back(v);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_long(item, "sweep value"));
  }
  if (out.empty()) throw ParameterError("empty sweep");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1]) throw ParameterError(fmt::format("sweep '{}' is not increasing", text));
  return out;
}

std::string format_sweep(std::span<const long> values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + std::to_string(values[i]);
  return s;
}

// ---------------------------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::defaults_for(const std::string& command) {
  ExperimentConfig c;
  c.command = command;
  if (command == "fig1") {
    c.horizons = parse_sweep("5:20");
  } else if (command == "zo-compare") {
    c.horizons = {10};
    c.beta = 4.0;
    c.delta_prime = 1e-8;
    c.levels = 50;
    c.trials = 20;
    c.set = SetSpec{};
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (trials && *trials < 1) throw ParameterError("trials must be >= 1");
  if (horizons.empty() || windows.empty() || dists.empty() || feedbacks.empty())
    throw ParameterError("sweeps must be non-empty");
  for (std::size_t i = 1; i < horizons.size(); ++i)
    if (horizons[i] <= horizons[i - 1]) throw ParameterError("T sweep must be increasing");
  for (std::size_t i = 1; i < windows.size(); ++i)
    if (windows[i] <= windows[i - 1]) throw ParameterError("W sweep must be increasing");
  if (horizons.front() < 0) throw ParameterError("T must be >= 0");
  if (memory < 1 || dim < 1) throw ParameterError("h and d must be >= 1");
  if (command == "fig2") {
    if (memory < 2) throw ParameterError("fig2 needs h >= 2");
    if (windows.front() < memory - 1)
      throw ParameterError(fmt::format("W = {} is below h - 1 = {}", windows.front(), memory - 1));
  }
  if (workers < 1) throw ParameterError("workers must be >= 1");
  if (!(eta_scale > 0.0) || !(alpha > 0.0) || !(delta > 0.0) || !(delta_prime > 0.0))
    throw ParameterError("step sizes and smoothing radii must be > 0");
  if (levels < 0) throw ParameterError("K must be >= 0");
}

ProblemInstance ExperimentConfig::instance(long trial, long horizon) const {
  QuadraticSpec q;
  q.seed = Rng::derive_seed(base_seed, {stream::kTrial, static_cast<std::uint64_t>(trial), stream::kProblem});
  q.horizon = horizon;
  q.memory = memory;
  q.dim = dim;
  q.mu = mu;
  q.beta = beta;
  q.x_bar0 = x_bar0;
  q.set = set;
  q.noise = noise;
  q.phi = phi;
  return q.build();
}

std::uint64_t ExperimentConfig::algorithm_seed(long trial) const {
  return Rng::derive_seed(base_seed, {stream::kTrial, static_cast<std::uint64_t>(trial), stream::kAlgorithm});
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  std::vector<std::string> dists;
  for (const auto& d : c.dists) dists.push_back(d.name());
  std::vector<std::string> feedbacks;
  for (auto f : c.feedbacks) feedbacks.push_back(to_string(f));
  j = nlohmann::json{{"command", c.command},
                     {"T", c.horizons},
                     {"W", c.windows},
                     {"h", c.memory},
                     {"d", c.dim},
                     {"trials", c.trials ? nlohmann::json(*c.trials) : nlohmann::json("default")},
                     {"seed", c.base_seed},
                     {"dist", dists},
                     {"feedback", feedbacks},
                     {"mu", c.mu},
                     {"beta", c.beta},
                     {"x_bar0", c.x_bar0},
                     {"set", c.set},
                     {"noise", to_string(c.noise)},
                     {"phi", c.phi},
                     {"eta_scale", c.eta_scale},
                     {"alpha", c.alpha},
                     {"delta", c.delta},
                     {"delta_prime", c.delta_prime},
                     {"K", c.levels},
                     {"workers", c.workers},
                     {"out", c.out}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c.command = j.at("command").get<std::string>();
  c.horizons = j.at("T").get<std::vector<long>>();
  c.windows = j.at("W").get<std::vector<long>>();
  c.memory = j.at("h").get<int>();
  c.dim = j.at("d").get<int>();
  if (j.at("trials").is_number())
    c.trials = j.at("trials").get<long>();
  else
    c.trials.reset();
  c.base_seed = j.at("seed").get<std::uint64_t>();
  c.dists.clear();
  for (const auto& d : j.at("dist")) c.dists.push_back(DistChoice::parse(d.get<std::string>()));
  c.feedbacks.clear();
  for (const auto& f : j.at("feedback")) c.feedbacks.push_back(feedback_from_string(f.get<std::string>()));
  c.mu = j.at("mu").get<double>();
  c.beta = j.at("beta").get<double>();
  c.x_bar0 = j.at("x_bar0").get<double>();
  c.set = j.at("set").get<SetSpec>();
  c.noise = noise_kind_from_string(j.at("noise").get<std::string>());
  c.phi = j.at("phi").get<double>();
  c.eta_scale = j.at("eta_scale").get<double>();
  c.alpha = j.at("alpha").get<double>();
  c.delta = j.at("delta").get<double>();
  c.delta_prime = j.at("delta_prime").get<double>();
  c.levels = j.at("K").get<long>();
  c.workers = j.at("workers").get<int>();
  c.out = j.value("out", std::string());
}

// ---------------------------------------------------------------------------------------------

double mean(std::span<const double> values) {
  if (values.empty()) throw ContractViolation("mean of an empty sample");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double quantile_linear(std::vector<double> values, double p) {
  if (values.empty()) throw ContractViolation("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractViolation("fit_line needs >= 2 paired points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ContractViolation("fit_line needs two distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

std::vector<double> parallel_trials(long n, int workers, const std::function<double(long)>& fn) {
  std::vector<double> out(static_cast<std::size_t>(std::max(n, 0L)));
  if (n <= 0) return out;
  const int count = static_cast<int>(std::min<long>(std::max(workers, 1), n));
  if (count == 1) {
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (long i = next++; i < n; i = next++) {
        try {
          out[static_cast<std::size_t>(i)] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

// ---------------------------------------------------------------------------------------------

namespace {

BanditConfig bandit_config(const ExperimentConfig& c, const DistChoice& dist, Feedback feedback) {
  BanditConfig b;
  b.eta.kind = StepSchedule::Kind::ScaledInverseTime;
  b.eta.scale = c.eta_scale;
  b.delta = c.delta;
  b.feedback = feedback;
  b.smoothing = dist.build(c.dim, c.memory);
  return b;
}

WindowConfig window_config(const ExperimentConfig& c, long window, const DistChoice& dist,
                           Feedback feedback) {
  WindowConfig w;
  w.window = window;
  w.init = bandit_config(c, dist, feedback);
  w.zo.alpha = c.alpha;
  w.zo.delta_prime = c.delta_prime;
  w.zo.smoothing = dist.build(c.dim, c.memory);
  w.level_feedback = feedback;
  return w;
}

}  // namespace

std::vector<double> initialization_regrets(const ExperimentConfig& config, long horizon,
                                           const DistChoice& dist, Feedback feedback, long trials) {
  const BanditConfig bc = bandit_config(config, dist, feedback);
  return parallel_trials(trials, config.workers, [&](long i) {
    const ProblemInstance p = config.instance(i, horizon);
    const BanditTrace trace = run_bandit(p, bc, config.algorithm_seed(i));
    return dynamic_regret(trace.iterates, p, solve_offline(p).x);
  });
}

std::vector<double> algorithm_regrets(const ExperimentConfig& config, long horizon, long window,
                                      const DistChoice& dist, Feedback feedback, long trials) {
  const WindowConfig wc = window_config(config, window, dist, feedback);
  return parallel_trials(trials, config.workers, [&](long i) {
    const ProblemInstance p = config.instance(i, horizon);
    const OfflineSolution opt = solve_offline(p);
    return run_algorithm1(p, wc, config.algorithm_seed(i), &opt).report.regret;
  });
}

std::vector<Fig1Row> run_fig1(const ExperimentConfig& config) {
  config.validate();
  std::vector<Fig1Row> rows;
  for (long horizon : config.horizons)
    for (const auto& dist : config.dists)
      for (Feedback fb : config.feedbacks) {
        const long n = config.trials_for(dist);
        const std::vector<double> reg = initialization_regrets(config, horizon, dist, fb, n);
        rows.push_back({horizon, dist.name(), fb, mean(reg), quantile_linear(reg, 0.25),
                        quantile_linear(reg, 0.75), n});
      }
  return rows;
}

std::vector<Fig2Row> run_fig2(const ExperimentConfig& config) {
  config.validate();
  std::vector<Fig2Row> rows;
  const long horizon = config.horizons.back();
  for (long window : config.windows)
    for (const auto& dist : config.dists)
      for (Feedback fb : config.feedbacks) {
        const long n = config.trials_for(dist);
        const std::vector<double> reg = algorithm_regrets(config, horizon, window, dist, fb, n);
        std::vector<double> logs;
        long clamped = 0;
        for (double r : reg) {
          if (std::isfinite(r) && r <= kRegretFloor) {
            ++clamped;
            r = kRegretFloor;
          }
          logs.push_back(std::log(r));
        }
        rows.push_back({window, dist.name(), fb, mean(logs), mean(reg), quantile_linear(logs, 0.25),
                        quantile_linear(logs, 0.75), n, clamped});
      }
  return rows;
}

std::vector<SeriesFit> fit_fig2(const ExperimentConfig& config, std::span<const Fig2Row> rows) {
  std::vector<SeriesFit> fits;
  if (config.windows.size() < 2) return fits;
  for (const auto& dist : config.dists)
    for (Feedback fb : config.feedbacks) {
      std::vector<double> x, y;
      for (const auto& r : rows)
        if (r.dist == dist.name() && r.feedback == fb) {
          x.push_back(static_cast<double>(r.window));
          y.push_back(r.mean_log_reg);
        }
      fits.push_back({dist.name(), fb, fit_line(x, y)});
    }
  return fits;
}

void write_fig1_csv(std::ostream& out, std::span<const Fig1Row> rows) {
  out << "T,dist,feedback,mean_reg,reg_over_sqrtT,reg_over_T,q1,q3,trials\n";
  for (const auto& r : rows) {
    const double t = static_cast<double>(r.horizon);
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", r.horizon, r.dist, to_string(r.feedback),
                       num(r.mean_reg), num(r.mean_reg / std::sqrt(t)), num(r.mean_reg / t), num(r.q1),
                       num(r.q3), r.trials);
  }
}

void write_fig2_csv(std::ostream& out, std::span<const Fig2Row> rows, std::span<const SeriesFit> fits) {
  out << "W,dist,feedback,mean_log_reg,q1,q3,trials,clamped\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{},{},{},{}\n", r.window, r.dist, to_string(r.feedback),
                       num(r.mean_log_reg), num(r.q1), num(r.q3), r.trials, r.clamped);
  out << "\n# slope summary\n";
  out << "dist,feedback,slope,intercept,r2\n";
  for (const auto& f : fits)
    out << fmt::format("{},{},{},{},{}\n", f.dist, to_string(f.feedback), num(f.fit.slope),
                       num(f.fit.intercept), num(f.fit.r2));
}

ZoCompareSummary run_zo_compare(const ExperimentConfig& config) {
  config.validate();
  ZoCompareSummary summary;
  summary.gamma = contraction_gamma(config.mu, config.beta, config.memory);
  const long horizon = config.horizons.front();
  const long n = config.trials.value_or(20);
  const ZoMode modes[] = {ZoMode::Paper, ZoMode::NesterovGaussian};
  for (ZoMode mode : modes) {
    std::vector<ZoCompareRow> rows(static_cast<std::size_t>(n));
    parallel_trials(n, config.workers, [&](long i) {
      const ProblemInstance p = config.instance(i, horizon);
      ZOConfig zc;
      zc.delta_prime = config.delta_prime;
      zc.iterations = config.levels;
      zc.smoothing = config.dists.front().build(config.dim, config.memory);
      zc.mode = mode;
      const Vector x0 = Vector::Constant(static_cast<Eigen::Index>(horizon) * config.dim, config.x_bar0);
      const ZOResult r = zo_minimize(x0, p, zc, config.algorithm_seed(i));
      rows[static_cast<std::size_t>(i)] = {i, to_string(mode), r.diagnostics.mean_contraction(),
                                           r.diagnostics.gap.front(), r.diagnostics.gap.back()};
      return 0.0;
    });
    double s = 0.0;
    for (const auto& r : rows) s += r.mean_contraction;
    (mode == ZoMode::Paper ? summary.paper_mean : summary.nesterov_mean) = s / static_cast<double>(n);
    summary.rows.insert(summary.rows.end(), rows.begin(), rows.end());
  }
  return summary;
}

void write_zo_compare_csv(std::ostream& out, const ZoCompareSummary& summary) {
  out << "trial,mode,mean_contraction,initial_gap,final_gap\n";
  for (const auto& r : summary.rows)
    out << fmt::format("{},{},{},{},{}\n", r.trial, r.mode, num(r.mean_contraction), num(r.initial_gap),
                       num(r.final_gap));
}

nlohmann::json sidecar(const ExperimentConfig& config) {
  nlohmann::json trial_seeds = nlohmann::json::array();
  const long n = config.trials.value_or(config.dists.front().default_trials());
  for (long i = 0; i < std::min<long>(n, 3); ++i)
    trial_seeds.push_back({{"trial", i},
                           {"problem_seed", Rng::derive_seed(config.base_seed, {stream::kTrial, static_cast<std::uint64_t>(i), stream::kProblem})},
                           {"algorithm_seed", config.algorithm_seed(i)}});
  return nlohmann::json{{"config", config},
                        {"library_version", kLibraryVersion},
                        {"quantile_method", "linear interpolation at p(n-1)"},
                        {"log_base", "e"},
                        {"regret_floor", kRegretFloor},
                        {"seed_derivation", "splitmix64(base_seed, trial tag, trial index, stream tag)"},
                        {"first_trial_seeds", trial_seeds}};
}

void run_to_csv(const ExperimentConfig& config, std::ostream& csv) {
  if (config.command == "fig1") {
    write_fig1_csv(csv, run_fig1(config));
  } else if (config.command == "fig2") {
    const auto rows = run_fig2(config);
    write_fig2_csv(csv, rows, fit_fig2(config, rows));
  } else if (config.command == "zo-compare") {
    write_zo_compare_csv(csv, run_zo_compare(config));
  } else {
    throw ParameterError(fmt::format("command '{}' does not produce a sweep CSV", config.command));
  }
}

}  // namespace lpoco
