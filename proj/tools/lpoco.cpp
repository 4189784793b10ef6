// Command-line front end: figure sweeps, single runs and the validation suite.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "lpoco/bandit.hpp"
#include "lpoco/errors.hpp"
#include "lpoco/experiment.hpp"
#include "lpoco/offline.hpp"
#include "lpoco/predictive.hpp"
#include "lpoco/validation.hpp"

using namespace lpoco;

namespace {

struct RawOptions {
  std::string horizons;
  std::string windows;
  long window = 0;
  int memory = 0;
  int dim = 0;
  long trials = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> dists;
  std::vector<std::string> feedbacks;
  double mu = 0, beta = 0, x_bar0 = 0, phi = 0;
  std::string noise;
  std::string set;
  double eta_scale = 0, alpha = 0, delta = 0, delta_prime = 0;
  long levels = 0;
  int workers = 0;
  std::string out;
};

SetSpec parse_set(const std::string& text) {
  SetSpec s;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  // Bounds may be negative, so split on ':' only.
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw ParameterError("empty set description");
  if (parts[0] == "unconstrained" && parts.size() == 1) {
    s.kind = FeasibleSet::Kind::Unconstrained;
  } else if (parts[0] == "box" && parts.size() == 3) {
    s.kind = FeasibleSet::Kind::Box;
    s.lower = std::stod(parts[1]);
    s.upper = std::stod(parts[2]);
  } else if (parts[0] == "ball" && parts.size() == 2) {
    s.kind = FeasibleSet::Kind::Ball;
    s.radius = std::stod(parts[1]);
  } else {
    throw ParameterError(fmt::format("unknown set '{}' (use unconstrained, box:a:b or ball:r)", text));
  }
  return s;
}

class Options {
 public:
  explicit Options(CLI::App* app, std::string command) : app_(app), command_(std::move(command)) {}

  void add_all() {
    add("--T", raw_.horizons, "horizon or horizon sweep (a:b or a,b,c)");
    add("--W-sweep", raw_.windows, "prediction-window sweep (a:b or a,b,c)");
    add("--W", raw_.window, "prediction window for a single run");
    add("--h", raw_.memory, "memory length");
    add("--d", raw_.dim, "action dimension");
    add("--trials", raw_.trials, "trials per configuration cell");
    add("--seed", raw_.seed, "base seed");
    add("--dist", raw_.dists, "gaussian | bernoulli | truncated-paper | truncated-interval:a:b (repeatable)");
    add("--feedback", raw_.feedbacks, "one | two (repeatable)");
    add("--mu", raw_.mu, "strong-convexity lower bound of the generator");
    add("--beta", raw_.beta, "smoothness upper bound of the generator");
    add("--x-bar0", raw_.x_bar0, "initial and history action (all coordinates)");
    add("--set", raw_.set, "unconstrained | box:a:b | ball:r");
    add("--noise", raw_.noise, "prediction error model: zero | offset | uniform");
    add("--phi", raw_.phi, "prediction error level phi_t (constant)");
    add("--eta-scale", raw_.eta_scale, "eta_t = scale / t");
    add("--alpha", raw_.alpha, "zeroth-order step size");
    add("--delta", raw_.delta, "initialisation smoothing radius");
    add("--delta-prime", raw_.delta_prime, "zeroth-order smoothing radius");
    add("--K", raw_.levels, "zeroth-order iterations (zo-compare)");
    add("--workers", raw_.workers, "worker threads for the trials");
    add("--out", raw_.out, "output CSV path (stdout when absent)");
  }

  ExperimentConfig build() const {
    ExperimentConfig c = ExperimentConfig::defaults_for(command_);
    if (given("--T")) c.horizons = parse_sweep(raw_.horizons);
    if (given("--W-sweep")) c.windows = parse_sweep(raw_.windows);
    if (given("--W")) c.windows = {raw_.window};
    if (given("--h")) c.memory = raw_.memory;
    if (given("--d")) c.dim = raw_.dim;
    if (given("--trials")) c.trials = raw_.trials;
    if (given("--seed")) c.base_seed = raw_.seed;
    if (given("--dist")) {
      c.dists.clear();
      for (const auto& d : raw_.dists) c.dists.push_back(DistChoice::parse(d));
    }
    if (given("--feedback")) {
      c.feedbacks.clear();
      for (const auto& f : raw_.feedbacks) c.feedbacks.push_back(feedback_from_string(f));
    }
    if (given("--mu")) c.mu = raw_.mu;
    if (given("--beta")) c.beta = raw_.beta;
    if (given("--x-bar0")) c.x_bar0 = raw_.x_bar0;
    if (given("--set")) c.set = parse_set(raw_.set);
    if (given("--noise")) c.noise = noise_kind_from_string(raw_.noise);
    if (given("--phi")) c.phi = raw_.phi;
    if (given("--eta-scale")) c.eta_scale = raw_.eta_scale;
    if (given("--alpha")) c.alpha = raw_.alpha;
    if (given("--delta")) c.delta = raw_.delta;
    if (given("--delta-prime")) c.delta_prime = raw_.delta_prime;
    if (given("--K")) c.levels = raw_.levels;
    if (given("--workers")) c.workers = raw_.workers;
    if (given("--out")) c.out = raw_.out;
    c.validate();
    return c;
  }

 private:
  template <typename T>
  void add(const std::string& name, T& target, const std::string& help) {
    options_[name] = app_->add_option(name, target, help);
  }
  bool given(const std::string& name) const { return options_.at(name)->count() > 0; }

  CLI::App* app_;
  std::string command_;
  RawOptions raw_;
  std::map<std::string, CLI::Option*> options_;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  f << text;
  if (!f) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

void emit(const ExperimentConfig& c, const std::string& csv, const nlohmann::json& meta) {
  write_text(c.out, csv);
  if (!c.out.empty()) write_text(c.out + ".json", meta.dump(2) + "\n");
}

int sweep_command(const ExperimentConfig& c) {
  std::ostringstream csv;
  run_to_csv(c, csv);
  emit(c, csv.str(), sidecar(c));
  return 0;
}

int bandit_command(const ExperimentConfig& c) {
  const long horizon = c.horizons.back();
  const ProblemInstance p = c.instance(0, horizon);
  BanditConfig b;
  b.eta.kind = StepSchedule::Kind::ScaledInverseTime;
  b.eta.scale = c.eta_scale;
  b.delta = c.delta;
  b.feedback = c.feedbacks.front();
  b.smoothing = c.dists.front().build(c.dim, c.memory);
  const BanditTrace trace = run_bandit(p, b, c.algorithm_seed(0));
  std::ostringstream csv;
  write_bandit_csv(csv, trace);
  nlohmann::json meta = sidecar(c);
  meta["bandit"] = b;
  meta["queries"] = trace.total_queries;
  meta["regret"] = dynamic_regret(trace.iterates, p, solve_offline(p).x);
  emit(c, csv.str(), meta);
  return 0;
}

int run_command(const ExperimentConfig& c) {
  const long horizon = c.horizons.back();
  const ProblemInstance p = c.instance(0, horizon);
  WindowConfig w;
  w.window = c.windows.back();
  w.init.eta.kind = StepSchedule::Kind::ScaledInverseTime;
  w.init.eta.scale = c.eta_scale;
  w.init.delta = c.delta;
  w.init.feedback = c.feedbacks.front();
  w.init.smoothing = c.dists.front().build(c.dim, c.memory);
  w.zo.alpha = c.alpha;
  w.zo.delta_prime = c.delta_prime;
  w.zo.smoothing = w.init.smoothing;
  w.level_feedback = c.feedbacks.front();
  const std::uint64_t seed = c.algorithm_seed(0);
  const Algorithm1Result r = run_algorithm1(p, w, seed);
  std::ostringstream csv;
  write_run_csv(csv, r);
  nlohmann::json meta = sidecar(c);
  meta["window_config"] = w;
  meta["K"] = r.levels;
  meta["algorithm_seed"] = seed;
  meta["queries"] = {{"initialization", r.budget.initialization},
                     {"per_level", r.budget.per_level},
                     {"total", r.budget.total}};
  meta["report"] = r.report;
  meta["initialization_regret"] = r.initialization_regret;
  emit(c, csv.str(), meta);
  if (!c.out.empty())
    std::cerr << fmt::format("regret {:.6g} (initialisation {:.6g}), K = {}, {} queries\n", r.report.regret,
                             r.initialization_regret, r.levels, r.budget.total);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online convex optimisation with memory and limited predictions"};
  app.require_subcommand(1);

  std::vector<std::pair<CLI::App*, std::unique_ptr<Options>>> commands;
  for (const char* name : {"fig1", "fig2", "zo-compare", "bandit", "run"}) {
    const std::map<std::string, std::string> help{
        {"fig1", "initialisation-phase regret versus T"},
        {"fig2", "log regret of the windowed algorithm versus W"},
        {"zo-compare", "contraction of the zeroth-order phase against the Gaussian baseline"},
        {"bandit", "one initialisation-phase run (trial 0)"},
        {"run", "one windowed-algorithm run (trial 0, largest W)"}};
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    // "--h" names the memory length, so help is reachable only as --help.
    sub->set_help_flag("--help", "print this help message and exit");
    auto opts = std::make_unique<Options>(sub, name);
    opts->add_all();
    commands.emplace_back(sub, std::move(opts));
  }

  CLI::App* validate = app.add_subcommand("validate", "fast property checks of every module");
  std::uint64_t validate_seed = 7;
  double corrupt_kappa = 0.0;
  validate->add_option("--seed", validate_seed, "seed of the property checks");
  auto* corrupt = validate->add_option("--corrupt-kappa", corrupt_kappa,
                                       "override the truncated-paper normalisation constant");

  CLI::App* rerun = app.add_subcommand("rerun", "regenerate a CSV from its sidecar JSON");
  std::string sidecar_path;
  std::string rerun_out;
  int rerun_workers = 0;
  rerun->add_option("sidecar", sidecar_path, "sidecar JSON written next to a CSV")->required();
  auto* rerun_out_opt = rerun->add_option("--out", rerun_out, "output CSV path (default: the recorded one)");
  auto* rerun_workers_opt = rerun->add_option("--workers", rerun_workers, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      ValidationOptions vo;
      vo.seed = validate_seed;
      if (corrupt->count() > 0) vo.kappa_override = corrupt_kappa;
      return print_validation(std::cout, run_validation(vo)) ? 0 : 1;
    }
    if (rerun->parsed()) {
      std::ifstream f(sidecar_path);
      if (!f) throw std::runtime_error(fmt::format("cannot read '{}'", sidecar_path));
      const nlohmann::json j = nlohmann::json::parse(f);
      ExperimentConfig c = j.at("config").get<ExperimentConfig>();
      if (rerun_out_opt->count() > 0) c.out = rerun_out;
      if (rerun_workers_opt->count() > 0) c.workers = rerun_workers;
      c.validate();
      return sweep_command(c);
    }
    for (auto& [sub, opts] : commands) {
      if (!sub->parsed()) continue;
      const ExperimentConfig c = opts->build();
      const std::string name = sub->get_name();
      if (name == "bandit") return bandit_command(c);
      if (name == "run") return run_command(c);
      return sweep_command(c);
    }
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
