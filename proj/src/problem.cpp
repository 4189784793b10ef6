#include "lpoco/problem.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include <fmt/format.h>

#include "lpoco/errors.hpp"
#include "lpoco/normal.hpp"

namespace lpoco {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

// ---------------------------------------------------------------------------------------------
// FeasibleSet

FeasibleSet FeasibleSet::unconstrained(int dim) {
  if (dim < 1) throw ParameterError("feasible set dimension must be >= 1");
  FeasibleSet s;
  s.kind_ = Kind::Unconstrained;
  s.dim_ = dim;
  s.diameter_ = kInf;
  s.max_norm_ = kInf;
  return s;
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
  if (lower.size() < 1 || lower.size() != upper.size())
    throw ParameterError("box bounds must be non-empty and of equal dimension");
  if ((lower.array() > upper.array()).any()) throw ParameterError("box lower bound exceeds upper");
  FeasibleSet s;
  s.kind_ = Kind::Box;
  s.dim_ = static_cast<int>(lower.size());
  s.diameter_ = (upper - lower).norm();
  s.max_norm_ = lower.cwiseAbs().cwiseMax(upper.cwiseAbs()).norm();
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

FeasibleSet FeasibleSet::box(int dim, double lower, double upper) {
  return box(Vector::Constant(dim, lower), Vector::Constant(dim, upper));
}

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
  if (center.size() < 1) throw ParameterError("ball centre must be non-empty");
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw ParameterError("ball radius must be >= 0");
  FeasibleSet s;
  s.kind_ = Kind::Ball;
  s.dim_ = static_cast<int>(center.size());
  s.radius_ = radius;
  s.diameter_ = 2.0 * radius;
  s.max_norm_ = center.norm() + radius;
  s.center_ = std::move(center);
  return s;
}

FeasibleSet FeasibleSet::custom(int dim, Projection project, double diameter, double max_norm,
                                Membership contains) {
  if (dim < 1) throw ParameterError("feasible set dimension must be >= 1");
  if (!project) throw ParameterError("custom feasible set needs a projection");
  FeasibleSet s;
  s.kind_ = Kind::Custom;
  s.dim_ = dim;
  s.diameter_ = diameter;
  s.max_norm_ = max_norm;
  s.custom_project_ = std::move(project);
  s.custom_contains_ = std::move(contains);
  return s;
}

bool FeasibleSet::bounded() const { return std::isfinite(diameter_); }

Vector FeasibleSet::project(const Vector& x) const {
  if (x.size() != dim_)
    throw ContractViolation(fmt::format("project: expected dimension {}, got {}", dim_, x.size()));
  switch (kind_) {
    case Kind::Unconstrained:
      return x;
    case Kind::Box:
      return x.cwiseMax(lower_).cwiseMin(upper_);
    case Kind::Ball: {
      const Vector offset = x - center_;
      const double n = offset.norm();
      if (n <= radius_) return x;
      return center_ + (radius_ / n) * offset;
    }
    case Kind::Custom: {
      Vector y = custom_project_(x);
      if (y.size() != dim_) throw ContractViolation("custom projection changed the dimension");
      if (custom_contains_ && !custom_contains_(y))
        throw ContractViolation("custom projection returned a point outside the feasible set");
      return y;
    }
  }
  return x;
}

Vector FeasibleSet::project_blocks(const Vector& stacked) const {
  if (stacked.size() % dim_ != 0)
    throw ContractViolation("project_blocks: length is not a multiple of the dimension");
  if (kind_ == Kind::Unconstrained) return stacked;
  Vector out(stacked.size());
  for (Eigen::Index i = 0; i < stacked.size(); i += dim_)
    out.segment(i, dim_) = project(stacked.segment(i, dim_));
  return out;
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
  if (x.size() != dim_) return false;
  switch (kind_) {
    case Kind::Unconstrained:
      return x.allFinite();
    case Kind::Box:
      return (x.array() >= lower_.array() - tol).all() && (x.array() <= upper_.array() + tol).all();
    case Kind::Ball:
      return (x - center_).norm() <= radius_ + tol;
    case Kind::Custom:
      return custom_contains_ ? custom_contains_(x) : (custom_project_(x) - x).norm() <= tol;
  }
  return false;
}

std::string FeasibleSet::describe() const {
  switch (kind_) {
    case Kind::Unconstrained:
      return "unconstrained";
    case Kind::Box:
      return fmt::format("box[{}..{}]", lower_.minCoeff(), upper_.maxCoeff());
    case Kind::Ball:
      return fmt::format("ball(r={})", radius_);
    case Kind::Custom:
      return "custom";
  }
  return "?";
}

// ---------------------------------------------------------------------------------------------
// Costs

QuadraticMemoryProblem::QuadraticMemoryProblem(int dim, int memory, std::vector<Matrix> a,
                                               std::vector<Vector> b, double mu, double beta,
                                               std::uint64_t seed)
    : dim_(dim), memory_(memory), a_(std::move(a)), b_(std::move(b)), mu_(mu), beta_(beta),
      seed_(seed) {
  if (dim_ < 1 || memory_ < 1) throw ParameterError("quadratic problem needs d >= 1 and h >= 1");
  if (a_.size() != b_.size()) throw ParameterError("A_t and B_t counts differ");
  const Eigen::Index n = static_cast<Eigen::Index>(dim_) * memory_;
  for (std::size_t t = 0; t < a_.size(); ++t) {
    if (a_[t].rows() != n || a_[t].cols() != n || b_[t].size() != n)
      throw ParameterError(fmt::format("A_{} / B_{} have the wrong shape", t + 1, t + 1));
  }
}

double QuadraticMemoryProblem::value(long t, const Vector& window) const {
  const Matrix& a = hessian(t);
  return 0.5 * window.dot(a * window) + linear(t).dot(window);
}

Vector QuadraticMemoryProblem::gradient(long t, const Vector& window) const {
  return hessian(t) * window + linear(t);
}

FunctionCost::FunctionCost(int dim, int memory, long horizon, ValueFn value, GradientFn gradient)
    : dim_(dim), memory_(memory), horizon_(horizon), value_(std::move(value)),
      gradient_(std::move(gradient)) {
  if (dim_ < 1 || memory_ < 1 || horizon_ < 0) throw ParameterError("invalid FunctionCost shape");
  if (!value_) throw ParameterError("FunctionCost needs a value callable");
}

Vector FunctionCost::gradient(long t, const Vector& window) const {
  if (!gradient_) throw ContractViolation("this cost model has no analytic gradient");
  return gradient_(t, window);
}

QuadraticMemoryProblem generate_quadratic(std::uint64_t seed, long horizon, int memory, int dim,
                                          double mu, double beta) {
  if (!(mu > 0.0)) throw ParameterError("generate_quadratic: mu must be > 0");
  if (mu > beta) throw ParameterError("generate_quadratic: mu must not exceed beta");
  if (dim < 1 || memory < 1 || horizon < 0)
    throw ParameterError("generate_quadratic: need d >= 1, h >= 1, T >= 0");

  const Eigen::Index n = static_cast<Eigen::Index>(dim) * memory;
  std::vector<Matrix> a;
  std::vector<Vector> b;
  a.reserve(static_cast<std::size_t>(horizon));
  b.reserve(static_cast<std::size_t>(horizon));
  for (long t = 1; t <= horizon; ++t) {
    Rng rng = Rng::derive(seed, {stream::kProblem, static_cast<std::uint64_t>(t)});
    Matrix at;
    if (mu == beta) {
      at = Matrix::Identity(n, n) * mu;
    } else {
      Matrix g(n, n);
      for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < n; ++r) g(r, c) = normal_quantile(rng.uniform_open());
      Eigen::HouseholderQR<Matrix> qr(g);
      Matrix q = qr.householderQ();
      const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (Eigen::Index i = 0; i < n; ++i)
        if (r(i, i) < 0.0) q.col(i) = -q.col(i);
      Vector lambda(n);
      for (Eigen::Index i = 0; i < n; ++i) lambda(i) = rng.uniform(mu, beta);
      at = q * lambda.asDiagonal() * q.transpose();
      at = 0.5 * (at + at.transpose()).eval();
    }
    Vector bt(n);
    for (Eigen::Index i = 0; i < n; ++i) bt(i) = rng.uniform(-1.0, 1.0);
    a.push_back(std::move(at));
    b.push_back(std::move(bt));
  }
  return QuadraticMemoryProblem(dim, memory, std::move(a), std::move(b), mu, beta, seed);
}

// ---------------------------------------------------------------------------------------------
// ProblemInstance

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Zero:
      return "zero";
    case NoiseKind::Offset:
      return "offset";
    case NoiseKind::Uniform:
      return "uniform";
  }
  return "?";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "zero") return NoiseKind::Zero;
  if (name == "offset") return NoiseKind::Offset;
  if (name == "uniform") return NoiseKind::Uniform;
  throw ParameterError("unknown noise model '" + name + "'");
}

ProblemInstance::ProblemInstance(std::shared_ptr<const CostModel> costs, Vector x_bar0,
                                 FeasibleSet set, NoiseModel noise, ProblemConstants constants)
    : costs_(std::move(costs)), x_bar0_(std::move(x_bar0)), set_(std::move(set)),
      noise_(std::move(noise)), constants_(constants) {
  if (!costs_) throw ParameterError("problem instance needs a cost model");
  if (x_bar0_.size() != costs_->dim()) throw ParameterError("x_bar0 has the wrong dimension");
  if (set_.dim() != costs_->dim()) throw ParameterError("feasible set has the wrong dimension");
  if (!set_.contains(x_bar0_, 1e-12)) throw ParameterError("x_bar0 is not feasible");
  if (!noise_.phi.empty() && static_cast<long>(noise_.phi.size()) != costs_->horizon())
    throw ParameterError("phi schedule must have one entry per step");
  for (double p : noise_.phi)
    if (!(p >= 0.0)) throw ParameterError("phi_t must be >= 0");
  if (!(constants_.mu > 0.0) || constants_.mu > constants_.beta)
    throw ParameterError("constants must satisfy 0 < mu <= beta");
}

double ProblemInstance::phi(long t) const {
  if (!in_horizon(t) || noise_.phi.empty()) return 0.0;
  return noise_.phi[static_cast<std::size_t>(t - 1)];
}

double ProblemInstance::phi_sum() const {
  double s = 0.0;
  for (double p : noise_.phi) s += p;
  return s;
}

double ProblemInstance::phi_square_sum() const {
  double s = 0.0;
  for (double p : noise_.phi) s += p * p;
  return s;
}

void ProblemInstance::check_window(const Vector& window) const {
  const Eigen::Index expected = static_cast<Eigen::Index>(dim()) * memory();
  if (window.size() != expected)
    throw ContractViolation(fmt::format("window must hold h = {} actions of dimension {} ({} "
                                        "entries), got {}",
                                        memory(), dim(), expected, window.size()));
}

double ProblemInstance::eval_cost(long t, const Vector& window) const {
  check_window(window);
  if (!in_horizon(t)) return 0.0;
  return costs_->value(t, window);
}

Vector ProblemInstance::cost_gradient(long t, const Vector& window) const {
  check_window(window);
  if (!in_horizon(t)) return Vector::Zero(window.size());
  return costs_->gradient(t, window);
}

Vector ProblemInstance::window(std::span<const Vector> actions, long t) const {
  const int d = dim();
  const int h = memory();
  Vector w(static_cast<Eigen::Index>(d) * h);
  for (int i = 0; i < h; ++i) {
    const long k = t - h + 1 + i;
    if (k <= 0) {
      w.segment(static_cast<Eigen::Index>(i) * d, d) = x_bar0_;
    } else {
      if (k > static_cast<long>(actions.size()))
        throw ContractViolation(fmt::format("window: action x_{} not available", k));
      w.segment(static_cast<Eigen::Index>(i) * d, d) = actions[static_cast<std::size_t>(k - 1)];
    }
  }
  return w;
}

double ProblemInstance::total_cost(std::span<const Vector> actions) const {
  if (static_cast<long>(actions.size()) != horizon())
    throw ContractViolation(
        fmt::format("total_cost: expected {} actions, got {}", horizon(), actions.size()));
  double c = 0.0;
  for (long t = 1; t <= horizon(); ++t) c += costs_->value(t, window(actions, t));
  return c;
}

Vector ProblemInstance::total_gradient(std::span<const Vector> actions) const {
  if (static_cast<long>(actions.size()) != horizon())
    throw ContractViolation("total_gradient: wrong number of actions");
  const int d = dim();
  const int h = memory();
  Vector g = Vector::Zero(static_cast<Eigen::Index>(d) * horizon());
  for (long t = 1; t <= horizon(); ++t) {
    const Vector gt = costs_->gradient(t, window(actions, t));
    for (int i = 0; i < h; ++i) {
      const long k = t - h + 1 + i;
      if (k >= 1) g.segment((k - 1) * d, d) += gt.segment(static_cast<Eigen::Index>(i) * d, d);
    }
  }
  return g;
}

ProblemConstants quadratic_constants(const QuadraticMemoryProblem& problem, const FeasibleSet& set) {
  ProblemConstants c;
  c.mu = problem.mu();
  c.beta = problem.beta();
  c.diameter = set.diameter();
  if (set.bounded()) {
    double max_b = 0.0;
    for (long t = 1; t <= problem.horizon(); ++t) max_b = std::max(max_b, problem.linear(t).norm());
    c.lipschitz = problem.beta() * std::sqrt(static_cast<double>(problem.memory())) *
                      set.max_norm() +
                  max_b;
  } else {
    c.lipschitz = kInf;
  }
  return c;
}

// ---------------------------------------------------------------------------------------------
// Oracle

PredictionOracle::PredictionOracle(const ProblemInstance& problem, std::uint64_t noise_seed)
    : problem_(&problem), noise_rng_(Rng::derive(noise_seed, {stream::kNoise})) {}

double PredictionOracle::query(long t, const Vector& window) {
  const double f = problem_->eval_cost(t, window);
  if (!problem_->in_horizon(t)) return 0.0;
  ++queries_;
  const double phi = problem_->phi(t);
  switch (problem_->noise().kind) {
    case NoiseKind::Zero:
      return f;
    case NoiseKind::Offset:
      return f + phi;
    case NoiseKind::Uniform:
      return f + noise_rng_.uniform(-phi, phi);
  }
  return f;
}

// ---------------------------------------------------------------------------------------------
// Specs

FeasibleSet SetSpec::build(int dim) const {
  switch (kind) {
    case FeasibleSet::Kind::Unconstrained:
      return FeasibleSet::unconstrained(dim);
    case FeasibleSet::Kind::Box:
      return FeasibleSet::box(dim, lower, upper);
    case FeasibleSet::Kind::Ball:
      return FeasibleSet::ball(Vector::Zero(dim), radius);
    case FeasibleSet::Kind::Custom:
      break;
  }
  throw ParameterError("custom feasible sets cannot be built from a spec");
}

ProblemInstance QuadraticSpec::build() const {
  auto problem =
      std::make_shared<QuadraticMemoryProblem>(generate_quadratic(seed, horizon, memory, dim, mu, beta));
  FeasibleSet fs = set.build(dim);
  ProblemConstants constants = quadratic_constants(*problem, fs);
  NoiseModel nm;
  nm.kind = noise;
  nm.phi.assign(static_cast<std::size_t>(horizon), phi);
  return ProblemInstance(std::move(problem), Vector::Constant(dim, x_bar0), std::move(fs),
                         std::move(nm), constants);
}

namespace {

std::string set_kind_name(FeasibleSet::Kind k) {
  switch (k) {
    case FeasibleSet::Kind::Unconstrained:
      return "unconstrained";
    case FeasibleSet::Kind::Box:
      return "box";
    case FeasibleSet::Kind::Ball:
      return "ball";
    case FeasibleSet::Kind::Custom:
      return "custom";
  }
  return "?";
}

FeasibleSet::Kind set_kind_from_name(const std::string& s) {
  if (s == "unconstrained") return FeasibleSet::Kind::Unconstrained;
  if (s == "box") return FeasibleSet::Kind::Box;
  if (s == "ball") return FeasibleSet::Kind::Ball;
  throw ParameterError("unknown feasible set kind '" + s + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const SetSpec& s) {
  j = nlohmann::json{{"kind", set_kind_name(s.kind)}};
  if (s.kind == FeasibleSet::Kind::Box) {
    j["lower"] = s.lower;
    j["upper"] = s.upper;
  } else if (s.kind == FeasibleSet::Kind::Ball) {
    j["radius"] = s.radius;
  }
}

void from_json(const nlohmann::json& j, SetSpec& s) {
  s.kind = set_kind_from_name(j.at("kind").get<std::string>());
  s.lower = j.value("lower", -1.0);
  s.upper = j.value("upper", 1.0);
  s.radius = j.value("radius", 1.0);
}

void to_json(nlohmann::json& j, const QuadraticSpec& s) {
  j = nlohmann::json{{"seed", s.seed},
                     {"T", s.horizon},
                     {"h", s.memory},
                     {"d", s.dim},
                     {"mu", s.mu},
                     {"beta", s.beta},
                     {"x_bar0", s.x_bar0},
                     {"set", s.set},
                     {"noise", to_string(s.noise)},
                     {"phi", s.phi},
                     {"A_eigenvalues", "uniform[mu,beta], Haar-like orthogonal basis via QR"},
                     {"B_entries", "uniform[-1,1]"}};
}

void from_json(const nlohmann::json& j, QuadraticSpec& s) {
  s.seed = j.at("seed").get<std::uint64_t>();
  s.horizon = j.at("T").get<long>();
  s.memory = j.at("h").get<int>();
  s.dim = j.at("d").get<int>();
  s.mu = j.at("mu").get<double>();
  s.beta = j.at("beta").get<double>();
  s.x_bar0 = j.value("x_bar0", 0.5);
  if (j.contains("set")) s.set = j.at("set").get<SetSpec>();
  s.noise = noise_kind_from_string(j.value("noise", std::string("zero")));
  s.phi = j.value("phi", 0.0);
}

}  // namespace lpoco
