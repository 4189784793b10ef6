#include "lpoco/estimators.hpp"

#include <cmath>

#include <fmt/format.h>

#include "lpoco/errors.hpp"

namespace lpoco {

std::string to_string(Feedback feedback) {
  return feedback == Feedback::TwoPoint ? "two" : "one";
}

Feedback feedback_from_string(const std::string& name) {
  if (name == "two" || name == "two-point" || name == "two_point") return Feedback::TwoPoint;
  if (name == "one" || name == "single" || name == "single-point" || name == "single_point")
    return Feedback::SinglePoint;
  throw ParameterError("unknown feedback mode '" + name + "'");
}

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw ParameterError(fmt::format("smoothing radius must be > 0, got {}", delta));
}

}  // namespace

Vector two_point(double y_plus, double y_minus, double delta, const Vector& u) {
  check_delta(delta);
  return ((y_plus - y_minus) / (2.0 * delta)) * u;
}

Vector two_point(const EstimateInputs& in) { return two_point(in.y_plus, in.y_minus, in.delta, in.u); }

Vector single_point(double y, double delta, const Vector& u) {
  check_delta(delta);
  return (y / delta) * u;
}

Vector memory_aggregate(std::span<const Vector> estimates, int memory, int dim) {
  if (static_cast<int>(estimates.size()) != memory)
    throw ContractViolation(
        fmt::format("memory_aggregate: expected {} estimates, got {}", memory, estimates.size()));
  Vector sum = Vector::Zero(dim);
  for (const Vector& g : estimates) {
    if (g.size() != dim) throw ContractViolation("memory_aggregate: estimate has wrong dimension");
    sum += g;
  }
  return sum;
}

}  // namespace lpoco
