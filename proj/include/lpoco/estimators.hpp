#pragma once

#include <span>

#include "lpoco/problem.hpp"

namespace lpoco {

enum class Feedback { TwoPoint, SinglePoint };

std::string to_string(Feedback feedback);
Feedback feedback_from_string(const std::string& name);

/// Oracle values and direction for one gradient estimate.
struct EstimateInputs {
  double y_plus = 0.0;
  double y_minus = 0.0;  // unused by the single-point estimator
  double delta = 0.0;
  Vector u;
};

/// ((y_plus - y_minus) / (2 delta)) u.
Vector two_point(const EstimateInputs& in);
Vector two_point(double y_plus, double y_minus, double delta, const Vector& u);

/// (y / delta) u.
Vector single_point(double y, double delta, const Vector& u);

/// Sum of the h per-step estimates g_s, ..., g_{s+h-1} that feed block s.
Vector memory_aggregate(std::span<const Vector> estimates, int memory, int dim);

}  // namespace lpoco
