#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lpoco {

struct ValidationOptions {
  std::uint64_t seed = 7;
  /// Replaces the truncated-paper normalisation constant; a negative control for the moment check.
  std::optional<double> kappa_override;
};

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast subset of the property suites: sampler bounds and moments, estimator exactness on
/// quadratics, projection non-expansiveness, offline optimality certificate, zeroth-order
/// fixed point.
std::vector<PropertyResult> run_validation(const ValidationOptions& options);

/// One "PASS name: detail" / "FAIL name: detail" line per property; returns true if all passed.
bool print_validation(std::ostream& out, const std::vector<PropertyResult>& results);

}  // namespace lpoco
