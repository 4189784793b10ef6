#pragma once

#include <stdexcept>
#include <string>

namespace lpoco {

/// A caller broke an operation's precondition (wrong window length, index out of range, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid configuration or model parameters (mu > beta, delta <= 0, empty interval, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested quantity does not exist for this object (e.g. kappa of an untruncated family).
class NotApplicable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A solve produced non-finite output.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lpoco
