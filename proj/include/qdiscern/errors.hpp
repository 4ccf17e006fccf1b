#pragma once

#include <stdexcept>
#include <string>

namespace qdiscern {

// Operand dimensions disagree (state vs operator, POVM vs state, ...).
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A value violates a type invariant (non-Hermitian, non-normalized, ...).
class InvalidValue : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The state does not move under the generator: zero energy variance.
class StationaryState : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Count-vector enumeration would exceed the configured cap.
class InfeasibleEnumeration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qdiscern
