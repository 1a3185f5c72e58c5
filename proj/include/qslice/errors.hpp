#pragma once

#include <stdexcept>
#include <string>

namespace qslice {

/// Bad parameters, malformed catalogs or configs.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation or table would exceed its configured size bound.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was invoked in a state that does not allow it.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The scenario lies outside the envelope in which a closed form is valid.
class AssumptionViolation : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

}  // namespace qslice
