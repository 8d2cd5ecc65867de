#pragma once

#include <stdexcept>
#include <string>

namespace racelab {

// Error taxonomy used across the library. The C API in racelab.h maps each
// type onto a status code; inside the C++ core they are ordinary exceptions.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operand or argument shapes disagree.
struct DimensionError : Error {
  using Error::Error;
};

// Value outside the mathematical domain of an operation (log of <= 0,
// non-positive stddev, non-binary Bernoulli target).
struct DomainError : Error {
  using Error::Error;
};

// API misuse: violated precondition that is not a shape or value issue.
struct ContractError : Error {
  using Error::Error;
};

// Object is in the wrong state for the call (consumed tape, stepping a
// finished episode).
struct StateError : Error {
  using Error::Error;
};

// Track free space is not a single traversable loop.
struct TopologyError : Error {
  using Error::Error;
};

// A pose or obstacle could not be placed.
struct PlacementError : Error {
  using Error::Error;
};

// Malformed file contents or unknown keys.
struct FormatError : Error {
  using Error::Error;
};

// Lookup at a position with no defined answer (off-track progress query).
struct QueryError : Error {
  using Error::Error;
};

// Numeric parameter outside its accepted range.
struct ParameterError : Error {
  using Error::Error;
};

// Filesystem failures.
struct IoError : Error {
  using Error::Error;
};

}  // namespace racelab
