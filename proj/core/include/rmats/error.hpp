#pragma once

#include <stdexcept>
#include <string>

namespace rmats {

// Runtime failure inside the engine (insufficient history, infeasible
// constraints, numerical breakdown). Maps to CLI exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed user input: price/config/events/scenario files, unknown keys,
// out-of-range values. Maps to CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace rmats
