#pragma once

#include <stdexcept>
#include <string>

namespace sepcsc {

/// Argument outside the admissible range of a model (e.g. engine power).
class RangeError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

/// Malformed input data: catalog, config or data files.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent or degenerate physical model.
class ModelError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Iterative procedure failed (Kepler solve, shooting, continuation).
class ConvergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace sepcsc
