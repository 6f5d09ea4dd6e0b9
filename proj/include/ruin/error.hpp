#pragma once

#include <stdexcept>
#include <string>

namespace ruin {

/// Invalid parameters, violated preconditions or malformed configuration.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a trustworthy result
/// (divergent integral, no ruin observed, failed fit).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ruin
