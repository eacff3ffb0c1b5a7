#pragma once

#include <stdexcept>
#include <string>

namespace mpqp {

/// Inconsistent vector or matrix sizes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An offline computation exceeded a configured size limit (m, K or bytes).
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The parameter set contains no feasible region at all.
class EmptySolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed problem/solution file content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Identifier sanitization failure in code generation.
class NameError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mpqp
