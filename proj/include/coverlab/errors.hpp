#pragma once

#include <stdexcept>
#include <string>

namespace coverlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A brute-force or enumeration guardrail would be exceeded.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// A randomized procedure ran out of attempts / iterations.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A checked mathematical invariant failed. Always a bug, never data.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

}  // namespace coverlab
