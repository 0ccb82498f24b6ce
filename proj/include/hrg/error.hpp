#pragma once

#include <stdexcept>
#include <string>

namespace hrg {

// Every failure raised by the library derives from Error; the CLI maps the
// category onto its exit code.
class Error : public std::runtime_error {
 public:
  enum class Kind { kConfig, kDomain, kPrecision, kNumeric, kCheck };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Invalid parameters, incompatible primes, malformed text input.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Kind::kConfig, what) {}
};

// Arguments outside an operation's domain (point outside window, coincident
// points, overlapping balls, non-integrable kernels, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(Kind::kDomain, what) {}
};

// The p-adic digit window is too short for the requested operation.
class PrecisionError : public Error {
 public:
  explicit PrecisionError(const std::string& what) : Error(Kind::kPrecision, what) {}
};

// Non-finite values, failed convergence, quadrature breakdown.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Kind::kNumeric, what) {}
};

// Mass of a Boltzmann factor escapes the field grid; callers may enlarge it.
class GridOverflowError : public NumericError {
 public:
  explicit GridOverflowError(const std::string& what) : NumericError(what) {}
};

// A property check (identity, positivity, tolerance) did not hold.
class CheckFailure : public Error {
 public:
  explicit CheckFailure(const std::string& what) : Error(Kind::kCheck, what) {}
};

}  // namespace hrg
