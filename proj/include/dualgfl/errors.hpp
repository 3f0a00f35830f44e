#pragma once

#include <stdexcept>
#include <string>

namespace dualgfl {

// Base class for every error raised by the core library. The C API maps each
// subclass onto a dgfl_status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configuration value violates an invariant. key() names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Uplink rate is zero (or negative) so the communication cost is undefined.
class InfeasibleLink : public Error {
 public:
  using Error::Error;
};

// No capacity-feasible partition exists (capacity * K < N).
class InfeasibleInstance : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Optimisation objective is unbounded on the search domain.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Instance too large for an enumeration-based oracle or exact solver.
class GuardError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dualgfl
