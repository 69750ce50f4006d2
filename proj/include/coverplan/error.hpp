#pragma once

#include <stdexcept>
#include <string>

namespace coverplan {

/// Base for every error the library raises. Each subclass maps to one CLI exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Scene file could not be parsed or failed validation.
class SceneError : public Error {
 public:
  using Error::Error;
};

/// Grid generation produced no points.
class EmptyGridError : public Error {
 public:
  using Error::Error;
};

/// Requested coverage exceeds what the candidate set can achieve.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Instance exceeds the brute-force enumeration guard.
class InstanceTooLargeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace coverplan
