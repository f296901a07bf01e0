#pragma once

#include <stdexcept>
#include <string>

namespace gne {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs whose sizes do not agree with the model they are applied to.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A modelling assumption required for convergence (strong monotonicity,
/// step-size inequalities, ...) does not hold.
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class GraphError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

class GeneratorError : public Error {
 public:
  using Error::Error;
};

}  // namespace gne
