#pragma once

#include <stdexcept>
#include <string>

namespace spiked {

// Base for all library failures. Numerical failures map to exit code 3 in the
// command-line tool, configuration failures to exit code 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct NonPositiveDensity : NumericalError {
  using NumericalError::NumericalError;
};
struct QuadratureNonConvergence : NumericalError {
  using NumericalError::NumericalError;
};
struct OptimizerStall : NumericalError {
  using NumericalError::NumericalError;
};
struct SeriesDivergence : NumericalError {
  using NumericalError::NumericalError;
};
struct NonConvergence : NumericalError {
  using NumericalError::NumericalError;
};
struct UnboundedProxy : NumericalError {
  using NumericalError::NumericalError;
};

struct InvalidNoise : ConfigError {
  using ConfigError::ConfigError;
};
struct InvalidPrior : ConfigError {
  using ConfigError::ConfigError;
};
struct InvalidBeta : ConfigError {
  using ConfigError::ConfigError;
};
struct InvalidProbability : ConfigError {
  using ConfigError::ConfigError;
};
struct InvalidGroup : ConfigError {
  using ConfigError::ConfigError;
};
struct TrivialRepresentation : ConfigError {
  using ConfigError::ConfigError;
};
struct SearchSpaceTooLarge : ConfigError {
  using ConfigError::ConfigError;
};
struct DomainError : ConfigError {
  using ConfigError::ConfigError;
};

}  // namespace spiked
