#pragma once

#include <stdexcept>
#include <string>

namespace mltraffic {

/// Argument outside the physical domain of a law (density not in [0,R], speed above V, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration: bad grid, nonpositive tau, malformed scenario.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure during time integration (CFL violation, non-finite density, AV collision).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mltraffic
