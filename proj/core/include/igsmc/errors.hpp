#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace igsmc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Evaluation requested outside the support of a density.
class OutOfSupportError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A uniform prior evaluated on its boundary, where its derivatives do not exist.
class BoundaryError : public DomainError {
 public:
  using DomainError::DomainError;
};

class SingularMetricError : public Error {
 public:
  using Error::Error;
};

// A model was asked for derivatives it does not provide.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class DegeneratePopulationError : public Error {
 public:
  explicit DegeneratePopulationError(const std::string& what,
                                     std::size_t population = 0)
      : Error(what), population_(population) {}
  std::size_t population() const { return population_; }

 private:
  std::size_t population_;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double time)
      : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class NumericalDegeneracyError : public Error {
 public:
  NumericalDegeneracyError(const std::string& what, std::size_t time_index)
      : Error(what + " (time index " + std::to_string(time_index) + ")"),
        time_index_(time_index) {}
  std::size_t time_index() const { return time_index_; }

 private:
  std::size_t time_index_;
};

}  // namespace igsmc
