#pragma once

#include <stdexcept>
#include <string>

namespace cantor {

/// Bad construction parameter (p outside (0,1], s outside (0,d), invalid digit set, ...).
class InvalidParameter : public std::invalid_argument {
 public:
  explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

/// A level beyond the generated depth (or beyond what the packed keys can hold).
class LevelOutOfRange : public std::out_of_range {
 public:
  explicit LevelOutOfRange(const std::string& what) : std::out_of_range(what) {}
};

/// Point outside [0,1)^d, exponent outside its admissible range, ...
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Operation not available for this order/dimension/base combination.
class Unsupported : public std::invalid_argument {
 public:
  explicit Unsupported(const std::string& what) : std::invalid_argument(what) {}
};

/// Not enough levels / frequencies / radii / trials for an estimator.
class InsufficientData : public std::runtime_error {
 public:
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cantor
