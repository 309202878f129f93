#pragma once

#include <stdexcept>
#include <string>

namespace prism {

// Argument outside the domain of a function (x <= 0 for log_gamma, non-finite
// input, empty request counts).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Matrix or vector dimensions that do not fit together.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Violated modelling assumption, e.g. an affinely dependent vertex matrix.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fewer observations than the requested model order needs.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solver step that has nothing to work with (e.g. every sample batch empty).
class NoUpdateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration, file, or command line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File that cannot be opened, written or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace prism
