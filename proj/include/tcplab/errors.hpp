#pragma once

#include <stdexcept>
#include <string>

namespace tcplab {

/// Bad shapes, out-of-range masks, violated preconditions.
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Non-finite values produced while evaluating a polynomial system.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A size guard (tensor storage, oracle grid, integer range) was exceeded.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed tensor/instance documents.
class LoadError : public std::runtime_error {
 public:
  explicit LoadError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tcplab
