#pragma once

#include <stdexcept>
#include <string>

namespace ccmp {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid model structure or configuration (bad arity, dangling edge,
/// out-of-range parameter).
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& what) : Error(what) {}
};

/// Runtime failure while computing messages or beliefs (improper products,
/// missing marginals, non-convergent correction loops).
class InferenceError : public Error {
 public:
  explicit InferenceError(const std::string& what) : Error(what) {}
};

}  // namespace ccmp
