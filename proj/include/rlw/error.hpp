#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rlw {

/// Caller violated a documented precondition (bad sizes, empty inputs, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A jet or tape primitive produced a non-finite value.
class PropagationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OptimizerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Query outside the region where a solution field is defined.
class RegionError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedVersionError : public LoadError {
 public:
  using LoadError::LoadError;
};

/// The finite-difference oracle detected blow-up.
class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace rlw
