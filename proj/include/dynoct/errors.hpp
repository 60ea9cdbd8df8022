#pragma once

#include <stdexcept>
#include <string>

namespace dynoct {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid structure configuration (bad K, alpha, depth cap, growth factor).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied data violates a precondition (non-finite coordinate,
/// negative radius, malformed file, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Insert with an id that is already live.
class DuplicateIdError : public InputError {
 public:
  using InputError::InputError;
};

/// Operation referenced an id that is not live.
class NotFoundError : public InputError {
 public:
  using InputError::InputError;
};

/// Operation requires state the object does not have (e.g. classify on an
/// empty classifier).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Two structures that must agree were found out of sync.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Input is numerically degenerate for the requested computation.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace dynoct
