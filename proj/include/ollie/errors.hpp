#pragma once

#include <stdexcept>
#include <string>

namespace ollie {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Raised when a tail strike can never happen for the given geometry.
class NoKickoffGeometryError : public Error {
 public:
  using Error::Error;
};

class ScheduleError : public Error {
 public:
  using Error::Error;
};

class BuildError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

/// A constraint or objective callback produced a NaN or an infinity.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, int constraint_id)
      : Error(what), constraint_id_(constraint_id) {}
  int constraint_id() const { return constraint_id_; }

 private:
  int constraint_id_;
};

class StructuralError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ollie
