#pragma once

#include <stdexcept>
#include <string>

namespace mmsleep {

// Root of every error thrown by the library. Each subclass maps onto one
// distinct CLI exit code (see tools/mmsleep.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class EmptyCandidateError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class ActionSpaceTooLarge : public Error {
 public:
  using Error::Error;
};

class DiagnosticDisabled : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ConstraintViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace mmsleep
