#pragma once

#include <stdexcept>
#include <string>

namespace fedpid {

// Base of every error thrown by the library. Callers that only care about
// "something failed" catch this; the subclasses let tests and the CLI tell
// failure kinds apart.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

class NonFiniteWeight : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class MissingHistory : public Error {
 public:
  using Error::Error;
};

class InvalidCost : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// Config rejection carrying the dotted key of the offending field.
class ConfigError : public InvalidConfig {
 public:
  ConfigError(std::string field, const std::string& message)
      : InvalidConfig(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace fedpid
