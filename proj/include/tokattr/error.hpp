#pragma once

#include <stdexcept>
#include <string>

namespace tokattr {

// Base for every error raised by the library. Callers that only need a
// message can catch this; the subclasses let tests and the CLI tell
// failure classes apart.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ModelFormatError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatchError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class SpanError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class LeakageError : public Error {
 public:
  using Error::Error;
};

}  // namespace tokattr
