#pragma once

#include <stdexcept>
#include <string>

namespace quantboost {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside its mathematical domain (tau, upsilon, lambda...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed, empty or non-finite input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Feature layout of a model and a dataset disagree.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A leaf has H + lambda <= 0, so its optimal weight is undefined.
class DegenerateLeafError : public Error {
 public:
  using Error::Error;
};

}  // namespace quantboost
