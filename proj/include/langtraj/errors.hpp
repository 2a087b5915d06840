#pragma once

#include <stdexcept>
#include <string>

namespace langtraj {

/// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record; the message names the source and line.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A bundle or table is missing something it must contain.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class NoBaseline : public Error {
 public:
  using Error::Error;
};

/// A responder produced no tokens from their own speech.
class EmptySpeech : public Error {
 public:
  using Error::Error;
};

class CohortEmpty : public Error {
 public:
  using Error::Error;
};

/// Regression design with no spread in the predictor (e.g. all t identical).
class DegenerateDesign : public Error {
 public:
  using Error::Error;
};

class ConstantColumn : public Error {
 public:
  using Error::Error;
};

class SingularDesign : public Error {
 public:
  using Error::Error;
};

class SampleTooSmall : public Error {
 public:
  using Error::Error;
};

/// Argument outside its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Results and ground truth do not come from the same generator run.
class ProvenanceError : public Error {
 public:
  using Error::Error;
};

}  // namespace langtraj
